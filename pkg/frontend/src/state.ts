/**
 * Viewer state with pure update functions (reducer style): selection,
 * pinning, animation, live sampling parameters.
 *
 * Pin contract: hover never changes the selection while pinned; pinning
 * requires a selection; animation pins its own selection as it walks.
 */

import { SamplingParamsDict } from "./wire";

export type ColorRole = "primary" | "match-green" | "match-indigo";

export interface Selection {
  trajectoryId: string;
  poseIndex: number;
}

export interface LoadedTrajectory {
  id: string;
  colorRole: ColorRole;
}

export interface ViewerState {
  loadedTrajectories: LoadedTrajectory[];
  selected: Selection | null;
  pinned: boolean;
  animating: boolean;
  activePanels: string[];
  liveSamplingParams: SamplingParamsDict;
  zTimeRate: number;
}

export function initialState(): ViewerState {
  return {
    loadedTrajectories: [],
    selected: null,
    pinned: false,
    animating: false,
    activePanels: ["info", "image"],
    liveSamplingParams: { mode: "uniform", tauD: 12, tauTheta: 15 },
    zTimeRate: 0,
  };
}

export function loadTrajectory(
  state: ViewerState,
  id: string,
  colorRole: ColorRole
): ViewerState {
  if (state.loadedTrajectories.some((t) => t.id === id)) {
    return state;
  }
  return {
    ...state,
    loadedTrajectories: [...state.loadedTrajectories, { id, colorRole }],
  };
}

/** Mouse-hover selects, unless a pose is pinned. */
export function hoverPose(state: ViewerState, selection: Selection): ViewerState {
  if (state.pinned) {
    return state;
  }
  return { ...state, selected: selection };
}

/** Right-click pins/unpins the current selection. No selection, no pin. */
export function togglePin(state: ViewerState): ViewerState {
  if (state.selected === null) {
    return state;
  }
  return { ...state, pinned: !state.pinned };
}

export function setSamplingParams(
  state: ViewerState,
  params: SamplingParamsDict
): ViewerState {
  return { ...state, liveSamplingParams: params };
}

export function setZTimeRate(state: ViewerState, rate: number): ViewerState {
  return { ...state, zTimeRate: Math.max(0, rate) };
}

export interface CameraState {
  target: [number, number, number];
  position: [number, number, number];
}

/**
 * Everything needed to reproduce the session, shaped for the settings
 * bundle's viewState subtree. applyViewState(initialState(), snapshot)
 * restores it.
 */
export function viewStateSnapshot(state: ViewerState, camera: CameraState): object {
  return {
    loadedTrajectories: state.loadedTrajectories.map((t) => ({ ...t })),
    selected: state.selected === null ? null : { ...state.selected },
    pinned: state.pinned,
    activePanels: [...state.activePanels],
    zTimeRate: state.zTimeRate,
    camera: { target: [...camera.target], position: [...camera.position] },
  };
}

export function applyViewState(
  state: ViewerState,
  snapshot: ReturnType<typeof viewStateSnapshot>
): { state: ViewerState; camera: CameraState } {
  const doc = snapshot as {
    loadedTrajectories: LoadedTrajectory[];
    selected: Selection | null;
    pinned: boolean;
    activePanels: string[];
    zTimeRate: number;
    camera: CameraState;
  };
  return {
    state: {
      ...state,
      loadedTrajectories: doc.loadedTrajectories.map((t) => ({ ...t })),
      selected: doc.selected === null ? null : { ...doc.selected },
      pinned: doc.pinned && doc.selected !== null,
      activePanels: [...doc.activePanels],
      zTimeRate: doc.zTimeRate,
    },
    camera: doc.camera,
  };
}

/** Animation selects poses in order with the selection pinned throughout. */
export function startAnimation(state: ViewerState, trajectoryId: string): ViewerState {
  return {
    ...state,
    animating: true,
    pinned: true,
    selected: { trajectoryId, poseIndex: 0 },
  };
}

export function animationStep(state: ViewerState): ViewerState {
  if (!state.animating || state.selected === null) {
    return state;
  }
  return {
    ...state,
    selected: { ...state.selected, poseIndex: state.selected.poseIndex + 1 },
  };
}

/** Stop keeps the current pose selected and pinned. */
export function stopAnimation(state: ViewerState): ViewerState {
  return { ...state, animating: false };
}
