/**
 * Browser entry point: wires the scene, panels, sliders and overlays to the
 * trajectory server. All algorithmic pieces live in the imported modules;
 * this file is DOM and renderer glue.
 */

import * as THREE from "three";
import { MapControls } from "three/examples/jsm/controls/MapControls.js";
import { OrbitControls } from "three/examples/jsm/controls/OrbitControls.js";

import {
  computeSampleRaw,
  getPointCloud,
  getSettings,
  getTrajectory,
  listDatasets,
  putSettings,
} from "./api";
import { AnimationController } from "./animate";
import { GROUND_TRUTH_COLOR, TOP_MATCH_COLOR } from "./colors";
import {
  comparisonForRow,
  htmapLoopSegments,
  htmapPoseColors,
  HtmapOverlayDoc,
  RetrievalEpochDoc,
  topkTable,
} from "./overlays";
import { buildPanelModel, tileUrl } from "./panels";
import { buildSampleExport, recomputeSampling } from "./sampling";
import {
  applyZTimeRate,
  buildLoopSegments,
  buildPointCloud,
  buildTrajectoryGroup,
  restyleMarkers,
  SELECTION_COLOR,
} from "./scene";
import {
  applyViewState,
  ColorRole,
  hoverPose,
  initialState,
  loadTrajectory,
  setSamplingParams,
  setZTimeRate,
  togglePin,
  ViewerState,
  viewStateSnapshot,
} from "./state";
import { colormapViridis, normalizeDepthsForColor } from "./viridis";
import { SamplingParamsDict, TrajectoryDict } from "./wire";

let state: ViewerState = initialState();
const trajectories = new Map<string, TrajectoryDict>();
const groups = new Map<string, THREE.Group>();
let highlightMask: boolean[] = [];

const el = (id: string) => document.getElementById(id)!;

// --- three.js boilerplate ---------------------------------------------------

const viewport = el("viewport");
const renderer = new THREE.WebGLRenderer({ antialias: true });
renderer.setSize(viewport.clientWidth, viewport.clientHeight);
viewport.appendChild(renderer.domElement);

const scene = new THREE.Scene();
scene.background = new THREE.Color(0x10141a);
scene.add(new THREE.AmbientLight(0xffffff, 0.7));
const sun = new THREE.DirectionalLight(0xffffff, 1.2);
sun.position.set(120, 80, 200);
scene.add(sun);
const grid = new THREE.GridHelper(2000, 200, 0x334, 0x223);
grid.rotation.x = Math.PI / 2;
scene.add(grid);

const camera = new THREE.PerspectiveCamera(
  55,
  viewport.clientWidth / viewport.clientHeight,
  0.1,
  50000
);
camera.up.set(0, 0, 1);
camera.position.set(0, -140, 120);

let controls: OrbitControls | MapControls = new OrbitControls(camera, renderer.domElement);

function switchControls(kind: string): void {
  const target = controls.target.clone();
  controls.dispose();
  controls =
    kind === "map"
      ? new MapControls(camera, renderer.domElement)
      : new OrbitControls(camera, renderer.domElement);
  controls.target.copy(target);
}

window.addEventListener("resize", () => {
  camera.aspect = viewport.clientWidth / viewport.clientHeight;
  camera.updateProjectionMatrix();
  renderer.setSize(viewport.clientWidth, viewport.clientHeight);
});

renderer.setAnimationLoop(() => {
  controls.update();
  renderer.render(scene, camera);
});

// --- selection, pinning, panels ----------------------------------------------

const raycaster = new THREE.Raycaster();
const pointer = new THREE.Vector2();

function pickPose(event: MouseEvent): { trajectoryId: string; poseIndex: number } | null {
  const rect = renderer.domElement.getBoundingClientRect();
  pointer.x = ((event.clientX - rect.left) / rect.width) * 2 - 1;
  pointer.y = -((event.clientY - rect.top) / rect.height) * 2 + 1;
  raycaster.setFromCamera(pointer, camera);
  for (const [id, group] of groups) {
    const hits = raycaster.intersectObject(group.userData.markers as THREE.Object3D);
    if (hits.length > 0 && hits[0].instanceId !== undefined) {
      return { trajectoryId: id, poseIndex: hits[0].instanceId };
    }
  }
  return null;
}

function renderSelection(): void {
  for (const [id, group] of groups) {
    restyleMarkers(group, (i, base) => {
      if (
        state.selected !== null &&
        state.selected.trajectoryId === id &&
        state.selected.poseIndex === i
      ) {
        return new THREE.Color(SELECTION_COLOR);
      }
      if (id === primaryId() && highlightMask[i]) {
        return new THREE.Color(0xffffff);
      }
      return base;
    });
  }
  renderPanels();
}

function renderPanels(): void {
  const info = el("info-rows");
  const imagePanel = el("image-panel") as HTMLImageElement;
  const minimap = el("minimap");
  const links = el("map-links");
  info.innerHTML = "";
  if (state.selected === null) {
    minimap.style.display = "none";
    links.innerHTML = "";
    imagePanel.style.display = "none";
    return;
  }
  const trajectory = trajectories.get(state.selected.trajectoryId);
  if (trajectory === undefined) {
    return;
  }
  const pose = trajectory.poses[state.selected.poseIndex];
  const model = buildPanelModel(trajectory.id, pose);
  for (const [key, value] of model.infoRows) {
    const row = document.createElement("div");
    row.className = "info-row";
    row.innerHTML = `<span>${key}</span><b>${value}</b>`;
    info.appendChild(row);
  }
  if (model.imageUrl !== null) {
    imagePanel.src = model.imageUrl;
    imagePanel.style.display = "block";
    imagePanel.onerror = () => (imagePanel.style.display = "none");
  } else {
    imagePanel.style.display = "none";
  }
  if (model.minimap.visible && model.minimap.center) {
    minimap.style.display = "block";
    minimap.innerHTML = "";
    const { z, x, y } = model.minimap.center;
    for (let dy = -1; dy <= 1; dy++) {
      for (let dx = -1; dx <= 1; dx++) {
        const tile = document.createElement("img");
        tile.src = tileUrl(z, x + dx, y + dy);
        tile.style.gridColumn = String(dx + 2);
        tile.style.gridRow = String(dy + 2);
        minimap.appendChild(tile);
      }
    }
    const marker = document.createElement("div");
    marker.className = "minimap-marker";
    marker.style.left = `${(1 + (model.minimap.markerU ?? 0.5)) * 33.33}%`;
    marker.style.top = `${(1 + (model.minimap.markerV ?? 0.5)) * 33.33}%`;
    minimap.appendChild(marker);
  } else {
    minimap.style.display = "none";
  }
  links.innerHTML = "";
  if (model.mapsUrl !== null) {
    links.innerHTML =
      `<a href="${model.mapsUrl}" target="_blank">map</a> ` +
      `<a href="${model.streetViewUrl}" target="_blank">street view</a>`;
  }
}

renderer.domElement.addEventListener("mousemove", (event) => {
  const hit = pickPose(event);
  if (hit !== null) {
    const before = state;
    state = hoverPose(state, hit);
    if (state !== before) {
      renderSelection();
    }
  }
});

renderer.domElement.addEventListener("contextmenu", (event) => {
  event.preventDefault();
  state = togglePin(state);
  el("pin-state").textContent = state.pinned ? "pinned" : "unpinned";
});

// --- dataset list and loading -------------------------------------------------

function primaryId(): string | null {
  return state.loadedTrajectories.length > 0 ? state.loadedTrajectories[0].id : null;
}

async function addTrajectory(id: string, role: ColorRole): Promise<void> {
  if (trajectories.has(id)) {
    return;
  }
  const trajectory = await getTrajectory(id, { interpolate: false });
  trajectories.set(id, trajectory);
  state = loadTrajectory(state, id, role);
  const group = buildTrajectoryGroup(trajectory, {
    colorRole: role,
    zTimeRate: state.zTimeRate,
  });
  groups.set(id, group);
  scene.add(group);
  if (trajectory.pointCloudUrl !== null) {
    const xyz = await getPointCloud(id);
    scene.add(buildPointCloud(xyz, colormapViridis, normalizeDepthsForColor));
  }
  if (role === "primary") {
    refreshSampling();
  }
  const legend = document.createElement("li");
  legend.textContent = `${id} (${role})`;
  el("legend").appendChild(legend);
}

async function boot(): Promise<void> {
  const datasets = await listDatasets();
  const list = el("datasets");
  datasets.forEach((dataset) => {
    const item = document.createElement("li");
    item.textContent = `${dataset.id} [${dataset.format}]`;
    item.onclick = () => {
      const role: ColorRole =
        state.loadedTrajectories.length === 0
          ? "primary"
          : state.loadedTrajectories.length % 2 === 1
            ? "match-green"
            : "match-indigo";
      void addTrajectory(dataset.id, role);
    };
    list.appendChild(item);
  });
}

void boot();

// --- live sampling sliders -----------------------------------------------------

function currentParams(): SamplingParamsDict {
  return state.liveSamplingParams;
}

function refreshSampling(): void {
  const id = primaryId();
  if (id === null) {
    return;
  }
  const trajectory = trajectories.get(id)!;
  try {
    const start = performance.now();
    const result = recomputeSampling(trajectory.poses, currentParams());
    highlightMask = result.highlighted;
    const elapsed = performance.now() - start;
    el("sample-count").textContent =
      `${result.count} / ${trajectory.poses.length} poses (${elapsed.toFixed(1)} ms)`;
    renderSelection();
  } catch (error) {
    el("sample-count").textContent = String(error);
  }
}

for (const [inputId, apply] of [
  ["tau-d", (v: number) => (state = setSamplingParams(state, { ...currentParams(), tauD: v }))],
  ["tau-theta", (v: number) => (state = setSamplingParams(state, { ...currentParams(), tauTheta: v }))],
] as [string, (v: number) => void][]) {
  el(inputId).addEventListener("input", (event) => {
    apply(parseFloat((event.target as HTMLInputElement).value));
    el(`${inputId}-value`).textContent = (event.target as HTMLInputElement).value;
    refreshSampling();
  });
}

el("mode").addEventListener("change", (event) => {
  const mode = (event.target as HTMLSelectElement).value as "uniform" | "adaptive";
  state = setSamplingParams(state, { ...currentParams(), mode });
  refreshSampling();
});

el("export-sample").addEventListener("click", async () => {
  const id = primaryId();
  if (id === null) {
    return;
  }
  const trajectory = trajectories.get(id)!;
  const selected = recomputeSampling(trajectory.poses, currentParams()).selectedIndices;
  const clientBody = buildSampleExport(trajectory, currentParams(), selected);
  // the server stays authoritative: verify the mirror before offering bytes
  const serverBody = await computeSampleRaw(id, currentParams());
  const verified = clientBody === serverBody;
  el("export-status").textContent = verified
    ? "client export matches server bytes"
    : "MIRROR DRIFT: using server bytes";
  const blob = new Blob([verified ? clientBody : serverBody], {
    type: "application/json",
  });
  const link = document.createElement("a");
  link.href = URL.createObjectURL(blob);
  link.download = "sampled-poses.json";
  link.click();
});

// --- z-as-time, controls toggle, animation -------------------------------------

el("z-rate").addEventListener("input", (event) => {
  state = setZTimeRate(state, parseFloat((event.target as HTMLInputElement).value));
  for (const group of groups.values()) {
    applyZTimeRate(group, state.zTimeRate);
  }
});

el("controls-kind").addEventListener("change", (event) => {
  switchControls((event.target as HTMLSelectElement).value);
});

const animator = new AnimationController(
  () => state,
  (next) => {
    state = next;
  },
  {
    onSelect: (selection) => {
      const trajectory = trajectories.get(selection.trajectoryId);
      if (trajectory !== undefined) {
        const pose = trajectory.poses[selection.poseIndex];
        controls.target.set(pose.position[0], pose.position[1], pose.position[2]);
        renderSelection();
      }
    },
    onFinish: () => {
      el("pin-state").textContent = "pinned";
    },
  }
);

el("animate").addEventListener("click", () => {
  const id = primaryId();
  if (id !== null) {
    animator.delayMs = parseFloat((el("animate-delay") as HTMLInputElement).value);
    animator.start(id, trajectories.get(id)!.poses.length);
  }
});
el("animate-stop").addEventListener("click", () => animator.stop());

// --- overlays -------------------------------------------------------------------

el("htmap-file").addEventListener("change", async (event) => {
  const id = primaryId();
  const file = (event.target as HTMLInputElement).files?.[0];
  if (id === null || file === undefined) {
    return;
  }
  const overlay = JSON.parse(await file.text()) as HtmapOverlayDoc;
  const trajectory = trajectories.get(id)!;
  const colors = htmapPoseColors(overlay);
  restyleMarkers(groups.get(id)!, (i) => new THREE.Color(colors[i]));
  scene.add(buildLoopSegments(htmapLoopSegments(overlay, trajectory.poses)));
});

// --- session save / restore ------------------------------------------------------

el("session-save").addEventListener("click", async () => {
  const name = (el("session-name") as HTMLInputElement).value;
  const bundle = {
    name,
    viewState: viewStateSnapshot(state, {
      target: controls.target.toArray() as [number, number, number],
      position: camera.position.toArray() as [number, number, number],
    }),
    samplingParams: state.liveSamplingParams,
    loadedFileRef: primaryId() ?? "",
    savedAt: Date.now() / 1000,
  };
  try {
    await putSettings(name, JSON.stringify(bundle));
    el("session-status").textContent = `saved '${name}'`;
  } catch (error) {
    el("session-status").textContent = String(error);
  }
});

el("session-restore").addEventListener("click", async () => {
  const name = (el("session-name") as HTMLInputElement).value;
  try {
    const bundle = JSON.parse(await getSettings(name));
    const restored = applyViewState(initialState(), bundle.viewState);
    state = restored.state;
    if (bundle.samplingParams) {
      state = setSamplingParams(state, bundle.samplingParams);
    }
    controls.target.fromArray(restored.camera.target);
    camera.position.fromArray(restored.camera.position);
    for (const loaded of state.loadedTrajectories) {
      await addTrajectory(loaded.id, loaded.colorRole);
    }
    for (const group of groups.values()) {
      applyZTimeRate(group, state.zTimeRate);
    }
    refreshSampling();
    renderSelection();
    el("session-status").textContent = `restored '${name}'`;
  } catch (error) {
    el("session-status").textContent = String(error);
  }
});

el("topk-file").addEventListener("change", async (event) => {
  const file = (event.target as HTMLInputElement).files?.[0];
  if (file === undefined) {
    return;
  }
  const epoch = JSON.parse(await file.text()) as RetrievalEpochDoc;
  const renderTable = () => {
    const k = parseInt((el("topk-k") as HTMLInputElement).value, 10);
    const table = el("topk-table");
    table.innerHTML = "";
    for (const row of topkTable(epoch, k)) {
      const tr = document.createElement("tr");
      const label = document.createElement("td");
      label.textContent = `q${row.queryRow} (label ${row.queryLabel})`;
      tr.appendChild(label);
      for (const entry of row.entries) {
        const td = document.createElement("td");
        td.textContent = `${entry.galleryIndex}:${entry.distance.toFixed(2)}`;
        td.style.color = entry.correct ? GROUND_TRUTH_COLOR : TOP_MATCH_COLOR;
        tr.appendChild(td);
      }
      tr.onclick = () => {
        const pane = comparisonForRow(epoch, row.queryRow);
        el("comparison").innerHTML =
          `<div style="border: 3px solid ${GROUND_TRUTH_COLOR}">GT: ${pane.groundTruthImage ?? "n/a"}</div>` +
          `<div style="border: 3px solid ${TOP_MATCH_COLOR}">match: ${pane.topMatchImage ?? "n/a"}</div>`;
      };
      table.appendChild(tr);
    }
  };
  el("topk-k").addEventListener("input", renderTable);
  renderTable();
});
