/**
 * Journey replay: walk the poses in order with an adjustable delay, the
 * selection pinned so stray hovers cannot steal it, and the camera target
 * following the current pose. Stepping is injected-timer based so the
 * controller is testable without real time.
 */

import {
  animationStep,
  Selection,
  startAnimation,
  stopAnimation,
  ViewerState,
} from "./state";

export interface AnimationHooks {
  onSelect: (selection: Selection) => void;
  onFinish: () => void;
}

export class AnimationController {
  private timer: ReturnType<typeof setTimeout> | null = null;
  delayMs: number;

  constructor(
    private getState: () => ViewerState,
    private setState: (s: ViewerState) => void,
    private hooks: AnimationHooks,
    delayMs: number = 250
  ) {
    this.delayMs = delayMs;
  }

  start(trajectoryId: string, poseCount: number): void {
    this.stopTimer();
    this.setState(startAnimation(this.getState(), trajectoryId));
    this.notify();
    this.schedule(poseCount);
  }

  /** Advance one pose; returns false when the traversal is done. */
  step(poseCount: number): boolean {
    const state = this.getState();
    if (!state.animating || state.selected === null) {
      return false;
    }
    if (state.selected.poseIndex + 1 >= poseCount) {
      this.setState(stopAnimation(state));
      this.hooks.onFinish();
      return false;
    }
    this.setState(animationStep(state));
    this.notify();
    return true;
  }

  stop(): void {
    this.stopTimer();
    this.setState(stopAnimation(this.getState()));
  }

  private schedule(poseCount: number): void {
    this.timer = setTimeout(() => {
      if (this.step(poseCount)) {
        this.schedule(poseCount);
      }
    }, this.delayMs);
  }

  private stopTimer(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  private notify(): void {
    const selected = this.getState().selected;
    if (selected !== null) {
      this.hooks.onSelect(selected);
    }
  }
}
