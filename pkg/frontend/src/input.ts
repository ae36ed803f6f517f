/** Pointer and keyboard interaction mapped to steering commands.
 *
 * Click in empty space: set the target there. Press on the slider and
 * drag: poke it by the drag vector (displacement clamped, twist from the
 * vertical component). Space: pause/resume toggle.
 */

import { Command, POKE_MAX_SHIFT, POKE_MAX_TWIST, makePoke } from "./protocol.js";
import { Camera, Pt, screenToWorld } from "./transform.js";
import { ViewState } from "./state.js";

export const DRAG_THRESHOLD_PX = 4;

export function hitSlider(view: ViewState, cam: Camera, screen: Pt): boolean {
  const snap = view.latest;
  if (!snap) {
    return false;
  }
  const w = screenToWorld(cam, screen);
  // generous circular hit area around the slider center
  return Math.hypot(w.x - snap.state.x, w.y - snap.state.y) <= 0.07;
}

/** Poke from a world-frame drag vector: shift by it, twist with its lift. */
export function dragToPoke(delta: Pt): Command {
  const dtheta = (delta.y / POKE_MAX_SHIFT) * POKE_MAX_TWIST;
  return makePoke(delta.x, delta.y, dtheta);
}

export function clickToTarget(cam: Camera, screen: Pt): Command {
  const w = screenToWorld(cam, screen);
  return { cmd: "set_target", args: { x: w.x, y: w.y } };
}

export interface PointerGesture {
  startScreen: Pt;
  onSlider: boolean;
}

export function beginGesture(view: ViewState, cam: Camera, screen: Pt): PointerGesture {
  return { startScreen: screen, onSlider: hitSlider(view, cam, screen) };
}

/** Resolve a finished gesture; null means it was neither click nor poke. */
export function endGesture(
  gesture: PointerGesture,
  cam: Camera,
  screen: Pt
): Command | null {
  const movedPx = Math.hypot(
    screen.x - gesture.startScreen.x,
    screen.y - gesture.startScreen.y
  );
  if (movedPx <= DRAG_THRESHOLD_PX) {
    return gesture.onSlider ? null : clickToTarget(cam, screen);
  }
  if (!gesture.onSlider) {
    return null;
  }
  const a = screenToWorld(cam, gesture.startScreen);
  const b = screenToWorld(cam, screen);
  return dragToPoke({ x: b.x - a.x, y: b.y - a.y });
}

export function spaceToggle(view: ViewState): Command {
  return view.paused ? { cmd: "resume" } : { cmd: "pause" };
}
