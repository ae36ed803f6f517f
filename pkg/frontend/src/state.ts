/** Client view state: latest snapshot, trail, connection bookkeeping.
 *
 * The cockpit holds no physics: everything rendered comes from Snapshot
 * fields, and this module only accumulates them.
 */

import { Snapshot } from "./protocol.js";

export const TRAIL_CAPACITY = 500;

export type Connection = "connecting" | "open" | "closed";

export interface ViewState {
  latest: Snapshot | null;
  /** last TRAIL_CAPACITY slider positions, oldest first */
  trail: { x: number; y: number }[];
  connection: Connection;
  /** wall-clock ms of the last received snapshot */
  lastFrameAt: number;
  /** last command sent, echoed in the panel until the next frame */
  pendingEcho: string | null;
  paused: boolean;
}

export function initialViewState(): ViewState {
  return {
    latest: null,
    trail: [],
    connection: "connecting",
    lastFrameAt: 0,
    pendingEcho: null,
    paused: false,
  };
}

export function applySnapshot(view: ViewState, snap: Snapshot, nowMs: number): void {
  view.latest = snap;
  view.lastFrameAt = nowMs;
  view.paused = snap.flags.includes("paused");
  view.pendingEcho = null;
  const last = view.trail[view.trail.length - 1];
  if (!last || last.x !== snap.state.x || last.y !== snap.state.y) {
    view.trail.push({ x: snap.state.x, y: snap.state.y });
    if (view.trail.length > TRAIL_CAPACITY) {
      view.trail.shift();
    }
  }
}

export function isStale(view: ViewState, nowMs: number): boolean {
  return view.latest !== null && nowMs - view.lastFrameAt > 1000;
}
