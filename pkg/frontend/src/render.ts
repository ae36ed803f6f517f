/** Scene construction as data: ViewState -> draw commands -> canvas.
 *
 * Keeping the scene a plain array of commands makes rendering testable
 * without a real canvas and makes the no-client-physics rule auditable:
 * every number below is a Snapshot field pushed through the camera
 * transform (plus fixed display constants for the footprint and styling).
 */

import { Snapshot } from "./protocol.js";
import { Camera, GRID_SPACING_M, Pt, bodyToWorld, screenToWorld, worldToScreen } from "./transform.js";
import { ViewState, isStale } from "./state.js";

// display constants; the reference slider is a 9 cm square pushed on its
// left face (drawing geometry, not physics)
export const SLIDER_HALF = 0.045;
export const CONE_RAY_M = 0.06;
export const PUSHER_RADIUS_PX = 5;

export type DrawCmd =
  | { kind: "clear"; color: string }
  | { kind: "polyline"; points: Pt[]; color: string; width: number }
  | { kind: "polygon"; points: Pt[]; stroke: string; fill: string | null; width: number }
  | { kind: "circle"; center: Pt; radius: number; stroke: string | null; fill: string | null }
  | { kind: "text"; pos: Pt; text: string; color: string; size: number };

export interface CanvasSize {
  width: number;
  height: number;
}

function gridCommands(cam: Camera, size: CanvasSize): DrawCmd[] {
  const cmds: DrawCmd[] = [];
  const topLeft = screenToWorld(cam, { x: 0, y: 0 });
  const bottomRight = screenToWorld(cam, { x: size.width, y: size.height });
  const x0 = Math.floor(topLeft.x / GRID_SPACING_M) * GRID_SPACING_M;
  const y0 = Math.floor(bottomRight.y / GRID_SPACING_M) * GRID_SPACING_M;
  for (let x = x0; x <= bottomRight.x; x += GRID_SPACING_M) {
    const a = worldToScreen(cam, { x, y: topLeft.y });
    const b = worldToScreen(cam, { x, y: bottomRight.y });
    cmds.push({ kind: "polyline", points: [a, b], color: "#2a2e39", width: 1 });
  }
  for (let y = y0; y <= topLeft.y; y += GRID_SPACING_M) {
    const a = worldToScreen(cam, { x: topLeft.x, y });
    const b = worldToScreen(cam, { x: bottomRight.x, y });
    cmds.push({ kind: "polyline", points: [a, b], color: "#2a2e39", width: 1 });
  }
  return cmds;
}

function sliderCommands(cam: Camera, snap: Snapshot): DrawCmd[] {
  const { x, y, theta, p_y } = snap.state;
  const center = { x, y };
  const corners = [
    { x: -SLIDER_HALF, y: -SLIDER_HALF },
    { x: SLIDER_HALF, y: -SLIDER_HALF },
    { x: SLIDER_HALF, y: SLIDER_HALF },
    { x: -SLIDER_HALF, y: SLIDER_HALF },
  ].map((p) => worldToScreen(cam, bodyToWorld(center, theta, p)));
  const heading = [
    worldToScreen(cam, bodyToWorld(center, theta, { x: 0, y: 0 })),
    worldToScreen(cam, bodyToWorld(center, theta, { x: SLIDER_HALF, y: 0 })),
  ];
  const contactWorld = bodyToWorld(center, theta, { x: -SLIDER_HALF, y: p_y });
  const contact = worldToScreen(cam, contactWorld);

  // motion-cone wedge: pusher velocities (1, gt) and (1, gb) in the body
  // frame, drawn at the contact point
  const mk = (slope: number) => {
    const n = Math.hypot(1, slope);
    return worldToScreen(
      cam,
      bodyToWorld(contactWorld, theta, { x: CONE_RAY_M / n, y: (CONE_RAY_M * slope) / n })
    );
  };
  const wedge: DrawCmd = {
    kind: "polygon",
    points: [contact, mk(snap.cone.gt), mk(snap.cone.gb)],
    stroke: "#d4a017",
    fill: "rgba(212,160,23,0.15)",
    width: 1,
  };

  return [
    { kind: "polygon", points: corners, stroke: "#7fb3ff", fill: "rgba(127,179,255,0.12)", width: 2 },
    { kind: "polyline", points: heading, color: "#7fb3ff", width: 1 },
    wedge,
    { kind: "circle", center: contact, radius: PUSHER_RADIUS_PX, stroke: null, fill: "#ff5d73" },
  ];
}

function targetCommands(cam: Camera, snap: Snapshot): DrawCmd[] {
  if (!snap.target) {
    return [];
  }
  const t = worldToScreen(cam, snap.target);
  const c = worldToScreen(cam, { x: snap.state.x, y: snap.state.y });
  return [
    { kind: "polyline", points: [c, t], color: "#4a5263", width: 1 },
    { kind: "circle", center: t, radius: 6, stroke: "#59d185", fill: null },
    { kind: "circle", center: t, radius: 2, stroke: null, fill: "#59d185" },
  ];
}

function fmt(v: number | null, digits = 4): string {
  return v === null ? "inf" : v.toFixed(digits);
}

function panelCommands(view: ViewState, size: CanvasSize): DrawCmd[] {
  const snap = view.latest;
  const x0 = size.width - 230;
  const line = (i: number) => ({ x: x0, y: 24 + 18 * i });
  const cmds: DrawCmd[] = [];
  const put = (i: number, text: string, color = "#c8d0e0") =>
    cmds.push({ kind: "text", pos: line(i), text, color, size: 13 });

  put(0, `link: ${view.connection}`, view.connection === "open" ? "#59d185" : "#ff5d73");
  if (!snap) {
    put(1, "waiting for snapshots...");
    return cmds;
  }
  put(1, `t = ${snap.t.toFixed(2)} s`);
  put(2, `schedule: ${snap.schedule || "-"}`, "#d4a017");
  snap.costs.forEach((c, i) => put(3 + i, `J[${i}] = ${fmt(c)}`));
  const base = 3 + snap.costs.length;
  put(base, `u = (${snap.u.vn.toFixed(3)}, ${snap.u.vt.toFixed(3)})`);
  put(base + 1, `cone: ${snap.cone.gt.toFixed(3)} / ${snap.cone.gb.toFixed(3)}`);
  put(base + 2, `p_y = ${snap.state.p_y.toFixed(4)}`);
  if (snap.flags.length) {
    put(base + 3, `flags: ${snap.flags.join(",")}`, "#ff5d73");
  }
  if (view.pendingEcho) {
    put(base + 4, `sent: ${view.pendingEcho}`, "#8891a5");
  }
  return cmds;
}

export function render(view: ViewState, cam: Camera, size: CanvasSize, nowMs: number): DrawCmd[] {
  const cmds: DrawCmd[] = [{ kind: "clear", color: "#151820" }];
  cmds.push(...gridCommands(cam, size));
  const snap = view.latest;
  if (snap) {
    if (view.trail.length > 1) {
      cmds.push({
        kind: "polyline",
        points: view.trail.map((p) => worldToScreen(cam, p)),
        color: "#3c4658",
        width: 1,
      });
    }
    cmds.push(...targetCommands(cam, snap));
    cmds.push(...sliderCommands(cam, snap));
  }
  cmds.push(...panelCommands(view, size));
  if (isStale(view, nowMs)) {
    cmds.push({
      kind: "text",
      pos: { x: size.width / 2 - 80, y: size.height / 2 },
      text: "connection stale (>1 s)",
      color: "#ff5d73",
      size: 16,
    });
  }
  if (view.paused) {
    cmds.push({ kind: "text", pos: { x: 16, y: 24 }, text: "PAUSED (space resumes)", color: "#d4a017", size: 14 });
  }
  return cmds;
}

export function paint(ctx: CanvasRenderingContext2D, size: CanvasSize, cmds: DrawCmd[]): void {
  for (const cmd of cmds) {
    switch (cmd.kind) {
      case "clear":
        ctx.fillStyle = cmd.color;
        ctx.fillRect(0, 0, size.width, size.height);
        break;
      case "polyline":
        ctx.strokeStyle = cmd.color;
        ctx.lineWidth = cmd.width;
        ctx.beginPath();
        cmd.points.forEach((p, i) => (i ? ctx.lineTo(p.x, p.y) : ctx.moveTo(p.x, p.y)));
        ctx.stroke();
        break;
      case "polygon":
        ctx.beginPath();
        cmd.points.forEach((p, i) => (i ? ctx.lineTo(p.x, p.y) : ctx.moveTo(p.x, p.y)));
        ctx.closePath();
        if (cmd.fill) {
          ctx.fillStyle = cmd.fill;
          ctx.fill();
        }
        ctx.strokeStyle = cmd.stroke;
        ctx.lineWidth = cmd.width;
        ctx.stroke();
        break;
      case "circle":
        ctx.beginPath();
        ctx.arc(cmd.center.x, cmd.center.y, cmd.radius, 0, 2 * Math.PI);
        if (cmd.fill) {
          ctx.fillStyle = cmd.fill;
          ctx.fill();
        }
        if (cmd.stroke) {
          ctx.strokeStyle = cmd.stroke;
          ctx.stroke();
        }
        break;
      case "text":
        ctx.fillStyle = cmd.color;
        ctx.font = `${cmd.size}px ui-monospace, monospace`;
        ctx.fillText(cmd.text, cmd.pos.x, cmd.pos.y);
        break;
    }
  }
}
