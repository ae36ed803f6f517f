/** Camera transform between world meters (y up) and canvas pixels (y down). */

export interface Camera {
  /** pixels per meter; the default puts 1 m across 1000 px */
  scale: number;
  /** canvas position of the world origin, px */
  originX: number;
  originY: number;
}

export interface Pt {
  x: number;
  y: number;
}

export const DEFAULT_SCALE = 1000;
export const GRID_SPACING_M = 0.05;

export function defaultCamera(width: number, height: number): Camera {
  // paper-scale scenes span ~0.5 m to the right of the origin
  return { scale: DEFAULT_SCALE, originX: width * 0.25, originY: height * 0.55 };
}

export function worldToScreen(cam: Camera, w: Pt): Pt {
  return { x: cam.originX + w.x * cam.scale, y: cam.originY - w.y * cam.scale };
}

export function screenToWorld(cam: Camera, s: Pt): Pt {
  return { x: (s.x - cam.originX) / cam.scale, y: (cam.originY - s.y) / cam.scale };
}

/** Rotate a body-frame point by theta and translate to the body origin. */
export function bodyToWorld(origin: Pt, theta: number, p: Pt): Pt {
  const c = Math.cos(theta);
  const s = Math.sin(theta);
  return { x: origin.x + c * p.x - s * p.y, y: origin.y + s * p.x + c * p.y };
}
