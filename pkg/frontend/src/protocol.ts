/** Wire protocol: versioned snapshot frames in, command frames out. */

export interface SliderStateMsg {
  x: number;
  y: number;
  theta: number;
  p_y: number;
}

export interface Snapshot {
  v: 1;
  t: number;
  state: SliderStateMsg;
  target: { x: number; y: number } | null;
  u: { vn: number; vt: number };
  schedule: string;
  costs: (number | null)[];
  cone: { gt: number; gb: number };
  flags: string[];
}

export interface ErrorFrame {
  v: 1;
  error: string;
}

export type ServerFrame = Snapshot | ErrorFrame;

export function parseFrame(text: string): ServerFrame {
  const data = JSON.parse(text);
  if (data.v !== 1) {
    throw new Error(`unsupported frame version ${data.v}`);
  }
  return data as ServerFrame;
}

export function isSnapshot(frame: ServerFrame): frame is Snapshot {
  return !("error" in frame);
}

export type Command =
  | { cmd: "set_target"; args: { x: number; y: number } }
  | { cmd: "poke"; args: { dx: number; dy: number; dtheta: number } }
  | { cmd: "pause" }
  | { cmd: "resume" }
  | { cmd: "reset"; args: { x: number; y: number; theta: number; p_y: number } }
  | { cmd: "set_speed"; args: { v_x: number } };

export function encodeCommand(command: Command): string {
  return JSON.stringify(command);
}

export const POKE_MAX_SHIFT = 0.05; // m, mirrors the service-side clamp
export const POKE_MAX_TWIST = Math.PI / 6; // rad

const clamp = (v: number, m: number) => Math.min(Math.max(v, -m), m);

/** Build a poke command with the service's clamp applied client-side too. */
export function makePoke(dx: number, dy: number, dtheta: number): Command {
  return {
    cmd: "poke",
    args: {
      dx: clamp(dx, POKE_MAX_SHIFT),
      dy: clamp(dy, POKE_MAX_SHIFT),
      dtheta: clamp(dtheta, POKE_MAX_TWIST),
    },
  };
}
