/** Cockpit entry point: socket wiring, render loop, event handlers. */

import { encodeCommand, isSnapshot, parseFrame, Command } from "./protocol.js";
import { defaultCamera } from "./transform.js";
import { applySnapshot, initialViewState } from "./state.js";
import { paint, render } from "./render.js";
import { beginGesture, endGesture, spaceToggle, PointerGesture } from "./input.js";

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const size = { width: canvas.width, height: canvas.height };
const cam = defaultCamera(size.width, size.height);
const view = initialViewState();

let socket: WebSocket | null = null;

function send(command: Command): void {
  if (!socket || socket.readyState !== WebSocket.OPEN) {
    toast("not connected; command dropped");
    return;
  }
  socket.send(encodeCommand(command));
  view.pendingEcho = command.cmd;
}

function toast(message: string): void {
  const el = document.getElementById("toast")!;
  el.textContent = message;
  el.classList.add("visible");
  setTimeout(() => el.classList.remove("visible"), 1500);
}

function connect(): void {
  const proto = location.protocol === "https:" ? "wss" : "ws";
  socket = new WebSocket(`${proto}://${location.host}/ws`);
  view.connection = "connecting";
  socket.onopen = () => {
    view.connection = "open";
  };
  socket.onmessage = (ev: MessageEvent) => {
    try {
      const frame = parseFrame(ev.data as string);
      if (isSnapshot(frame)) {
        applySnapshot(view, frame, performance.now());
      } else {
        toast(frame.error);
      }
    } catch (err) {
      console.error("bad frame", err);
    }
  };
  socket.onclose = () => {
    view.connection = "closed";
    setTimeout(connect, 1000); // keep trying; the sim may restart
  };
}

let gesture: PointerGesture | null = null;

canvas.addEventListener("pointerdown", (ev) => {
  const rect = canvas.getBoundingClientRect();
  gesture = beginGesture(view, cam, { x: ev.clientX - rect.left, y: ev.clientY - rect.top });
});

canvas.addEventListener("pointerup", (ev) => {
  if (!gesture) {
    return;
  }
  const rect = canvas.getBoundingClientRect();
  const cmd = endGesture(gesture, cam, { x: ev.clientX - rect.left, y: ev.clientY - rect.top });
  gesture = null;
  if (cmd) {
    send(cmd);
  }
});

window.addEventListener("keydown", (ev) => {
  if (ev.code === "Space") {
    ev.preventDefault();
    send(spaceToggle(view));
  }
});

function frame(): void {
  paint(ctx, size, render(view, cam, size, performance.now()));
  requestAnimationFrame(frame);
}

connect();
requestAnimationFrame(frame);
