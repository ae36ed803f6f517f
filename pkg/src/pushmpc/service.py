"""Live session host: streams snapshots and accepts steering commands.

One asyncio task owns the closed loop and steps it at the controller period
(wall-clock paced, best effort; an overrunning controller makes the loop run
late rather than skip physics). Snapshots go out as JSON text frames over a
WebSocket; commands come back on the same socket as ``{"cmd": ..., "args":
{...}}``. Queued commands are applied between periods, at most one per
period, so no snapshot ever reflects a half-applied command. Slow clients
have frames dropped from a bounded per-client queue, never stalling the
loop; drop counts are exposed at /stats.
"""

from __future__ import annotations

import argparse
import asyncio
import dataclasses
import importlib.resources
import json
import math
import sys
import time
from collections import deque
from contextlib import asynccontextmanager
from dataclasses import dataclass

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .config import RunConfig, load_config
from .model import PusherInput, SliderState, motion_cone
from .sim import ClosedLoop, straight_line_scenario, target_scenario

__all__ = [
    "Broadcaster",
    "Command",
    "CommandError",
    "Pause",
    "Poke",
    "Reset",
    "Resume",
    "SessionEngine",
    "SetSpeed",
    "SetTarget",
    "Snapshot",
    "create_app",
    "decode_snapshot",
    "encode_snapshot",
    "parse_command",
    "run_session",
    "snapshot_schema",
]

MAX_FRAME_BYTES = 2048
POKE_MAX_SHIFT = 0.05  # m
POKE_MAX_TWIST = math.pi / 6.0  # rad
CLIENT_QUEUE_FRAMES = 16


class CommandError(ValueError):
    """Unknown or malformed steering command."""


@dataclass(frozen=True)
class SetTarget:
    x: float
    y: float


@dataclass(frozen=True)
class Poke:
    """Instantaneous displacement nudge; clamped to keep the model honest."""

    dx: float
    dy: float
    dtheta: float

    def __post_init__(self):
        clamp = lambda v, m: min(max(float(v), -m), m)  # noqa: E731
        object.__setattr__(self, "dx", clamp(self.dx, POKE_MAX_SHIFT))
        object.__setattr__(self, "dy", clamp(self.dy, POKE_MAX_SHIFT))
        object.__setattr__(self, "dtheta", clamp(self.dtheta, POKE_MAX_TWIST))


@dataclass(frozen=True)
class Pause:
    pass


@dataclass(frozen=True)
class Resume:
    pass


@dataclass(frozen=True)
class Reset:
    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0
    p_y: float = 0.0


@dataclass(frozen=True)
class SetSpeed:
    v_x: float


Command = SetTarget | Poke | Pause | Resume | Reset | SetSpeed


def parse_command(payload: dict) -> Command:
    if not isinstance(payload, dict) or "cmd" not in payload:
        raise CommandError("command frames must be objects with a 'cmd' key")
    cmd = payload["cmd"]
    args = payload.get("args", {}) or {}
    try:
        if cmd == "set_target":
            return SetTarget(float(args["x"]), float(args["y"]))
        if cmd == "poke":
            return Poke(
                float(args.get("dx", 0.0)),
                float(args.get("dy", 0.0)),
                float(args.get("dtheta", 0.0)),
            )
        if cmd == "pause":
            return Pause()
        if cmd == "resume":
            return Resume()
        if cmd == "reset":
            return Reset(
                float(args.get("x", 0.0)),
                float(args.get("y", 0.0)),
                float(args.get("theta", 0.0)),
                float(args.get("p_y", 0.0)),
            )
        if cmd == "set_speed":
            return SetSpeed(float(args["v_x"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise CommandError(f"bad arguments for {cmd!r}: {exc}") from exc
    raise CommandError(f"unknown command {cmd!r}")


@dataclass(frozen=True)
class Snapshot:
    t: float
    state: SliderState
    target: tuple[float, float] | None
    u: PusherInput
    schedule: str
    costs: tuple
    cone: tuple[float, float]
    flags: tuple[str, ...]


def encode_snapshot(snap: Snapshot) -> str:
    frame = {
        "v": 1,
        "t": snap.t,
        "state": {
            "x": snap.state.x,
            "y": snap.state.y,
            "theta": snap.state.theta,
            "p_y": snap.state.p_y,
        },
        "target": None if snap.target is None else {"x": snap.target[0], "y": snap.target[1]},
        "u": {"vn": snap.u.v_n, "vt": snap.u.v_t},
        "schedule": snap.schedule,
        "costs": list(snap.costs),
        "cone": {"gt": snap.cone[0], "gb": snap.cone[1]},
        "flags": list(snap.flags),
    }
    text = json.dumps(frame, separators=(",", ":"))
    if len(text.encode()) >= MAX_FRAME_BYTES:
        raise ValueError("snapshot frame exceeded its size bound")
    return text


def decode_snapshot(text: str) -> Snapshot:
    frame = json.loads(text)
    if frame.get("v") != 1:
        raise ValueError(f"unsupported frame version {frame.get('v')!r}")
    st = frame["state"]
    tgt = frame["target"]
    return Snapshot(
        t=frame["t"],
        state=SliderState(st["x"], st["y"], st["theta"], st["p_y"]),
        target=None if tgt is None else (tgt["x"], tgt["y"]),
        u=PusherInput(frame["u"]["vn"], frame["u"]["vt"]),
        schedule=frame["schedule"],
        costs=tuple(frame["costs"]),
        cone=(frame["cone"]["gt"], frame["cone"]["gb"]),
        flags=tuple(frame["flags"]),
    )


def snapshot_schema() -> dict:
    text = importlib.resources.files("pushmpc").joinpath("snapshot.schema.json").read_text()
    return json.loads(text)


class SessionEngine:
    """Single owner of the simulation state for a live session."""

    def __init__(self, loop: ClosedLoop):
        self.loop = loop
        self.paused = False
        self.late_periods = 0
        self._commands: deque[Command] = deque()

    def submit(self, cmd: Command) -> None:
        self._commands.append(cmd)

    def pending_commands(self) -> int:
        return len(self._commands)

    def _apply(self, cmd: Command) -> None:
        loop = self.loop
        if isinstance(cmd, SetTarget):
            loop.set_target(cmd.x, cmd.y)
        elif isinstance(cmd, Poke):
            loop.apply_delta([cmd.dx, cmd.dy, cmd.dtheta, 0.0])
        elif isinstance(cmd, Pause):
            self.paused = True
        elif isinstance(cmd, Resume):
            self.paused = False
        elif isinstance(cmd, Reset):
            loop.reset_state(SliderState(cmd.x, cmd.y, cmd.theta, cmd.p_y))
        elif isinstance(cmd, SetSpeed):
            loop.set_speed(cmd.v_x)

    def step_period(self) -> Snapshot:
        """Apply at most one queued command, then advance one period if running."""
        if self._commands:
            self._apply(self._commands.popleft())
        if not self.paused and not self.loop.done:
            self.loop.advance_period()
        return self.snapshot()

    def snapshot(self) -> Snapshot:
        loop = self.loop
        rec = loop.log.records[-1] if loop.log.records else None
        mc = motion_cone(loop.state, loop.params)
        flags = list(rec.flags) if rec else []
        if self.paused:
            flags.append("paused")
        if loop.done:
            flags.append("done")
        return Snapshot(
            t=loop.t,
            state=loop.state,
            target=loop.active_target,
            u=rec.u_applied if rec else PusherInput(0.0, 0.0),
            schedule=rec.chosen_schedule if rec else "",
            costs=tuple(rec.per_schedule_costs) if rec else (),
            cone=(mc.gamma_t, mc.gamma_b),
            flags=tuple(flags),
        )


class Broadcaster:
    """Fan-out of frames to bounded per-client queues; full queues drop."""

    def __init__(self, maxsize: int = CLIENT_QUEUE_FRAMES):
        self.maxsize = maxsize
        self.queues: dict[int, asyncio.Queue] = {}
        self.drops: dict[int, int] = {}
        self._next_id = 0

    def register(self) -> tuple[int, asyncio.Queue]:
        cid = self._next_id
        self._next_id += 1
        self.queues[cid] = asyncio.Queue(maxsize=self.maxsize)
        self.drops[cid] = 0
        return cid, self.queues[cid]

    def unregister(self, cid: int) -> None:
        self.queues.pop(cid, None)

    def broadcast(self, frame: str) -> None:
        for cid, q in self.queues.items():
            try:
                q.put_nowait(frame)
            except asyncio.QueueFull:
                self.drops[cid] += 1


def create_app(engine: SessionEngine, pace: bool = True, static_dir: str | None = None) -> FastAPI:
    hub = Broadcaster()

    async def step_loop() -> None:
        h = engine.loop.config.h
        deadline = time.perf_counter()
        while True:
            if pace:
                deadline += h
                delay = deadline - time.perf_counter()
                if delay > 0:
                    await asyncio.sleep(delay)
                else:
                    engine.late_periods += 1
                    deadline = time.perf_counter()
            else:
                await asyncio.sleep(0)
            snap = engine.step_period()
            hub.broadcast(encode_snapshot(snap))

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        task = asyncio.create_task(step_loop())
        try:
            yield
        finally:
            task.cancel()
            try:
                await task
            except asyncio.CancelledError:
                pass

    app = FastAPI(lifespan=lifespan)
    app.state.engine = engine
    app.state.hub = hub

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket):
        await websocket.accept()
        cid, q = hub.register()

        async def send_frames():
            while True:
                frame = await q.get()
                await websocket.send_text(frame)

        sender = asyncio.create_task(send_frames())
        try:
            while True:
                text = await websocket.receive_text()
                try:
                    engine.submit(parse_command(json.loads(text)))
                except (CommandError, json.JSONDecodeError) as exc:
                    await websocket.send_text(json.dumps({"v": 1, "error": str(exc)}))
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()
            hub.unregister(cid)

    @app.get("/schema")
    async def schema():
        return JSONResponse(snapshot_schema())

    @app.get("/stats")
    async def stats():
        return JSONResponse(
            {
                "clients": [{"id": cid, "drops": n} for cid, n in hub.drops.items()],
                "late_periods": engine.late_periods,
                "pending_commands": engine.pending_commands(),
            }
        )

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="cockpit")
    return app


def run_session(
    config: RunConfig | None = None,
    host: str = "127.0.0.1",
    port: int = 8787,
    scenario_kind: str | None = None,
    controller: str = "fom",
    static_dir: str | None = None,
    pace: bool = True,
) -> None:
    """Serve a live session until interrupted. Live sessions never time out."""
    import uvicorn

    cfg = config if config is not None else load_config(None)
    scenario = cfg.scenario
    if scenario_kind is not None and scenario_kind != scenario.kind:
        scenario = (
            straight_line_scenario() if scenario_kind == "straight" else target_scenario()
        )
    scenario = dataclasses.replace(scenario, duration=math.inf)
    loop = ClosedLoop(cfg.params, cfg.mpc, scenario, controller=controller)
    app = create_app(SessionEngine(loop), pace=pace, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pushmpc-service", description="Live pusher-slider session host"
    )
    parser.add_argument("--config", default=None)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8787)
    parser.add_argument("--scenario", choices=["straight", "targets"], default="targets")
    parser.add_argument("--controller", choices=["fom", "miqp"], default="fom")
    parser.add_argument("--static-dir", default=None, help="cockpit bundle directory")
    args = parser.parse_args(argv)
    run_session(
        config=load_config(args.config),
        host=args.host,
        port=args.port,
        scenario_kind=args.scenario,
        controller=args.controller,
        static_dir=args.static_dir,
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
