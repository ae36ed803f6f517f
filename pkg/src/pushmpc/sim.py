"""Closed-loop simulation of the controlled pusher-slider.

The plant advances only through ``model.step``; the controller is re-run
once per period h on the measured state. Two scenarios are provided:
straight-line tracking with optional injected perturbations, and target
tracking, which re-aims a straight-line nominal at the active target every
period by working in an intermediate frame whose x axis points from the
slider center to the target.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import model
from .controller import (
    ControllerFault,
    ControlResult,
    FamilyOfModes,
    MpcConfig,
    default_family,
    fom_step,
    miqp_step,
)
from .linearize import Nominal
from .model import ModelParams, PusherInput, SliderState

__all__ = [
    "ClosedLoop",
    "PeriodRecord",
    "Perturbation",
    "RunLog",
    "Scenario",
    "TargetFrame",
    "TargetFrameError",
    "emit_outputs",
    "run_straight_line",
    "run_target_tracking",
    "straight_line_scenario",
    "target_scenario",
    "target_frame",
    "wrap_angle",
]

CSV_COLUMNS = [
    "t", "x", "y", "theta", "p_y", "v_n", "v_t",
    "schedule", "cost", "solve_ms", "flags",
]

DEFAULT_TARGETS = ((0.23, -0.11), (0.23, 0.11), (0.30, 0.08))


class TargetFrameError(ValueError):
    """Target coincides with the slider center; the aiming frame is undefined."""


def wrap_angle(angle: float) -> float:
    """Wrap to (-pi, pi]."""
    wrapped = math.fmod(angle + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


@dataclass(frozen=True)
class Perturbation:
    """Instantaneous state increment applied at the first trigger crossing."""

    trigger: str  # "x" (slider x position) or "t" (simulation time)
    at: float
    delta: tuple[float, float, float, float]

    def __post_init__(self):
        if self.trigger not in ("x", "t"):
            raise ValueError("perturbation trigger must be 'x' or 't'")


@dataclass(frozen=True)
class Scenario:
    kind: str  # "straight" or "targets"
    duration: float = 10.0
    v_nominal: float = 0.05
    targets: tuple[tuple[float, float], ...] = ()
    target_tolerance: float = 0.01
    perturbations: tuple[Perturbation, ...] = ()
    initial_state: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.kind not in ("straight", "targets"):
            raise ValueError("scenario kind must be 'straight' or 'targets'")
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if self.target_tolerance <= 0:
            raise ValueError("target tolerance must be positive")
        if self.kind == "targets" and not self.targets:
            raise ValueError("target scenario needs at least one target")

    def to_config(self) -> dict:
        return {
            "kind": self.kind,
            "duration": self.duration,
            "v_nominal": self.v_nominal,
            "targets": [list(t) for t in self.targets],
            "target_tolerance": self.target_tolerance,
            "perturbations": [
                {"trigger": p.trigger, "at": p.at, "delta": list(p.delta)}
                for p in self.perturbations
            ],
            "initial_state": list(self.initial_state),
        }

    @staticmethod
    def from_config(cfg: dict) -> "Scenario":
        perts = tuple(
            Perturbation(p["trigger"], float(p["at"]), tuple(float(v) for v in p["delta"]))
            for p in cfg.get("perturbations", ())
        )
        return Scenario(
            kind=cfg.get("kind", "straight"),
            duration=float(cfg.get("duration", 10.0)),
            v_nominal=float(cfg.get("v_nominal", 0.05)),
            targets=tuple(tuple(float(v) for v in t) for t in cfg.get("targets", ())),
            target_tolerance=float(cfg.get("target_tolerance", 0.01)),
            perturbations=perts,
            initial_state=tuple(float(v) for v in cfg.get("initial_state", (0, 0, 0, 0))),
        )


def straight_line_scenario(
    duration: float = 10.0, perturb: bool = True, speed: float = 0.05
) -> Scenario:
    """Straight push along +x; optionally the reference lateral bump at x=0.075 m."""
    perts = (
        (Perturbation(trigger="x", at=0.075, delta=(0.0, 0.01, 15.0 * math.pi / 180.0, 0.0)),)
        if perturb
        else ()
    )
    return Scenario(kind="straight", duration=duration, v_nominal=speed, perturbations=perts)


def target_scenario(
    targets: tuple[tuple[float, float], ...] = DEFAULT_TARGETS,
    duration: float = 60.0,
    speed: float = 0.05,
    tolerance: float = 0.01,
) -> Scenario:
    return Scenario(
        kind="targets",
        duration=duration,
        v_nominal=speed,
        targets=tuple(tuple(t) for t in targets),
        target_tolerance=tolerance,
    )


@dataclass(frozen=True)
class TargetFrame:
    """Aiming frame: x axis from the slider center toward the target."""

    theta_c: float
    theta_rel: float
    origin: tuple[float, float]


def target_frame(state: SliderState, target: tuple[float, float]) -> TargetFrame:
    dx = target[0] - state.x
    dy = target[1] - state.y
    if math.hypot(dx, dy) < 1e-12:
        raise TargetFrameError("target coincides with the slider center")
    theta_c = math.atan2(dy, dx)
    return TargetFrame(
        theta_c=theta_c,
        theta_rel=wrap_angle(state.theta - theta_c),
        origin=(state.x, state.y),
    )


@dataclass(frozen=True)
class PeriodRecord:
    t: float
    state: SliderState  # state at the start of the period
    u_applied: PusherInput
    chosen_schedule: str
    per_schedule_costs: tuple
    cost: float
    solve_time: float
    mode_realized: str
    flags: tuple[str, ...]


@dataclass
class RunLog:
    records: list[PeriodRecord] = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    status: str = "ok"

    def state_array(self) -> np.ndarray:
        """(n, 5) array of t and the four state components per period."""
        return np.array(
            [[r.t, r.state.x, r.state.y, r.state.theta, r.state.p_y] for r in self.records]
        )


class ClosedLoop:
    """Plant plus controller stepped one period at a time.

    The same object backs the batch runners and the live service, so a
    command-free service session reproduces a batch run exactly.
    """

    def __init__(
        self,
        params: ModelParams,
        config: MpcConfig,
        scenario: Scenario,
        controller: str = "fom",
        family: FamilyOfModes | None = None,
    ):
        if controller not in ("fom", "miqp"):
            raise ValueError("controller must be 'fom' or 'miqp'")
        if controller == "miqp" and config.N > 8:
            raise ValueError("the exact MIQP controller is limited to N <= 8")
        self.params = params
        self.config = config
        self.scenario = scenario
        self.controller = controller
        self.family = family if family is not None else default_family(config.N)
        self.state = SliderState(*scenario.initial_state)
        self.t = 0.0
        self.nominal = Nominal.line(scenario.v_nominal)
        self.v_x = scenario.v_nominal
        self.targets: list[tuple[float, float]] = [tuple(t) for t in scenario.targets]
        self.target_idx = 0
        self._pending = list(scenario.perturbations)
        self.last_u = PusherInput(0.0, 0.0)
        self.fault_count = 0
        self.log = RunLog(
            meta={
                "scenario": scenario.kind,
                "controller": controller,
                "duration": scenario.duration,
                "v_nominal": scenario.v_nominal,
                "targets": [list(t) for t in scenario.targets],
            }
        )
        self.done = False

    @property
    def active_target(self) -> tuple[float, float] | None:
        if self.scenario.kind != "targets" or self.target_idx >= len(self.targets):
            return None
        return self.targets[self.target_idx]

    def apply_delta(self, delta) -> None:
        arr = self.state.as_array() + np.asarray(delta, dtype=float)
        self.state = SliderState.from_array(arr)

    def _check_perturbations(self) -> tuple[str, ...]:
        flags: tuple[str, ...] = ()
        remaining = []
        for p in self._pending:
            value = self.state.x if p.trigger == "x" else self.t
            if value >= p.at - 1e-12:
                self.apply_delta(p.delta)
                flags += ("perturbed",)
            else:
                remaining.append(p)
        self._pending = remaining
        return flags

    def _advance_targets(self) -> tuple[str, ...]:
        flags: tuple[str, ...] = ()
        while self.target_idx < len(self.targets):
            tx, ty = self.targets[self.target_idx]
            if math.hypot(tx - self.state.x, ty - self.state.y) >= self.scenario.target_tolerance:
                break
            flags += (f"target_{self.target_idx}_reached",)
            self.target_idx += 1
        if self.target_idx >= len(self.targets):
            self.done = True
            self.log.status = "targets_reached"
        return flags

    def _control(self) -> ControlResult:
        if self.scenario.kind == "straight":
            ctrl_state, ctrl_t = self.state, self.t
            nominal = self.nominal
        else:
            # re-aim every period: plan in the frame pointing at the target,
            # with the prediction clock restarted at zero
            frame = target_frame(self.state, self.targets[self.target_idx])
            ctrl_state = SliderState(0.0, 0.0, frame.theta_rel, self.state.p_y)
            ctrl_t = 0.0
            nominal = Nominal.line(self.v_x)
        if self.controller == "fom":
            return fom_step(ctrl_state, ctrl_t, self.family, nominal, self.config, self.params)
        return miqp_step(ctrl_state, ctrl_t, nominal, self.config, self.params)

    def advance_period(self) -> PeriodRecord | None:
        """Run one controller period; returns the record, or None once done."""
        if self.done:
            return None
        flags = self._check_perturbations()
        if self.scenario.kind == "targets":
            flags += self._advance_targets()
            if self.done:
                # reaching the final target ends the run before another
                # control period; keep its flags on the last record
                if flags and self.log.records:
                    last = self.log.records[-1]
                    self.log.records[-1] = dataclasses.replace(
                        last, flags=last.flags + flags
                    )
                return None

        state_before = self.state
        try:
            result = self._control()
            u = result.u_applied
            self.last_u = u
        except ControllerFault:
            # hold the previous input for one period and keep going
            result = None
            u = self.last_u
            self.fault_count += 1
            flags += ("fault",)

        step_res = model.step(state_before, u, self.config.h, self.params)
        if step_res.clamped:
            flags += ("p_y_clamped",)
        self.state = step_res.state
        record = PeriodRecord(
            t=self.t,
            state=state_before,
            u_applied=u,
            chosen_schedule=result.chosen_schedule if result else "",
            per_schedule_costs=tuple(result.per_schedule_costs) if result else (),
            cost=result.cost if result else math.nan,
            solve_time=result.solve_time if result else 0.0,
            mode_realized=step_res.mode.letter,
            flags=flags + tuple(result.flags if result else ()),
        )
        self.log.records.append(record)
        self.t += self.config.h

        if self.t >= self.scenario.duration - 1e-12:
            self.done = True
            if self.scenario.kind == "targets" and self.target_idx < len(self.targets):
                self.log.status = "timeout"
        return record

    def run(self) -> RunLog:
        while not self.done:
            self.advance_period()
        self.log.meta["fault_count"] = self.fault_count
        return self.log

    # live-steering hooks used by the session host
    def set_target(self, x: float, y: float) -> None:
        self.targets = [(float(x), float(y))]
        self.target_idx = 0
        if self.scenario.kind == "targets":
            self.done = False
            self.log.status = "ok"

    def set_speed(self, v_x: float) -> None:
        self.v_x = float(v_x)

    def reset_state(self, state: SliderState) -> None:
        self.state = state
        self.last_u = PusherInput(0.0, 0.0)


def run_straight_line(
    scenario: Scenario,
    params: ModelParams | None = None,
    config: MpcConfig | None = None,
    controller: str = "fom",
) -> RunLog:
    """Simulate straight-line tracking for the scenario's duration."""
    if scenario.kind != "straight":
        raise ValueError("expected a straight-line scenario")
    loop = ClosedLoop(
        params or model.default_params(),
        config or MpcConfig(),
        scenario,
        controller=controller,
    )
    return loop.run()


def run_target_tracking(
    scenario: Scenario,
    params: ModelParams | None = None,
    config: MpcConfig | None = None,
    controller: str = "fom",
) -> RunLog:
    """Guide the slider through the scenario targets; times out, never crashes."""
    if scenario.kind != "targets":
        raise ValueError("expected a target-tracking scenario")
    loop = ClosedLoop(
        params or model.default_params(),
        config or MpcConfig(),
        scenario,
        controller=controller,
    )
    return loop.run()


def _fmt(value: float) -> str:
    return repr(float(value))


def emit_outputs(log: RunLog, out_dir: str) -> tuple[str, str]:
    """Write run.csv and summary.json; returns their paths."""
    if not log.records:
        raise ValueError("refusing to emit outputs for an empty run log")
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "run.csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in log.records:
            writer.writerow(
                [
                    _fmt(r.t),
                    _fmt(r.state.x),
                    _fmt(r.state.y),
                    _fmt(r.state.theta),
                    _fmt(r.state.p_y),
                    _fmt(r.u_applied.v_n),
                    _fmt(r.u_applied.v_t),
                    r.chosen_schedule,
                    _fmt(r.cost),
                    _fmt(r.solve_time * 1e3),
                    ";".join(r.flags),
                ]
            )

    last = log.records[-1]
    targets_reached = sum(
        1 for r in log.records for f in r.flags if f.startswith("target_") and f.endswith("_reached")
    )
    if log.meta.get("scenario") == "targets":
        # distance from the final state to the last target
        tgt = log.meta.get("targets") or []
        final_error = (
            math.hypot(tgt[-1][0] - last.state.x, tgt[-1][1] - last.state.y)
            if tgt
            else math.nan
        )
    else:
        final_error = max(abs(last.state.y), abs(wrap_angle(last.state.theta)))
    summary = {
        "status": log.status,
        "periods": len(log.records),
        "final_error": final_error,
        "targets_reached": targets_reached,
        "max_solve_time": max(r.solve_time for r in log.records),
        "fault_count": sum(1 for r in log.records if "fault" in r.flags),
    }
    summary.update({k: v for k, v in log.meta.items() if k in ("scenario", "controller", "seed")})
    json_path = os.path.join(out_dir, "summary.json")
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
    return csv_path, json_path
