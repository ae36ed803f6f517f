"""Receding-horizon controllers over the linearized pusher-slider dynamics.

A mode schedule assigns one contact mode to each of the N horizon steps;
fixing the schedule turns the hybrid finite-horizon problem into a convex
QP over the stacked perturbations [xbar_1..xbar_N, ubar_0..ubar_{N-1}].
Three solvers share that builder:

* ``fom_step`` races a small family of hand-picked schedules and applies
  the first input of the cheapest feasible one;
* ``miqp_step`` finds the exact optimum over all 3^N schedules by
  depth-first branch-and-bound, using prefix-relaxed QPs as lower bounds;
* ``enumerate_step`` brute-forces every schedule (test oracle, small N).

Step 0 is special: the current state is known exactly, so its input-cone
rows and input map are evaluated at the true state instead of the nominal.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from . import qp
from .linearize import DEFAULT_EPSILON, Nominal, NominalPoint, cone_rows, jacobians
from .model import ContactMode, ModelParams, PusherInput, SliderState, classify_mode, mode_dynamics, motion_cone

__all__ = [
    "ControlResult",
    "ControllerFault",
    "FamilyOfModes",
    "LinearizedHorizon",
    "ModeSchedule",
    "MpcConfig",
    "build_qp",
    "default_family",
    "default_mpc_config",
    "enumerate_step",
    "fom_step",
    "miqp_step",
]

_NX, _NU = 4, 2
_TIE_TOL = 1e-9  # cost ties resolve to the lowest schedule index
_MODE_ORDER = (ContactMode.STICKING, ContactMode.SLIDING_UP, ContactMode.SLIDING_DOWN)


class ControllerFault(RuntimeError):
    """No schedule produced a feasible program for the current state."""


@dataclass(frozen=True)
class MpcConfig:
    """Horizon length and weights of the finite-horizon tracking cost."""

    N: int = 35
    h: float = 0.03
    Q: np.ndarray = field(default_factory=lambda: 10.0 * np.diag([1.0, 3.0, 0.1, 0.0]))
    Q_N: np.ndarray = field(default_factory=lambda: 200.0 * np.diag([1.0, 3.0, 0.1, 0.0]))
    R: np.ndarray = field(default_factory=lambda: 0.5 * np.eye(2))
    v_n_max: float = 0.1
    v_t_max: float = 0.1
    big_M: float = 10.0
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("horizon must have at least one step")
        if self.h <= 0:
            raise ValueError("step length must be positive")
        if self.big_M <= 0:
            raise ValueError("big_M must be positive")

    def to_config(self) -> dict:
        return {
            "N": self.N,
            "h": self.h,
            "Q": np.asarray(self.Q).tolist(),
            "Q_N": np.asarray(self.Q_N).tolist(),
            "R": np.asarray(self.R).tolist(),
            "v_n_max": self.v_n_max,
            "v_t_max": self.v_t_max,
            "big_M": self.big_M,
            "epsilon": self.epsilon,
        }

    @staticmethod
    def from_config(cfg: dict) -> "MpcConfig":
        base = default_mpc_config()
        kwargs = {}
        for key in ("N",):
            if key in cfg:
                kwargs[key] = int(cfg[key])
        for key in ("h", "v_n_max", "v_t_max", "big_M", "epsilon"):
            if key in cfg:
                kwargs[key] = float(cfg[key])
        for key in ("Q", "Q_N", "R"):
            if key in cfg:
                kwargs[key] = np.asarray(cfg[key], dtype=float)
        return MpcConfig(**{**_as_kwargs(base), **kwargs})


def _as_kwargs(cfg: MpcConfig) -> dict:
    return {
        "N": cfg.N,
        "h": cfg.h,
        "Q": cfg.Q,
        "Q_N": cfg.Q_N,
        "R": cfg.R,
        "v_n_max": cfg.v_n_max,
        "v_t_max": cfg.v_t_max,
        "big_M": cfg.big_M,
        "epsilon": cfg.epsilon,
    }


def default_mpc_config() -> MpcConfig:
    return MpcConfig()


@dataclass(frozen=True)
class ModeSchedule:
    modes: tuple[ContactMode, ...]
    label: str

    def __len__(self) -> int:
        return len(self.modes)

    @property
    def letters(self) -> str:
        return "".join(m.letter for m in self.modes)


@dataclass(frozen=True)
class FamilyOfModes:
    """Fixed set of candidate schedules raced every period; ties break low-index."""

    schedules: tuple[ModeSchedule, ...]

    def __post_init__(self):
        if not self.schedules:
            raise ValueError("family must contain at least one schedule")
        lengths = {len(s) for s in self.schedules}
        if len(lengths) != 1:
            raise ValueError("all schedules in a family must share one length")


def default_family(N: int) -> FamilyOfModes:
    """The three-schedule family: slide-up-then-stick, slide-down-then-stick, all-stick."""
    if N < 1:
        raise ValueError("N must be at least 1")
    stick_tail = (ContactMode.STICKING,) * (N - 1)
    return FamilyOfModes(
        schedules=(
            ModeSchedule((ContactMode.SLIDING_UP,) + stick_tail, "M1"),
            ModeSchedule((ContactMode.SLIDING_DOWN,) + stick_tail, "M2"),
            ModeSchedule((ContactMode.STICKING,) * N, "M3"),
        )
    )


@dataclass
class ControlResult:
    u_applied: PusherInput
    cost: float
    chosen_schedule: str
    per_schedule_costs: list
    solve_time: float
    status: str
    flags: tuple[str, ...] = ()


class LinearizedHorizon:
    """Shared linearization data for one control instant.

    Caches, per horizon step and contact mode, the frozen zero-order-hold
    matrices used by every schedule's QP, plus the step-0 quantities
    evaluated at the true measured state.
    """

    def __init__(
        self,
        x0: SliderState,
        t0: float,
        nominal: Nominal,
        config: MpcConfig,
        params: ModelParams,
    ):
        self.x0 = x0
        self.t0 = t0
        self.nominal = nominal
        self.config = config
        self.params = params
        nom0 = nominal.at(t0)
        self.xbar0 = x0.as_array() - nom0.x_star.as_array()
        self.u_star = [
            nominal.at(t0 + n * config.h).u_star for n in range(config.N)
        ]
        self._point0 = NominalPoint(x_star=x0, u_star=nom0.u_star, t=t0)
        mode_star = classify_mode(nom0.u_star, motion_cone(nom0.x_star, params))
        self.f_star0 = mode_dynamics(nom0.x_star, nom0.u_star, mode_star, params)
        self._exact0: dict[ContactMode, tuple] = {}
        self._dyn: dict[tuple[int, ContactMode], tuple] = {}
        self._cone: dict[tuple[int, ContactMode], tuple] = {}

    def exact0(self, mode: ContactMode) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(B0, D0, g0, f_j0-constant) with B, D, g at the true x0."""
        if mode not in self._exact0:
            _, B0 = jacobians(mode, self._point0, self.params)
            _, D0, g0 = cone_rows(mode, self._point0, self.params, self.config.epsilon)
            u0 = self.u_star[0].as_array()
            fj0 = self.xbar0 + self.config.h * (B0 @ u0 - self.f_star0)
            self._exact0[mode] = (B0, D0, g0, fj0)
        return self._exact0[mode]

    def _nominal_point(self, n: int) -> NominalPoint:
        return self.nominal.at(self.t0 + n * self.config.h)

    def dyn(self, n: int, mode: ContactMode) -> tuple[np.ndarray, np.ndarray]:
        key = (n, mode)
        if key not in self._dyn:
            self._dyn[key] = jacobians(mode, self._nominal_point(n), self.params)
        return self._dyn[key]

    def cone(self, n: int, mode: ContactMode) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        key = (n, mode)
        if key not in self._cone:
            self._cone[key] = cone_rows(
                mode, self._nominal_point(n), self.params, self.config.epsilon
            )
        return self._cone[key]


def _cost_matrices(config: MpcConfig) -> np.ndarray:
    N = config.N
    n = (_NX + _NU) * N
    H = np.zeros((n, n))
    Q = np.asarray(config.Q, dtype=float)
    Q_N = np.asarray(config.Q_N, dtype=float)
    R = np.asarray(config.R, dtype=float)
    for k in range(1, N + 1):
        blk = Q + Q_N if k == N else Q
        i = _NX * (k - 1)
        H[i : i + _NX, i : i + _NX] = 2.0 * blk
    for k in range(N):
        i = _NX * N + _NU * k
        H[i : i + _NU, i : i + _NU] = 2.0 * R
    return H


def _input_bound_rows(
    config: MpcConfig, u_star: list[PusherInput]
) -> tuple[np.ndarray, np.ndarray]:
    """Bounds on the applied inputs: 0 <= v_n <= v_n_max, |v_t| <= v_t_max.

    The normal component may never pull, so its lower bound is zero rather
    than -v_n_max.
    """
    N = config.N
    n = (_NX + _NU) * N
    A = np.zeros((4 * N, n))
    b = np.zeros(4 * N)
    for k in range(N):
        i = _NX * N + _NU * k
        r = 4 * k
        us = u_star[k]
        A[r, i] = 1.0
        b[r] = config.v_n_max - us.v_n
        A[r + 1, i] = -1.0
        b[r + 1] = us.v_n  # v_n >= 0
        A[r + 2, i + 1] = 1.0
        b[r + 2] = config.v_t_max - us.v_t
        A[r + 3, i + 1] = -1.0
        b[r + 3] = config.v_t_max + us.v_t
    return A, b


def _assemble(
    horizon: LinearizedHorizon,
    modes: tuple[ContactMode, ...],
    cone_steps: int,
) -> qp.QpProblem:
    """QP with dynamics/cone rows for steps < len(modes), cone rows capped at cone_steps."""
    config = horizon.config
    N = config.N
    h = config.h
    n = (_NX + _NU) * N
    depth = len(modes)

    A_eq = np.zeros((_NX * depth, n))
    b_eq = np.zeros(_NX * depth)
    in_rows: list[np.ndarray] = []
    in_rhs: list[float] = []

    def x_slice(k: int) -> slice:  # xbar_k, k = 1..N
        return slice(_NX * (k - 1), _NX * k)

    def u_slice(k: int) -> slice:  # ubar_k, k = 0..N-1
        return slice(_NX * N + _NU * k, _NX * N + _NU * (k + 1))

    for k, mode in enumerate(modes):
        r = slice(_NX * k, _NX * (k + 1))
        if k == 0:
            B0, D0, g0, fj0 = horizon.exact0(mode)
            A_eq[r, x_slice(1)] = np.eye(_NX)
            A_eq[r, u_slice(0)] = -h * B0
            b_eq[r] = fj0
            if k < cone_steps:
                for row in range(D0.shape[0]):
                    arow = np.zeros(n)
                    arow[u_slice(0)] = D0[row]
                    in_rows.append(arow)
                    in_rhs.append(g0[row])
        else:
            A_k, B_k = horizon.dyn(k, mode)
            A_eq[r, x_slice(k + 1)] = np.eye(_NX)
            A_eq[r, x_slice(k)] = -(np.eye(_NX) + h * A_k)
            A_eq[r, u_slice(k)] = -h * B_k
            if k < cone_steps:
                E_k, D_k, g_k = horizon.cone(k, mode)
                for row in range(D_k.shape[0]):
                    arow = np.zeros(n)
                    arow[x_slice(k)] = E_k[row]
                    arow[u_slice(k)] = D_k[row]
                    in_rows.append(arow)
                    in_rhs.append(g_k[row])

    A_bnd, b_bnd = _input_bound_rows(config, horizon.u_star)
    A_in = np.vstack([np.array(in_rows).reshape(-1, n), A_bnd])
    b_in = np.concatenate([np.array(in_rhs), b_bnd])
    return qp.QpProblem.build(
        H=_cost_matrices(config), f=np.zeros(n), A_eq=A_eq, b_eq=b_eq, A_in=A_in, b_in=b_in
    )


def build_qp(
    schedule: ModeSchedule,
    x0: SliderState,
    t0: float,
    nominal: Nominal,
    config: MpcConfig,
    params: ModelParams,
    horizon: LinearizedHorizon | None = None,
) -> qp.QpProblem:
    """Finite-horizon tracking QP for one fixed mode schedule.

    Decision vector stacks xbar_1..xbar_N then ubar_0..ubar_{N-1}. The
    equalities are the zero-order-hold dynamics (step 0 anchored at the
    measured state); inequalities are the per-step cone rows plus input
    bounds on the applied velocities.
    """
    if len(schedule) != config.N:
        raise ValueError(
            f"schedule length {len(schedule)} does not match horizon {config.N}"
        )
    if horizon is None:
        horizon = LinearizedHorizon(x0, t0, nominal, config, params)
    return _assemble(horizon, schedule.modes, cone_steps=config.N)


def _extract_u0(
    sol: qp.QpSolution, horizon: LinearizedHorizon
) -> PusherInput:
    config = horizon.config
    i = _NX * config.N
    ubar0 = sol.z[i : i + _NU]
    us = horizon.u_star[0]
    v_n = min(max(us.v_n + ubar0[0], 0.0), config.v_n_max)
    v_t = min(max(us.v_t + ubar0[1], -config.v_t_max), config.v_t_max)
    return PusherInput(float(v_n), float(v_t))


def fom_step(
    x: SliderState,
    t: float,
    family: FamilyOfModes,
    nominal: Nominal,
    config: MpcConfig,
    params: ModelParams,
) -> ControlResult:
    """One family-of-modes control period: m convex programs, best feasible wins."""
    start = time.perf_counter()
    horizon = LinearizedHorizon(x, t, nominal, config, params)
    costs: list = []
    best_idx = -1
    best_sol: qp.QpSolution | None = None
    for idx, schedule in enumerate(family.schedules):
        problem = _assemble(horizon, schedule.modes, cone_steps=config.N)
        sol = qp.solve(problem)
        if sol.status is qp.QpStatus.OPTIMAL:
            costs.append(sol.cost)
            if best_sol is None or sol.cost < best_sol.cost - _TIE_TOL:
                best_idx, best_sol = idx, sol
        else:
            costs.append(None)
    if best_sol is None:
        raise ControllerFault("all schedules infeasible at the current state")
    return ControlResult(
        u_applied=_extract_u0(best_sol, horizon),
        cost=best_sol.cost,
        chosen_schedule=family.schedules[best_idx].label,
        per_schedule_costs=costs,
        solve_time=time.perf_counter() - start,
        status="ok",
    )


def _big_m_audit(
    horizon: LinearizedHorizon, modes: tuple[ContactMode, ...], z: np.ndarray
) -> bool:
    """Check deactivated-mode constraint slacks against the big-M headroom.

    In the integer-program view every non-selected mode's rows are relaxed
    by M; if the optimal point sits within 1% of that slack, M was too
    small to be a faithful deactivation.
    """
    config = horizon.config
    N = config.N
    h = config.h
    limit = 0.99 * config.big_M
    xbar = np.concatenate([horizon.xbar0, z[: _NX * N]])
    x_of = lambda k: xbar[_NX * k : _NX * (k + 1)]  # noqa: E731
    u_of = lambda k: z[_NX * N + _NU * k : _NX * N + _NU * (k + 1)]  # noqa: E731
    for k in range(N):
        for mode in _MODE_ORDER:
            if mode is modes[k]:
                continue
            if k == 0:
                B0, D0, g0, fj0 = horizon.exact0(mode)
                dyn_resid = x_of(1) - (fj0 + h * (B0 @ u_of(0)))
                cone_resid = D0 @ u_of(0) - g0
            else:
                A_k, B_k = horizon.dyn(k, mode)
                E_k, D_k, g_k = horizon.cone(k, mode)
                dyn_resid = x_of(k + 1) - ((np.eye(_NX) + h * A_k) @ x_of(k) + h * (B_k @ u_of(k)))
                cone_resid = E_k @ x_of(k) + D_k @ u_of(k) - g_k
            if np.abs(dyn_resid).max() >= limit or cone_resid.max(initial=-np.inf) >= limit:
                return True
    return False


def miqp_step(
    x: SliderState,
    t: float,
    nominal: Nominal,
    config: MpcConfig,
    params: ModelParams,
) -> ControlResult:
    """Exact hybrid optimum by depth-first branch-and-bound over mode schedules.

    A node fixes the modes of a prefix of steps; its bound is the QP with
    dynamics and cone rows only on that prefix (input bounds everywhere),
    which relaxes every completion. Children expand Stick, SlideUp,
    SlideDown in that order; nodes at or above the incumbent are pruned.
    """
    start = time.perf_counter()
    N = config.N
    horizon = LinearizedHorizon(x, t, nominal, config, params)

    root = qp.solve(_assemble(horizon, (), cone_steps=0))
    if root.status is not qp.QpStatus.OPTIMAL:
        raise ControllerFault("relaxed root program infeasible")

    incumbent: qp.QpSolution | None = None
    incumbent_modes: tuple[ContactMode, ...] = ()
    nodes = 0

    def visit(prefix: tuple[ContactMode, ...]) -> None:
        nonlocal incumbent, incumbent_modes, nodes
        for mode in _MODE_ORDER:
            child = prefix + (mode,)
            sol = qp.solve(_assemble(horizon, child, cone_steps=len(child)))
            nodes += 1
            if sol.status is not qp.QpStatus.OPTIMAL:
                continue  # every completion of this prefix is infeasible
            if incumbent is not None and sol.cost >= incumbent.cost - 1e-10 * max(
                1.0, abs(incumbent.cost)
            ):
                continue
            if len(child) == N:
                incumbent, incumbent_modes = sol, child
            else:
                visit(child)

    visit(())
    if incumbent is None:
        raise ControllerFault("all mode schedules infeasible at the current state")

    flags: tuple[str, ...] = ()
    if _big_m_audit(horizon, incumbent_modes, incumbent.z):
        flags = ("big_m_marginal",)
    label = "miqp:" + "".join(m.letter for m in incumbent_modes)
    return ControlResult(
        u_applied=_extract_u0(incumbent, horizon),
        cost=incumbent.cost,
        chosen_schedule=label,
        per_schedule_costs=[incumbent.cost],
        solve_time=time.perf_counter() - start,
        status="ok",
        flags=flags,
    )


def enumerate_step(
    x: SliderState,
    t: float,
    nominal: Nominal,
    config: MpcConfig,
    params: ModelParams,
) -> ControlResult:
    """Brute-force minimum over all 3^N schedules. Test oracle; N is capped."""
    if config.N > 8:
        raise ValueError("exhaustive enumeration is limited to N <= 8")
    start = time.perf_counter()
    horizon = LinearizedHorizon(x, t, nominal, config, params)
    best: qp.QpSolution | None = None
    best_modes: tuple[ContactMode, ...] = ()
    costs: list = []
    for modes in itertools.product(_MODE_ORDER, repeat=config.N):
        sol = qp.solve(_assemble(horizon, modes, cone_steps=config.N))
        if sol.status is qp.QpStatus.OPTIMAL:
            costs.append(sol.cost)
            if best is None or sol.cost < best.cost - _TIE_TOL:
                best, best_modes = sol, modes
        else:
            costs.append(None)
    if best is None:
        raise ControllerFault("all mode schedules infeasible at the current state")
    label = "enum:" + "".join(m.letter for m in best_modes)
    return ControlResult(
        u_applied=_extract_u0(best, horizon),
        cost=best.cost,
        chosen_schedule=label,
        per_schedule_costs=costs,
        solve_time=time.perf_counter() - start,
        status="ok",
    )
