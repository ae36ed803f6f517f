"""Quasi-static planar pusher-slider model.

The slider is a rectangular object pushed on a flat surface by a point
pusher acting on its left face (at abscissa ``p_x = -side_a/2`` in the body
frame). State is ``[x, y, theta, p_y]``: slider pose in the world frame plus
the pusher's tangential offset along the contact face. Input is the pusher
velocity ``[v_n, v_t]`` resolved in the body frame, with ``v_n >= 0``
pushing into the face.

Inertial effects are neglected: pusher velocity maps directly to slider
velocity through the ground-friction limit surface (ellipsoidal
approximation). Contact is in exactly one of three modes -- sticking,
sliding up, sliding down -- selected by the motion cone, and each mode has
its own motion equations, linear in the input velocity.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ContactMode",
    "ModelParams",
    "MotionCone",
    "NumericError",
    "ParameterError",
    "PusherInput",
    "SingularityError",
    "SliderState",
    "StepResult",
    "classify_mode",
    "compute_limit_surface",
    "default_params",
    "mean_contact_distance",
    "mode_dynamics",
    "motion_cone",
    "step",
]


class ParameterError(ValueError):
    """A physical parameter is outside its admissible domain."""


class SingularityError(ArithmeticError):
    """A motion-cone denominator lost positivity."""


class NumericError(ArithmeticError):
    """A numerical routine produced non-finite values or failed to converge."""


class ContactMode(enum.Enum):
    """Contact interaction mode between pusher and slider."""

    STICKING = 1
    SLIDING_UP = 2
    SLIDING_DOWN = 3

    @property
    def letter(self) -> str:
        return {"STICKING": "S", "SLIDING_UP": "U", "SLIDING_DOWN": "D"}[self.name]


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the pusher-slider pair plus derived quantities.

    ``f_max``/``m_max`` are the semi-axes of the ellipsoidal limit surface,
    ``c = m_max / f_max`` (units of meters) is the ratio entering the motion
    cone and the motion equations, and ``p_x = -side_a/2`` is the fixed
    abscissa of the pushing face. Construct via :func:`compute_limit_surface`
    so the derived fields are consistent.
    """

    mu_p: float
    mu_g: float
    mass: float
    gravity: float
    side_a: float
    side_b: float
    area: float
    f_max: float
    m_max: float
    c: float
    p_x: float

    def to_config(self) -> dict:
        """Primitive parameters only; derived fields are recomputed on load."""
        return {
            "mu_p": self.mu_p,
            "mu_g": self.mu_g,
            "mass": self.mass,
            "gravity": self.gravity,
            "side_a": self.side_a,
            "side_b": self.side_b,
        }

    @staticmethod
    def from_config(cfg: dict) -> "ModelParams":
        keys = ("mu_p", "mu_g", "mass", "gravity", "side_a", "side_b")
        missing = [k for k in keys if k not in cfg]
        if missing:
            raise ParameterError(f"model config missing keys: {missing}")
        return compute_limit_surface(**{k: float(cfg[k]) for k in keys})


@dataclass(frozen=True)
class SliderState:
    """Slider pose [x, y, theta] plus pusher offset p_y on the contact face."""

    x: float
    y: float
    theta: float
    p_y: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta, self.p_y], dtype=float)

    @staticmethod
    def from_array(arr) -> "SliderState":
        x, y, theta, p_y = (float(v) for v in arr)
        return SliderState(x, y, theta, p_y)


@dataclass(frozen=True)
class PusherInput:
    """Pusher velocity in the slider body frame: normal v_n, tangential v_t."""

    v_n: float
    v_t: float

    def as_array(self) -> np.ndarray:
        return np.array([self.v_n, self.v_t], dtype=float)


@dataclass(frozen=True)
class MotionCone:
    """Slopes of the motion-cone boundaries; sticking iff gb*vn <= vt <= gt*vn."""

    gamma_t: float
    gamma_b: float


@dataclass(frozen=True)
class StepResult:
    state: SliderState
    mode: ContactMode
    clamped: bool


def _gauss_mean_distance(side_a: float, side_b: float, order: int) -> float:
    # integrand is even in both coordinates: integrate one quadrant
    nodes, weights = np.polynomial.legendre.leggauss(order)
    xg = (nodes + 1.0) * (side_a / 4.0)
    yg = (nodes + 1.0) * (side_b / 4.0)
    wx = weights * (side_a / 4.0)
    wy = weights * (side_b / 4.0)
    X, Y = np.meshgrid(xg, yg)
    integral = 4.0 * float(np.einsum("i,j,ij->", wy, wx, np.hypot(X, Y)))
    return integral / (side_a * side_b)


def mean_contact_distance(side_a: float, side_b: float, order: int | None = None) -> float:
    """Mean distance from the footprint center, (1/A) * integral of ||r|| dA.

    Tensor-product Gauss-Legendre per quadrant. With ``order`` unset the rule
    order doubles until two consecutive levels agree to 1e-8 relative.
    """
    if side_a <= 0 or side_b <= 0:
        raise ParameterError("footprint sides must be positive")
    if order is not None:
        return _gauss_mean_distance(side_a, side_b, order)
    prev = None
    p = 8
    while p <= 512:
        val = _gauss_mean_distance(side_a, side_b, p)
        if prev is not None and abs(val - prev) <= 1e-8 * abs(val):
            return val
        prev = val
        p *= 2
    raise NumericError("footprint quadrature did not converge")


def compute_limit_surface(
    mu_p: float,
    mu_g: float,
    mass: float,
    gravity: float = 9.81,
    side_a: float = 0.09,
    side_b: float = 0.09,
) -> ModelParams:
    """Build full ModelParams, deriving the limit-surface quantities.

    f_max = mu_g*m*g, m_max = (mu_g*m*g/A) * integral of ||r|| dA over the
    uniform-pressure rectangular footprint, and c = m_max/f_max. Note c
    reduces to the footprint's mean center distance.
    """
    if side_a <= 0 or side_b <= 0:
        raise ParameterError("slider dimensions must be positive")
    if mass <= 0:
        raise ParameterError("mass must be positive")
    if gravity <= 0:
        raise ParameterError("gravity must be positive")
    if mu_g <= 0:
        raise ParameterError("ground friction coefficient must be positive")
    if mu_p < 0:
        raise ParameterError("pusher friction coefficient must be non-negative")
    area = side_a * side_b
    f_max = mu_g * mass * gravity
    c = mean_contact_distance(side_a, side_b)
    m_max = f_max * c
    return ModelParams(
        mu_p=mu_p,
        mu_g=mu_g,
        mass=mass,
        gravity=gravity,
        side_a=side_a,
        side_b=side_b,
        area=area,
        f_max=f_max,
        m_max=m_max,
        c=c,
        p_x=-side_a / 2.0,
    )


def default_params() -> ModelParams:
    """Reference hardware setup: 1.05 kg, 0.09 m square aluminum slider."""
    return compute_limit_surface(
        mu_p=0.3, mu_g=0.35, mass=1.05, gravity=9.81, side_a=0.09, side_b=0.09
    )


def _cone_slopes(p_y: float, params: ModelParams) -> tuple[float, float]:
    mu, c, p_x = params.mu_p, params.c, params.p_x
    c2 = c * c
    den_t = c2 + p_y * p_y - mu * p_x * p_y
    den_b = c2 + p_y * p_y + mu * p_x * p_y
    if den_t <= 0.0 or den_b <= 0.0:
        raise SingularityError(f"motion-cone denominator non-positive at p_y={p_y}")
    gamma_t = (mu * c2 - p_x * p_y + mu * p_x * p_x) / den_t
    gamma_b = (-mu * c2 - p_x * p_y - mu * p_x * p_x) / den_b
    return gamma_t, gamma_b


def motion_cone(state: SliderState, params: ModelParams) -> MotionCone:
    """Motion-cone boundary slopes at the current contact offset."""
    gamma_t, gamma_b = _cone_slopes(state.p_y, params)
    return MotionCone(gamma_t=gamma_t, gamma_b=gamma_b)


def classify_mode(u: PusherInput, mc: MotionCone) -> ContactMode:
    """Contact mode for a pusher velocity; the sticking cone is closed.

    Velocities exactly on a cone boundary classify as sticking, which is
    consistent because the mode dynamics coincide there.
    """
    if mc.gamma_b * u.v_n <= u.v_t <= mc.gamma_t * u.v_n:
        return ContactMode.STICKING
    if u.v_t > mc.gamma_t * u.v_n:
        return ContactMode.SLIDING_UP
    return ContactMode.SLIDING_DOWN


def _mode_matrices(
    p_y: float, params: ModelParams, mode: ContactMode
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Body-frame pieces of the motion equations: (Q @ P, b, c_vec).

    The printed per-mode rows are normalized so that the three modes agree
    on the motion-cone boundaries: the whole b row carries 1/(c^2+px^2+py^2),
    and the sliding ``c`` rows are [-gamma, 1], i.e. p_y rate = relative slip.
    """
    c2 = params.c * params.c
    p_x = params.p_x
    d = c2 + p_x * p_x + p_y * p_y
    Q = np.array(
        [[c2 + p_x * p_x, p_x * p_y], [p_x * p_y, c2 + p_y * p_y]], dtype=float
    ) / d
    if mode is ContactMode.STICKING:
        P = np.eye(2)
        b = np.array([-p_y, p_x]) / d
        c_vec = np.zeros(2)
    elif mode is ContactMode.SLIDING_UP:
        gamma_t, _ = _cone_slopes(p_y, params)
        P = np.array([[1.0, 0.0], [gamma_t, 0.0]])
        b = np.array([-p_y + gamma_t * p_x, 0.0]) / d
        c_vec = np.array([-gamma_t, 1.0])
    else:
        _, gamma_b = _cone_slopes(p_y, params)
        P = np.array([[1.0, 0.0], [gamma_b, 0.0]])
        b = np.array([-p_y + gamma_b * p_x, 0.0]) / d
        c_vec = np.array([-gamma_b, 1.0])
    return Q @ P, b, c_vec


def _rotation_body_to_world(theta: float) -> np.ndarray:
    ct, st = math.cos(theta), math.sin(theta)
    return np.array([[ct, -st], [st, ct]])


def mode_dynamics(
    state: SliderState, u: PusherInput, mode: ContactMode, params: ModelParams
) -> np.ndarray:
    """State derivative [dx, dy, dtheta, dp_y] for a forced contact mode."""
    QP, b, c_vec = _mode_matrices(state.p_y, params, mode)
    uvec = u.as_array()
    xy_dot = _rotation_body_to_world(state.theta) @ (QP @ uvec)
    return np.array([xy_dot[0], xy_dot[1], b @ uvec, c_vec @ uvec])


def input_jacobian(
    state: SliderState, mode: ContactMode, params: ModelParams
) -> np.ndarray:
    """4x2 map from pusher velocity to state derivative (dynamics are linear in u)."""
    QP, b, c_vec = _mode_matrices(state.p_y, params, mode)
    top = _rotation_body_to_world(state.theta) @ QP
    return np.vstack([top, b, c_vec])


def step(
    state: SliderState,
    u: PusherInput,
    dt: float,
    params: ModelParams,
    substeps: int = 10,
    force_mode: ContactMode | None = None,
) -> StepResult:
    """Advance the plant by explicit Euler substeps.

    The contact mode is re-classified at every substep unless ``force_mode``
    pins it (useful for boundary-continuity checks). The pusher offset is
    clamped to the face, |p_y| <= side_b/2, and the clamp is reported.
    """
    if dt <= 0:
        raise ParameterError("dt must be positive")
    s = state.as_array()
    h_sub = dt / substeps
    half_b = params.side_b / 2.0
    clamped = False
    first_mode: ContactMode | None = None
    for _ in range(substeps):
        st = SliderState.from_array(s)
        mode = force_mode
        if mode is None:
            mode = classify_mode(u, motion_cone(st, params))
        if first_mode is None:
            first_mode = mode
        s = s + h_sub * mode_dynamics(st, u, mode, params)
        if abs(s[3]) > half_b:
            s[3] = min(max(s[3], -half_b), half_b)
            clamped = True
    if not np.all(np.isfinite(s)):
        raise NumericError("non-finite state after plant step")
    assert first_mode is not None
    return StepResult(state=SliderState.from_array(s), mode=first_mode, clamped=clamped)
