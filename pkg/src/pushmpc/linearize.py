"""Linearization of the hybrid motion equations about a nominal trajectory.

For each contact mode j this produces the continuous-time Jacobians
A_j = df_j/dx and B_j = df_j/du at a nominal point, and the linearized
motion-cone rows E_j, D_j, g_j expressed in perturbation coordinates
(xbar, ubar) = (x - x*, u - u*). The cone slopes depend on the state only
through p_y, so their state gradients C_t, C_b have a single nonzero entry.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .model import (
    ContactMode,
    ModelParams,
    PusherInput,
    SliderState,
    _cone_slopes,
    _mode_matrices,
    _rotation_body_to_world,
    input_jacobian,
)

__all__ = [
    "LinearizationError",
    "LinearizedMode",
    "Nominal",
    "NominalPoint",
    "cone_gradients",
    "cone_rows",
    "jacobians",
    "linearize_mode",
]

DEFAULT_EPSILON = 1e-3  # strict-inequality slack for the sliding rows, m/s


class LinearizationError(ArithmeticError):
    """Linearized matrices came out non-finite."""


@dataclass(frozen=True)
class NominalPoint:
    x_star: SliderState
    u_star: PusherInput
    t: float


@dataclass(frozen=True)
class Nominal:
    """Nominal trajectory t -> (x*, u*), optionally held constant past t_end."""

    x_of: Callable[[float], SliderState]
    u_of: Callable[[float], PusherInput]
    t_end: float | None = None

    def at(self, t: float) -> NominalPoint:
        tc = t if self.t_end is None else min(t, self.t_end)
        return NominalPoint(x_star=self.x_of(tc), u_star=self.u_of(tc), t=t)

    @staticmethod
    def line(speed: float) -> "Nominal":
        """Constant-speed straight push along +x from the origin."""
        return Nominal(
            x_of=lambda t: SliderState(speed * t, 0.0, 0.0, 0.0),
            u_of=lambda t: PusherInput(speed, 0.0),
        )


@dataclass(frozen=True)
class LinearizedMode:
    """Bundle of all linearized data for one mode at one nominal point."""

    mode: ContactMode
    A: np.ndarray  # 4x4
    B: np.ndarray  # 4x2
    E: np.ndarray  # (rows, 4)
    D: np.ndarray  # (rows, 2)
    g: np.ndarray  # (rows,)
    C_t: np.ndarray  # 1x4 gradient of gamma_t
    C_b: np.ndarray  # 1x4 gradient of gamma_b
    epsilon: float


def cone_gradients(p_y: float, params: ModelParams) -> tuple[float, float]:
    """d(gamma_t)/dp_y and d(gamma_b)/dp_y (the only nonzero state partials)."""
    mu, c, p_x = params.mu_p, params.c, params.p_x
    c2 = c * c
    n_t = mu * c2 - p_x * p_y + mu * p_x * p_x
    d_t = c2 + p_y * p_y - mu * p_x * p_y
    n_b = -mu * c2 - p_x * p_y - mu * p_x * p_x
    d_b = c2 + p_y * p_y + mu * p_x * p_y
    dgt = (-p_x * d_t - n_t * (2.0 * p_y - mu * p_x)) / (d_t * d_t)
    dgb = (-p_x * d_b - n_b * (2.0 * p_y + mu * p_x)) / (d_b * d_b)
    return dgt, dgb


def _dynamics_p_y_partial(
    p_y: float, theta: float, uvec: np.ndarray, mode: ContactMode, params: ModelParams
) -> np.ndarray:
    """Column d f / d p_y, evaluated analytically."""
    c2 = params.c * params.c
    p_x = params.p_x
    d = c2 + p_x * p_x + p_y * p_y
    dd = 2.0 * p_y
    M = np.array([[c2 + p_x * p_x, p_x * p_y], [p_x * p_y, c2 + p_y * p_y]])
    dM = np.array([[0.0, p_x], [p_x, 2.0 * p_y]])
    dQ = dM / d - M * (dd / (d * d))
    Q = M / d
    R = _rotation_body_to_world(theta)

    if mode is ContactMode.STICKING:
        w, dw = uvec, np.zeros(2)
        b_num = np.array([-p_y, p_x])
        db_num = np.array([-1.0, 0.0])
        dc_vec = np.zeros(2)
    else:
        gamma_t, gamma_b = _cone_slopes(p_y, params)
        dgt, dgb = cone_gradients(p_y, params)
        gamma, dgamma = (
            (gamma_t, dgt) if mode is ContactMode.SLIDING_UP else (gamma_b, dgb)
        )
        w = np.array([uvec[0], gamma * uvec[0]])
        dw = np.array([0.0, dgamma * uvec[0]])
        b_num = np.array([-p_y + gamma * p_x, 0.0])
        db_num = np.array([-1.0 + dgamma * p_x, 0.0])
        dc_vec = np.array([-dgamma, 0.0])

    dxy = R @ (dQ @ w + Q @ dw)
    dtheta_dot = (db_num / d - b_num * (dd / (d * d))) @ uvec
    dp_y_dot = dc_vec @ uvec
    return np.array([dxy[0], dxy[1], dtheta_dot, dp_y_dot])


def jacobians(
    mode: ContactMode, nom: NominalPoint, params: ModelParams
) -> tuple[np.ndarray, np.ndarray]:
    """Analytic (A, B) of the mode dynamics at the nominal point.

    The dynamics do not depend on x or y (translation invariance), so only
    the theta and p_y columns of A are nonzero. B is the full input map
    since the dynamics are linear in u.
    """
    theta = nom.x_star.theta
    p_y = nom.x_star.p_y
    uvec = nom.u_star.as_array()

    QP, _, _ = _mode_matrices(p_y, params, mode)
    ct, st = np.cos(theta), np.sin(theta)
    dR = np.array([[-st, -ct], [ct, -st]])  # d/dtheta of body->world rotation
    dxy_dtheta = dR @ (QP @ uvec)

    A = np.zeros((4, 4))
    A[0:2, 2] = dxy_dtheta
    A[:, 3] = _dynamics_p_y_partial(p_y, theta, uvec, mode, params)
    B = input_jacobian(nom.x_star, mode, params)
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
        raise LinearizationError("non-finite linearization")
    return A, B


def cone_rows(
    mode: ContactMode,
    nom: NominalPoint,
    params: ModelParams,
    epsilon: float = DEFAULT_EPSILON,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Linearized motion-cone rows (E, D, g) with E xbar + D ubar <= g.

    Sticking contributes two rows (both cone boundaries); each sliding mode
    contributes one strict row tightened by ``epsilon``.
    """
    gamma_t, gamma_b = _cone_slopes(nom.x_star.p_y, params)
    dgt, dgb = cone_gradients(nom.x_star.p_y, params)
    C_t = np.array([[0.0, 0.0, 0.0, dgt]])
    C_b = np.array([[0.0, 0.0, 0.0, dgb]])
    v_n, v_t = nom.u_star.v_n, nom.u_star.v_t
    if mode is ContactMode.STICKING:
        E = v_n * np.vstack([-C_t, C_b])
        D = np.array([[-gamma_t, 1.0], [gamma_b, -1.0]])
        g = np.array([-v_t + gamma_t * v_n, v_t - gamma_b * v_n])
    elif mode is ContactMode.SLIDING_UP:
        E = v_n * C_t
        D = np.array([[gamma_t, -1.0]])
        g = np.array([v_t - gamma_t * v_n - epsilon])
    else:
        E = -v_n * C_b
        D = np.array([[-gamma_b, 1.0]])
        g = np.array([-v_t + gamma_b * v_n - epsilon])
    return E, D, g


def linearize_mode(
    mode: ContactMode,
    nom: NominalPoint,
    params: ModelParams,
    epsilon: float = DEFAULT_EPSILON,
) -> LinearizedMode:
    A, B = jacobians(mode, nom, params)
    E, D, g = cone_rows(mode, nom, params, epsilon)
    dgt, dgb = cone_gradients(nom.x_star.p_y, params)
    return LinearizedMode(
        mode=mode,
        A=A,
        B=B,
        E=E,
        D=D,
        g=g,
        C_t=np.array([[0.0, 0.0, 0.0, dgt]]),
        C_b=np.array([[0.0, 0.0, 0.0, dgb]]),
        epsilon=epsilon,
    )
