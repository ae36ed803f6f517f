"""Dense convex quadratic programming.

Solves  min  0.5 z'Hz + f'z + c0
        s.t. A_eq z = b_eq,  A_in z <= b_in

with H symmetric positive semidefinite. Equality constraints are eliminated
through a QR null-space basis; the reduced strictly convex problem is solved
by a dual active-set iteration that starts from the unconstrained minimum
and adds the most violated inequality until primal feasible. Every solution
reported Optimal is certified against its KKT residuals; infeasibility is
detected when a constraint's multiplier can grow without activating it
(dual unboundedness).

Problems at the sizes produced by the horizon builder (a few hundred
variables) solve in milliseconds; there is no sparse path.
"""

from __future__ import annotations

import enum
import json
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

__all__ = [
    "QpError",
    "QpProblem",
    "QpSolution",
    "QpStatus",
    "dump_problem",
    "kkt_residual",
    "load_problem",
    "solve",
]

REG_EPS = 1e-9  # ridge added to a marginally definite reduced Hessian

# full eigenvalue PSD validation is costly; enable for debugging
_DEBUG_PSD = bool(os.environ.get("PUSHMPC_DEBUG_PSD"))


class QpError(ValueError):
    """Malformed problem data (dimensions, symmetry)."""


class QpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    MAX_ITER = "max_iter"
    NUMERIC = "numeric"


@dataclass
class QpProblem:
    H: np.ndarray
    f: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    A_in: np.ndarray
    b_in: np.ndarray
    c0: float = 0.0

    @property
    def n_vars(self) -> int:
        return self.H.shape[0]

    @property
    def n_eq(self) -> int:
        return self.A_eq.shape[0]

    @property
    def n_in(self) -> int:
        return self.A_in.shape[0]

    @staticmethod
    def build(H, f, A_eq=None, b_eq=None, A_in=None, b_in=None, c0=0.0) -> "QpProblem":
        H = np.asarray(H, dtype=float)
        f = np.asarray(f, dtype=float).ravel()
        n = f.size
        if A_eq is None:
            A_eq, b_eq = np.zeros((0, n)), np.zeros(0)
        if A_in is None:
            A_in, b_in = np.zeros((0, n)), np.zeros(0)
        try:
            A_eq = np.asarray(A_eq, dtype=float).reshape(-1, n)
            A_in = np.asarray(A_in, dtype=float).reshape(-1, n)
        except ValueError as exc:
            raise QpError(f"constraint matrix width does not match {n} variables") from exc
        prob = QpProblem(
            H=H,
            f=f,
            A_eq=A_eq,
            b_eq=np.asarray(b_eq, dtype=float).ravel(),
            A_in=A_in,
            b_in=np.asarray(b_in, dtype=float).ravel(),
            c0=float(c0),
        )
        prob.validate()
        return prob

    def validate(self) -> None:
        n = self.n_vars
        if self.H.shape != (n, n) or self.f.shape != (n,):
            raise QpError("cost dimensions inconsistent")
        scale = max(1.0, float(np.abs(self.H).max(initial=0.0)))
        if float(np.abs(self.H - self.H.T).max(initial=0.0)) > 1e-12 * scale:
            raise QpError("H must be symmetric")
        if self.A_eq.shape[1] != n or self.b_eq.shape != (self.n_eq,):
            raise QpError("equality constraint dimensions inconsistent")
        if self.A_in.shape[1] != n or self.b_in.shape != (self.n_in,):
            raise QpError("inequality constraint dimensions inconsistent")
        if _DEBUG_PSD and n:
            w = scipy.linalg.eigvalsh(self.H)
            if w[0] < -1e-9 * max(1.0, w[-1]):
                raise QpError(f"H is not positive semidefinite (min eig {w[0]:.3e})")

    def objective(self, z: np.ndarray) -> float:
        return float(0.5 * z @ self.H @ z + self.f @ z + self.c0)


@dataclass
class QpSolution:
    z: np.ndarray
    cost: float
    status: QpStatus
    kkt_residual: float
    iterations: int
    nu: np.ndarray  # equality multipliers
    lam: np.ndarray  # inequality multipliers, >= 0
    meta: dict = field(default_factory=dict)


def kkt_residual(
    problem: QpProblem, z: np.ndarray, nu: np.ndarray, lam: np.ndarray
) -> float:
    """Infinity norm of the worst KKT residual at (z, nu, lam).

    Covers stationarity, primal feasibility (both constraint kinds), dual
    feasibility and complementary slackness.
    """
    z = np.asarray(z, dtype=float)
    nu = np.asarray(nu, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if z.shape != (problem.n_vars,) or nu.shape != (problem.n_eq,) or lam.shape != (
        problem.n_in,
    ):
        raise QpError("multiplier dimensions do not match the problem")
    stat = problem.H @ z + problem.f
    if problem.n_eq:
        stat = stat + problem.A_eq.T @ nu
    if problem.n_in:
        stat = stat + problem.A_in.T @ lam
    r = float(np.abs(stat).max(initial=0.0))
    if problem.n_eq:
        r = max(r, float(np.abs(problem.A_eq @ z - problem.b_eq).max()))
    if problem.n_in:
        slack = problem.A_in @ z - problem.b_in
        r = max(r, float(np.clip(slack, 0.0, None).max()))
        r = max(r, float(np.clip(-lam, 0.0, None).max()))
        r = max(r, float(np.abs(lam * slack).max()))
    return r


def _dual_active_set(
    G: np.ndarray,
    a: np.ndarray,
    C: np.ndarray,
    d: np.ndarray,
    max_iter: int,
) -> tuple[np.ndarray, np.ndarray, int, str]:
    """Dual active-set iteration for min 0.5 y'Gy + a'y s.t. Cy <= d, G PD.

    Returns (y, lam, iterations, status) with status one of 'optimal',
    'infeasible', 'max_iter'.
    """
    n = a.size
    try:
        cho = scipy.linalg.cho_factor(G, check_finite=False)
    except scipy.linalg.LinAlgError:
        return np.full(n, np.nan), np.zeros(C.shape[0]), 0, "not_pd"
    y = scipy.linalg.cho_solve(cho, -a, check_finite=False)
    m = C.shape[0]
    lam = np.zeros(m)
    if m == 0:
        return y, lam, 0, "optimal"

    work: list[int] = []
    tol_act = 1e-10 * (1.0 + float(np.abs(d).max(initial=0.0)))
    iters = 0

    def kkt_dir(cp: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        # direction of (y, lam_work) as the entering multiplier grows
        k = len(work)
        if k == 0:
            return scipy.linalg.cho_solve(cho, -cp, check_finite=False), np.zeros(0)
        K = np.zeros((n + k, n + k))
        K[:n, :n] = G
        K[:n, n:] = C[work].T
        K[n:, :n] = C[work]
        rhs = np.concatenate([-cp, np.zeros(k)])
        try:
            sol = np.linalg.solve(K, rhs)
        except np.linalg.LinAlgError:
            sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
        return sol[:n], sol[n:]

    while True:
        viol = C @ y - d
        p = int(np.argmax(viol))
        if viol[p] <= tol_act:
            break
        if iters >= max_iter:
            return y, lam, iters, "max_iter"
        iters += 1
        cp = C[p]
        lam_p = 0.0
        while True:
            dy, r = kkt_dir(cp)
            denom = float(cp @ dy)  # equals -dy'G dy <= 0
            viol_p = float(cp @ y - d[p])
            t_full = viol_p / -denom if denom < -1e-14 else np.inf
            t_dual = np.inf
            blocker = -1
            for j, k in enumerate(work):
                if r[j] < -1e-14:
                    t = lam[k] / -r[j]
                    if t < t_dual:
                        t_dual, blocker = t, j
            t = min(t_full, t_dual)
            if not np.isfinite(t):
                return y, lam, iters, "infeasible"
            y = y + t * dy
            for j, k in enumerate(work):
                lam[k] += t * r[j]
            lam_p += t
            if t_full <= t_dual:
                work.append(p)
                lam[p] = lam_p
                break
            dropped = work.pop(blocker)
            lam[dropped] = 0.0

    # refinement solve on the final working set removes accumulated drift
    if work:
        k = len(work)
        K = np.zeros((n + k, n + k))
        K[:n, :n] = G
        K[:n, n:] = C[work].T
        K[n:, :n] = C[work]
        rhs = np.concatenate([-a, d[work]])
        try:
            sol = np.linalg.solve(K, rhs)
            y = sol[:n]
            lam = np.zeros(m)
            lam[work] = np.clip(sol[n:], 0.0, None)
        except np.linalg.LinAlgError:
            pass
    return y, lam, iters, "optimal"


def solve(
    problem: QpProblem,
    max_iter: int = 200,
    tol_feas: float = 1e-8,
    tol_kkt: float = 1e-6,
) -> QpSolution:
    """Solve the QP; the result is Optimal only if its KKT residuals certify it."""
    problem.validate()
    H, f = problem.H, problem.f
    n, me, mi = problem.n_vars, problem.n_eq, problem.n_in
    meta: dict = {}

    nan_solution = lambda status: QpSolution(  # noqa: E731
        z=np.full(n, np.nan),
        cost=np.inf,
        status=status,
        kkt_residual=np.inf,
        iterations=0,
        nu=np.zeros(me),
        lam=np.zeros(mi),
        meta=meta,
    )

    if me:
        Qf, Rf = scipy.linalg.qr(problem.A_eq.T, check_finite=False)
        R1 = Rf[:me, :me]
        diag = np.abs(np.diag(R1))
        if me and (diag.min(initial=np.inf) <= 1e-12 * max(1.0, diag.max(initial=0.0))):
            meta["reason"] = "equality constraints rank deficient"
            return nan_solution(QpStatus.NUMERIC)
        y1 = scipy.linalg.solve_triangular(R1, problem.b_eq, trans="T", check_finite=False)
        z_p = Qf[:, :me] @ y1
        Z = Qf[:, me:]
    else:
        z_p = np.zeros(n)
        Z = np.eye(n)

    G = Z.T @ H @ Z
    a = Z.T @ (H @ z_p + f)
    C = problem.A_in @ Z if mi else np.zeros((0, Z.shape[1]))
    d = problem.b_in - problem.A_in @ z_p if mi else np.zeros(0)

    y, lam, iters, status_str = _dual_active_set(G, a, C, d, max_iter)
    if status_str == "not_pd":
        # marginally definite reduced Hessian: apply a recorded ridge and retry
        scale = max(1.0, float(np.abs(np.diag(G)).max(initial=0.0)))
        G = G + REG_EPS * scale * np.eye(G.shape[0])
        meta["regularized"] = REG_EPS * scale
        y, lam, iters, status_str = _dual_active_set(G, a, C, d, max_iter)
        if status_str == "not_pd":
            meta["reason"] = "reduced Hessian not positive definite"
            return nan_solution(QpStatus.NUMERIC)

    if status_str == "infeasible":
        sol = nan_solution(QpStatus.INFEASIBLE)
        sol.iterations = iters
        return sol

    z = z_p + Z @ y
    if me:
        # equality multipliers from stationarity: A_eq' nu = -(Hz + f + A_in' lam)
        resid = H @ z + f
        if mi:
            resid = resid + problem.A_in.T @ lam
        nu = scipy.linalg.solve_triangular(R1, Qf[:, :me].T @ -resid, check_finite=False)
    else:
        nu = np.zeros(0)

    r_kkt = kkt_residual(problem, z, nu, lam)
    feas = 0.0
    if me:
        feas = float(np.abs(problem.A_eq @ z - problem.b_eq).max())
    if mi:
        feas = max(feas, float(np.clip(problem.A_in @ z - problem.b_in, 0.0, None).max()))

    if status_str == "max_iter":
        status = QpStatus.MAX_ITER
    elif r_kkt <= tol_kkt and feas <= tol_feas:
        status = QpStatus.OPTIMAL
    else:
        status = QpStatus.NUMERIC
        meta["reason"] = f"kkt residual {r_kkt:.3e}, feasibility {feas:.3e}"

    return QpSolution(
        z=z,
        cost=problem.objective(z),
        status=status,
        kkt_residual=r_kkt,
        iterations=iters,
        nu=nu,
        lam=lam,
        meta=meta,
    )


def dump_problem(problem: QpProblem, path) -> None:
    """Write the problem to JSON for offline debugging.

    Keys: v, n_vars, n_eq, n_in, H, f, A_eq, b_eq, A_in, b_in, c0; matrices
    are dense row-major nested lists.
    """
    payload = {
        "v": 1,
        "n_vars": problem.n_vars,
        "n_eq": problem.n_eq,
        "n_in": problem.n_in,
        "H": problem.H.tolist(),
        "f": problem.f.tolist(),
        "A_eq": problem.A_eq.tolist(),
        "b_eq": problem.b_eq.tolist(),
        "A_in": problem.A_in.tolist(),
        "b_in": problem.b_in.tolist(),
        "c0": problem.c0,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_problem(path) -> QpProblem:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    return QpProblem.build(
        H=payload["H"],
        f=payload["f"],
        A_eq=payload["A_eq"],
        b_eq=payload["b_eq"],
        A_in=payload["A_in"],
        b_in=payload["b_in"],
        c0=payload.get("c0", 0.0),
    )
