"""The dense convex QP solver behind every controller path.

Equalities are eliminated through a QR null-space basis, then a dual
active-set iteration adds violated inequalities until primal feasible.
Solutions are only reported Optimal when their KKT residuals certify them.
"""

import numpy as np

from pushmpc import qp

print("clamped scalar: min (z-1)^2  s.t. z <= 0.5")
p = qp.QpProblem.build(H=[[2.0]], f=[-2.0], A_in=[[1.0]], b_in=[0.5], c0=1.0)
sol = qp.solve(p)
print(f"  z = {sol.z[0]:.4f}, cost = {sol.cost:.4f}, status = {sol.status.value}, "
      f"kkt residual = {sol.kkt_residual:.2e}\n")

print("equality-constrained: min z1^2 + z2^2  s.t. z1 + z2 = 1")
p = qp.QpProblem.build(H=2 * np.eye(2), f=[0, 0], A_eq=[[1.0, 1.0]], b_eq=[1.0])
sol = qp.solve(p)
print(f"  z = {np.round(sol.z, 6)}, cost = {sol.cost:.4f}\n")

print("an infeasible pair: z <= 0 and z >= 1")
p = qp.QpProblem.build(H=[[2.0]], f=[0.0], A_in=[[1.0], [-1.0]], b_in=[0.0, -1.0])
print(f"  status = {qp.solve(p).status.value}\n")

print("random strictly convex problem with both constraint kinds:")
rng = np.random.default_rng(7)
M = rng.normal(size=(6, 6))
p = qp.QpProblem.build(
    H=M @ M.T + 0.5 * np.eye(6),
    f=rng.normal(size=6),
    A_eq=rng.normal(size=(2, 6)),
    b_eq=rng.normal(size=2),
    A_in=rng.normal(size=(4, 6)),
    b_in=rng.normal(size=4) + 0.5,
)
sol = qp.solve(p)
print(f"  status = {sol.status.value}, cost = {sol.cost:.6f}, "
      f"iterations = {sol.iterations}, kkt residual = {sol.kkt_residual:.2e}")

import tempfile, os
path = os.path.join(tempfile.gettempdir(), "qp_dump.json")
qp.dump_problem(p, path)
print(f"\nproblem dumped for offline inspection: {path}")
print("  keys:", sorted(__import__('json').load(open(path)).keys()))
