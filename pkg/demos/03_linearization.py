"""Per-mode linearization about a nominal trajectory.

Each control period freezes A_j, B_j (state/input Jacobians) and the
linearized motion-cone rows E_j, D_j, g_j about the nominal. The Jacobians
here are analytic; this script cross-checks them against central finite
differences and shows the second-order remainder shrinking quadratically.
"""

import numpy as np

from pushmpc import ContactMode, Nominal, PusherInput, SliderState, cone_rows, jacobians
from pushmpc.model import default_params, mode_dynamics

params = default_params()
nominal = Nominal.line(0.05)
pt = nominal.at(1.0)

for mode in ContactMode:
    A, B = jacobians(mode, pt, params)
    print(f"{mode.name}: A nonzero columns -> theta, p_y only")
    print(np.round(A, 4))

    # finite-difference cross-check on the p_y column
    h = 1e-6
    up = SliderState(pt.x_star.x, pt.x_star.y, pt.x_star.theta, pt.x_star.p_y + h)
    dn = SliderState(pt.x_star.x, pt.x_star.y, pt.x_star.theta, pt.x_star.p_y - h)
    col = (mode_dynamics(up, pt.u_star, mode, params) - mode_dynamics(dn, pt.u_star, mode, params)) / (2 * h)
    print("  p_y column FD gap:", np.abs(A[:, 3] - col).max(), "\n")

E, D, g = cone_rows(ContactMode.STICKING, pt, params)
print("sticking cone rows (E, D, g):")
print(np.round(E, 4))
print(np.round(D, 4))
print(np.round(g, 5))

print("\nlinearization remainder vs perturbation size (expect ratio ~4):")
A, B = jacobians(ContactMode.STICKING, pt, params)
f0 = mode_dynamics(pt.x_star, pt.u_star, ContactMode.STICKING, params)
rng = np.random.default_rng(0)
for scale in (2e-3, 1e-3, 5e-4):
    errs = []
    for _ in range(20):
        xbar = rng.normal(scale=scale, size=4)
        ubar = rng.normal(scale=scale, size=2)
        f = mode_dynamics(
            SliderState.from_array(pt.x_star.as_array() + xbar),
            PusherInput(*(pt.u_star.as_array() + ubar)),
            ContactMode.STICKING,
            params,
        )
        errs.append(np.linalg.norm(f - f0 - A @ xbar - B @ ubar))
    print(f"  scale {scale:.0e}: mean remainder {np.mean(errs):.3e}")
