"""The three contact modes and their shared boundaries.

Pusher velocities inside the motion cone stick; above it the pusher slides
up the face, below it down. The per-mode motion equations agree exactly on
the cone boundaries, so the hybrid vector field is continuous in the input
even though the mode index jumps.
"""

import numpy as np

from pushmpc import (
    ContactMode,
    PusherInput,
    SliderState,
    classify_mode,
    default_params,
    mode_dynamics,
    motion_cone,
    step,
)

params = default_params()
state = SliderState(x=0.0, y=0.0, theta=0.2, p_y=0.015)
mc = motion_cone(state, params)
print(f"state: theta={state.theta}, p_y={state.p_y}")
print(f"cone:  gamma_t={mc.gamma_t:.4f}, gamma_b={mc.gamma_b:.4f}\n")

v_n = 0.05
for v_t in (0.0, 0.6 * mc.gamma_t * v_n, 1.5 * mc.gamma_t * v_n, 2.0 * mc.gamma_b * v_n):
    u = PusherInput(v_n, v_t)
    mode = classify_mode(u, mc)
    xdot = mode_dynamics(state, u, mode, params)
    print(f"u = ({u.v_n:.3f}, {u.v_t:+.4f})  ->  {mode.name:<12}  xdot = {np.round(xdot, 5)}")

print("\ncontinuity across the upper boundary:")
u_b = PusherInput(v_n, mc.gamma_t * v_n)
f_stick = mode_dynamics(state, u_b, ContactMode.STICKING, params)
f_slide = mode_dynamics(state, u_b, ContactMode.SLIDING_UP, params)
print("  sticking:", np.round(f_stick, 8))
print("  sliding :", np.round(f_slide, 8))
print("  max gap :", np.abs(f_stick - f_slide).max())

print("\nintegrating one control period on the boundary, either mode label:")
a = step(state, u_b, 0.03, params, force_mode=ContactMode.STICKING)
b = step(state, u_b, 0.03, params, force_mode=ContactMode.SLIDING_UP)
print("  next-state gap:", np.abs(a.state.as_array() - b.state.as_array()).max())
