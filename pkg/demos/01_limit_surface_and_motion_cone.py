"""Limit-surface constants and the motion cone.

The ellipsoidal limit surface reduces, for a uniform-pressure rectangular
footprint, to two scalars: the maximum friction force f_max = mu_g*m*g and
the maximum friction torque m_max, whose ratio c = m_max/f_max is the
footprint's mean center distance. The motion cone at the contact point then
separates sticking from sliding pusher velocities.
"""

import numpy as np

from pushmpc import SliderState, default_params, motion_cone
from pushmpc.model import mean_contact_distance

params = default_params()
print("slider:", params.side_a, "x", params.side_b, "m,", params.mass, "kg")
print(f"f_max = {params.f_max:.6f} N")
print(f"m_max = {params.m_max:.6f} N*m")
print(f"c     = {params.c:.6f} m  (mean center distance of the footprint)")
print(f"unit-square mean distance = {mean_contact_distance(1.0, 1.0):.9f}")
print(f"closed form (sqrt(2)+asinh(1))/6 = {(np.sqrt(2) + np.arcsinh(1.0)) / 6:.9f}")

print("\ncone slopes vs. contact offset:")
print(f"{'p_y [m]':>10} {'gamma_t':>10} {'gamma_b':>10}")
for p_y in np.linspace(-0.04, 0.04, 9):
    mc = motion_cone(SliderState(0, 0, 0, float(p_y)), params)
    print(f"{p_y:>10.3f} {mc.gamma_t:>10.4f} {mc.gamma_b:>10.4f}")

print(
    "\nAt a centered contact the cone is symmetric; moving the pusher along"
    "\nthe face skews it, which is what lets sliding re-aim the slider."
)
