"""Acceptance suite: one test per release criterion, each at its stated
tolerance, printing one PASS line when it holds (run with -s to see them)."""

import dataclasses
import math
import time

import numpy as np
import pytest

from pushmpc import qp
from pushmpc.controller import (
    default_family,
    default_mpc_config,
    enumerate_step,
    fom_step,
    miqp_step,
)
from pushmpc.linearize import Nominal, cone_gradients, jacobians
from pushmpc.model import (
    ContactMode,
    PusherInput,
    SliderState,
    classify_mode,
    compute_limit_surface,
    default_params,
    mean_contact_distance,
    mode_dynamics,
    motion_cone,
)
from pushmpc.service import SessionEngine
from pushmpc.sim import ClosedLoop, run_straight_line, run_target_tracking, straight_line_scenario, target_scenario

from oracles import (
    fd_input_jacobian,
    fd_scalar,
    fd_state_jacobian,
    solve_qp_dual_projected_gradient,
)
from test_linearize import random_nominal
from test_qp import random_problem

S, U, D = ContactMode.STICKING, ContactMode.SLIDING_UP, ContactMode.SLIDING_DOWN


def _report(name):
    print(f"\nACCEPTANCE PASS: {name}")


@pytest.fixture(scope="module")
def params():
    return default_params()


@pytest.fixture(scope="module")
def reference_run():
    """The perturbed straight-line run shared by the tracking and latency checks."""
    scn = straight_line_scenario(duration=10.0, perturb=True)
    t0 = time.perf_counter()
    log = run_straight_line(scn)
    return log, time.perf_counter() - t0


def test_model_property_suite(params):
    start = time.perf_counter()
    rng = np.random.default_rng(1)

    def random_state():
        return SliderState(
            rng.normal(), rng.normal(), rng.uniform(-np.pi, np.pi),
            rng.uniform(-0.044, 0.044),
        )

    # boundary continuity for the sticking/sliding pairs at 1000 random points
    worst = 0.0
    for _ in range(1000):
        st = random_state()
        mc = motion_cone(st, params)
        v_n = rng.uniform(0.0, 0.2)
        up = PusherInput(v_n, mc.gamma_t * v_n)
        dn = PusherInput(v_n, mc.gamma_b * v_n)
        worst = max(
            worst,
            np.abs(
                mode_dynamics(st, up, S, params) - mode_dynamics(st, up, U, params)
            ).max(),
            np.abs(
                mode_dynamics(st, dn, S, params) - mode_dynamics(st, dn, D, params)
            ).max(),
        )
    # with a frictionless pusher both boundaries coincide, so on that shared
    # boundary line all three modes must agree (the remaining mode pair)
    frictionless = compute_limit_surface(mu_p=0.0, mu_g=0.35, mass=1.05)
    for _ in range(1000):
        st = random_state()
        mc = motion_cone(st, frictionless)
        v_n = rng.uniform(0.0, 0.2)
        u = PusherInput(v_n, mc.gamma_t * v_n)
        f1 = mode_dynamics(st, u, S, frictionless)
        f2 = mode_dynamics(st, u, U, frictionless)
        f3 = mode_dynamics(st, u, D, frictionless)
        worst = max(worst, np.abs(f1 - f2).max(), np.abs(f2 - f3).max())
    assert worst <= 1e-10

    # mode partition totality on the pushing half-space
    for _ in range(1000):
        mc = motion_cone(random_state(), params)
        u = PusherInput(rng.uniform(0.0, 0.3), rng.uniform(-0.4, 0.4))
        conds = [
            mc.gamma_b * u.v_n <= u.v_t <= mc.gamma_t * u.v_n,
            u.v_t > mc.gamma_t * u.v_n,
            u.v_t < mc.gamma_b * u.v_n,
        ]
        assert sum(conds) == 1
        assert classify_mode(u, mc) is not None

    # mirror symmetry and frame equivariance
    for _ in range(1000):
        st = random_state()
        u = PusherInput(rng.uniform(0.0, 0.2), rng.uniform(-0.3, 0.3))
        mode = classify_mode(u, motion_cone(st, params))
        f = mode_dynamics(st, u, mode, params)

        st_m = SliderState(st.x, st.y, -st.theta, -st.p_y)
        u_m = PusherInput(u.v_n, -u.v_t)
        mode_m = classify_mode(u_m, motion_cone(st_m, params))
        f_m = mode_dynamics(st_m, u_m, mode_m, params)
        assert abs(f_m[0] - f[0]) <= 1e-10
        assert abs(f_m[1] + f[1]) <= 1e-10
        assert abs(f_m[2] + f[2]) <= 1e-10
        assert abs(f_m[3] + f[3]) <= 1e-10

        phi = rng.uniform(-np.pi, np.pi)
        f_rot = mode_dynamics(
            SliderState(st.x, st.y, st.theta + phi, st.p_y), u, mode, params
        )
        R = np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
        assert np.abs(f_rot[:2] - R @ f[:2]).max() <= 1e-10
        assert np.abs(f_rot[2:] - f[2:]).max() <= 1e-12

    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    _report(f"model property suite (worst boundary gap {worst:.2e}, {elapsed:.1f}s)")


def test_limit_surface_quadrature(params):
    start = time.perf_counter()
    coarse = mean_contact_distance(0.09, 0.09, order=64)
    fine = mean_contact_distance(0.09, 0.09, order=128)
    assert abs(fine - coarse) <= 1e-6 * abs(fine)
    assert params.c == pytest.approx(fine, rel=1e-6)

    unit_closed_form = (math.sqrt(2) + math.asinh(1.0)) / 6.0
    assert mean_contact_distance(1.0, 1.0) == pytest.approx(unit_closed_form, rel=1e-6)
    assert params.c == pytest.approx(0.09 * unit_closed_form, rel=1e-6)
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    _report(f"limit-surface quadrature (c = {params.c:.8f} m, {elapsed:.2f}s)")


def test_linearization_vs_finite_differences(params):
    rng = np.random.default_rng(2)
    worst = 0.0
    for mode in (S, U, D):
        for _ in range(100):
            nom = random_nominal(rng, params)
            A, B = jacobians(mode, nom, params)
            A_fd = fd_state_jacobian(mode, nom.x_star, nom.u_star, params)
            B_fd = fd_input_jacobian(mode, nom.x_star, nom.u_star, params)
            rel_a = np.abs(A - A_fd).max() / max(1.0, np.abs(A).max())
            rel_b = np.abs(B - B_fd).max() / max(1.0, np.abs(B).max())
            dgt, dgb = cone_gradients(nom.x_star.p_y, params)
            gt_fd = fd_scalar(
                lambda v: motion_cone(SliderState(0, 0, 0, v), params).gamma_t,
                nom.x_star.p_y,
            )
            gb_fd = fd_scalar(
                lambda v: motion_cone(SliderState(0, 0, 0, v), params).gamma_b,
                nom.x_star.p_y,
            )
            rel_c = max(
                abs(dgt - gt_fd) / max(1.0, abs(dgt)),
                abs(dgb - gb_fd) / max(1.0, abs(dgb)),
            )
            worst = max(worst, rel_a, rel_b, rel_c)
            assert rel_a <= 1e-5
            assert rel_b <= 1e-5
            assert rel_c <= 1e-5
    _report(f"linearization vs finite differences (worst rel err {worst:.2e})")


def test_qp_certification_and_oracle(params):
    # every MPC instance the controllers solve must certify its KKT point
    nominal = Nominal.line(0.05)
    config = default_mpc_config()
    rng = np.random.default_rng(3)
    checked = 0
    from pushmpc.controller import LinearizedHorizon, _assemble

    for _ in range(10):
        x = SliderState(
            0.002 * rng.normal(), 0.01 * rng.normal(),
            0.2 * rng.normal(), 0.01 * rng.normal(),
        )
        horizon = LinearizedHorizon(x, 0.0, nominal, config, params)
        for sched in default_family(config.N).schedules:
            sol = qp.solve(_assemble(horizon, sched.modes, cone_steps=config.N))
            if sol.status is qp.QpStatus.OPTIMAL:
                assert sol.kkt_residual <= 1e-6
                checked += 1
    assert checked >= 20

    # agreement with the first-order oracle on random dense problems
    rng = np.random.default_rng(4)
    agreements = 0
    worst = 0.0
    while agreements < 50:
        p = random_problem(rng)
        sol = qp.solve(p)
        if sol.status is not qp.QpStatus.OPTIMAL:
            continue
        z_ref, converged = solve_qp_dual_projected_gradient(p)
        assert converged
        gap = abs(sol.cost - p.objective(z_ref)) / max(1.0, abs(sol.cost))
        worst = max(worst, gap)
        assert gap <= 1e-6
        agreements += 1
    _report(
        f"qp solver ({checked} MPC instances certified, 50 oracle matches, worst gap {worst:.2e})"
    )


def test_miqp_exactness_and_fom_dominance(params):
    nominal = Nominal.line(0.05)
    rng = np.random.default_rng(5)
    checked = 0
    for N in (3, 4, 5, 6):
        config = dataclasses.replace(default_mpc_config(), N=N)
        family = default_family(N)
        for _ in range(10):
            x = SliderState(
                0.002 * rng.normal(), 0.01 * rng.normal(),
                0.2 * rng.normal(), 0.01 * rng.normal(),
            )
            e = enumerate_step(x, 0.0, nominal, config, params)
            m = miqp_step(x, 0.0, nominal, config, params)
            f = fom_step(x, 0.0, family, nominal, config, params)
            rel_gap = abs(m.cost - e.cost) / max(1.0, abs(e.cost))
            assert rel_gap <= 1e-6
            assert f.cost >= m.cost - 1e-9
            checked += 1
    _report(f"miqp exactness and FOM dominance ({checked} instances, N in 3..6)")


def test_straight_line_reproduction(params, reference_run):
    log, wall = reference_run
    assert wall < 60.0

    arr = log.state_array()
    t, y, th = arr[:, 0], arr[:, 2], arr[:, 3]
    ip = next(i for i, r in enumerate(log.records) if "perturbed" in r.flags)
    assert arr[ip, 1] >= 0.075 - 1e-9  # triggered at the stated x position

    inside = (np.abs(y) < 0.002) & (np.abs(th) < 0.05)
    recovered_at = None
    for i in range(ip, len(t)):
        if inside[i:].all():
            recovered_at = t[i]
            break
    assert recovered_at is not None, "never recovered"
    assert recovered_at < 6.0

    # and the unperturbed loop holds the nominal
    log0 = run_straight_line(straight_line_scenario(duration=10.0, perturb=False))
    arr0 = log0.state_array()
    xbar = arr0[:, 1:] - np.column_stack([0.05 * arr0[:, 0], np.zeros((len(arr0), 3))])
    assert np.abs(xbar).max() <= 1e-6
    _report(
        f"straight-line reproduction (recovered at t={recovered_at:.2f}s, "
        f"zero-perturbation drift {np.abs(xbar).max():.1e}, wall {wall:.1f}s)"
    )


def test_target_tracking_reproduction(params):
    config = dataclasses.replace(default_mpc_config(), v_t_max=0.3)
    scn = target_scenario(duration=60.0)
    log = run_target_tracking(scn, config=config)
    assert log.status == "targets_reached"
    assert log.records[-1].t <= 60.0

    # targets fall in order
    order = [
        (i, f)
        for i, r in enumerate(log.records)
        for f in r.flags
        if f.startswith("target_") and f.endswith("_reached")
    ]
    assert [f for _, f in order] == [
        "target_0_reached", "target_1_reached", "target_2_reached",
    ]

    # each major reorientation (start and the two switches) elects a sliding mode
    windows = [0] + [i for i, _ in order[:2]]
    for w in windows:
        labels = {log.records[i].chosen_schedule for i in range(w, min(w + 50, len(log.records)))}
        assert labels & {"M1", "M2"}, f"no sliding selection near period {w}"
    _report(
        f"target tracking ({len(log.records)} periods, "
        f"final target at t={log.records[-1].t:.2f}s)"
    )


def test_control_latency(reference_run):
    log, _ = reference_run
    times = np.array([r.solve_time for r in log.records if "fault" not in r.flags])
    med = float(np.median(times))
    p99 = float(np.percentile(times, 99))
    assert med < 0.050
    assert p99 < 0.150
    _report(f"latency (median {med*1e3:.1f} ms, p99 {p99*1e3:.1f} ms, N=35)")


def test_headless_service_equivalence(params):
    scn = straight_line_scenario(duration=3.0, perturb=True)
    batch = run_straight_line(scn)

    engine = SessionEngine(ClosedLoop(params, default_mpc_config(), scn))
    while not engine.loop.done:
        engine.step_period()
    live = engine.loop.log

    assert len(batch.records) == len(live.records)
    for rb, rl in zip(batch.records, live.records):
        assert rb.t == rl.t
        assert rb.state == rl.state
        assert rb.u_applied == rl.u_applied
        assert rb.chosen_schedule == rl.chosen_schedule
    _report(f"headless/service equivalence (bitwise over {len(batch.records)} periods)")
