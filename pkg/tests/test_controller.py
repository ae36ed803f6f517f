import dataclasses
import math

import numpy as np
import pytest

from pushmpc import qp
from pushmpc.controller import (
    ControllerFault,
    FamilyOfModes,
    LinearizedHorizon,
    ModeSchedule,
    MpcConfig,
    build_qp,
    default_family,
    default_mpc_config,
    enumerate_step,
    fom_step,
    miqp_step,
)
from pushmpc.linearize import Nominal
from pushmpc.model import ContactMode, PusherInput, SliderState, step

S, U, D = ContactMode.STICKING, ContactMode.SLIDING_UP, ContactMode.SLIDING_DOWN


def small_config(N):
    return dataclasses.replace(default_mpc_config(), N=N)


def perturbed_state(rng):
    return SliderState(
        0.002 * rng.normal(),
        0.01 * rng.normal(),
        0.2 * rng.normal(),
        0.01 * rng.normal(),
    )


class TestDefaultFamily:
    def test_reference_horizon(self):
        fam = default_family(35)
        assert [s.label for s in fam.schedules] == ["M1", "M2", "M3"]
        assert all(len(s) == 35 for s in fam.schedules)
        assert fam.schedules[0].modes[0] is U
        assert set(fam.schedules[0].modes[1:]) == {S}

    def test_two_step(self):
        fam = default_family(2)
        assert fam.schedules[0].modes == (U, S)
        assert fam.schedules[1].modes == (D, S)
        assert fam.schedules[2].modes == (S, S)

    @pytest.mark.parametrize("N", [1, 2, 5, 35])
    def test_schedules_distinct(self, N):
        fam = default_family(N)
        assert len({s.modes for s in fam.schedules}) == 3


class TestBuildQp:
    def test_problem_dimensions_all_stick(self, params, line_nominal):
        cfg = small_config(2)
        sched = ModeSchedule((S, S), "M3")
        prob = build_qp(sched, SliderState(0, 0.001, 0, 0), 0.0, line_nominal, cfg, params)
        assert prob.n_vars == 12
        assert prob.n_eq == 8
        assert prob.n_in == 4 + 8  # cone rows + input bounds

    def test_zero_state_gives_zero_cost(self, params, line_nominal):
        cfg = small_config(4)
        sched = ModeSchedule((S,) * 4, "M3")
        prob = build_qp(sched, SliderState(0, 0, 0, 0), 0.0, line_nominal, cfg, params)
        sol = qp.solve(prob)
        assert sol.status is qp.QpStatus.OPTIMAL
        assert abs(sol.cost) <= 1e-14
        assert np.abs(sol.z).max() <= 1e-12

    def test_single_step_matches_hand_assembly(self, params, line_nominal):
        # assemble the N=1 sticking program from the printed equations and
        # compare against the builder, field by field, bit for bit
        cfg = small_config(1)
        x0 = SliderState(0.003, -0.002, 0.1, 0.01)
        prob = build_qp(ModeSchedule((S,), "M3"), x0, 0.0, line_nominal, cfg, params)

        c2 = params.c * params.c
        p_x, p_y = params.p_x, x0.p_y
        mu = params.mu_p
        h = cfg.h
        v_n, v_t = 0.05, 0.0

        # cost: 2*(Q + Q_N) on xbar_1, 2*R on ubar_0
        H = np.zeros((6, 6))
        H[:4, :4] = 2.0 * (np.asarray(cfg.Q) + np.asarray(cfg.Q_N))
        H[4:, 4:] = 2.0 * np.asarray(cfg.R)
        np.testing.assert_array_equal(prob.H, H)
        np.testing.assert_array_equal(prob.f, np.zeros(6))

        # input map at the measured state
        d = c2 + p_x * p_x + p_y * p_y
        Q = np.array([[c2 + p_x * p_x, p_x * p_y], [p_x * p_y, c2 + p_y * p_y]]) / d
        ct, st = math.cos(x0.theta), math.sin(x0.theta)
        R_bw = np.array([[ct, -st], [st, ct]])
        B0 = np.vstack([R_bw @ (Q @ np.eye(2)), np.array([-p_y, p_x]) / d, np.zeros(2)])

        A_eq = np.zeros((4, 6))
        A_eq[:, :4] = np.eye(4)
        A_eq[:, 4:] = -h * B0
        np.testing.assert_array_equal(prob.A_eq, A_eq)

        # f_j0 = xbar_0 + h (B0 u* - f(x*, u*)); the nominal derivative is an
        # exact centered sticking push
        xbar0 = x0.as_array() - np.array([0.0, 0.0, 0.0, 0.0])
        f_star = np.array([0.05, 0.0, 0.0, 0.0])
        np.testing.assert_array_equal(
            prob.b_eq, xbar0 + h * (B0 @ np.array([v_n, v_t]) - f_star)
        )

        # cone rows at the measured state, then the four bound rows
        den_t = c2 + p_y * p_y - mu * p_x * p_y
        den_b = c2 + p_y * p_y + mu * p_x * p_y
        gamma_t = (mu * c2 - p_x * p_y + mu * p_x * p_x) / den_t
        gamma_b = (-mu * c2 - p_x * p_y - mu * p_x * p_x) / den_b
        A_in = np.zeros((6, 6))
        A_in[0, 4:] = [-gamma_t, 1.0]
        A_in[1, 4:] = [gamma_b, -1.0]
        A_in[2, 4] = 1.0
        A_in[3, 4] = -1.0
        A_in[4, 5] = 1.0
        A_in[5, 5] = -1.0
        b_in = np.array(
            [
                -v_t + gamma_t * v_n,
                v_t - gamma_b * v_n,
                cfg.v_n_max - v_n,
                v_n,
                cfg.v_t_max - v_t,
                cfg.v_t_max + v_t,
            ]
        )
        np.testing.assert_array_equal(prob.A_in, A_in)
        np.testing.assert_array_equal(prob.b_in, b_in)

    def test_schedule_length_mismatch_rejected(self, params, line_nominal):
        cfg = small_config(3)
        with pytest.raises(ValueError):
            build_qp(ModeSchedule((S, S), "bad"), SliderState(0, 0, 0, 0), 0.0,
                     line_nominal, cfg, params)


class TestFomStep:
    def test_on_nominal_returns_nominal_input(self, params, mpc_config, line_nominal):
        fam = default_family(mpc_config.N)
        res = fom_step(SliderState(0, 0, 0, 0), 0.0, fam, line_nominal, mpc_config, params)
        assert res.u_applied.v_n == pytest.approx(0.05, abs=1e-12)
        assert res.u_applied.v_t == pytest.approx(0.0, abs=1e-12)
        assert res.cost <= 1e-12
        assert res.chosen_schedule == "M3"

    def test_displaced_state_correction(self, params, mpc_config, line_nominal):
        fam = default_family(mpc_config.N)
        state = SliderState(0.0, 0.01, 0.0, 0.0)
        res = fom_step(state, 0.0, fam, line_nominal, mpc_config, params)
        assert res.chosen_schedule in ("M1", "M3")
        # closed-loop window oracle: |y| must shrink under the returned inputs
        y_abs = [abs(state.y)]
        for k in range(8):
            state = step(state, res.u_applied, mpc_config.h, params).state
            y_abs.append(abs(state.y))
            res = fom_step(state, (k + 1) * mpc_config.h, fam, line_nominal, mpc_config, params)
        assert y_abs[-1] < y_abs[0]

    def test_degenerate_family_equals_plain_solve(self, params, line_nominal):
        cfg = small_config(5)
        fam = FamilyOfModes((ModeSchedule((S,) * 5, "only"),))
        x = SliderState(0.001, 0.004, -0.05, 0.002)
        res = fom_step(x, 0.0, fam, line_nominal, cfg, params)
        prob = build_qp(fam.schedules[0], x, 0.0, line_nominal, cfg, params)
        sol = qp.solve(prob)
        assert res.cost == sol.cost
        i = 4 * cfg.N
        np.testing.assert_allclose(
            res.u_applied.as_array(),
            np.array([0.05, 0.0]) + sol.z[i : i + 2],
            atol=1e-12,
        )

    def test_all_infeasible_raises_fault(self, params, line_nominal):
        cfg = small_config(3)
        fam = default_family(3)
        # an absurd face offset makes every schedule's later cone rows
        # unsatisfiable within the input bounds
        x = SliderState(0.0, 0.0, 0.0, 1.0)
        with pytest.raises(ControllerFault):
            fom_step(x, 0.0, fam, line_nominal, cfg, params)

    def test_costs_cover_every_schedule(self, params, mpc_config, line_nominal):
        fam = default_family(mpc_config.N)
        res = fom_step(SliderState(0, 0.005, 0.1, 0), 0.0, fam, line_nominal, mpc_config, params)
        assert len(res.per_schedule_costs) == 3
        feasible = [c for c in res.per_schedule_costs if c is not None]
        assert res.cost == min(feasible)


class TestMiqpAndEnumeration:
    def test_agreement_small_horizons(self, params, line_nominal, rng):
        for N in (3, 4):
            cfg = small_config(N)
            for _ in range(3):
                x = perturbed_state(rng)
                e = enumerate_step(x, 0.0, line_nominal, cfg, params)
                m = miqp_step(x, 0.0, line_nominal, cfg, params)
                rel = abs(m.cost - e.cost) / max(1.0, abs(e.cost))
                assert rel <= 1e-6

    def test_zero_state_all_stick_optimal(self, params, line_nominal):
        cfg = small_config(4)
        res = miqp_step(SliderState(0, 0, 0, 0), 0.0, line_nominal, cfg, params)
        assert res.cost <= 1e-12
        assert res.chosen_schedule == "miqp:SSSS"

    def test_forced_all_stick_leaf_equals_schedule_qp(self, params, line_nominal):
        cfg = small_config(3)
        x = SliderState(0.001, 0.003, 0.05, 0.001)
        horizon = LinearizedHorizon(x, 0.0, line_nominal, cfg, params)
        from pushmpc.controller import _assemble

        leaf = qp.solve(_assemble(horizon, (S, S, S), cone_steps=3))
        direct = qp.solve(build_qp(ModeSchedule((S, S, S), "M3"), x, 0.0, line_nominal, cfg, params))
        assert leaf.cost == direct.cost

    def test_fom_never_beats_miqp(self, params, line_nominal, rng):
        cfg = small_config(4)
        fam = default_family(4)
        for _ in range(5):
            x = perturbed_state(rng)
            f = fom_step(x, 0.0, fam, line_nominal, cfg, params)
            m = miqp_step(x, 0.0, line_nominal, cfg, params)
            assert f.cost >= m.cost - 1e-9

    def test_enumeration_guard(self, params, line_nominal):
        cfg = small_config(9)
        with pytest.raises(ValueError):
            enumerate_step(SliderState(0, 0, 0, 0), 0.0, line_nominal, cfg, params)

    def test_enumeration_single_step(self, params, line_nominal):
        cfg = small_config(1)
        x = SliderState(0.0, 0.004, 0.02, 0.0)
        res = enumerate_step(x, 0.0, line_nominal, cfg, params)
        per_mode = []
        for mode in (S, U, D):
            sol = qp.solve(build_qp(ModeSchedule((mode,), "m"), x, 0.0, line_nominal, cfg, params))
            per_mode.append(sol.cost if sol.status is qp.QpStatus.OPTIMAL else None)
        feasible = [c for c in per_mode if c is not None]
        assert res.cost == pytest.approx(min(feasible), abs=1e-12)

    def test_enumeration_two_step_min_property(self, params, line_nominal, rng):
        cfg = small_config(2)
        x = perturbed_state(rng)
        res = enumerate_step(x, 0.0, line_nominal, cfg, params)
        assert len(res.per_schedule_costs) == 9
        for c in res.per_schedule_costs:
            if c is not None:
                assert res.cost <= c + 1e-12


class TestRecedingHorizonProperties:
    def test_nominal_fixed_point(self, params, mpc_config, line_nominal):
        fam = default_family(mpc_config.N)
        state = SliderState(0, 0, 0, 0)
        for k in range(5):
            t = k * mpc_config.h
            res = fom_step(state, t, fam, line_nominal, mpc_config, params)
            state = step(state, res.u_applied, mpc_config.h, params).state
            nominal_x = 0.05 * (t + mpc_config.h)
            xbar = state.as_array() - np.array([nominal_x, 0, 0, 0])
            assert np.abs(xbar).max() <= 1e-9

    def test_feasibility_scales_inward(self, params, line_nominal, rng):
        # shrinking the perturbation keeps every feasible schedule feasible
        cfg = small_config(4)
        x = SliderState(0.0, 0.012, 0.15, 0.01)
        for sched in default_family(4).schedules:
            base = qp.solve(build_qp(sched, x, 0.0, line_nominal, cfg, params))
            if base.status is not qp.QpStatus.OPTIMAL:
                continue
            for alpha in (0.5, 0.25, 0.0):
                xa = SliderState.from_array(alpha * x.as_array())
                sol = qp.solve(build_qp(sched, xa, 0.0, line_nominal, cfg, params))
                assert sol.status is qp.QpStatus.OPTIMAL


class TestConfigSerialization:
    def test_round_trip(self):
        cfg = default_mpc_config()
        restored = MpcConfig.from_config(cfg.to_config())
        assert restored.N == cfg.N
        assert restored.h == cfg.h
        np.testing.assert_array_equal(np.asarray(restored.Q), np.asarray(cfg.Q))
        np.testing.assert_array_equal(np.asarray(restored.Q_N), np.asarray(cfg.Q_N))
        assert restored.big_M == cfg.big_M

    def test_invalid_horizon_rejected(self):
        with pytest.raises(ValueError):
            MpcConfig(N=0)
