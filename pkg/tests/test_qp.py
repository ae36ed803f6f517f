import numpy as np
import pytest

from pushmpc import qp

from oracles import solve_qp_dual_projected_gradient


def clamp_problem():
    # min (z-1)^2 s.t. z <= 0.5
    return qp.QpProblem.build(H=[[2.0]], f=[-2.0], A_in=[[1.0]], b_in=[0.5], c0=1.0)


def random_problem(rng, n=6, n_eq=2, n_in=4, definite=True):
    M = rng.normal(size=(n, n))
    H = M @ M.T + (0.5 * np.eye(n) if definite else 0.0)
    f = rng.normal(size=n)
    A_eq = rng.normal(size=(n_eq, n))
    b_eq = rng.normal(size=n_eq)
    A_in = rng.normal(size=(n_in, n))
    b_in = rng.normal(size=n_in) + 0.5
    return qp.QpProblem.build(H=H, f=f, A_eq=A_eq, b_eq=b_eq, A_in=A_in, b_in=b_in)


class TestSolve:
    def test_clamped_scalar(self):
        sol = qp.solve(clamp_problem())
        assert sol.status is qp.QpStatus.OPTIMAL
        assert sol.z[0] == pytest.approx(0.5, abs=1e-12)
        assert sol.cost == pytest.approx(0.25, abs=1e-12)

    def test_unconstrained(self):
        p = qp.QpProblem.build(H=2 * np.eye(2), f=[-2.0, -4.0])
        sol = qp.solve(p)
        assert sol.status is qp.QpStatus.OPTIMAL
        np.testing.assert_allclose(sol.z, [1.0, 2.0], atol=1e-12)

    def test_equality_symmetric(self):
        p = qp.QpProblem.build(H=2 * np.eye(2), f=[0.0, 0.0], A_eq=[[1.0, 1.0]], b_eq=[1.0])
        sol = qp.solve(p)
        np.testing.assert_allclose(sol.z, [0.5, 0.5], atol=1e-12)
        assert sol.cost == pytest.approx(0.5, abs=1e-12)

    def test_matches_projected_gradient_oracle(self, rng):
        for k in range(10):
            p = random_problem(rng)
            sol = qp.solve(p)
            if sol.status is not qp.QpStatus.OPTIMAL:
                continue  # random instance was infeasible
            z_ref, converged = solve_qp_dual_projected_gradient(p)
            assert converged
            gap = abs(sol.cost - p.objective(z_ref)) / max(1.0, abs(sol.cost))
            assert gap <= 1e-6

    def test_infeasible_detected(self):
        p = qp.QpProblem.build(
            H=[[2.0]], f=[0.0], A_in=[[1.0], [-1.0]], b_in=[0.0, -1.0]
        )
        assert qp.solve(p).status is qp.QpStatus.INFEASIBLE

    def test_iteration_cap(self):
        p = clamp_problem()
        sol = qp.solve(p, max_iter=0)
        assert sol.status is qp.QpStatus.MAX_ITER

    def test_determinism(self, rng):
        p = random_problem(rng)
        a = qp.solve(p)
        b = qp.solve(p)
        np.testing.assert_array_equal(a.z, b.z)
        assert a.cost == b.cost
        assert a.iterations == b.iterations

    def test_semidefinite_hessian_regularized(self):
        # zero-cost coordinate pinned only by a constraint: needs the ridge
        p = qp.QpProblem.build(
            H=np.diag([2.0, 0.0]),
            f=[-2.0, 0.0],
            A_in=[[0.0, 1.0], [0.0, -1.0]],
            b_in=[1.0, 1.0],
        )
        sol = qp.solve(p)
        assert sol.status is qp.QpStatus.OPTIMAL
        assert "regularized" in sol.meta
        assert sol.z[0] == pytest.approx(1.0, abs=1e-6)


class TestProperties:
    def test_constraint_removal_never_raises_cost(self, rng):
        for _ in range(10):
            p = random_problem(rng)
            sol = qp.solve(p)
            if sol.status is not qp.QpStatus.OPTIMAL:
                continue
            reduced = qp.QpProblem.build(
                H=p.H, f=p.f, A_eq=p.A_eq, b_eq=p.b_eq,
                A_in=p.A_in[:-1], b_in=p.b_in[:-1],
            )
            sol_red = qp.solve(reduced)
            assert sol_red.status is qp.QpStatus.OPTIMAL
            assert sol_red.cost <= sol.cost + 1e-9

    def test_cost_scaling(self, rng):
        p = random_problem(rng)
        sol = qp.solve(p)
        alpha = 7.5
        scaled = qp.QpProblem.build(
            H=alpha * p.H, f=alpha * p.f, A_eq=p.A_eq, b_eq=p.b_eq,
            A_in=p.A_in, b_in=p.b_in,
        )
        sol_s = qp.solve(scaled)
        np.testing.assert_allclose(sol_s.z, sol.z, atol=1e-8)
        assert sol_s.cost == pytest.approx(alpha * sol.cost, rel=1e-9)


class TestKktResidual:
    def test_exact_kkt_point(self):
        p = clamp_problem()
        r = qp.kkt_residual(p, np.array([0.5]), np.zeros(0), np.array([1.0]))
        assert r <= 1e-12

    def test_perturbed_point_grows(self):
        p = clamp_problem()
        r = qp.kkt_residual(p, np.array([0.5 - 1e-3]), np.zeros(0), np.array([1.0]))
        assert r >= 1e-4

    def test_non_optimal_point_positive(self, rng):
        p = clamp_problem()
        r = qp.kkt_residual(p, np.array([0.0]), np.zeros(0), np.array([0.0]))
        assert r > 0

    def test_dimension_mismatch(self):
        p = clamp_problem()
        with pytest.raises(qp.QpError):
            qp.kkt_residual(p, np.zeros(2), np.zeros(0), np.zeros(1))


class TestValidationAndDump:
    def test_asymmetric_hessian_rejected(self):
        with pytest.raises(qp.QpError):
            qp.QpProblem.build(H=[[1.0, 0.5], [0.0, 1.0]], f=[0.0, 0.0])

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(qp.QpError):
            qp.QpProblem.build(H=np.eye(2), f=[0.0, 0.0], A_eq=[[1.0]], b_eq=[0.0])

    def test_dump_round_trip(self, tmp_path, rng):
        p = random_problem(rng)
        path = tmp_path / "problem.json"
        qp.dump_problem(p, path)
        q = qp.load_problem(path)
        np.testing.assert_array_equal(p.H, q.H)
        np.testing.assert_array_equal(p.f, q.f)
        np.testing.assert_array_equal(p.A_eq, q.A_eq)
        np.testing.assert_array_equal(p.A_in, q.A_in)
        assert p.c0 == q.c0
