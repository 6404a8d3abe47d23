import numpy as np
import pytest

from skewlab import maxmargin, taskgen
from skewlab import _qp_ref
from skewlab.core import Dataset, LabeledPoint
from skewlab.maxmargin import (
    MarginProblem,
    NotSeparableError,
    OracleBudgetError,
    ProblemError,
    oracle_active_set,
    solve_least_norm,
    v_norm,
    v_tilde_norm,
)
from skewlab.taskgen import GenSpec

try:
    from skewlab import _qp_ext
except ImportError:
    _qp_ext = None


def pair_at(margin, B=1.0):
    """Symmetric +-1 pair at the given invariant margin."""
    return (
        LabeledPoint((margin,), (B,), 1),
        LabeledPoint((-margin,), (-B,), -1),
    )


def simple_dataset(*point_groups):
    points = tuple(p for group in point_groups for p in group)
    return Dataset(points, 1.0, False, {})


class TestMarginProblem:
    def test_target_count_must_match(self):
        d = simple_dataset(pair_at(1.0))
        with pytest.raises(ProblemError):
            MarginProblem(d, (1.0,), "full")

    def test_negative_targets_rejected(self):
        d = simple_dataset(pair_at(1.0))
        with pytest.raises(ProblemError):
            MarginProblem(d, (1.0, -1.0), "full")

    def test_unknown_mask_rejected(self):
        d = simple_dataset(pair_at(1.0))
        with pytest.raises(ProblemError):
            MarginProblem(d, (1.0, 1.0), "everything")


class TestSolveLeastNorm:
    def test_symmetric_pair(self):
        d = simple_dataset(pair_at(2.0))
        sol = solve_least_norm(MarginProblem(d, (1.0, 1.0), "inv_only"))
        assert sol.converged
        assert sol.model.w_inv[0] == pytest.approx(0.5, abs=1e-8)
        assert sol.model.bias == pytest.approx(0.0, abs=1e-8)
        assert sol.model.w_sp == (0.0,)

    def test_single_point_with_free_bias_needs_no_weight(self):
        # one constraint, free bias: the bias alone satisfies it, so the
        # least-norm weight vector is zero
        d = Dataset((LabeledPoint((2.0,), (1.0,), 1),), 1.0, False, {})
        sol = solve_least_norm(MarginProblem(d, (1.0,), "inv_only"))
        assert sol.converged
        assert np.linalg.norm(sol.model.w_inv) == pytest.approx(0.0, abs=1e-12)
        assert sol.model.margin(d.points[0]) >= 1.0 - 1e-9

    def test_bias_disabled_single_point(self):
        d = Dataset((LabeledPoint((2.0,), (1.0,), 1),), 1.0, False, {})
        sol = solve_least_norm(MarginProblem(d, (1.0,), "inv_only", bias_enabled=False))
        assert sol.model.w_inv[0] == pytest.approx(0.5, abs=1e-8)
        assert sol.model.bias == 0.0

    def test_infeasible_raises(self):
        points = (
            LabeledPoint((1.0,), (1.0,), 1),
            LabeledPoint((1.0,), (1.0,), -1),
        )
        d = Dataset(points, 1.0, False, {})
        with pytest.raises(NotSeparableError):
            solve_least_norm(MarginProblem(d, (1.0, 1.0), "full"))

    def test_infeasible_without_bias_raises(self):
        points = (
            LabeledPoint((1.0,), (1.0,), 1),
            LabeledPoint((1.0,), (1.0,), -1),
        )
        d = Dataset(points, 1.0, False, {})
        with pytest.raises(NotSeparableError):
            solve_least_norm(
                MarginProblem(d, (1.0, 1.0), "full", bias_enabled=False)
            )

    def test_zero_targets_solved_by_zero(self):
        d = simple_dataset(pair_at(1.0))
        sol = solve_least_norm(MarginProblem(d, (0.0, 0.0), "full"))
        assert sol.objective == pytest.approx(0.0, abs=1e-12)

    def test_converged_certificate(self):
        d = taskgen.gen_2dim(GenSpec(n=64, p=0.8, seed=11))
        sol = maxmargin.full_max_margin(d, tol=1e-8)
        assert sol.converged
        assert sol.kkt_residual <= 1e-8

    def test_general_targets(self):
        # margin target 3 on a symmetric pair at invariant margin 1
        d = simple_dataset(pair_at(1.0))
        sol = solve_least_norm(MarginProblem(d, (3.0, 3.0), "inv_only"))
        assert sol.model.w_inv[0] == pytest.approx(3.0, abs=1e-7)


class TestNorms:
    def test_v_norm_scales_inversely_with_margin(self):
        d = simple_dataset(pair_at(0.25))
        assert v_norm(d, [0, 1]) == pytest.approx(4.0, abs=1e-7)

    def test_single_point_norm_is_zero(self):
        # with a free bias a one-point margin problem needs no weight
        d = simple_dataset(pair_at(0.5))
        assert v_norm(d, [0]) == pytest.approx(0.0, abs=1e-9)

    def test_tilde_dominates_plain(self):
        d = taskgen.gen_geometric_2d(0.1, 2.0, 4, 4)
        for idx in ([0, 1], [2, 3], list(range(len(d)))):
            assert v_tilde_norm(d, idx) >= v_norm(d, idx) - 1e-9

    def test_full_set_tilde_equals_plain(self):
        d = taskgen.gen_geometric_2d(0.2, 1.5, 4, 2)
        idx = range(len(d))
        assert v_tilde_norm(d, idx) == pytest.approx(v_norm(d, idx), abs=1e-7)

    def test_empty_index_set_rejected(self):
        d = simple_dataset(pair_at(1.0))
        with pytest.raises(ProblemError):
            v_norm(d, [])


class TestBalanced:
    def test_unit_balance_recovers_max_margin(self):
        d = taskgen.gen_geometric_2d(0.1, 2.0, 2, 2)
        plain = maxmargin.full_max_margin(d)
        balanced = maxmargin.balanced_max_margin(d, 1.0)
        assert balanced.objective == pytest.approx(plain.objective, rel=1e-7)

    def test_balance_parameter_validated(self):
        d = taskgen.gen_geometric_2d(0.1, 2.0, 2, 2)
        with pytest.raises(ProblemError):
            maxmargin.balanced_max_margin(d, 0.0)

    def test_worked_instance_balanced_solution(self):
        d = taskgen.gen_geometric_2d(0.1, 2.0, 2, 2)
        sol = maxmargin.balanced_max_margin(d, 0.05)
        assert sol.model.w_inv[0] == pytest.approx(10.0, rel=1e-6)
        assert sol.model.w_sp_scalar == pytest.approx(0.0, abs=1e-6)


class TestOracle:
    def test_budget_enforced(self):
        d = taskgen.gen_2dim(GenSpec(n=20, p=0.8, seed=0))
        with pytest.raises(OracleBudgetError):
            oracle_active_set(MarginProblem(d, (1.0,) * 20, "full"))

    def test_oracle_matches_solver_on_worked_instance(self):
        d = taskgen.gen_geometric_2d(0.1, 2.0, 2, 2)
        problem = MarginProblem(d, (1.0,) * 4, "full")
        a = oracle_active_set(problem)
        b = solve_least_norm(problem, tol=1e-10)
        assert a.objective == pytest.approx(b.objective, rel=1e-8)
        assert np.allclose(a.model.w, b.model.w, atol=1e-6)

    def test_oracle_infeasible(self):
        points = (
            LabeledPoint((1.0,), (1.0,), 1),
            LabeledPoint((1.0,), (1.0,), -1),
        )
        d = Dataset(points, 1.0, False, {})
        with pytest.raises(NotSeparableError):
            oracle_active_set(MarginProblem(d, (1.0, 1.0), "full"))


class TestKernelBackends:
    def test_reference_kernel_solves_worked_instance(self):
        d = taskgen.gen_geometric_2d(0.1, 2.0, 2, 2)
        X = d.feature_matrix()
        y = d.labels()
        c = np.ones(4)
        alpha, w, b, _, status = _qp_ref.solve_dual(X, y, c, True, 1e-10, 10**6, 1e12)
        assert status == _qp_ref.CONVERGED
        assert np.allclose(w, [20.0 / 21.0, 19.0 / 21.0], atol=1e-6)
        assert abs(b) < 1e-6

    @pytest.mark.skipif(_qp_ext is None, reason="compiled kernel not built")
    def test_backends_agree_on_random_instances(self):
        for seed in range(40):
            rng = np.random.default_rng(500 + seed)
            n, dim = int(rng.integers(2, 12)), int(rng.integers(1, 4))
            X = rng.normal(0, 1, (n, dim))
            y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
            c = rng.uniform(0, 2, n)
            bias = bool(rng.random() < 0.5)
            ref = _qp_ref.solve_dual(X, y, c, bias, 1e-10, 10**6, 1e12)
            ext = _qp_ext.solve_dual(X, y, c, bias, 1e-10, 10**6, 1e12)
            assert ref[4] == ext[4], f"status mismatch on seed {seed}"
            if ref[4] == _qp_ref.CONVERGED:
                obj_ref = c @ ref[0] - 0.5 * ref[1] @ ref[1]
                obj_ext = c @ ext[0] - 0.5 * ext[1] @ ext[1]
                assert obj_ref == pytest.approx(obj_ext, rel=1e-7, abs=1e-9)
