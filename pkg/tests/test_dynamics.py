import math

import numpy as np
import pytest

from skewlab import dynamics, maxmargin, taskgen
from skewlab.dynamics import DynSpec, DynamicsError
from skewlab.taskgen import GenSpec

GRID = tuple(np.logspace(0, 6, 13).tolist())


def flow_spec(loss="exponential", checkpoints=(1.0, 10.0, 100.0)):
    return DynSpec(loss=loss, mode="flow", t_checkpoints=checkpoints)


class TestDynSpec:
    @pytest.mark.parametrize("kwargs", [
        {"loss": "hinge", "mode": "flow", "t_checkpoints": (1.0,)},
        {"loss": "logistic", "mode": "sgd", "t_checkpoints": (1.0,)},
        {"loss": "logistic", "mode": "flow", "t_checkpoints": ()},
        {"loss": "logistic", "mode": "flow", "t_checkpoints": (2.0, 1.0)},
        {"loss": "logistic", "mode": "flow", "t_checkpoints": (0.0, 1.0)},
        {"loss": "logistic", "mode": "discrete", "t_checkpoints": (1.5,)},
        {"loss": "logistic", "mode": "discrete", "t_checkpoints": (10.0,), "lr": 0.0},
        {"loss": "logistic", "mode": "flow", "t_checkpoints": (1.0,), "weight_decay": -1.0},
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            DynSpec(**kwargs)


class TestClosedForms:
    def test_symmetric_case_has_no_spurious_weight(self):
        for t in (0.0, 0.5, 3.0, 1e4):
            w_inv, w_sp = dynamics.closed_form_2dim_exp(0.5, t)
            assert w_sp == 0.0
            assert w_inv == pytest.approx(math.log1p(t))

    def test_known_value(self):
        w_inv, w_sp = dynamics.closed_form_2dim_exp(0.9, 10.0)
        assert w_inv == pytest.approx(0.5 * math.log(57.0), abs=1e-12)
        assert w_sp == pytest.approx(0.5 * math.log(19.0 / 3.0), abs=1e-12)
        assert (w_inv, w_sp) == pytest.approx((2.02148, 0.92291), abs=1e-4)

    def test_origin(self):
        assert dynamics.closed_form_2dim_exp(0.7, 0.0) == (0.0, 0.0)

    def test_fixed_point_examples(self):
        assert dynamics.fixed_point_exp(0.5, 1.0) == 0.0
        assert dynamics.fixed_point_exp(0.9, 1.0) == pytest.approx(math.log(3.0))
        assert dynamics.fixed_point_exp(0.75, 2.0) == pytest.approx(0.25 * math.log(3.0))


class TestEnvelopeBounds:
    def test_b2_vanishes_at_half(self):
        for t in (1.0, 10.0, 1e5):
            lo, hi = dynamics.thm_b2_bounds(0.5, 1.0, 1.0, t)
            assert lo == pytest.approx(0.0, abs=1e-12)
            assert hi == pytest.approx(0.0, abs=1e-12)

    def test_b2_log_decay_is_exact(self):
        lo1, hi1 = dynamics.thm_b2_bounds(0.8, 1.0, 1.5, 3.0)
        lo2, hi2 = dynamics.thm_b2_bounds(0.8, 1.0, 1.5, 80.0)
        ratio = math.log1p(80.0) / math.log1p(3.0)
        assert lo1 / lo2 == pytest.approx(ratio, rel=1e-12)
        assert hi1 / hi2 == pytest.approx(ratio, rel=1e-12)

    def test_b2_lower_numerator(self):
        lo, _ = dynamics.thm_b2_bounds(0.9, 1.0, 1.0, math.e - 1.0)
        # c = 2 at M = 1: numerator ln(2.9 / 2.3), denominator 2M ln(1+t) = 2
        assert lo == pytest.approx(math.log(2.9 / 2.3) / 2.0, rel=1e-12)
        assert math.log(2.9 / 2.3) == pytest.approx(0.23180, abs=1e-5)

    def test_b4_values(self):
        lo, hi = dynamics.thm_b4_bounds(0.5, 10.0)
        assert lo == 0.0 and hi == 0.0
        lo, _ = dynamics.thm_b4_bounds(0.9, math.e - 1.0)
        assert lo == pytest.approx(0.5 * math.log(5.0 / 3.0), rel=1e-12)
        assert 0.5 * math.log(5.0 / 3.0) == pytest.approx(0.25541, abs=1e-5)

    def test_b4_upper_is_nonnegative(self):
        for p in (0.5, 0.7, 0.95):
            _, hi = dynamics.thm_b4_bounds(p, 25.0)
            assert hi >= 0.0


class TestInitialGradientDirection:
    def test_exact_counts(self):
        d = taskgen.gen_2dim(GenSpec(n=20, p=0.9, B=1.0, exact_counts=True))
        direction = dynamics.initial_gradient_direction(d)
        assert direction[0] == pytest.approx(1.0)
        assert direction[1] == pytest.approx(0.8)

    def test_paired(self):
        d = taskgen.gen_2dim(GenSpec(n=8, p=0.5, B=1.0, pairing=True))
        direction = dynamics.initial_gradient_direction(d)
        assert direction[1] == 0.0


class TestSimulate:
    def test_paired_flow_has_exactly_zero_spurious_weight(self):
        d = taskgen.gen_2dim(GenSpec(n=4, p=0.5, B=1.0, pairing=True))
        traj = dynamics.simulate(d, flow_spec())
        assert all(r.w_sp == 0.0 for r in traj.records)
        assert all(r.beta == 0.0 for r in traj.records)

    def test_times_strictly_increasing_and_finite(self):
        d = taskgen.gen_2dim(GenSpec(n=20, p=0.75, B=1.0, exact_counts=True))
        traj = dynamics.simulate(d, flow_spec(checkpoints=GRID))
        times = [r.t for r in traj.records]
        assert times == sorted(times) and len(set(times)) == len(times)
        for r in traj.records:
            assert math.isfinite(r.loss) and math.isfinite(r.w_sp)
            assert all(math.isfinite(v) for v in r.w_inv)

    def test_no_clamping_at_desk_scale(self):
        d = taskgen.gen_2dim(GenSpec(n=20, p=0.9, B=1.0, exact_counts=True))
        traj = dynamics.simulate(d, flow_spec(checkpoints=(1.0, 100.0)))
        assert traj.clamp_events == 0

    def test_residual_tracks_log_growth(self):
        # w(t) = w_hat ln(1+t) + rho(t): the residual stays bounded while
        # the weights themselves grow without bound
        d = taskgen.gen_2dim(GenSpec(n=4, p=0.5, B=1.0, pairing=True))
        traj = dynamics.simulate(d, flow_spec(checkpoints=GRID))
        final = traj.records[-1]
        assert math.hypot(*final.w_inv, final.w_sp) > 10.0
        assert all(r.residual_norm < 1.0 for r in traj.records)

    def test_discrete_matches_flow_for_small_lr(self):
        d = taskgen.gen_2dim(GenSpec(n=20, p=0.9, B=1.0, exact_counts=True))
        flow = dynamics.simulate(d, flow_spec(checkpoints=(1.0,)))
        disc = dynamics.simulate(d, DynSpec(
            loss="exponential", mode="discrete", lr=1e-4,
            t_checkpoints=(10000.0,),
        ))
        # 10^4 steps of size 1e-4 approximate the flow at t = 1
        assert disc.records[-1].w_sp == pytest.approx(flow.records[-1].w_sp, rel=1e-2)

    def test_minibatch_is_deterministic_given_seed(self):
        d = taskgen.gen_2dim(GenSpec(n=64, p=0.8, B=1.0, seed=2))
        spec = DynSpec(loss="logistic", mode="discrete", lr=1e-2,
                       batch_size=8, seed=9, t_checkpoints=(5.0, 20.0))
        a = dynamics.simulate(d, spec)
        b = dynamics.simulate(d, spec)
        assert a.records == b.records
        other = dynamics.simulate(d, DynSpec(
            loss="logistic", mode="discrete", lr=1e-2,
            batch_size=8, seed=10, t_checkpoints=(5.0, 20.0),
        ))
        assert a.records != other.records

    def test_multidim_spurious_rejected(self):
        d = taskgen.gen_highdim_spurious(10, 4, 0.8, seed=0)
        with pytest.raises(DynamicsError):
            dynamics.simulate(d, flow_spec())


class TestSkewFreeSandwich:
    def test_beta_between_envelopes_on_paired_data(self):
        # pairing realizes the exact group-balance hypothesis; t0 = 1
        for p in (0.75, 0.8):
            d = taskgen.gen_2dim(GenSpec(n=8, p=p, B=1.0, pairing=True))
            sol = maxmargin.full_max_margin(d, bias_enabled=False)
            M = float(np.max(d.labels() * (d.feature_matrix() @ sol.model.w)))
            traj = dynamics.simulate(d, flow_spec(checkpoints=GRID))
            for r in traj.records:
                lo, hi = dynamics.thm_b2_bounds(p, 1.0, M, r.t)
                assert lo - 1e-9 <= r.beta_2d <= hi + 1e-9, (p, r.t, lo, r.beta_2d, hi)


class TestWeightDecay:
    def test_decay_caps_the_spurious_weight(self):
        # with decay the weights stop growing, so running the decayed
        # flow to stationarity gives the ratio the plain flow only
        # reaches much later -- its stationary beta undercuts the plain
        # flow's value at the experiment horizon
        d = taskgen.gen_2dim(GenSpec(n=20, p=0.9, B=1.0, exact_counts=True))
        plain = dynamics.simulate(d, flow_spec(checkpoints=(100.0,)))
        decayed = dynamics.simulate(d, DynSpec(
            loss="exponential", mode="flow", weight_decay=1e-3,
            t_checkpoints=(5000.0, 10000.0, 20000.0),
        ))
        sp = [r.w_sp for r in decayed.records]
        # stationary: consecutive checkpoints agree closely
        assert sp[-1] == pytest.approx(sp[-2], abs=1e-5)
        assert decayed.records[-1].beta_2d < plain.records[-1].beta_2d
