import pytest

from skewlab import taskgen
from skewlab.core import DatasetError, split_groups
from skewlab.taskgen import GenSpec, GenSpecError


class TestGenSpec:
    @pytest.mark.parametrize("kwargs", [
        {"n": 1, "p": 0.7},
        {"n": 8, "p": 0.4},
        {"n": 8, "p": 1.0},
        {"n": 8, "p": 0.7, "B": 0.0},
        {"n": 8, "p": 0.7, "pairing": True, "exact_counts": True},
    ])
    def test_invalid_parameters(self, kwargs):
        with pytest.raises(GenSpecError):
            GenSpec(**kwargs)


class TestGen2dim:
    def test_exact_half_gives_all_four_corners(self):
        d = taskgen.gen_2dim(GenSpec(n=4, p=0.5, B=1.0, exact_counts=True))
        got = {(p.x_inv[0], p.x_sp[0], p.y) for p in d.points}
        assert got == {
            (1.0, 1.0, 1), (1.0, -1.0, 1), (-1.0, -1.0, -1), (-1.0, 1.0, -1),
        }

    def test_exact_counts(self):
        d = taskgen.gen_2dim(GenSpec(n=20, p=0.9, B=1.0, exact_counts=True))
        split = split_groups(d)
        assert len(split.majority) == 18
        assert len(split.minority) == 2
        # minority balanced across classes
        assert {d.points[k].y for k in split.minority} == {1, -1}

    def test_noninteger_count_rounds_toward_majority(self):
        d = taskgen.gen_2dim(GenSpec(n=10, p=0.75, B=1.0, exact_counts=True))
        assert len(split_groups(d).majority) == 8
        assert d.meta["p_empirical"] == repr(0.8)

    def test_invariant_feature_equals_label(self):
        d = taskgen.gen_2dim(GenSpec(n=32, p=0.8, B=3.0, seed=5))
        assert all(p.x_inv[0] == p.y for p in d.points)
        assert all(abs(p.x_sp[0]) == 3.0 for p in d.points)

    def test_sampled_mode_is_seeded(self):
        a = taskgen.gen_2dim(GenSpec(n=64, p=0.8, seed=7))
        b = taskgen.gen_2dim(GenSpec(n=64, p=0.8, seed=7))
        c = taskgen.gen_2dim(GenSpec(n=64, p=0.8, seed=8))
        assert a.points == b.points
        assert a.points != c.points

    def test_pairing_balances_signs_exactly(self):
        d = taskgen.gen_2dim(GenSpec(n=8, p=0.5, B=1.0, pairing=True))
        assert len(d) == 8
        assert split_groups(d).p_empirical == 0.5
        # every invariant point appears with both spurious signs
        inv_sp = sorted((p.x_inv[0], p.x_sp[0]) for p in d.points)
        assert inv_sp.count((1.0, 1.0)) == inv_sp.count((1.0, -1.0))

    def test_pairing_majority_multiplicity(self):
        d = taskgen.gen_2dim(GenSpec(n=8, p=0.75, B=1.0, pairing=True))
        assert split_groups(d).p_empirical == 0.75


class TestAttachSpurious:
    def test_empty_input_rejected(self):
        with pytest.raises(GenSpecError):
            taskgen.attach_spurious([], GenSpec(n=4, p=0.5))

    def test_group_membership_independent_of_invariant_under_pairing(self):
        inv = [((0.3, -1.2), 1), ((0.5, 0.1), -1), ((2.0, 2.0), 1)]
        d = taskgen.attach_spurious(inv, GenSpec(n=3, p=0.5, pairing=True))
        split = split_groups(d)
        maj_inv = sorted(d.points[k].x_inv for k in split.majority)
        min_inv = sorted(d.points[k].x_inv for k in split.minority)
        assert maj_inv == min_inv


class TestGeometric2d:
    def test_margins_and_groups(self):
        d = taskgen.gen_geometric_2d(0.1, 2.0, 4, 2, B=1.0)
        split = split_groups(d)
        assert len(split.majority) == 4 and len(split.minority) == 2
        for k in split.majority:
            assert abs(d.points[k].x_inv[0]) == 0.1
        for k in split.minority:
            assert abs(d.points[k].x_inv[0]) == 2.0

    @pytest.mark.parametrize("args", [(0.0, 2, 2, 2), (0.1, 2, 3, 2), (0.1, 2, 2, 0)])
    def test_invalid_arguments(self, args):
        with pytest.raises(GenSpecError):
            taskgen.gen_geometric_2d(*args)


class TestReluFeatures:
    def test_outputs_nonnegative_and_seeded(self):
        inv = [((1.0, -2.0), 1), ((0.5, 0.5), -1)]
        a = taskgen.gen_random_relu_features(inv, 16, seed=2)
        b = taskgen.gen_random_relu_features(inv, 16, seed=2)
        assert a == b
        assert all(len(x) == 16 for x, _ in a)
        assert all(v >= 0 for x, _ in a for v in x)
        assert [y for _, y in a] == [1, -1]


class TestDuplicateMajority:
    def test_reaches_target_ratio(self):
        d = taskgen.gen_2dim(GenSpec(n=20, p=0.5, B=1.0, pairing=True))
        dup = taskgen.duplicate_majority(d, 10.0, seed=1)
        split = split_groups(dup)
        assert len(split.majority) == 10 * len(split.minority)
        assert "dup_multiplicity" in dup.meta

    def test_multiplicity_accounts_for_every_copy(self):
        d = taskgen.gen_2dim(GenSpec(n=10, p=0.5, B=1.0, pairing=True))
        dup = taskgen.duplicate_majority(d, 4.0, seed=3)
        counts = dict(
            item.split(":") for item in dup.meta["dup_multiplicity"].split(",")
        )
        assert sum(int(v) for v in counts.values()) == len(split_groups(dup).majority)

    def test_ratio_below_current_rejected(self):
        d = taskgen.gen_2dim(GenSpec(n=20, p=0.9, B=1.0, exact_counts=True))
        with pytest.raises(DatasetError):
            taskgen.duplicate_majority(d, 2.0)


class TestHighdimSpurious:
    def test_shapes_and_support(self):
        d = taskgen.gen_highdim_spurious(10, 25, 0.7, seed=4)
        assert d.inv_dim == 1 and d.sp_dim == 25
        assert all(abs(v) == 1.0 for p in d.points for v in p.x_sp)
        assert d.meta["p_vec"].count(",") == 24

    def test_vector_rates_validated(self):
        with pytest.raises(GenSpecError):
            taskgen.gen_highdim_spurious(10, 3, [0.7, 0.7], seed=0)
        with pytest.raises(GenSpecError):
            taskgen.gen_highdim_spurious(10, 2, [0.7, 0.3], seed=0)


class TestConstraintBreakers:
    def test_unknown_kind(self):
        with pytest.raises(GenSpecError):
            taskgen.gen_constraint_breakers("nope")

    def test_cond_dependent_needs_small_b(self):
        with pytest.raises(GenSpecError):
            taskgen.gen_constraint_breakers("cond_dependent", {"B": 1.0})

    def test_cond_dependent_identity(self):
        d = taskgen.gen_constraint_breakers("cond_dependent", {"B": 0.5, "n": 12})
        assert d.meta["c3"] == "false"
        for p in d.points:
            assert p.x_inv[0] + p.x_sp[0] == pytest.approx(p.y)

    def test_nonorthogonal_flag(self):
        d = taskgen.gen_constraint_breakers("nonorthogonal", {"n": 12})
        assert d.meta["c5"] == "false"
        assert not d.sp_two_valued
