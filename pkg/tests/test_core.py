import math

import pytest

from skewlab import taskgen
from skewlab.core import (
    Dataset,
    DatasetError,
    LabeledPoint,
    read_dataset_csv,
    split_groups,
    validate_easy_task,
    write_dataset_csv,
)
from skewlab.taskgen import GenSpec


def two_feature_dataset():
    return taskgen.gen_2dim(GenSpec(n=4, p=0.5, B=1.0, exact_counts=True))


class TestLabeledPoint:
    def test_rejects_bad_label(self):
        with pytest.raises(DatasetError):
            LabeledPoint((1.0,), (1.0,), 0)

    def test_rejects_empty_invariant_block(self):
        with pytest.raises(DatasetError):
            LabeledPoint((), (1.0,), 1)

    def test_features_concatenates_inv_then_sp(self):
        p = LabeledPoint((1.0, 2.0), (3.0,), -1)
        assert p.features == (1.0, 2.0, 3.0)


class TestDataset:
    def test_rejects_empty(self):
        with pytest.raises(DatasetError):
            Dataset((), 1.0, True)

    def test_rejects_inhomogeneous_dims(self):
        pts = (LabeledPoint((1.0,), (1.0,), 1), LabeledPoint((1.0, 2.0), (1.0,), 1))
        with pytest.raises(DatasetError):
            Dataset(pts, 1.0, False)

    def test_two_valued_support_is_enforced(self):
        pts = (LabeledPoint((1.0,), (0.5,), 1),)
        with pytest.raises(DatasetError):
            Dataset(pts, 1.0, True)
        # the same support is fine when the flag is off
        Dataset(pts, 1.0, False)

    def test_matrix_shapes(self):
        d = two_feature_dataset()
        assert d.inv_matrix().shape == (4, 1)
        assert d.sp_matrix().shape == (4, 1)
        assert d.feature_matrix().shape == (4, 2)
        assert set(d.labels().tolist()) == {-1.0, 1.0}


class TestSplitGroups:
    def test_exact_four_point_task(self):
        d = two_feature_dataset()
        split = split_groups(d)
        assert len(split.majority) == 2
        assert len(split.minority) == 2
        for k in split.majority:
            p = d.points[k]
            assert p.x_sp[0] * p.y > 0
        for k in split.minority:
            p = d.points[k]
            assert p.x_sp[0] * p.y < 0

    def test_empirical_fraction(self):
        d = taskgen.gen_2dim(GenSpec(n=20, p=0.9, B=1.0, exact_counts=True))
        assert split_groups(d).p_empirical == pytest.approx(0.9)

    def test_requires_two_valued_scalar(self):
        pts = (LabeledPoint((1.0,), (0.5,), 1),)
        d = Dataset(pts, 1.0, False)
        with pytest.raises(DatasetError):
            split_groups(d)


class TestValidateEasyTask:
    def test_generated_task_satisfies_all(self):
        report = validate_easy_task(two_feature_dataset())
        assert report.all_satisfied
        assert report.inv_margin == pytest.approx(1.0, abs=1e-6)

    def test_missing_provenance_counts_as_unsatisfied(self):
        pts = (LabeledPoint((1.0,), (1.0,), 1), LabeledPoint((-1.0,), (-1.0,), -1))
        report = validate_easy_task(Dataset(pts, 1.0, True))
        assert report.c1_inv_separable
        assert not report.c2_inv_stable
        assert "no provenance" in report.diagnostics["c2"]

    def test_three_valued_support_fails_c4(self):
        pts = (
            LabeledPoint((1.0,), (1.0,), 1),
            LabeledPoint((1.0,), (0.0,), 1),
            LabeledPoint((-1.0,), (-1.0,), -1),
        )
        report = validate_easy_task(Dataset(pts, 1.0, False))
        assert not report.c4_sp_two_valued

    def test_breaker_flags_are_echoed(self):
        d = taskgen.gen_constraint_breakers("unstable_invariant", {"n": 8})
        report = validate_easy_task(d)
        assert not report.c2_inv_stable
        assert report.c3_cond_independent and report.c5_blocks_orthogonal

    def test_single_class_margin_is_infinite(self):
        pts = (LabeledPoint((1.0,), (1.0,), 1), LabeledPoint((2.0,), (1.0,), 1))
        report = validate_easy_task(Dataset(pts, 1.0, True))
        assert report.c1_inv_separable
        assert math.isinf(report.inv_margin)


class TestCsvRoundTrip:
    def test_round_trip_preserves_everything(self, tmp_path):
        d = taskgen.gen_2dim(GenSpec(n=10, p=0.75, B=2.0, seed=3))
        path = tmp_path / "data.csv"
        write_dataset_csv(d, path)
        back = read_dataset_csv(path)
        assert back.points == d.points
        assert back.sp_scale == d.sp_scale
        assert back.sp_two_valued == d.sp_two_valued
        assert dict(back.meta) == dict(d.meta)

    def test_missing_sidecar_is_an_error(self, tmp_path):
        d = two_feature_dataset()
        path = tmp_path / "data.csv"
        write_dataset_csv(d, path)
        (tmp_path / "data.meta").unlink()
        with pytest.raises(DatasetError):
            read_dataset_csv(path)

    def test_header_layout(self, tmp_path):
        d = taskgen.gen_highdim_spurious(4, 3, 0.8, seed=1)
        path = tmp_path / "hd.csv"
        write_dataset_csv(d, path)
        header = path.read_text().splitlines()[0]
        assert header == "label,sp0,sp1,sp2,inv0"
