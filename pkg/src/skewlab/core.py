"""Shared domain types: labeled points with an invariant/spurious feature
split, immutable datasets with provenance metadata, group splits, linear
models, and the easy-task constraint checker.

Feature convention throughout the package: a point is (x_inv, x_sp, y)
with y in {-1, +1}; the concatenated feature vector is [x_inv..., x_sp...].
A point belongs to the majority group when every coordinate of x_sp agrees
in sign with y (for the common scalar case: x_sp * y > 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

Vector = tuple[float, ...]


class DatasetError(ValueError):
    """Malformed dataset (dims, labels, or two-valued support)."""


class MissingGroupError(ValueError):
    """A group operation needs both majority and minority points."""


def _as_vector(values: Iterable[float]) -> Vector:
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class LabeledPoint:
    """One example: invariant block, spurious block, binary label."""

    x_inv: Vector
    x_sp: Vector
    y: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "x_inv", _as_vector(self.x_inv))
        object.__setattr__(self, "x_sp", _as_vector(self.x_sp))
        object.__setattr__(self, "y", int(self.y))
        if self.y not in (-1, 1):
            raise DatasetError(f"label must be -1 or +1, got {self.y}")
        if not self.x_inv:
            raise DatasetError("invariant block must be non-empty")

    @property
    def features(self) -> Vector:
        return self.x_inv + self.x_sp


@dataclass(frozen=True)
class Dataset:
    """Immutable bag of labeled points plus spurious-feature conventions.

    sp_scale is the magnitude B of the spurious coordinate; when
    sp_two_valued is set the (scalar) spurious feature is checked to take
    values in {-B, +B} exactly.  meta carries generator provenance as
    string key/value pairs and round-trips through the CSV sidecar.
    """

    points: tuple[LabeledPoint, ...]
    sp_scale: float
    sp_two_valued: bool
    meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "meta", MappingProxyType(dict(self.meta)))
        if not self.points:
            raise DatasetError("dataset must contain at least one point")
        if self.sp_scale <= 0:
            raise DatasetError("sp_scale must be positive")
        d_inv = len(self.points[0].x_inv)
        d_sp = len(self.points[0].x_sp)
        for p in self.points:
            if len(p.x_inv) != d_inv or len(p.x_sp) != d_sp:
                raise DatasetError("inhomogeneous feature dimensions")
        if self.sp_two_valued:
            if d_sp != 1:
                raise DatasetError("two-valued spurious feature must be scalar")
            for p in self.points:
                if abs(p.x_sp[0]) != self.sp_scale:
                    raise DatasetError(
                        f"spurious value {p.x_sp[0]} not in "
                        f"{{-{self.sp_scale}, +{self.sp_scale}}}"
                    )

    def __len__(self) -> int:
        return len(self.points)

    @property
    def inv_dim(self) -> int:
        return len(self.points[0].x_inv)

    @property
    def sp_dim(self) -> int:
        return len(self.points[0].x_sp)

    def inv_matrix(self) -> np.ndarray:
        return np.array([p.x_inv for p in self.points], dtype=np.float64)

    def sp_matrix(self) -> np.ndarray:
        return np.array([p.x_sp for p in self.points], dtype=np.float64)

    def feature_matrix(self) -> np.ndarray:
        return np.array([p.features for p in self.points], dtype=np.float64)

    def labels(self) -> np.ndarray:
        return np.array([p.y for p in self.points], dtype=np.float64)

    def replace_meta(self, **updates: str) -> "Dataset":
        merged = dict(self.meta)
        merged.update({k: str(v) for k, v in updates.items()})
        return Dataset(self.points, self.sp_scale, self.sp_two_valued, merged)


@dataclass(frozen=True)
class GroupSplit:
    """Index partition into spurious-aligned (majority) and anti-aligned
    (minority) points."""

    majority: tuple[int, ...]
    minority: tuple[int, ...]

    @property
    def p_empirical(self) -> float:
        total = len(self.majority) + len(self.minority)
        return len(self.majority) / total if total else math.nan


@dataclass(frozen=True)
class LinearModel:
    """Linear classifier split along the feature convention."""

    w_inv: Vector
    w_sp: Vector
    bias: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "w_inv", _as_vector(self.w_inv))
        object.__setattr__(self, "w_sp", _as_vector(self.w_sp))
        object.__setattr__(self, "bias", float(self.bias))

    @property
    def w(self) -> np.ndarray:
        return np.array(self.w_inv + self.w_sp, dtype=np.float64)

    @property
    def w_sp_scalar(self) -> float:
        if len(self.w_sp) != 1:
            raise ValueError("w_sp is not scalar")
        return self.w_sp[0]

    def margin(self, point: LabeledPoint) -> float:
        return point.y * (float(np.dot(self.w, point.features)) + self.bias)

    def margins(self, dataset: Dataset) -> np.ndarray:
        scores = dataset.feature_matrix() @ self.w + self.bias
        return dataset.labels() * scores


@dataclass(frozen=True)
class ConstraintReport:
    """Outcome of the five easy-task checks (see validate_easy_task)."""

    c1_inv_separable: bool
    c2_inv_stable: bool
    c3_cond_independent: bool
    c4_sp_two_valued: bool
    c5_blocks_orthogonal: bool
    inv_margin: float
    diagnostics: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "diagnostics", MappingProxyType(dict(self.diagnostics)))

    @property
    def all_satisfied(self) -> bool:
        return (
            self.c1_inv_separable
            and self.c2_inv_stable
            and self.c3_cond_independent
            and self.c4_sp_two_valued
            and self.c5_blocks_orthogonal
        )


def split_groups(dataset: Dataset) -> GroupSplit:
    """Partition point indices by sign agreement of x_sp with the label.

    Requires a scalar, strictly two-valued spurious feature so membership
    is unambiguous.
    """
    if dataset.sp_dim != 1:
        raise DatasetError("split_groups needs a scalar spurious feature")
    if not dataset.sp_two_valued:
        raise DatasetError("split_groups needs a two-valued spurious feature")
    maj: list[int] = []
    mino: list[int] = []
    for k, p in enumerate(dataset.points):
        (maj if p.x_sp[0] * p.y > 0 else mino).append(k)
    return GroupSplit(tuple(maj), tuple(mino))


def require_both_groups(split: GroupSplit) -> None:
    if not split.majority or not split.minority:
        empty = "majority" if not split.majority else "minority"
        raise MissingGroupError(f"{empty} group is empty")


def validate_easy_task(dataset: Dataset) -> ConstraintReport:
    """Check the five structural constraints an easy spurious task obeys.

    c1 (invariant separability) is decided by solving the invariant-only
    least-norm problem; the achieved margin is reported.  c4 (two-valued
    spurious feature) is decided by scanning the support.  c2 (stable
    invariant), c3 (class-conditional independence) and c5 (orthogonal
    blocks) are distributional properties of the generating process, so
    they are echoed from the generator provenance flags in dataset.meta
    ("c2"/"c3"/"c5"); a missing flag counts as unsatisfied and is called
    out in the diagnostics.
    """
    from . import maxmargin  # local import: avoids a cycle at module load

    diags: dict[str, str] = {}

    try:
        norm = maxmargin.v_norm(dataset, range(len(dataset)))
        c1 = True
        inv_margin = math.inf if norm == 0.0 else 1.0 / norm
        diags["c1"] = f"invariant-only margin {inv_margin:.6g}"
    except maxmargin.NotSeparableError as exc:
        c1 = False
        inv_margin = math.nan
        diags["c1"] = f"invariant block not separable: {exc}"

    flags = {}
    for key in ("c2", "c3", "c5"):
        raw = dataset.meta.get(key)
        if raw is None:
            flags[key] = False
            diags[key] = "no provenance flag recorded"
        else:
            flags[key] = raw.lower() == "true"
            diags[key] = f"provenance flag {raw}"

    if dataset.sp_dim != 1:
        c4 = False
        diags["c4"] = f"spurious block has dimension {dataset.sp_dim}"
    else:
        support = {p.x_sp[0] for p in dataset.points}
        c4 = all(abs(v) == dataset.sp_scale for v in support)
        diags["c4"] = f"spurious support {sorted(support)}"

    return ConstraintReport(
        c1_inv_separable=c1,
        c2_inv_stable=flags["c2"],
        c3_cond_independent=flags["c3"],
        c4_sp_two_valued=c4,
        c5_blocks_orthogonal=flags["c5"],
        inv_margin=inv_margin,
        diagnostics=diags,
    )


# ---------------------------------------------------------------------------
# CSV persistence: header "label,sp0..,inv0.." plus a key=value sidecar
# holding sp_scale / sp_two_valued / provenance, so a round trip preserves
# the dataset exactly (floats are written with repr, which is lossless).
# ---------------------------------------------------------------------------


def meta_path_for(csv_path: Path | str) -> Path:
    return Path(csv_path).with_suffix(".meta")


def write_dataset_csv(dataset: Dataset, csv_path: Path | str) -> None:
    csv_path = Path(csv_path)
    d_sp, d_inv = dataset.sp_dim, dataset.inv_dim
    header = ["label"]
    header += [f"sp{i}" for i in range(d_sp)]
    header += [f"inv{i}" for i in range(d_inv)]
    lines = [",".join(header)]
    for p in dataset.points:
        row = [str(p.y)]
        row += [repr(v) for v in p.x_sp]
        row += [repr(v) for v in p.x_inv]
        lines.append(",".join(row))
    csv_path.write_text("\n".join(lines) + "\n")

    meta_lines = [
        f"sp_scale={dataset.sp_scale!r}",
        f"sp_two_valued={str(dataset.sp_two_valued).lower()}",
    ]
    for key in sorted(dataset.meta):
        meta_lines.append(f"{key}={dataset.meta[key]}")
    meta_path_for(csv_path).write_text("\n".join(meta_lines) + "\n")


def read_dataset_csv(csv_path: Path | str) -> Dataset:
    csv_path = Path(csv_path)
    meta_file = meta_path_for(csv_path)
    if not meta_file.exists():
        raise DatasetError(f"missing sidecar {meta_file}")
    meta: dict[str, str] = {}
    for line in meta_file.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        meta[key.strip()] = value.strip()
    try:
        sp_scale = float(meta.pop("sp_scale"))
        sp_two_valued = meta.pop("sp_two_valued") == "true"
    except KeyError as exc:
        raise DatasetError(f"sidecar missing required key {exc}") from exc

    lines = csv_path.read_text().splitlines()
    if not lines:
        raise DatasetError("empty dataset file")
    header = lines[0].split(",")
    if header[0] != "label":
        raise DatasetError(f"unexpected header {lines[0]!r}")
    d_sp = sum(1 for h in header if h.startswith("sp"))
    d_inv = sum(1 for h in header if h.startswith("inv"))
    if 1 + d_sp + d_inv != len(header):
        raise DatasetError(f"unexpected header {lines[0]!r}")
    points = []
    for line in lines[1:]:
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise DatasetError(f"row width {len(cells)} != header width {len(header)}")
        y = int(cells[0])
        sp = tuple(float(v) for v in cells[1 : 1 + d_sp])
        inv = tuple(float(v) for v in cells[1 + d_sp :])
        points.append(LabeledPoint(inv, sp, y))
    return Dataset(tuple(points), sp_scale, sp_two_valued, meta)
