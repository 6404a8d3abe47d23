"""Synthetic task generators: invariant blocks plus a planted spurious
coordinate correlated with the label.

All generators are seeded and deterministic; the resulting Dataset carries
provenance flags in its metadata ("c2"/"c3"/"c5", see
core.validate_easy_task) together with the generator name, seed, and the
realized majority fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import Dataset, DatasetError, LabeledPoint, split_groups

InvPoint = tuple[Sequence[float], int]


class GenSpecError(ValueError):
    """Invalid generator parameters."""


@dataclass(frozen=True)
class GenSpec:
    """Common knobs for attaching the spurious coordinate.

    p is the majority fraction (probability that x_sp agrees in sign with
    the label).  With exact_counts the majority has exactly ceil(p * n)
    points (rounding toward the majority); with pairing every invariant
    point appears with both spurious signs, replicating the aligned copy
    round(p / (1 - p)) times so group membership is independent of the
    invariant features by construction.
    """

    n: int
    p: float
    B: float = 1.0
    seed: int = 0
    exact_counts: bool = False
    pairing: bool = False

    def __post_init__(self) -> None:
        if self.n < 2:
            raise GenSpecError("need at least two points")
        if not 0.5 <= self.p < 1.0:
            raise GenSpecError(f"p must lie in [0.5, 1), got {self.p}")
        if self.B <= 0:
            raise GenSpecError("B must be positive")
        if self.pairing and self.exact_counts:
            raise GenSpecError("pairing already fixes the counts")


def _base_meta(spec: GenSpec, generator: str, p_emp: float) -> dict[str, str]:
    return {
        "generator": generator,
        "seed": str(spec.seed),
        "p_nominal": repr(spec.p),
        "p_empirical": repr(p_emp),
        "c2": "true",
        "c3": "true",
        "c5": "true",
    }


def _pairing_multiplicity(p: float) -> int:
    return max(1, round(p / (1.0 - p)))


def attach_spurious(inv_points: Sequence[InvPoint], spec: GenSpec,
                    generator: str = "attach_spurious") -> Dataset:
    """Attach a scalar spurious coordinate in {-B, +B} to invariant points.

    Modes: sampled (default; sign agrees with the label w.p. p), exact
    counts (seeded choice of exactly the target number of minority
    points), or pairing (both signs for every point, see GenSpec).
    """
    if not inv_points:
        raise GenSpecError("no invariant points given")
    points: list[LabeledPoint] = []
    if spec.pairing:
        k_maj = _pairing_multiplicity(spec.p)
        for x, y in inv_points:
            for _ in range(k_maj):
                points.append(LabeledPoint(tuple(x), (y * spec.B,), y))
            points.append(LabeledPoint(tuple(x), (-y * spec.B,), y))
        p_emp = k_maj / (k_maj + 1)
    else:
        rng = np.random.default_rng(spec.seed)
        n = len(inv_points)
        if spec.exact_counts:
            n_maj = min(n, math.ceil(spec.p * n - 1e-9))
            minority = set(rng.choice(n, size=n - n_maj, replace=False).tolist())
            aligned = [k not in minority for k in range(n)]
        else:
            aligned = (rng.random(n) < spec.p).tolist()
        for (x, y), keep in zip(inv_points, aligned):
            sign = 1.0 if keep else -1.0
            points.append(LabeledPoint(tuple(x), (sign * y * spec.B,), y))
        p_emp = sum(aligned) / n
    meta = _base_meta(spec, generator, p_emp)
    meta["pairing"] = str(spec.pairing).lower()
    return Dataset(tuple(points), spec.B, True, meta)


def _balanced_labels(n: int) -> list[int]:
    return [1] * ((n + 1) // 2) + [-1] * (n // 2)


def gen_2dim(spec: GenSpec) -> Dataset:
    """The two-feature task: x_inv = y, x_sp in {-B, +B}.

    With exact counts the minority is additionally balanced across the
    two classes (as evenly as the counts allow), so e.g. n=4, p=0.5
    yields exactly the four points {+-1} x {+-B}.
    """
    if spec.pairing:
        base = [((float(y),), y) for y in _balanced_labels(spec.n // 2)]
        if len(base) < 1:
            raise GenSpecError("pairing needs n >= 2")
        return attach_spurious(base, spec, generator="gen_2dim")
    ys = _balanced_labels(spec.n)
    if spec.exact_counts:
        n_maj = min(spec.n, math.ceil(spec.p * spec.n - 1e-9))
        n_min = spec.n - n_maj
        # split the minority across the classes as evenly as possible
        min_pos = (n_min + 1) // 2
        min_neg = n_min - min_pos
        points: list[LabeledPoint] = []
        seen = {1: 0, -1: 0}
        quota = {1: min_pos, -1: min_neg}
        for y in ys:
            minority = seen[y] < quota[y]
            seen[y] += 1
            sign = -1.0 if minority else 1.0
            points.append(LabeledPoint((float(y),), (sign * y * spec.B,), y))
        meta = _base_meta(spec, "gen_2dim", n_maj / spec.n)
        meta["pairing"] = "false"
        return Dataset(tuple(points), spec.B, True, meta)
    return attach_spurious([((float(y),), y) for y in ys], spec, generator="gen_2dim")


def gen_geometric_2d(maj_margin: float, min_margin: float, n_maj: int,
                     n_min: int, B: float = 1.0) -> Dataset:
    """Deterministic two-feature task with prescribed invariant margins.

    Majority points sit at x_inv = y * maj_margin with aligned spurious
    sign; minority points at x_inv = y * min_margin with the opposite
    sign.  Both classes receive half of each group (counts must be even).
    """
    if maj_margin <= 0 or min_margin <= 0:
        raise GenSpecError("margins must be positive")
    if n_maj < 2 or n_min < 2 or n_maj % 2 or n_min % 2:
        raise GenSpecError("group sizes must be even and at least 2")
    if B <= 0:
        raise GenSpecError("B must be positive")
    points: list[LabeledPoint] = []
    for y in (1, -1):
        for _ in range(n_maj // 2):
            points.append(LabeledPoint((y * maj_margin,), (y * B,), y))
        for _ in range(n_min // 2):
            points.append(LabeledPoint((y * min_margin,), (-y * B,), y))
    meta = {
        "generator": "gen_geometric_2d",
        "seed": "0",
        "p_nominal": repr(n_maj / (n_maj + n_min)),
        "p_empirical": repr(n_maj / (n_maj + n_min)),
        "c2": "true",
        "c3": "true",
        "c5": "true",
    }
    return Dataset(tuple(points), B, True, meta)


def gen_random_relu_features(inv_points: Sequence[InvPoint], out_dim: int,
                             seed: int = 0) -> list[InvPoint]:
    """Map invariant blocks through a frozen random ReLU layer.

    Returns transformed invariant points (labels untouched), ready for
    attach_spurious.
    """
    if not inv_points:
        raise GenSpecError("no invariant points given")
    if out_dim < 1:
        raise GenSpecError("out_dim must be positive")
    in_dim = len(inv_points[0][0])
    if any(len(x) != in_dim for x, _ in inv_points):
        raise GenSpecError("inhomogeneous invariant dimensions")
    rng = np.random.default_rng(seed)
    W = rng.standard_normal((out_dim, in_dim))
    out: list[InvPoint] = []
    for x, y in inv_points:
        z = np.maximum(W @ np.asarray(x, dtype=np.float64), 0.0)
        out.append((tuple(z.tolist()), y))
    return out


def duplicate_majority(dataset: Dataset, ratio: float, seed: int = 0) -> Dataset:
    """Oversample majority points (with replacement) until the
    majority:minority ratio reaches `ratio`.

    The multiplicity of each original majority point is recorded in the
    metadata so the construction is auditable.
    """
    split = split_groups(dataset)
    if not split.minority:
        raise DatasetError("minority group is empty; ratio is undefined")
    current = len(split.majority) / len(split.minority)
    if ratio < current - 1e-12:
        raise DatasetError(
            f"target ratio {ratio} below current ratio {current:.6g}"
        )
    target_maj = round(ratio * len(split.minority))
    extra = target_maj - len(split.majority)
    rng = np.random.default_rng(seed)
    counts = {k: 1 for k in split.majority}
    if extra > 0:
        draws = rng.choice(len(split.majority), size=extra, replace=True)
        for d in draws.tolist():
            counts[split.majority[d]] += 1
    points = list(dataset.points)
    for k in split.majority:
        points.extend([dataset.points[k]] * (counts[k] - 1))
    meta = dict(dataset.meta)
    meta["dup_ratio"] = repr(float(ratio))
    meta["dup_seed"] = str(seed)
    meta["dup_multiplicity"] = ",".join(
        f"{k}:{counts[k]}" for k in split.majority
    )
    meta["p_empirical"] = repr(target_maj / (target_maj + len(split.minority)))
    return Dataset(tuple(points), dataset.sp_scale, dataset.sp_two_valued, meta)


def gen_highdim_spurious(n: int, D: int, p_vec: Sequence[float] | float,
                         inv_margin: float = 1.0, seed: int = 0) -> Dataset:
    """Scalar invariant feature plus a D-dimensional {-1, +1} spurious
    block whose coordinate i agrees with the label w.p. p_vec[i]."""
    if n < 2 or D < 1:
        raise GenSpecError("need n >= 2 and D >= 1")
    if inv_margin <= 0:
        raise GenSpecError("inv_margin must be positive")
    if isinstance(p_vec, (int, float)):
        probs = np.full(D, float(p_vec))
    else:
        probs = np.asarray(p_vec, dtype=np.float64)
        if probs.shape != (D,):
            raise GenSpecError(f"p_vec must have length {D}")
    if np.any(probs < 0.5) or np.any(probs > 1.0):
        raise GenSpecError("each p_i must lie in [0.5, 1]")
    rng = np.random.default_rng(seed)
    points: list[LabeledPoint] = []
    for y in _balanced_labels(n):
        agree = rng.random(D) < probs
        sp = np.where(agree, float(y), float(-y))
        points.append(LabeledPoint((y * inv_margin,), tuple(sp.tolist()), y))
    meta = {
        "generator": "gen_highdim_spurious",
        "seed": str(seed),
        "p_vec": ",".join(repr(float(q)) for q in probs),
        "inv_margin": repr(float(inv_margin)),
        "c2": "true",
        "c3": "true",
        "c5": "true",
    }
    return Dataset(tuple(points), 1.0, False, meta)


def gen_constraint_breakers(kind: str, params: Mapping[str, object] | None = None) -> Dataset:
    """Generate a dataset that deliberately violates one easy-task
    constraint, with the matching provenance flag set to false.

    Kinds: "unstable_invariant" (x_inv varies within a class, breaks c2),
    "cond_dependent" (x_inv + x_sp = y exactly, breaks c3),
    "nonorthogonal" (the spurious signal rides on an invariant
    coordinate, breaks c5).
    """
    params = dict(params or {})
    n = int(params.pop("n", 16))
    p = float(params.pop("p", 0.75))
    B = float(params.pop("B", 1.0))
    seed = int(params.pop("seed", 0))
    if params:
        raise GenSpecError(f"unknown parameters {sorted(params)}")
    rng = np.random.default_rng(seed)
    spec = GenSpec(n=n, p=p, B=B, seed=seed)
    points: list[LabeledPoint]
    if kind == "unstable_invariant":
        inv = [((y * float(rng.choice([2.0, 3.0])),), y) for y in _balanced_labels(n)]
        d = attach_spurious(inv, spec, generator="gen_constraint_breakers")
        return d.replace_meta(c2="false", breaker=kind)
    if kind == "cond_dependent":
        if B >= 1.0:
            raise GenSpecError("cond_dependent needs B < 1 to stay separable")
        points = []
        for y in _balanced_labels(n):
            sign = 1.0 if rng.random() < p else -1.0
            sp = sign * y * B
            points.append(LabeledPoint((float(y) - sp,), (sp,), y))
        meta = _base_meta(spec, "gen_constraint_breakers", p)
        meta.update(c3="false", breaker=kind)
        return Dataset(tuple(points), B, True, meta)
    if kind == "nonorthogonal":
        # observed features are (x_inv, x_inv + s): the planted signal s
        # is not orthogonal to the invariant block
        points = []
        mag = 0.5
        for y in _balanced_labels(n):
            sign = 1.0 if rng.random() < p else -1.0
            s = sign * y * mag
            points.append(LabeledPoint((float(y),), (float(y) + s,), y))
        meta = _base_meta(spec, "gen_constraint_breakers", p)
        meta.update(c5="false", breaker=kind)
        return Dataset(tuple(points), mag, False, meta)
    raise GenSpecError(f"unknown kind {kind!r}")
