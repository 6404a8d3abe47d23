"""Skew measurements: group-norm ratios, the implied bounds on the
spurious weight of the max-margin classifier, and the high-dimensional
accumulation check.

Notation used in field names: v(T) is the invariant-only least-norm
vector achieving margin 1 on the point set T; v~(T) additionally keeps a
non-negative margin on the rest of the sample.  The kappas compare
minority norms against the whole sample (kappa1) and the majority
(kappa2); tilde variants use v~.  See maxmargin.v_norm / v_tilde_norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from . import maxmargin
from .core import Dataset, LabeledPoint, split_groups

SLOP = 1e-9


@dataclass(frozen=True)
class SkewReport:
    """Norms, skew ratios, bound preconditions, and the measured spurious
    weight of the full max-margin classifier (times B)."""

    v_full: float
    v_maj: float
    v_min: float
    v_tilde_full: float
    v_tilde_maj: float
    v_tilde_min: float
    kappa1: float
    kappa2: float
    kappa1_tilde: float
    kappa2_tilde: float
    c1: float
    c2: float
    lower_bound: float
    upper_bound: float
    lower_precondition: bool
    upper_precondition: bool
    measured_b_wsp: float
    sandwich_holds: bool
    degenerate: bool = False
    diagnostics: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "diagnostics", MappingProxyType(dict(self.diagnostics)))


def _safe_ratio(num: float, den: float) -> float:
    if den == 0.0:
        return math.inf if num > 0 else math.nan
    return num / den


def compute_skew_report(dataset: Dataset, tol: float = maxmargin.DEFAULT_TOL) -> SkewReport:
    """Measure the skew ratios of a two-group task and evaluate the
    lower/upper bounds on B * w_sp of the full max-margin classifier.

    Lower bound max(1 - 2 sqrt(kappa1~ + c1^2), 0) applies when
    kappa2~ <= sqrt(1/4 - c2^2); upper bound min(1/kappa1 - 1, B ||v(S)||)
    when kappa2 <= 1, with c1 = 1 / (2 ||v~(S)|| B) and
    c2 = 1 / (2 ||v~(maj)|| B).  An empty group degenerates the report:
    ratios become NaN and both preconditions are off.
    """
    split = split_groups(dataset)
    B = dataset.sp_scale
    diags: dict[str, str] = {}

    full_sol = maxmargin.full_max_margin(dataset, tol=tol)
    measured = B * full_sol.model.w_sp_scalar
    diags["full_solve"] = (
        f"iterations {full_sol.iterations}, kkt residual {full_sol.kkt_residual:.3g}"
    )

    if not split.majority or not split.minority:
        empty = "majority" if not split.majority else "minority"
        diags["degenerate"] = f"{empty} group is empty; skew ratios undefined"
        nan = math.nan
        return SkewReport(
            v_full=nan, v_maj=nan, v_min=nan,
            v_tilde_full=nan, v_tilde_maj=nan, v_tilde_min=nan,
            kappa1=nan, kappa2=nan, kappa1_tilde=nan, kappa2_tilde=nan,
            c1=nan, c2=nan, lower_bound=nan, upper_bound=nan,
            lower_precondition=False, upper_precondition=False,
            measured_b_wsp=measured, sandwich_holds=False,
            degenerate=True, diagnostics=diags,
        )

    everything = range(len(dataset))
    v_full = maxmargin.v_norm(dataset, everything, tol=tol)
    v_maj = maxmargin.v_norm(dataset, split.majority, tol=tol)
    v_min = maxmargin.v_norm(dataset, split.minority, tol=tol)
    vt_full = maxmargin.v_tilde_norm(dataset, everything, tol=tol)
    vt_maj = maxmargin.v_tilde_norm(dataset, split.majority, tol=tol)
    vt_min = maxmargin.v_tilde_norm(dataset, split.minority, tol=tol)

    kappa1 = _safe_ratio(v_min, v_full)
    kappa2 = _safe_ratio(v_min, v_maj)
    kappa1_t = _safe_ratio(vt_min, vt_full)
    kappa2_t = _safe_ratio(vt_min, vt_maj)
    c1 = _safe_ratio(1.0, 2.0 * vt_full * B)
    c2 = _safe_ratio(1.0, 2.0 * vt_maj * B)

    lower_pre = (c2 <= 0.5 + SLOP) and (
        kappa2_t <= math.sqrt(max(0.25 - c2 * c2, 0.0)) + SLOP
    )
    upper_pre = kappa2 <= 1.0 + SLOP

    lower = max(1.0 - 2.0 * math.sqrt(max(kappa1_t + c1 * c1, 0.0)), 0.0)
    upper = min(_safe_ratio(1.0, kappa1) - 1.0, B * v_full)

    checks = []
    if lower_pre:
        checks.append(measured >= lower - SLOP)
        diags["lower"] = f"slack {measured - lower:.6g}"
    else:
        diags["lower"] = "precondition not met"
    if upper_pre:
        checks.append(abs(measured) <= upper + SLOP)
        diags["upper"] = f"slack {upper - abs(measured):.6g}"
    else:
        diags["upper"] = "precondition not met"
    sandwich = all(checks) if checks else False

    return SkewReport(
        v_full=v_full, v_maj=v_maj, v_min=v_min,
        v_tilde_full=vt_full, v_tilde_maj=vt_maj, v_tilde_min=vt_min,
        kappa1=kappa1, kappa2=kappa2,
        kappa1_tilde=kappa1_t, kappa2_tilde=kappa2_t,
        c1=c1, c2=c2,
        lower_bound=lower, upper_bound=upper,
        lower_precondition=lower_pre, upper_precondition=upper_pre,
        measured_b_wsp=measured, sandwich_holds=sandwich,
        diagnostics=diags,
    )


def norm_growth_curve(inv_points: Sequence[tuple[Sequence[float], int]],
                      sizes: Sequence[int],
                      tol: float = maxmargin.DEFAULT_TOL
                      ) -> list[tuple[int, float, float]]:
    """||v|| and ||v~|| over growing prefixes of a fixed point stream.

    Returns (n, ||v(prefix)||, ||v~(prefix)||) rows, where v~ keeps a
    non-negative margin on the remainder of the full stream.  sizes must
    be strictly increasing and within the stream length.
    """
    if not inv_points:
        raise ValueError("no invariant points given")
    if not sizes or any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be strictly increasing")
    if sizes[0] < 1 or sizes[-1] > len(inv_points):
        raise ValueError("sizes out of range")
    points = tuple(
        LabeledPoint(tuple(x), (float(y),), y) for x, y in inv_points
    )
    dataset = Dataset(points, 1.0, True, {"generator": "norm_growth_curve"})
    rows = []
    for n in sizes:
        prefix = range(int(n))
        v = maxmargin.v_norm(dataset, prefix, tol=tol)
        vt = maxmargin.v_tilde_norm(dataset, prefix, tol=tol)
        rows.append((int(n), v, vt))
    return rows


@dataclass(frozen=True)
class HighDimCheck:
    """Outcome of the high-dimensional spurious-accumulation check."""

    ratio: float
    threshold: float
    passed: bool
    precondition_met: bool
    min_dimension: float
    diagnostics: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "diagnostics", MappingProxyType(dict(self.diagnostics)))


def verify_highdim_proposition(dataset: Dataset, c: float, delta: float = 0.05,
                               tol: float = maxmargin.DEFAULT_TOL) -> HighDimCheck:
    """Check that many weakly-correlated spurious coordinates accumulate.

    For a D-dimensional {-1,+1} spurious block with alignment rates
    p_i > 1/2 + c/2 and D >= (1 / 2c) sqrt(2 ln(m / delta)), the
    bias-free max-margin classifier should satisfy
    ||w_sp|| / w_inv >= c sqrt(D) / 2.  The check always runs; an unmet
    precondition is reported rather than raised.
    """
    if not 0 < c < 1:
        raise ValueError("c must lie in (0, 1)")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    D = dataset.sp_dim
    m = len(dataset)
    diags: dict[str, str] = {}

    pre = True
    p_raw = dataset.meta.get("p_vec")
    if p_raw is None:
        pre = False
        diags["p_vec"] = "no alignment rates recorded in metadata"
    else:
        probs = np.array([float(v) for v in p_raw.split(",")])
        if probs.size != D or np.any(probs <= 0.5 + c / 2.0):
            pre = False
            diags["p_vec"] = (
                f"min rate {probs.min():.4g} vs required > {0.5 + c / 2.0:.4g}"
            )
    d_needed = math.sqrt(2.0 * math.log(m / delta)) / (2.0 * c)
    if D < d_needed:
        pre = False
        diags["dimension"] = f"D = {D} below required {d_needed:.4g}"

    sol = maxmargin.full_max_margin(dataset, bias_enabled=False, tol=tol)
    w_inv = float(np.linalg.norm(sol.model.w_inv))
    w_sp = float(np.linalg.norm(sol.model.w_sp))
    ratio = _safe_ratio(w_sp, w_inv)
    threshold = c * math.sqrt(D) / 2.0
    diags["solve"] = f"w_inv {w_inv:.6g}, ||w_sp|| {w_sp:.6g}"

    return HighDimCheck(
        ratio=ratio,
        threshold=threshold,
        passed=bool(ratio >= threshold - SLOP),
        precondition_met=pre,
        min_dimension=d_needed,
        diagnostics=diags,
    )
