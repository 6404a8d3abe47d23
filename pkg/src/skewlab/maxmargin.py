"""Least-norm margin quadratic programs and their certificates.

solve_least_norm finds the minimum-norm linear classifier meeting
per-point margin targets y_i (w . x_i + b) >= c_i, either over the full
feature vector or the invariant block only.  v_norm / v_tilde_norm expose
the two norms the skew measures are built from, balanced_max_margin
reweights the minority targets, and oracle_active_set is an exhaustive
KKT-enumeration solver used to certify the iterative kernel on small
instances.

The inner dual-ascent kernel has a compiled (Cython) and a pure-numpy
implementation with identical contracts; the compiled one is preferred at
import time unless SKEWLAB_PURE_PYTHON is set in the environment.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import Dataset, LinearModel, split_groups

if os.environ.get("SKEWLAB_PURE_PYTHON"):
    from . import _qp_ref as _kernel
else:  # pragma: no cover - depends on build environment
    try:
        from . import _qp_ext as _kernel  # type: ignore[attr-defined]
    except ImportError:
        from . import _qp_ref as _kernel

KERNEL_BACKEND: str = _kernel.BACKEND

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 1_000_000
DEFAULT_OBJECTIVE_CAP = 1e12

ORACLE_MAX_POINTS = 16
ORACLE_MAX_DIMS = 4


class NotSeparableError(RuntimeError):
    """The margin constraints are infeasible (dual unbounded)."""


class OracleBudgetError(ValueError):
    """Instance too large for exhaustive active-set enumeration."""


class ProblemError(ValueError):
    """Ill-formed margin problem."""


@dataclass(frozen=True)
class MarginProblem:
    """A least-norm margin instance over a dataset.

    feature_mask selects the columns the weight vector may use:
    "inv_only" pins the spurious weights at zero, "full" uses everything.
    targets holds one required margin per point (all >= 0).
    """

    dataset: Dataset
    targets: tuple[float, ...]
    feature_mask: str = "full"
    bias_enabled: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "targets", tuple(float(t) for t in self.targets))
        if self.feature_mask not in ("inv_only", "full"):
            raise ProblemError(f"unknown feature mask {self.feature_mask!r}")
        if len(self.targets) != len(self.dataset):
            raise ProblemError(
                f"{len(self.targets)} targets for {len(self.dataset)} points"
            )
        if any(t < 0 for t in self.targets):
            raise ProblemError("margin targets must be non-negative")

    def design_matrix(self) -> np.ndarray:
        if self.feature_mask == "inv_only":
            return self.dataset.inv_matrix()
        return self.dataset.feature_matrix()


@dataclass(frozen=True)
class QpSolution:
    """Solver output plus its optimality certificate.

    kkt_residual is the worst violation among primal feasibility
    (c_i - margin_i), stationarity (w vs. the dual reconstruction),
    complementary slackness (|margin_i - c_i| over active duals), and the
    dual balance |sum alpha_i y_i| when the bias is free.  converged
    implies kkt_residual <= the solve tolerance.
    """

    model: LinearModel
    duals: tuple[float, ...]
    objective: float
    kkt_residual: float
    iterations: int
    converged: bool


def _split_model(problem: MarginProblem, w: np.ndarray, b: float) -> LinearModel:
    d_inv = problem.dataset.inv_dim
    d_sp = problem.dataset.sp_dim
    if problem.feature_mask == "inv_only":
        return LinearModel(tuple(w.tolist()), (0.0,) * d_sp, b)
    return LinearModel(tuple(w[:d_inv].tolist()), tuple(w[d_inv:].tolist()), b)


def _certificate(X: np.ndarray, y: np.ndarray, c: np.ndarray,
                 alpha: np.ndarray, w: np.ndarray, b: float,
                 bias_enabled: bool) -> float:
    margins = y * (X @ w + b)
    feas = float(np.max(c - margins, initial=0.0))
    w_rec = (alpha * y) @ X
    stat = float(np.max(np.abs(w - w_rec), initial=0.0))
    active = alpha > 0
    slack = float(np.max(np.abs(margins[active] - c[active]), initial=0.0))
    balance = abs(float(alpha @ y)) if bias_enabled else 0.0
    return max(feas, stat, slack, balance)


def solve_least_norm(problem: MarginProblem, tol: float = DEFAULT_TOL,
                     max_iter: int = DEFAULT_MAX_ITER,
                     objective_cap: float = DEFAULT_OBJECTIVE_CAP) -> QpSolution:
    """Solve the least-norm margin QP with the selected kernel."""
    X = problem.design_matrix()
    y = problem.dataset.labels()
    c = np.asarray(problem.targets, dtype=np.float64)
    alpha, w, b, iters, status = _kernel.solve_dual(
        X, y, c, problem.bias_enabled, tol, max_iter, objective_cap
    )
    if status == _kernel.UNBOUNDED:
        obj = float(c @ alpha - 0.5 * (w @ w))
        raise NotSeparableError(
            f"margin constraints infeasible (dual objective {obj:.3g} "
            f"exceeded cap {objective_cap:.3g})"
        )
    residual = _certificate(X, y, c, np.asarray(alpha), np.asarray(w),
                            b if problem.bias_enabled else 0.0,
                            problem.bias_enabled)
    return QpSolution(
        model=_split_model(problem, np.asarray(w), b if problem.bias_enabled else 0.0),
        duals=tuple(np.asarray(alpha).tolist()),
        objective=float(0.5 * np.dot(w, w)),
        kkt_residual=residual,
        iterations=int(iters),
        converged=(status == _kernel.CONVERGED),
    )


def _subset(dataset: Dataset, indices: Sequence[int]) -> Dataset:
    points = tuple(dataset.points[k] for k in indices)
    return Dataset(points, dataset.sp_scale, dataset.sp_two_valued, dataset.meta)


def v_norm(dataset: Dataset, indices: Iterable[int], tol: float = DEFAULT_TOL) -> float:
    """||v(T)||: invariant-only least norm with margin 1 on T only."""
    idx = sorted(set(int(k) for k in indices))
    if not idx:
        raise ProblemError("index set is empty")
    sub = _subset(dataset, idx)
    problem = MarginProblem(sub, (1.0,) * len(idx), "inv_only", True)
    sol = solve_least_norm(problem, tol=tol)
    if not sol.converged:
        raise NotSeparableError("invariant-only solve did not converge")
    return float(np.linalg.norm(sol.model.w_inv))


def v_tilde_norm(dataset: Dataset, indices: Iterable[int],
                 tol: float = DEFAULT_TOL) -> float:
    """||v~(T)||: margin 1 on T, margin >= 0 on the rest of the dataset."""
    idx = set(int(k) for k in indices)
    if not idx:
        raise ProblemError("index set is empty")
    targets = tuple(1.0 if k in idx else 0.0 for k in range(len(dataset)))
    problem = MarginProblem(dataset, targets, "inv_only", True)
    sol = solve_least_norm(problem, tol=tol)
    if not sol.converged:
        raise NotSeparableError("invariant-only solve did not converge")
    return float(np.linalg.norm(sol.model.w_inv))


def full_max_margin(dataset: Dataset, bias_enabled: bool = True,
                    tol: float = DEFAULT_TOL) -> QpSolution:
    """Margin 1 on every point over the full feature vector."""
    problem = MarginProblem(dataset, (1.0,) * len(dataset), "full", bias_enabled)
    return solve_least_norm(problem, tol=tol)


def balanced_max_margin(dataset: Dataset, c: float,
                        tol: float = DEFAULT_TOL) -> QpSolution:
    """Group-reweighted margins: 1 on the majority, 1/c on the minority.

    c < 1 pushes the minority margin up; c = 1 recovers the plain
    max-margin problem.
    """
    if c <= 0:
        raise ProblemError("balance parameter c must be positive")
    split = split_groups(dataset)
    targets = [1.0] * len(dataset)
    for k in split.minority:
        targets[k] = 1.0 / c
    problem = MarginProblem(dataset, tuple(targets), "full", True)
    return solve_least_norm(problem, tol=tol)


# ---------------------------------------------------------------------------
# Exhaustive active-set oracle
# ---------------------------------------------------------------------------


def oracle_active_set(problem: MarginProblem, feas_tol: float = 1e-9) -> QpSolution:
    """Solve a tiny instance exactly by enumerating candidate active sets.

    For every subset A of the constraints, solve the equality-constrained
    KKT system, keep candidates whose duals are non-negative and which
    satisfy every constraint, and return the one with the smallest
    objective.  Exponential in the point count: guarded by a hard budget.
    """
    X = problem.design_matrix()
    y = problem.dataset.labels()
    c = np.asarray(problem.targets, dtype=np.float64)
    n, d = X.shape
    if n > ORACLE_MAX_POINTS or d > ORACLE_MAX_DIMS:
        raise OracleBudgetError(
            f"instance ({n} points, {d} dims) exceeds oracle budget "
            f"({ORACLE_MAX_POINTS} points, {ORACLE_MAX_DIMS} dims)"
        )
    bias = problem.bias_enabled
    scale = max(1.0, float(np.max(np.abs(c), initial=0.0)))

    best: tuple[float, np.ndarray, float, np.ndarray] | None = None
    candidates = 0

    def feasible(w: np.ndarray, b: float) -> bool:
        return bool(np.all(y * (X @ w + b) >= c - feas_tol * scale))

    # the empty active set: w = 0, bias (if any) chosen to fit
    if bias:
        pos = c[y > 0]
        neg = c[y < 0]
        lo = float(np.max(pos)) if pos.size else -math.inf
        hi = float(-np.max(neg)) if neg.size else math.inf
        if lo <= hi + feas_tol * scale:
            b0 = min(max(0.0, lo), hi)
            best = (0.0, np.zeros(d), b0, np.zeros(n))
    else:
        if np.all(c <= feas_tol * scale):
            best = (0.0, np.zeros(d), 0.0, np.zeros(n))
    candidates += 1

    for size in range(1, n + 1):
        for combo in itertools.combinations(range(n), size):
            candidates += 1
            idx = np.array(combo)
            XA, yA, cA = X[idx], y[idx], c[idx]
            G = (yA[:, None] * XA) @ (yA[:, None] * XA).T
            if bias:
                m = size + 1
                K = np.zeros((m, m))
                K[:size, :size] = G
                K[:size, size] = yA
                K[size, :size] = yA
                rhs = np.concatenate([cA, [0.0]])
            else:
                K = G
                rhs = cA
            sol, *_ = np.linalg.lstsq(K, rhs, rcond=None)
            if not np.all(np.isfinite(sol)):
                continue
            if np.max(np.abs(K @ sol - rhs)) > 1e-8 * scale:
                continue  # inconsistent active set
            lam = sol[:size]
            b = float(sol[size]) if bias else 0.0
            if np.min(lam, initial=0.0) < -feas_tol * scale:
                continue
            lam = np.maximum(lam, 0.0)
            w = (lam * yA) @ XA
            if not feasible(w, b):
                continue
            obj = float(0.5 * np.dot(w, w))
            if best is None or obj < best[0] - 1e-15:
                alpha = np.zeros(n)
                alpha[idx] = lam
                best = (obj, w, b, alpha)

    if best is None:
        raise NotSeparableError("no feasible active set")
    obj, w, b, alpha = best
    residual = _certificate(X, y, c, alpha, w, b, bias)
    return QpSolution(
        model=_split_model(problem, w, b),
        duals=tuple(alpha.tolist()),
        objective=obj,
        kkt_residual=residual,
        iterations=candidates,
        converged=True,
    )
