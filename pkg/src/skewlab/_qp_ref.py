"""Pure-numpy dual coordinate-ascent kernel for least-norm margin QPs.

Solves   min 1/2 ||w||^2   s.t.   y_i (w . x_i + b) >= c_i
(b fixed at 0 when the bias is disabled) through its dual

    max  sum_i c_i alpha_i - 1/2 || sum_i alpha_i y_i x_i ||^2
    s.t. alpha >= 0,  and  sum_i alpha_i y_i = 0  when the bias is free.

With the bias free we take maximal-violating-pair steps (SMO-style); with
the bias fixed a single most-violating coordinate is updated per round.
Infeasible primal problems have an unbounded dual: whenever doubling the
current iterate increases the objective we double it, so divergence is
reached (and reported) after logarithmically many rounds instead of
linearly many.

The compiled twin of this module is _qp_ext.pyx; both expose the same
solve_dual signature and are selected at import time by skewlab.maxmargin.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

CONVERGED = 0
MAX_ITER = 1
UNBOUNDED = 2

_CHECK_EVERY = 64


def solve_dual(X, y, c, bias_enabled, tol, max_iter, objective_cap):
    """Run dual ascent; returns (alpha, w, b, iterations, status).

    X: (n, d) float64, y: (n,) in {-1, +1}, c: (n,) >= 0 margin targets.
    Status is CONVERGED, MAX_ITER (best iterate returned) or UNBOUNDED
    (primal infeasible: dual objective exceeded objective_cap).
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    n, d = X.shape
    alpha = np.zeros(n)
    w = np.zeros(d)
    if n == 0:
        return alpha, w, 0.0, 0, CONVERGED
    qii = np.einsum("ij,ij->i", X, X)

    it = 0
    status = MAX_ITER
    while it < max_iter:
        s = X @ w
        if bias_enabled:
            # F_k = y_k c_k - w.x_k; optimal iff max over the "up" set
            # (y=+1 or alpha>0) meets min over the "down" set (y=-1 or
            # alpha>0) -- the free bias sits in between.
            F = y * c - s
            up = (y > 0) | (alpha > 0)
            low = (y < 0) | (alpha > 0)
            if not up.any() or not low.any():
                status = CONVERGED
                break
            i = int(np.argmax(np.where(up, F, -np.inf)))
            j = int(np.argmin(np.where(low, F, np.inf)))
            gap = F[i] - F[j]
            if gap <= tol:
                status = CONVERGED
                break
            diff = X[i] - X[j]
            eta = float(diff @ diff)
            t = gap / max(eta, 1e-300)
            # keep alpha >= 0: the pair step moves alpha_i by y_i t and
            # alpha_j by -y_j t
            if y[i] < 0:
                t = min(t, alpha[i])
            if y[j] > 0:
                t = min(t, alpha[j])
            alpha[i] += y[i] * t
            alpha[j] -= y[j] * t
            w += t * diff
        else:
            g = c - y * s
            viol = np.where(alpha > 0, np.abs(g), np.maximum(g, 0.0))
            i = int(np.argmax(viol))
            if viol[i] <= tol:
                status = CONVERGED
                break
            if qii[i] <= 0.0:
                # zero feature vector with a positive target: hopeless
                status = UNBOUNDED
                break
            new_ai = max(alpha[i] + g[i] / qii[i], 0.0)
            w += (new_ai - alpha[i]) * y[i] * X[i]
            alpha[i] = new_ai
        it += 1
        if it % _CHECK_EVERY == 0:
            lin = float(c @ alpha)
            wsq = float(w @ w)
            if lin - 0.5 * wsq > objective_cap:
                status = UNBOUNDED
                break
            if lin - 1.5 * wsq > 0.0:
                # doubling the iterate is a valid ascent step here; on
                # infeasible instances it makes the objective diverge
                # exponentially fast
                alpha *= 2.0
                w *= 2.0

    w = (alpha * y) @ X  # refresh against drift from incremental updates
    b = 0.0
    if bias_enabled:
        F = y * c - X @ w
        up = (y > 0) | (alpha > 0)
        low = (y < 0) | (alpha > 0)
        hi = float(np.max(F[up])) if up.any() else None
        lo = float(np.min(F[low])) if low.any() else None
        if hi is None:
            b = lo if lo is not None else 0.0
        elif lo is None:
            b = hi
        else:
            b = 0.5 * (hi + lo)
    return alpha, w, b, it, status
