# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled dual coordinate-ascent kernel for least-norm margin QPs.

Same contract as _qp_ref.solve_dual (which documents the algorithm); this
version keeps the per-point scores incrementally updated in tight C loops
instead of re-forming X @ w with numpy each round.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"

CONVERGED = 0
MAX_ITER = 1
UNBOUNDED = 2

DEF CHECK_EVERY = 64


def solve_dual(X, y, c, bias_enabled, tol, max_iter, objective_cap):
    """Run dual ascent; returns (alpha, w, b, iterations, status)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] Xc = \
        np.ascontiguousarray(X, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] yc = np.asarray(y, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cc = np.asarray(c, dtype=np.float64)
    cdef Py_ssize_t n = Xc.shape[0]
    cdef Py_ssize_t d = Xc.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] alpha = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.zeros(d)
    if n == 0:
        return alpha, w, 0.0, 0, CONVERGED
    cdef cnp.ndarray[cnp.float64_t, ndim=1] s = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] qii = \
        np.einsum("ij,ij->i", Xc, Xc)

    cdef bint bias = bool(bias_enabled)
    cdef double tolv = tol
    cdef long long itmax = max_iter
    cdef double cap = objective_cap
    cdef long long it = 0
    cdef int status = MAX_ITER
    cdef Py_ssize_t i, j, k, m
    cdef double Fi, Fj, Fk, gap, eta, t, g, viol, best, dot, new_ai, step
    cdef double lin, wsq

    while it < itmax:
        if bias:
            # maximal violating pair over the up/down index sets
            i = -1
            j = -1
            Fi = 0.0
            Fj = 0.0
            for k in range(n):
                Fk = yc[k] * cc[k] - s[k]
                if yc[k] > 0.0 or alpha[k] > 0.0:
                    if i < 0 or Fk > Fi:
                        i = k
                        Fi = Fk
                if yc[k] < 0.0 or alpha[k] > 0.0:
                    if j < 0 or Fk < Fj:
                        j = k
                        Fj = Fk
            if i < 0 or j < 0:
                status = CONVERGED
                break
            gap = Fi - Fj
            if gap <= tolv:
                status = CONVERGED
                break
            eta = 0.0
            for m in range(d):
                dot = Xc[i, m] - Xc[j, m]
                eta += dot * dot
            if eta < 1e-300:
                eta = 1e-300
            t = gap / eta
            if yc[i] < 0.0 and t > alpha[i]:
                t = alpha[i]
            if yc[j] > 0.0 and t > alpha[j]:
                t = alpha[j]
            alpha[i] += yc[i] * t
            alpha[j] -= yc[j] * t
            for k in range(n):
                dot = 0.0
                for m in range(d):
                    dot += (Xc[i, m] - Xc[j, m]) * Xc[k, m]
                s[k] += t * dot
        else:
            i = -1
            best = 0.0
            for k in range(n):
                g = cc[k] - yc[k] * s[k]
                if alpha[k] > 0.0:
                    viol = g if g >= 0.0 else -g
                else:
                    viol = g if g > 0.0 else 0.0
                if i < 0 or viol > best:
                    i = k
                    best = viol
            if best <= tolv:
                status = CONVERGED
                break
            if qii[i] <= 0.0:
                status = UNBOUNDED
                break
            g = cc[i] - yc[i] * s[i]
            new_ai = alpha[i] + g / qii[i]
            if new_ai < 0.0:
                new_ai = 0.0
            step = (new_ai - alpha[i]) * yc[i]
            alpha[i] = new_ai
            for k in range(n):
                dot = 0.0
                for m in range(d):
                    dot += Xc[i, m] * Xc[k, m]
                s[k] += step * dot
        it += 1
        if it % CHECK_EVERY == 0:
            lin = 0.0
            for k in range(n):
                lin += cc[k] * alpha[k]
            # rebuild w and the scores to shed incremental round-off
            for m in range(d):
                w[m] = 0.0
            for k in range(n):
                if alpha[k] != 0.0:
                    for m in range(d):
                        w[m] += alpha[k] * yc[k] * Xc[k, m]
            wsq = 0.0
            for m in range(d):
                wsq += w[m] * w[m]
            for k in range(n):
                dot = 0.0
                for m in range(d):
                    dot += Xc[k, m] * w[m]
                s[k] = dot
            if lin - 0.5 * wsq > cap:
                status = UNBOUNDED
                break
            if lin - 1.5 * wsq > 0.0:
                # valid ascent step; drives infeasible duals to the cap
                # in logarithmically many rounds
                for k in range(n):
                    alpha[k] *= 2.0
                    s[k] *= 2.0

    w_final = (alpha * yc) @ np.asarray(Xc)
    b = 0.0
    cdef double hi, lo
    cdef bint have_hi, have_lo
    if bias:
        sv = np.asarray(Xc) @ w_final
        have_hi = False
        have_lo = False
        hi = 0.0
        lo = 0.0
        for k in range(n):
            Fk = yc[k] * cc[k] - sv[k]
            if yc[k] > 0.0 or alpha[k] > 0.0:
                if not have_hi or Fk > hi:
                    hi = Fk
                    have_hi = True
            if yc[k] < 0.0 or alpha[k] > 0.0:
                if not have_lo or Fk < lo:
                    lo = Fk
                    have_lo = True
        if have_hi and have_lo:
            b = 0.5 * (hi + lo)
        elif have_hi:
            b = hi
        elif have_lo:
            b = lo
    return alpha, w_final, float(b), int(it), status
