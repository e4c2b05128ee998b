"""Pure-numpy backend for the hot solver kernel.

This is the fallback selected when the compiled extension is missing, and the
reference implementation the compiled kernel is tested against. Both backends
implement the same iteration, quadrature and bookkeeping rules; agreement is
pinned by tests.
"""

from __future__ import annotations

import numpy as np

FLAG_OK = 0
FLAG_MAX_ITER = 1
FLAG_NO_CONTRACTION = 2
FLAG_NONFINITE = 3

RATIO_SHRINK = 0.9
BAD_STREAK_LIMIT = 3


def cumulative_simpson(phi: np.ndarray, h: float, out: np.ndarray | None = None) -> np.ndarray:
    """Cumulative integral of uniformly sampled values (even panel count).

    Even nodes chain composite Simpson pairs; odd nodes add the integral over
    the leading half panel of the parabola through the surrounding triple:
    h/12 * (5 y_{j-1} + 8 y_j - y_{j+1}).
    """
    m1 = phi.shape[-1]
    if m1 < 3 or m1 % 2 == 0:
        raise ValueError("grid must have an even, nonzero number of panels")
    if out is None:
        out = np.empty_like(phi)
    pair = (h / 3.0) * (phi[..., 0:-2:2] + 4.0 * phi[..., 1:-1:2] + phi[..., 2::2])
    out[..., 0] = 0.0
    np.cumsum(pair, axis=-1, out=out[..., 2::2])
    out[..., 1::2] = out[..., 0:-1:2] + (h / 12.0) * (
        5.0 * phi[..., 0:-1:2] + 8.0 * phi[..., 1::2] - phi[..., 2::2]
    )
    return out


def picard_batch(fk, gk, w, h, tol, max_iter):
    """Batched fixed-point sweep of r(theta) = w + int_0^theta r P/(1+Q) dt.

    Parameters
    ----------
    fk, gk : (m1, d) complex arrays
        Angular coefficient tables on the uniform theta grid; column k-1
        holds the degree-k coefficient, so P(r) = sum_k r^(k-1) fk[:, k-1].
    w : (B,) complex array of initial values.
    h : grid step.
    tol : sup-norm convergence threshold per column.
    max_iter : cap on operator applications per column.

    Returns
    -------
    (r, iters, resid, ratio_max, flags)
        r: (B, m1) trajectories; iters: applications performed; resid: the
        sup-delta of each column's final (post-convergence) application;
        ratio_max: largest consecutive-difference ratio past the first;
        flags: 0 ok, 1 max_iter, 2 contraction failure, 3 non-finite values.

    Columns iterate independently until their own difference drops below tol,
    then receive exactly one more application (whose delta is the reported
    residual) and freeze. Frozen columns never change, so batch results are
    identical to solo solves and to any parallel split of the batch.
    """
    fk = np.asarray(fk, dtype=np.complex128)
    gk = np.asarray(gk, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    m1, d = fk.shape
    nb = w.shape[0]
    ft = np.ascontiguousarray(fk.T)
    gt = np.ascontiguousarray(gk.T)

    r = np.repeat(w[:, None], m1, axis=1)
    iters = np.zeros(nb, dtype=np.int32)
    resid = np.zeros(nb, dtype=np.float64)
    ratio_max = np.zeros(nb, dtype=np.float64)
    flags = np.full(nb, FLAG_OK, dtype=np.int32)
    prev_diff = np.full(nb, np.nan)
    bad_streak = np.zeros(nb, dtype=np.int32)
    # phase 0: iterating, 1: converged pending the final application, 2: frozen
    phase = np.full(nb, 2 if m1 == 0 else 0, dtype=np.int32)

    while True:
        act = np.nonzero(phase < 2)[0]
        if act.size == 0:
            break
        ra = r[act]
        pp = np.repeat(ft[d - 1][None, :], act.size, axis=0)
        qq = np.repeat(gt[d - 1][None, :], act.size, axis=0)
        for k in range(d - 2, -1, -1):
            pp = pp * ra + ft[k]
            qq = qq * ra + gt[k]
        phi = ra * pp / (1.0 + qq)
        integral = cumulative_simpson(phi, h)
        rnew = w[act, None] + integral
        diff = np.max(np.abs(rnew - ra), axis=1)
        r[act] = rnew
        iters[act] += 1

        prev = prev_diff[act]
        ok_prev = np.isfinite(prev) & (prev > 0.0)
        ratios = np.zeros(act.size)
        np.divide(diff, prev, out=ratios, where=ok_prev)
        ratio_max[act] = np.maximum(ratio_max[act], np.where(ok_prev, ratios, 0.0))

        pending = phase[act] == 1
        pend_idx = act[pending]
        resid[pend_idx] = diff[pending]
        phase[pend_idx] = 2

        it_mask = ~pending
        it_idx = act[it_mask]
        if it_idx.size:
            dbi = diff[it_mask]
            bad = ok_prev[it_mask] & (ratios[it_mask] > RATIO_SHRINK) & (dbi >= tol)
            bad_streak[it_idx] = np.where(bad, bad_streak[it_idx] + 1, 0)
            prev_diff[it_idx] = dbi

            nonfinite = ~np.isfinite(dbi)
            converged = (~nonfinite) & (dbi < tol)
            contraction = (~nonfinite) & (~converged) & (bad_streak[it_idx] >= BAD_STREAK_LIMIT)
            hit_max = (~nonfinite) & (~converged) & (~contraction) & (iters[it_idx] >= max_iter)

            flags[it_idx[nonfinite]] = FLAG_NONFINITE
            phase[it_idx[nonfinite]] = 2
            phase[it_idx[converged]] = 1
            flags[it_idx[contraction]] = FLAG_NO_CONTRACTION
            phase[it_idx[contraction]] = 2
            flags[it_idx[hit_max]] = FLAG_MAX_ITER
            phase[it_idx[hit_max]] = 2
            # failed columns report their last delta as the residual
            resid[it_idx[nonfinite]] = dbi[nonfinite]
            resid[it_idx[contraction]] = dbi[contraction]
            resid[it_idx[hit_max]] = dbi[hit_max]

    return r, iters, resid, ratio_max, flags
