# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled backend for the hot solver kernel.

Same contract as `_kernels_py.picard_batch`, operating on split real and
imaginary arrays so the inner loops vectorize. Magnitudes use sqrt(x^2+y^2)
instead of numpy's hypot; the values involved are O(1), so the two backends
agree to rounding (pinned by tests), not bit-for-bit.
"""

import numpy as np

from libc.math cimport sqrt, isfinite, isnan


def picard_batch_soa(double[:, ::1] fk_re, double[:, ::1] fk_im,
                     double[:, ::1] gk_re, double[:, ::1] gk_im,
                     double[::1] w_re, double[::1] w_im,
                     double h, double tol, int max_iter):
    """Batched fixed-point sweep on split-complex arrays.

    fk_*, gk_*: (m1, d) angular tables; w_*: (B,) initial values.
    Returns (r_re, r_im, iters, resid, ratio_max, flags) with the exact
    bookkeeping semantics of the numpy reference backend.
    """
    cdef Py_ssize_t m1 = fk_re.shape[0]
    cdef Py_ssize_t d = fk_re.shape[1]
    cdef Py_ssize_t nb = w_re.shape[0]

    r_re_arr = np.empty((nb, m1), dtype=np.float64)
    r_im_arr = np.empty((nb, m1), dtype=np.float64)
    iters_arr = np.zeros(nb, dtype=np.int32)
    resid_arr = np.zeros(nb, dtype=np.float64)
    ratio_max_arr = np.zeros(nb, dtype=np.float64)
    flags_arr = np.zeros(nb, dtype=np.int32)

    cdef double[:, ::1] r_re = r_re_arr
    cdef double[:, ::1] r_im = r_im_arr
    cdef int[::1] iters = iters_arr
    cdef double[::1] resid = resid_arr
    cdef double[::1] ratio_max = ratio_max_arr
    cdef int[::1] flags = flags_arr

    phi_re_arr = np.empty(m1, dtype=np.float64)
    phi_im_arr = np.empty(m1, dtype=np.float64)
    cum_re_arr = np.empty(m1, dtype=np.float64)
    cum_im_arr = np.empty(m1, dtype=np.float64)
    prev_diff_arr = np.full(nb, np.nan, dtype=np.float64)
    streak_arr = np.zeros(nb, dtype=np.int32)
    phase_arr = np.zeros(nb, dtype=np.int32)
    cdef double[::1] phi_re = phi_re_arr
    cdef double[::1] phi_im = phi_im_arr
    cdef double[::1] cum_re = cum_re_arr
    cdef double[::1] cum_im = cum_im_arr
    cdef double[::1] prev_diff = prev_diff_arr
    cdef int[::1] bad_streak = streak_arr
    cdef int[::1] phase = phase_arr

    cdef Py_ssize_t b, j, k
    cdef double rre, rim, p_re, p_im, q_re, q_im, tre, tim
    cdef double den_re, den_im, den2, num_re, num_im
    cdef double diff, ad, ratio, prev
    cdef bint any_active = True

    with nogil:
        for b in range(nb):
            for j in range(m1):
                r_re[b, j] = w_re[b]
                r_im[b, j] = w_im[b]

        while any_active:
            any_active = False
            for b in range(nb):
                if phase[b] >= 2:
                    continue

                # one operator application for row b
                for j in range(m1):
                    rre = r_re[b, j]
                    rim = r_im[b, j]
                    p_re = fk_re[j, d - 1]
                    p_im = fk_im[j, d - 1]
                    q_re = gk_re[j, d - 1]
                    q_im = gk_im[j, d - 1]
                    for k in range(d - 2, -1, -1):
                        tre = p_re * rre - p_im * rim + fk_re[j, k]
                        p_im = p_re * rim + p_im * rre + fk_im[j, k]
                        p_re = tre
                        tre = q_re * rre - q_im * rim + gk_re[j, k]
                        q_im = q_re * rim + q_im * rre + gk_im[j, k]
                        q_re = tre
                    den_re = 1.0 + q_re
                    den_im = q_im
                    den2 = den_re * den_re + den_im * den_im
                    num_re = rre * p_re - rim * p_im
                    num_im = rre * p_im + rim * p_re
                    phi_re[j] = (num_re * den_re + num_im * den_im) / den2
                    phi_im[j] = (num_im * den_re - num_re * den_im) / den2

                cum_re[0] = 0.0
                cum_im[0] = 0.0
                for j in range(2, m1, 2):
                    cum_re[j] = cum_re[j - 2] + (h / 3.0) * (phi_re[j - 2] + 4.0 * phi_re[j - 1] + phi_re[j])
                    cum_im[j] = cum_im[j - 2] + (h / 3.0) * (phi_im[j - 2] + 4.0 * phi_im[j - 1] + phi_im[j])
                for j in range(1, m1, 2):
                    cum_re[j] = cum_re[j - 1] + (h / 12.0) * (5.0 * phi_re[j - 1] + 8.0 * phi_re[j] - phi_re[j + 1])
                    cum_im[j] = cum_im[j - 1] + (h / 12.0) * (5.0 * phi_im[j - 1] + 8.0 * phi_im[j] - phi_im[j + 1])

                diff = 0.0
                for j in range(m1):
                    tre = w_re[b] + cum_re[j]
                    tim = w_im[b] + cum_im[j]
                    den_re = tre - r_re[b, j]
                    den_im = tim - r_im[b, j]
                    ad = sqrt(den_re * den_re + den_im * den_im)
                    # NaN propagates like np.max: once seen, diff stays NaN
                    if ad > diff or isnan(ad):
                        diff = ad
                    r_re[b, j] = tre
                    r_im[b, j] = tim
                iters[b] += 1

                prev = prev_diff[b]
                if isfinite(prev) and prev > 0.0:
                    ratio = diff / prev
                    if ratio > ratio_max[b]:
                        ratio_max[b] = ratio
                else:
                    ratio = 0.0

                if phase[b] == 1:
                    resid[b] = diff
                    phase[b] = 2
                    continue

                if isfinite(prev) and prev > 0.0 and ratio > 0.9 and diff >= tol:
                    bad_streak[b] += 1
                else:
                    bad_streak[b] = 0
                prev_diff[b] = diff

                if not isfinite(diff):
                    flags[b] = 3
                    phase[b] = 2
                    resid[b] = diff
                elif diff < tol:
                    phase[b] = 1
                    any_active = True
                elif bad_streak[b] >= 3:
                    flags[b] = 2
                    phase[b] = 2
                    resid[b] = diff
                elif iters[b] >= max_iter:
                    flags[b] = 1
                    phase[b] = 2
                    resid[b] = diff
                else:
                    any_active = True

    return r_re_arr, r_im_arr, iters_arr, resid_arr, ratio_max_arr, flags_arr
