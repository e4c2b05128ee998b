"""Contract tests for the batched Picard kernel and its two backends."""

import math

import numpy as np
import pytest
from scipy.integrate import simpson

from cycle_census import kernels
from cycle_census.kernels import (
    FLAG_MAX_ITER,
    FLAG_NO_CONTRACTION,
    FLAG_NONFINITE,
    FLAG_OK,
    available_backends,
    cumulative_simpson,
    picard_batch_python,
)
from cycle_census.sampling import rng_for

HAS_COMPILED = "compiled" in available_backends()


def _tables(rng, m1=257, d=3, scale=1e-3):
    theta = np.linspace(0.0, 2.0 * math.pi, m1)
    fk = scale * (rng.normal(size=(m1, d)) * np.cos(np.outer(theta, np.arange(1, d + 1))))
    gk = scale * (rng.normal(size=(m1, d)) * np.sin(np.outer(theta, np.arange(1, d + 1))))
    return fk.astype(np.complex128), gk.astype(np.complex128), theta[1] - theta[0]


def test_cumulative_simpson_exact_on_quadratics():
    # both the even-node chain and the half-panel rule integrate parabolas exactly
    t = np.linspace(0.0, 3.0, 9)
    h = t[1] - t[0]
    phi = 2.0 - 1.5 * t + 0.75 * t * t
    exact = 2.0 * t - 0.75 * t * t + 0.25 * t**3
    out = cumulative_simpson(phi, h)
    assert np.max(np.abs(out - exact)) < 1e-14


def test_cumulative_simpson_matches_scipy_at_even_nodes():
    t = np.linspace(0.0, 2.0 * math.pi, 129)
    phi = np.sin(3.0 * t) + 0.2 * np.cos(t)
    out = cumulative_simpson(phi, t[1] - t[0])
    for end in (2, 64, 128):  # composite Simpson over [0, t_end], even end index
        ref = simpson(phi[: end + 1], x=t[: end + 1])
        assert abs(out[end] - ref) < 1e-13


def test_cumulative_simpson_fourth_order():
    errs = []
    for m in (16, 32, 64):
        t = np.linspace(0.0, 1.0, m + 1)
        out = cumulative_simpson(np.exp(t), t[1] - t[0])
        errs.append(np.max(np.abs(out - (np.exp(t) - 1.0))))
    assert errs[0] / errs[1] > 12.0 and errs[1] / errs[2] > 12.0


def test_cumulative_simpson_rejects_odd_panel_count():
    with pytest.raises(ValueError):
        cumulative_simpson(np.ones(4), 0.1)


def test_zero_field_fixed_point():
    fk = np.zeros((17, 2), dtype=np.complex128)
    gk = np.zeros((17, 2), dtype=np.complex128)
    w = np.array([0.3 + 0.1j, 0.5], dtype=np.complex128)
    r, iters, resid, ratio, flags = kernels.picard_batch(fk, gk, w, 0.1, 1e-12, 30)
    assert np.all(flags == FLAG_OK)
    assert np.array_equal(r, np.repeat(w[:, None], 17, axis=1))
    assert np.all(resid == 0.0) and np.all(ratio == 0.0)
    assert np.all(iters == 2)  # one converging application plus the frozen-residual one


def test_flag_max_iter():
    rng = rng_for(11, 0)
    fk, gk, h = _tables(rng, scale=1e-2)
    w = np.array([0.5], dtype=np.complex128)
    _, iters, _, _, flags = kernels.picard_batch(fk, gk, w, h, 1e-30, 3)
    assert flags[0] == FLAG_MAX_ITER and iters[0] == 3


def test_flag_no_contraction():
    # constant P = 5 makes consecutive deltas grow like (10 pi)^n / n!
    m1 = 129
    fk = np.zeros((m1, 1), dtype=np.complex128)
    fk[:, 0] = 5.0
    gk = np.zeros((m1, 1), dtype=np.complex128)
    w = np.array([0.5], dtype=np.complex128)
    _, _, _, ratio, flags = kernels.picard_batch(fk, gk, w, 2.0 * math.pi / (m1 - 1), 1e-12, 60)
    assert flags[0] == FLAG_NO_CONTRACTION
    assert ratio[0] > 0.9


def test_flag_nonfinite():
    fk = np.zeros((17, 1), dtype=np.complex128)
    gk = np.zeros((17, 1), dtype=np.complex128)
    w = np.array([np.nan + 0.0j], dtype=np.complex128)
    _, _, _, _, flags = kernels.picard_batch(fk, gk, w, 0.1, 1e-12, 30)
    assert flags[0] == FLAG_NONFINITE


def test_batch_composition_invariance():
    # solving a batch must equal solving each column alone, bit for bit
    rng = rng_for(12, 0)
    fk, gk, h = _tables(rng, scale=2e-4)
    w = np.linspace(0.1, 0.7, 8).astype(np.complex128)
    r_all, it_all, re_all, ra_all, fl_all = kernels.picard_batch(fk, gk, w, h, 1e-12, 60)
    for j in range(8):
        r1, it1, re1, ra1, fl1 = kernels.picard_batch(fk, gk, w[j : j + 1], h, 1e-12, 60)
        assert np.array_equal(r_all[j], r1[0])
        assert it_all[j] == it1[0] and fl_all[j] == fl1[0]
        assert re_all[j] == re1[0] and ra_all[j] == ra1[0]


def test_residual_semantics():
    rng = rng_for(13, 0)
    fk, gk, h = _tables(rng, scale=2e-4)
    w = np.array([0.4, 0.7], dtype=np.complex128)
    _, iters, resid, ratio, flags = kernels.picard_batch(fk, gk, w, h, 1e-12, 60)
    assert np.all(flags == FLAG_OK)
    # the post-convergence application must contract below the threshold
    assert np.all(resid < 1e-12)
    assert np.all(ratio < 0.9)
    assert np.all(iters >= 2)


@pytest.mark.skipif(not HAS_COMPILED, reason="compiled kernel not built")
def test_backends_agree():
    from cycle_census.kernels import picard_batch_compiled

    for trial in range(20):
        rng = rng_for(14, trial)
        d = int(rng.integers(1, 13))
        fk, gk, h = _tables(rng, d=d, scale=10.0 ** rng.uniform(-5, -3))
        w = rng.uniform(0.05, 0.75, size=4).astype(np.complex128)
        rp, ip_, sp, ap, fp = picard_batch_python(fk, gk, w, h, 1e-12, 60)
        rc, ic, sc, ac, fc = picard_batch_compiled(fk, gk, w, h, 1e-12, 60)
        assert np.array_equal(fp, fc) and np.array_equal(ip_, ic)
        # numerical agreement, never bitwise: the backends order flops differently
        assert np.max(np.abs(rp - rc)) < 1e-13
        assert np.max(np.abs(sp - sc)) < 1e-13
        assert np.max(np.abs(ap - ac)) < 1e-10


@pytest.mark.skipif(not HAS_COMPILED, reason="compiled kernel not built")
def test_backends_agree_on_failure_flags():
    from cycle_census.kernels import picard_batch_compiled

    m1 = 129
    fk = np.zeros((m1, 1), dtype=np.complex128)
    fk[:, 0] = 5.0
    gk = np.zeros_like(fk)
    w = np.array([0.5], dtype=np.complex128)
    h = 2.0 * math.pi / (m1 - 1)
    _, _, _, _, fp = picard_batch_python(fk, gk, w, h, 1e-12, 60)
    _, _, _, _, fc = picard_batch_compiled(fk, gk, w, h, 1e-12, 60)
    assert fp[0] == fc[0] == FLAG_NO_CONTRACTION
