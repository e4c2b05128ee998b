"""Planar fields, the coefficient ellipsoid, and the polar reduction."""

import math

import numpy as np
import pytest

from cycle_census.errors import DegreeMismatch, ZeroField
from cycle_census.fields import (
    Ellipsoid,
    PlanarField,
    PolarSystem,
    coefficient_count,
    ellipsoid_membership,
    polar_reduce,
    rescale_to_unit,
    rigid_field,
    rigid_field_from_roots,
    rotate_field,
    sample_ellipsoid,
    trig_norm_check,
    v0_field,
)
from cycle_census.sampling import mix_seed, rng_for


def _random_field(rng, degree):
    vec = rng.normal(size=coefficient_count(degree))
    return PlanarField.from_vector(degree, vec)


def test_coefficient_count():
    # 2 blocks of (2 + 3 + ... + (d+1)) = d(d+3)/2 entries each
    for d in range(1, 10):
        assert coefficient_count(d) == d * (d + 3)
        assert PlanarField.zero(d).vector().size == d * (d + 3)


def test_vector_round_trip():
    rng = rng_for(41, 0)
    for d in (1, 3, 7):
        vec = rng.normal(size=coefficient_count(d))
        f = PlanarField.from_vector(d, vec)
        assert np.array_equal(f.vector(), vec)


def test_padding_validation():
    a = np.zeros((2, 3))
    b = np.zeros((2, 3))
    a[0, 2] = 1.0  # degree-1 row may only use columns 0..1
    with pytest.raises(ValueError):
        PlanarField(2, a, b)


def test_json_round_trip_bit_exact():
    rng = rng_for(42, 0)
    f = _random_field(rng, 5)
    g = PlanarField.from_json(f.to_json())
    assert np.array_equal(f.a, g.a) and np.array_equal(f.b, g.b)
    assert g.degree == 5


def test_eval_fg_single_monomial():
    f = PlanarField.zero(3)
    f.a[2, 1] = 2.0  # F_3 = 2 x y^2
    f.b[1, 2] = -1.0  # G_2 = -x^2
    fv, gv = f.eval_fg(0.5, -2.0)
    assert fv == pytest.approx(2.0 * 0.5 * 4.0)
    assert gv == pytest.approx(-0.25)


def test_ellipsoid_membership_and_sampling():
    ell = Ellipsoid(2.0, 0.1, 4)
    inside = 0
    for i in range(200):
        f = sample_ellipsoid(ell, mix_seed(43, i))
        assert ellipsoid_membership(f, ell, slack=1e-12)
        if ellipsoid_membership(f, Ellipsoid(2.0, 0.05, 4)):
            inside += 1
    # shrinking the budget by half keeps measure (1/2)^dim ~ 0 of the samples
    assert inside <= 2


def test_sampling_is_centered():
    ell = Ellipsoid(1.0, 1.0, 2)
    dim = coefficient_count(2)
    draws = np.stack([sample_ellipsoid(ell, mix_seed(44, i)).vector() for i in range(800)])
    # per-coordinate mean of a centered ball sample: SE ~ sigma/sqrt(800)
    assert np.max(np.abs(np.mean(draws, axis=0))) < 5.0 / math.sqrt(800.0)


def test_membership_degree_mismatch():
    with pytest.raises(DegreeMismatch):
        ellipsoid_membership(PlanarField.zero(2), Ellipsoid(1.0, 1.0, 3))


def test_rescale_matches_row_scaling():
    rng = rng_for(45, 0)
    f = _random_field(rng, 4)
    g = rescale_to_unit(f, 2.0)
    for k in range(1, 5):
        assert np.allclose(g.a[k - 1], f.a[k - 1] * 2.0 ** (k - 1))
        assert np.allclose(g.b[k - 1], f.b[k - 1] * 2.0 ** (k - 1))


def test_rescale_moves_ellipsoid():
    # a field sampled in E(a, N) lands in E(1, N) after rescaling
    ell = Ellipsoid(3.0, 0.2, 3)
    for i in range(50):
        f = sample_ellipsoid(ell, mix_seed(46, i))
        assert ellipsoid_membership(rescale_to_unit(f, 3.0), Ellipsoid(1.0, 0.2, 3), slack=1e-9)


def test_v0_polar_form():
    n = 0.01
    sys = polar_reduce(v0_field(3, n))
    rng = rng_for(47, 0)
    r = rng.uniform(0.1, 0.9, 8)
    theta = rng.uniform(0.0, 2.0 * math.pi, 8)
    p, q = sys.p_q(r, theta)
    assert np.max(np.abs(p - 0.5 * n)) < 1e-15
    assert np.max(np.abs(q)) < 1e-15


def test_rigid_polar_form_is_radial():
    gamma = np.array([-0.02, 0.5, 1.0])  # f(u) = -0.02 + 0.5 u + u^2
    sys = polar_reduce(rigid_field(gamma))
    rng = rng_for(48, 0)
    for _ in range(20):
        r = float(rng.uniform(0.05, 1.0))
        theta = rng.uniform(0.0, 2.0 * math.pi, 16)
        p, q = sys.p_q(r, theta)
        expected = gamma[0] + gamma[1] * r**2 + gamma[2] * r**4
        assert np.max(np.abs(p - expected)) < 1e-13
        assert np.max(np.abs(q)) < 1e-13


def test_rigid_from_roots_places_radial_zeros():
    roots = np.array([0.04, 0.16])
    sys = polar_reduce(rigid_field_from_roots(roots, 2.5))
    for u in roots:
        p, _ = sys.p_q(math.sqrt(u), np.array([0.3]))
        assert abs(p[0]) < 1e-14


def test_trig_norm_bounded():
    rng = rng_for(49, 0)
    worst = 0.0
    for d in (1, 2, 5, 8):
        for _ in range(25):
            worst = max(worst, trig_norm_check(_random_field(rng, d)))
    assert worst <= 1.0 + 1e-9


def test_trig_norm_zero_field():
    with pytest.raises(ZeroField):
        trig_norm_check(PlanarField.zero(2))


def test_rotation_shifts_angular_tables():
    rng = rng_for(50, 0)
    f = _random_field(rng, 4)
    phi = 0.731
    sys = polar_reduce(f)
    sys_rot = polar_reduce(rotate_field(f, phi))
    theta = np.linspace(0.0, 2.0 * math.pi, 37)
    fk, gk = sys.angular_tables(theta - phi)
    fk_r, gk_r = sys_rot.angular_tables(theta)
    assert np.max(np.abs(fk_r - fk)) < 1e-12
    assert np.max(np.abs(gk_r - gk)) < 1e-12


def test_rotation_preserves_norm_scale():
    rng = rng_for(51, 0)
    f = _random_field(rng, 3)
    g = rotate_field(f, 1.234)
    # rotations act orthogonally degree by degree on the trig values, so the
    # polar data (hence P, Q along orbits) is preserved up to the angle shift
    sysf = polar_reduce(f)
    sysg = polar_reduce(g)
    r = 0.37
    theta = np.linspace(0.0, 2.0 * math.pi, 11)
    pf, qf = sysf.p_q(r, theta - 1.234)
    pg, qg = sysg.p_q(r, theta)
    assert np.allclose(pf, pg, atol=1e-12)
    assert np.allclose(qf, qg, atol=1e-12)


def test_angular_tables_complex_linearity():
    rng = rng_for(52, 0)
    d = 3
    sys = PolarSystem(d)
    v1 = rng.normal(size=coefficient_count(d))
    v2 = rng.normal(size=coefficient_count(d))
    theta = np.linspace(0.0, 2.0 * math.pi, 17)
    fk1, gk1 = sys.angular_tables(theta, v1)
    fk2, gk2 = sys.angular_tables(theta, v2)
    fkc, gkc = sys.angular_tables(theta, v1 + 1j * v2)
    assert np.max(np.abs(fkc - (fk1 + 1j * fk2))) < 1e-14
    assert np.max(np.abs(gkc - (gk1 + 1j * gk2))) < 1e-14


def test_polar_system_requires_vector():
    with pytest.raises(ValueError):
        PolarSystem(2).p_q(0.5, 0.1)
