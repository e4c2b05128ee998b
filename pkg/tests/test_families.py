"""Parametric families: zero counts, tails, separation, and the registry."""

import math

import numpy as np
import pytest
from scipy.linalg import expm

from cycle_census.errors import (
    DegenerateSlice,
    EmptyInput,
    InvalidGeometry,
    RadiusViolation,
)
from cycle_census.families import (
    ParametricFamily,
    check_separation_conditions,
    contour_jitter_base,
    count_many,
    detect_identically_zero,
    empirical_tail,
    expectation_and_variance,
    family_zero_count,
    log_sups,
    normalized_log_sups,
    spot_check_bounds,
)
from cycle_census.registry import (
    FlowRhs,
    blaschke_product,
    build_family,
    build_family_sequence,
    flow_radius,
    list_families,
    ode_flow_family,
)
from cycle_census.sampling import rng_for


def _ball_params(fam, rng, n, radius=0.95):
    g = rng.standard_normal((n, fam.param_dim)) + 1j * rng.standard_normal(
        (n, fam.param_dim)
    )
    u = rng.uniform(size=n) ** (1.0 / (2 * fam.param_dim))
    return g / np.linalg.norm(g, axis=1)[:, None] * (radius * u)[:, None]


# ---------------------------------------------------------------- registry


def test_registry_lists_builtins():
    names = list_families()
    assert names == sorted(names)
    for name in ("constant", "monomial", "bernoulli", "blaschke-hyperplane", "ode-flow"):
        assert name in names
    with pytest.raises(InvalidGeometry):
        build_family("no-such-family")


def test_constant_family_has_no_zeros():
    fam = build_family("constant")
    assert family_zero_count(fam, [0.7 + 0.2j]).count == 0


def test_monomial_family_counts_its_power():
    for m in (1, 2, 5):
        fam = build_family("monomial", {"m": m})
        assert family_zero_count(fam, [0.5]).count == m
    with pytest.raises(InvalidGeometry):
        build_family("monomial", {"m": 0})
    with pytest.raises(InvalidGeometry):
        build_family("monomial", {"s": 1.0})


def test_bernoulli_family_is_a_fair_coin():
    # root sits at sqrt(2) s v1, inside the closed s-disk iff |v1| <= 1/sqrt(2)
    fam = build_family("bernoulli", {"s": 0.5})
    assert family_zero_count(fam, [0.3]).count == 1
    assert family_zero_count(fam, [0.9]).count == 0
    rng = rng_for(23, 0)
    for v in _ball_params(fam, rng, 40):
        if abs(abs(v[0]) - 1.0 / math.sqrt(2.0)) < 1e-2:
            continue  # too close to the decision boundary for a clean count
        expected = 1 if abs(v[0]) <= 1.0 / math.sqrt(2.0) else 0
        assert family_zero_count(fam, v).count == expected


def test_hyperplane_section_counts_blaschke_degree():
    # pure-Blaschke section at a = e1: the slice is B itself, so the count
    # over the 2/3-disk equals the number of placed zeros
    for zeros in ((0.1,), (0.1, -0.3 + 0.2j), (0.05, 0.2j, -0.25)):
        fam = build_family(
            "blaschke-hyperplane",
            {"c": None, "blaschke_zeros": list(zeros), "blaschke_scale": 1.0},
        )
        assert fam.param_dim == 2
        e1 = np.zeros(2, dtype=np.complex128)
        e1[0] = 1.0
        assert family_zero_count(fam, e1).count == len(zeros)
        # the constant component alone never vanishes
        e2 = np.zeros(2, dtype=np.complex128)
        e2[1] = 1.0
        assert family_zero_count(fam, e2).count == 0


def test_hyperplane_component_validation():
    with pytest.raises(InvalidGeometry):
        build_family("blaschke-hyperplane", {"c": 1.5})
    with pytest.raises(InvalidGeometry):
        build_family("blaschke-hyperplane", {"c": None, "blaschke_zeros": None})
    with pytest.raises(InvalidGeometry):
        build_family("blaschke-hyperplane", {"blaschke_zeros": [1.1]})
    # jointly oversized components must be rejected by the unit-ball probe
    with pytest.raises(InvalidGeometry):
        build_family(
            "blaschke-hyperplane",
            {"c": 0.8, "blaschke_zeros": [0.3], "blaschke_scale": 0.9},
        )


def test_blaschke_product_modulus():
    b = blaschke_product([0.3, -0.25 + 0.2j])
    z = 0.97 * np.exp(1j * np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False))
    assert np.all(np.abs(b(z)) < 1.0)
    assert abs(b(np.array([0.3]))[0]) == 0.0


def test_family_sequences():
    fams = build_family_sequence("bernoulli", 5)
    assert len(fams) == 5 and all(f is fams[0] for f in fams)
    rot = build_family_sequence("blaschke-hyperplane", 10)
    assert rot[0] is rot[8] and rot[1] is rot[9]
    assert rot[0] is not rot[1]
    assert len({f.label for f in rot}) == 8
    with pytest.raises(InvalidGeometry):
        build_family_sequence("constant", 0)


# ---------------------------------------------------------- zero counting


def test_param_validation():
    fam = build_family("constant")
    with pytest.raises(InvalidGeometry):
        family_zero_count(fam, [0.1, 0.2])
    with pytest.raises(InvalidGeometry):
        family_zero_count(fam, [2.5])
    with pytest.raises(InvalidGeometry):
        family_zero_count(fam, [0.5], disk_radius=1.0)


def test_detect_identically_zero():
    fam = build_family("blaschke-hyperplane")
    assert detect_identically_zero(fam, np.zeros(fam.param_dim))
    v = np.zeros(fam.param_dim, dtype=np.complex128)
    v[-1] = 0.3
    assert not detect_identically_zero(fam, v)
    assert not detect_identically_zero(build_family("monomial"), [1e-6])


def test_zero_slice_returns_degenerate_sentinel():
    fam = build_family("blaschke-hyperplane")
    res = family_zero_count(fam, np.zeros(fam.param_dim))
    assert res.is_degenerate and res.count is None


def test_count_many_matches_scalar_path():
    fam = build_family("blaschke-hyperplane")
    rng = rng_for(101, 0)
    vs = _ball_params(fam, rng, 48)
    vs[7] = 0.0  # degenerate row
    counts, failed = count_many(fam, vs)
    assert failed == []
    for i, v in enumerate(vs):
        assert counts[i] == family_zero_count(fam, v).count
    assert counts[7] is None
    with pytest.raises(InvalidGeometry):
        count_many(fam, vs[:, :1])


def test_count_many_without_batch_evaluator():
    fam = build_family("blaschke-hyperplane")
    scalar_only = ParametricFamily(
        evaluate=fam.evaluate,
        param_dim=fam.param_dim,
        bound_m=fam.bound_m,
        param_radius=fam.param_radius,
        disk_radius=fam.disk_radius,
        label="scalar-only",
    )
    rng = rng_for(102, 0)
    vs = _ball_params(fam, rng, 12)
    fast, _ = count_many(fam, vs)
    slow, _ = count_many(scalar_only, vs)
    assert fast == slow


def test_contour_jitter_base():
    assert contour_jitter_base(0.5) == 0.02
    s = 0.99
    assert contour_jitter_base(s) == (0.5 * (s + 1.0) - s) / (4.0 * s)
    # every jittered contour stays strictly inside the annulus (s, (s+1)/2)
    for s in (0.1, 0.5, 2.0 / 3.0, 0.9, 0.99):
        eta = contour_jitter_base(s)
        assert s * (1.0 + 3.9 * eta) < 0.5 * (s + 1.0)


# ------------------------------------------------------ log-sups and bounds


def test_normalized_log_sups_constant_slice():
    fam = build_family("constant")
    n1, n2 = normalized_log_sups(fam, [1.0])
    assert n1 == -1.0 and n2 == -1.0
    with pytest.raises(DegenerateSlice):
        normalized_log_sups(fam, [0.0])


def test_log_sups_monomial_closed_form():
    # |f| = (rho/s)^2 on the rho-circle, so M1 = 2 log 1.5 and M2 = 0
    fam = build_family("monomial", {"m": 2, "s": 0.5})
    m1, m2 = log_sups(fam, [1.0])
    assert abs(m1 - 2.0 * math.log(1.5)) < 1e-12
    assert abs(m2) < 1e-12
    n1, n2 = normalized_log_sups(fam, [1.0])
    assert abs(n2 - (-1.0)) < 1e-12
    assert n1 > n2


def test_log_sups_order_on_random_slices():
    fam = build_family("blaschke-hyperplane")
    rng = rng_for(103, 0)
    for v in _ball_params(fam, rng, 20):
        n1, n2 = normalized_log_sups(fam, v)
        assert n1 >= n2 - 1e-12
        assert n1 <= 1e-9


def test_spot_check_bounds_for_builtins():
    for name in ("constant", "monomial", "bernoulli", "blaschke-hyperplane"):
        fam = build_family(name)
        report = spot_check_bounds(fam, seed=3)
        assert report["max_modulus"] <= report["bound_m"] * (1.0 + 1e-9)
        assert report["witness_modulus"] >= 1.0 - 1e-6


# ------------------------------------------------------------ tail tables


def test_empirical_tail_all_zero_counts():
    table = empirical_tail([0] * 100, (0, 1, 2))
    assert np.array_equal(table.tail_fractions, [1.0, 0.0, 0.0])
    assert np.array_equal(table.exceed_counts, [100, 0, 0])
    # a single threshold clears the 30-exceedance floor: no fit
    assert math.isnan(table.fit_c2)


def test_empirical_tail_recovers_geometric_decay():
    rng = rng_for(104, 0)
    counts = rng.geometric(0.5, size=10_000) - 1  # P(N >= T) = 2^-T
    table = empirical_tail(counts.tolist(), range(0, 10))
    assert np.all(np.diff(table.tail_fractions) <= 0.0)
    assert abs(table.fit_c2 - math.log(2.0)) < 0.15 * math.log(2.0)
    assert table.fit_r2 > 0.95
    assert table.fit_c2_se > 0.0
    assert abs(table.fit_c1 - 1.0) < 0.3


def test_empirical_tail_degenerate_sentinels_never_decrease():
    base = [0, 0, 1, 2, 3] * 8
    with_nones = base + [None] * 4
    t_base = empirical_tail(base, range(0, 6))
    t_none = empirical_tail(with_nones, range(0, 6))
    assert np.array_equal(t_none.exceed_counts, t_base.exceed_counts + 4)
    frac_base_on_larger_n = t_base.exceed_counts / float(len(with_nones))
    assert np.all(t_none.tail_fractions >= frac_base_on_larger_n)
    assert "4 of 44" in t_none.metadata


def test_empirical_tail_validation():
    with pytest.raises(EmptyInput):
        empirical_tail([], (0, 1))
    with pytest.raises(EmptyInput):
        empirical_tail([1, 2], ())
    with pytest.raises(InvalidGeometry):
        empirical_tail([1, 2], (-1, 0))
    table = empirical_tail([3] * 50, (2, 0, 2, 1))
    assert np.array_equal(table.thresholds, [0, 1, 2])


def test_rearrangement_reproduces_the_mean():
    stats = expectation_and_variance([0, 1, 2, 3])
    assert stats.expectation == 1.5
    assert abs(stats.rearrangement_expectation - 1.5) < 1e-15
    assert stats.variance == 1.25
    partial = expectation_and_variance([None, 2, 4])
    assert partial.expectation == 3.0 and partial.sample_count == 2
    with pytest.raises(EmptyInput):
        expectation_and_variance([None, None])


# --------------------------------------------------------- separation check


def test_separation_witnesses():
    fz = ParametricFamily(
        evaluate=lambda v, z: np.asarray(z, dtype=np.complex128) + 0.0 * v[0],
        param_dim=1,
        bound_m=2.0,
        param_radius=2.0,
        disk_radius=0.5,
        label="identity-slice",
    )
    fams = [
        build_family("blaschke-hyperplane"),
        build_family("constant"),
        fz,
        build_family("bernoulli"),
    ]
    flags = check_separation_conditions(fams, delta=0.1, s_prime=0.3, seed=5)
    assert flags[0] == (True, True)
    assert flags[1] == (True, False)  # a constant never vanishes
    assert flags[2] == (False, True)  # z itself never clears delta on the disk
    assert flags[3] == (True, True)


def test_separation_validation():
    fam = build_family("constant")
    with pytest.raises(InvalidGeometry):
        check_separation_conditions([fam], delta=0.0, s_prime=0.3)
    with pytest.raises(InvalidGeometry):
        check_separation_conditions([fam], delta=0.1, s_prime=0.7)


# ------------------------------------------------------------- ODE flows


def test_flow_radius_values():
    assert flow_radius(FlowRhs("zero", 3), 1.0) == 1.0
    assert flow_radius(FlowRhs("shift", 4), 1.0) == 0.25
    a = np.diag([2.0, 2.0]).astype(np.complex128)
    assert abs(flow_radius(FlowRhs("linear", 2, matrix=a), 1.0) - 0.125) < 1e-15
    b = 0.3 * np.eye(2, dtype=np.complex128)
    assert abs(flow_radius(FlowRhs("linear", 2, matrix=b), 1.0) - 1.0 / 1.2) < 1e-15


def test_flow_rhs_validation():
    with pytest.raises(InvalidGeometry):
        FlowRhs("spiral", 3)
    with pytest.raises(InvalidGeometry):
        FlowRhs("linear", 3)
    with pytest.raises(InvalidGeometry):
        FlowRhs("linear", 3, matrix=np.eye(2))
    with pytest.raises(RadiusViolation):
        ode_flow_family(FlowRhs("shift", 3), r=1.0, t=0.25)
    with pytest.raises(InvalidGeometry):
        ode_flow_family(FlowRhs("shift", 3), r=1.0, t=0.2, n_tau=127)


def test_zero_flow_is_constant_in_z():
    fam = ode_flow_family(FlowRhs("zero", 3), r=1.0, t=0.2)
    assert fam.disk_radius == 0.2
    rng = rng_for(105, 0)
    z = 0.9 * np.exp(1j * rng.uniform(0.0, 2.0 * math.pi, size=16))
    for v in _ball_params(fam, rng, 4, radius=1.4):
        vals = fam.evaluate(v, z)
        assert np.max(np.abs(vals - v[0])) < 1e-12


def test_shift_flow_is_a_taylor_polynomial():
    # x1 has vanishing N-th derivative: x1(z) = sum u_{j+1} z^j / j! after
    # the rescaling z -> R z~ with R = 1/4
    n = 4
    fam = ode_flow_family(FlowRhs("shift", n), r=1.0, t=0.2)
    rng = rng_for(106, 0)
    z = rng.uniform(-1.0, 1.0, size=40) + 1j * rng.uniform(-1.0, 1.0, size=40)
    z *= 0.7 / np.abs(z).max()
    for u in _ball_params(fam, rng, 3, radius=1.4):
        vals = fam.evaluate(u, z)
        exact = sum(u[j] * (0.25 * z) ** j / math.factorial(j) for j in range(n))
        assert np.max(np.abs(vals - exact)) < 1e-10


def test_linear_flow_matches_matrix_exponential():
    rng = rng_for(107, 0)
    a = 0.2 * (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    rhs = FlowRhs("linear", 3, matrix=a)
    big_r = flow_radius(rhs, 1.0)
    fam = ode_flow_family(rhs, r=1.0, t=0.9 * big_r, n_tau=256)
    z = np.array([0.3, -0.5 + 0.4j, 0.9j, -0.8])
    for u in _ball_params(fam, rng, 3, radius=1.4):
        vals = fam.evaluate(u, z)
        exact = np.array([(expm(a * (big_r * zz)) @ u)[0] for zz in z])
        assert np.max(np.abs(vals - exact)) < 1e-9


def test_flow_family_zero_count_oracle():
    # shift flow with u3 = 0: the slice is u1 + u2 z / 4, one root at
    # z = -4 u1 / u2, inside the counting disk s = t/R = 0.8 iff |u1/u2| < 0.2
    fam = build_family("ode-flow", {"rhs": "shift", "dim": 3, "t": 0.2})
    assert abs(fam.disk_radius - 0.8) < 1e-15
    assert family_zero_count(fam, [0.1, 1.0, 0.0]).count == 1
    assert family_zero_count(fam, [0.3, 1.0, 0.0]).count == 0
    report = spot_check_bounds(fam, seed=9, n_params=6, n_radii=2, grid=32)
    assert report["max_modulus"] <= report["bound_m"] * (1.0 + 1e-9)
    assert report["witness_modulus"] == 1.0
