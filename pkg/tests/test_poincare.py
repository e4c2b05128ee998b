"""Return-map solvers, displacement, and the cycle census."""

import json
import math

import numpy as np
import pytest

from cycle_census.errors import InadmissibleField, InvalidGeometry, NoContraction
from cycle_census.fields import (
    Ellipsoid,
    PlanarField,
    polar_reduce,
    rigid_field,
    rigid_field_from_roots,
    rotate_field,
    sample_ellipsoid,
    v0_field,
)
from cycle_census.returnmap import (
    ORIGIN_EXCLUSION,
    SolverConfig,
    admissible_budget,
    calibration_displacement,
    complex_displacement_count,
    count_limit_cycles,
    denominator_guard,
    displacement,
    displacement_family,
    integral_residual,
    picard_solve,
    rk_solve,
)
from cycle_census.families import spot_check_bounds
from cycle_census.sampling import mix_seed, rng_for


def test_v0_closed_form_orbit():
    n = admissible_budget(3)
    sys = polar_reduce(v0_field(3, n))
    traj = picard_solve(sys, None, 0.5)
    exact = 0.5 * np.exp(0.5 * n * traj.theta_grid)
    assert np.max(np.abs(traj.values - exact)) < 1e-10
    assert traj.contraction_ratio < 0.55


def test_v0_displacement_matches_calibration_constant():
    n = admissible_budget(4)
    sys = polar_reduce(v0_field(4, n))
    p = displacement(sys, None, 0.5)
    assert abs(p - calibration_displacement(n)) < 1e-12


def test_zero_field_trajectory_is_constant():
    sys = polar_reduce(PlanarField.zero(2))
    traj = picard_solve(sys, None, 0.4)
    assert np.array_equal(traj.values, np.full(traj.values.size, 0.4 + 0.0j))
    assert displacement(sys, None, 0.4) == 0.0


def test_rigid_equilibrium_orbit_is_constant():
    # f(u) = u - 0.09 vanishes at u = 0.09, so w = 0.3 rides a cycle
    field = rigid_field(np.array([-0.09, 1.0]) * 1e-3)
    sys = polar_reduce(field)
    traj = picard_solve(sys, None, 0.3)
    assert np.max(np.abs(traj.values - 0.3)) < 1e-14
    assert abs(displacement(sys, None, 0.3)) < 1e-14


def test_displacement_is_real_for_real_data():
    n = admissible_budget(3)
    ell = Ellipsoid(1.0, n, 3)
    for i in range(10):
        field = sample_ellipsoid(ell, mix_seed(61, i))
        p = displacement(polar_reduce(field), None, 0.6)
        assert abs(p.imag) < 1e-14


def test_displacement_bound_in_regime():
    n = admissible_budget(3)
    ell = Ellipsoid(1.0, n, 3)
    for i in range(25):
        field = sample_ellipsoid(ell, mix_seed(62, i))
        sys = polar_reduce(field)
        bound = 8.0 * math.pi * 3 * field.norm()
        for w in (0.2, 0.75):
            assert abs(displacement(sys, None, w)) <= bound * (1.0 + 1e-6)


def test_picard_matches_runge_kutta():
    n = admissible_budget(4)
    ell = Ellipsoid(1.0, n, 4)
    worst = 0.0
    for i in range(20):
        field = sample_ellipsoid(ell, mix_seed(63, i))
        sys = polar_reduce(field)
        pic = picard_solve(sys, None, 0.7)
        rk = rk_solve(sys, None, 0.7)
        worst = max(worst, float(np.max(np.abs(pic.values - rk.values))))
        assert rk.final_residual < 1e-8
    assert worst < 1e-8


def test_integral_residual_of_converged_orbit():
    n = admissible_budget(3)
    field = sample_ellipsoid(Ellipsoid(1.0, n, 3), mix_seed(64, 0))
    sys = polar_reduce(field)
    traj = picard_solve(sys, None, 0.5)
    assert integral_residual(sys, field.vector(), traj.theta_grid, traj.values, 0.5) < 1e-11


def test_w_domain_enforced():
    sys = polar_reduce(v0_field(2, admissible_budget(2)))
    with pytest.raises(InvalidGeometry):
        picard_solve(sys, None, 0.8)


def test_no_contraction_raised_for_strong_field():
    # F = 5x, G = 5y gives P = 5: successive approximations blow up first
    sys = polar_reduce(v0_field(1, 10.0))
    with pytest.raises(NoContraction):
        picard_solve(sys, None, 0.5)


def test_denominator_guard_values():
    assert denominator_guard(polar_reduce(PlanarField.zero(3))) == 1.0
    assert denominator_guard(polar_reduce(v0_field(3, admissible_budget(3)))) == 1.0
    big = PlanarField.zero(1)
    big.a[0, 0] = 2.0  # F = 2y: Q = -2 sin^2 reaches -2, |1+Q| hits 0 near it
    assert denominator_guard(polar_reduce(big)) < 0.4


def test_count_rejects_bad_geometry():
    field = v0_field(2, admissible_budget(2))
    with pytest.raises(InvalidGeometry):
        count_limit_cycles(field, radius_k=0.8)
    with pytest.raises(InvalidGeometry):
        count_limit_cycles(field, radius_k=0.0)


def test_count_rejects_inadmissible_field():
    big = PlanarField.zero(1)
    big.a[0, 0] = 2.0
    with pytest.raises(InadmissibleField):
        count_limit_cycles(big)


def test_center_detection_zero_field():
    cc = count_limit_cycles(PlanarField.zero(3), n_budget=admissible_budget(3))
    assert cc.is_center and cc.real_cycles is None and cc.complex_zero_count is None


def test_center_detection_pure_rotation_perturbation():
    # F = eps y, G = -eps x only re-times the rotation: P = 0 identically
    field = PlanarField.zero(2)
    field.a[0, 0] = 1e-4
    field.b[0, 1] = -1e-4
    cc = count_limit_cycles(field)
    assert cc.is_center


def test_rigid_counts_and_radii():
    for ell, roots in ((1, [0.04]), (2, [0.06, 0.2]), (3, [0.05, 0.12, 0.2])):
        field = rigid_field_from_roots(np.asarray(roots), 4e-4)
        cc = count_limit_cycles(field)
        assert cc.real_cycles == ell
        assert np.max(np.abs(np.sort(cc.cycle_radii) - np.sqrt(roots))) < 1e-9
        # flow-map zeros in |w| <= 1/2 are exactly {0} and {+-sqrt(u_i)}:
        # the complex census must find 2 l + 1 of them
        assert cc.complex_zero_count == 2 * ell + 1
        assert cc.tangential_flags == 0


def test_rigid_double_root_flags_tangential():
    cfg = SolverConfig()
    grid = np.linspace(ORIGIN_EXCLUSION, 0.5, cfg.grid_points_w)
    w_star = float(grid[300])  # place the double root exactly on a grid node
    field = rigid_field(1e-3 * np.poly([w_star**2, w_star**2])[::-1])
    cc = count_limit_cycles(field, cfg=cfg)
    assert cc.real_cycles == 0
    assert cc.tangential_flags >= 1


def test_counts_are_rotation_invariant():
    n = admissible_budget(3)
    ell = Ellipsoid(1.0, n, 3)
    hits = 0
    for i in range(40):
        field = sample_ellipsoid(ell, mix_seed(65, i))
        cc = count_limit_cycles(field, n_budget=n)
        cc_rot = count_limit_cycles(rotate_field(field, 0.9), n_budget=n)
        assert cc.real_cycles == cc_rot.real_cycles
        assert cc.complex_zero_count == cc_rot.complex_zero_count
        hits += int((cc.real_cycles or 0) > 0)
    assert hits >= 1  # the sample must exercise nonzero counts at least once


def test_complex_count_budget_gate():
    field = v0_field(3, admissible_budget(3))
    with pytest.raises(InadmissibleField):
        complex_displacement_count(field, n_budget=field.norm() / 4.0)


def test_displacement_family_bound_and_witness():
    n = admissible_budget(3)
    fam = displacement_family(3, n)
    report = spot_check_bounds(fam, seed=3)
    assert report["max_modulus"] <= report["bound_m"]
    assert abs(report["witness_modulus"] - 1.0) < 1e-9


def test_displacement_family_budget_gate():
    with pytest.raises(InadmissibleField):
        displacement_family(3, 2.0 * admissible_budget(3))
    fam = displacement_family(3, 2.0 * admissible_budget(3), strict=False)
    assert fam.bound_m == pytest.approx(2.0 * 32.0 * 3)


def test_center_tol_override():
    field = rigid_field_from_roots(np.array([0.04]), 1e-3)
    cc = count_limit_cycles(field, cfg=SolverConfig(center_tol=1e3))
    assert cc.is_center  # an absurdly large tolerance flattens everything


def test_solver_config_json_round_trip():
    cfg = SolverConfig(theta_points=512, picard_tol=1e-10, center_tol=2e-9)
    back = SolverConfig.from_json(cfg.to_json())
    assert back == cfg
    assert set(json.loads(cfg.to_json())) == {
        "theta_points", "picard_tol", "picard_max_iter", "rk_tol", "center_tol", "grid_points_w",
    }


def test_admissible_budget_values():
    assert admissible_budget(1) == pytest.approx(1.0 / (192.0 * math.pi))
    assert admissible_budget(5) == pytest.approx(1.0 / (192.0 * math.pi * 25.0))
