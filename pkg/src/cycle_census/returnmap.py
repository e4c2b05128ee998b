"""Return map of the perturbed center: Picard solver, displacement, counts.

The angular equation dr/dtheta = r P(v,r,theta)/(1 + Q(v,r,theta)) is solved
by successive approximations r_{n+1}(theta) = w + int_0^theta phi(r_n) dt on a
fixed Simpson grid; an adaptive Runge-Kutta run on the same right-hand side
serves as an independent oracle. The displacement p(v,w) = r(v,w,2pi) - w
vanishes exactly on closed orbits, so limit cycles in the disk of radius K
are isolated zeros of w -> p(v,w) on (0, K], and the holomorphic extension to
complex w turns cycle counting into contour zero counting.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

import numpy as np

from . import kernels
from .analytic import ZeroCountResult
from .errors import (
    InadmissibleField,
    InvalidGeometry,
    NoContraction,
    NonConvergence,
    SolverFailure,
    StepUnderflow,
)
from .fields import PlanarField, PolarSystem, polar_reduce

W_DOMAIN_RADIUS = 0.75
GUARD_THRESHOLD = 0.4
ORIGIN_EXCLUSION = 1e-4
BISECT_WIDTH = 1e-10


def admissible_budget(degree: int) -> float:
    """Largest coefficient budget N for which the contraction regime is proven."""
    return 1.0 / (192.0 * math.pi * degree * degree)


@dataclass
class SolverConfig:
    """Numerical knobs for the return-map solvers.

    theta_points is the number of Simpson panels on [0, 2pi] (even); the
    quadrature grid carries theta_points + 1 nodes including both endpoints.
    center_tol = None picks the displacement-scaled default at count time.
    """

    theta_points: int = 1024
    picard_tol: float = 1e-12
    picard_max_iter: int = 60
    rk_tol: float = 1e-10
    center_tol: float | None = None
    grid_points_w: int = 512

    def __post_init__(self):
        if self.theta_points < 2 or self.theta_points % 2 != 0:
            raise ValueError("theta_points must be an even count of Simpson panels >= 2")
        if not (self.picard_tol > 0.0 and self.rk_tol > 0.0):
            raise ValueError("tolerances must be positive")
        if self.picard_max_iter < 1:
            raise ValueError("picard_max_iter must be positive")
        if self.center_tol is not None and self.center_tol < 0.0:
            raise ValueError("center_tol must be nonnegative when given")
        if self.grid_points_w < 2:
            raise ValueError("grid_points_w must be at least 2")

    def theta_grid(self) -> np.ndarray:
        return np.linspace(0.0, 2.0 * math.pi, self.theta_points + 1)

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "SolverConfig":
        payload = json.loads(text)
        known = {f: payload[f] for f in (
            "theta_points", "picard_tol", "picard_max_iter",
            "rk_tol", "center_tol", "grid_points_w",
        ) if f in payload}
        return cls(**known)


@dataclass
class Trajectory:
    """One solved orbit of the angular equation on [0, 2pi]."""

    theta_grid: np.ndarray
    values: np.ndarray
    solver: str  # "picard" or "runge_kutta"
    iterations_or_steps: int
    final_residual: float
    contraction_ratio: float = 0.0

    @property
    def initial(self) -> complex:
        return complex(self.values[0])

    @property
    def final(self) -> complex:
        return complex(self.values[-1])


@dataclass
class CycleCount:
    """Cycle census of one field in the disk of radius K.

    real_cycles and complex_zero_count switch to None (sentinel) for centers
    and for identically-vanishing displacement slices; tangential_flags counts
    displacement dips below the center threshold that do not change sign.
    """

    real_cycles: int | None
    tangential_flags: int
    complex_zero_count: int | None
    is_center: bool
    cycle_radii: np.ndarray
    complex_detail: ZeroCountResult | None = None


def denominator_guard(sys: PolarSystem, v=None, r_points: int = 21, theta_points: int = 720) -> float:
    """Grid minimum of |1 + Q(v, r, theta)| over r in [0,1], theta in [0,2pi).

    Values above 1/2 are guaranteed for |v| <= 2N with N at the admissible
    budget; callers treat anything at or below 0.4 as outside the regime.
    """
    r = np.linspace(0.0, 1.0, r_points)[:, None]
    theta = np.linspace(0.0, 2.0 * math.pi, theta_points, endpoint=False)
    _, q = sys.p_q(r, theta, v)
    return float(np.min(np.abs(1.0 + q)))


def _check_w(w: np.ndarray) -> None:
    if np.any(np.abs(w) > W_DOMAIN_RADIUS * (1.0 + 1e-12)):
        raise InvalidGeometry(f"initial radii must satisfy |w| <= {W_DOMAIN_RADIUS}")


def picard_batch_solve(sys: PolarSystem, v, w, cfg: SolverConfig):
    """Solve many initial radii at once; returns raw kernel outputs.

    Output: (theta, r, iterations, residual, ratio_max, flags) with r of
    shape (len(w), theta_points + 1). Flags follow the kernel convention
    (0 ok, 1 iteration cap, 2 no contraction, 3 nonfinite); nothing raises
    here so ensemble callers can flag individual samples.
    """
    w = np.atleast_1d(np.asarray(w, dtype=np.complex128))
    _check_w(w)
    theta = cfg.theta_grid()
    fk, gk = sys.angular_tables(theta, v)
    fk = fk.astype(np.complex128)
    gk = gk.astype(np.complex128)
    h = theta[1] - theta[0]
    r, iters, resid, ratio, flags = kernels.picard_batch(
        fk, gk, w, h, cfg.picard_tol, cfg.picard_max_iter
    )
    return theta, r, iters, resid, ratio, flags


def _raise_for_flag(flag: int, resid: float, cfg: SolverConfig) -> None:
    if flag == kernels.FLAG_NO_CONTRACTION:
        raise NoContraction(
            "successive differences stopped shrinking; inputs are outside the contraction regime"
        )
    if flag == kernels.FLAG_NONFINITE:
        raise SolverFailure("iteration produced nonfinite values")
    if flag == kernels.FLAG_MAX_ITER:
        raise NonConvergence(
            f"picard iteration did not reach tol (last residual {resid:.3e}) "
            f"within {cfg.picard_max_iter} iterations"
        )


def picard_solve(sys: PolarSystem, v, w, cfg: SolverConfig | None = None) -> Trajectory:
    """Successive-approximation solution of the angular equation.

    Preconditions: |w| <= 3/4 and denominator_guard(sys, v) > 0.4 (the guard
    is the caller's responsibility; it is checked once per field by the
    counting routines, not per initial radius).
    """
    cfg = cfg or SolverConfig()
    theta, r, iters, resid, ratio, flags = picard_batch_solve(sys, v, [w], cfg)
    _raise_for_flag(int(flags[0]), float(resid[0]), cfg)
    return Trajectory(
        theta_grid=theta,
        values=r[0],
        solver="picard",
        iterations_or_steps=int(iters[0]),
        final_residual=float(resid[0]),
        contraction_ratio=float(ratio[0]),
    )


def integral_residual(sys: PolarSystem, v, theta: np.ndarray, r: np.ndarray, w) -> float:
    """Sup-norm defect of r against the integral form of the angular equation."""
    fk, gk = sys.angular_tables(theta, v)
    d = sys.degree
    p = fk[:, d - 1].astype(np.complex128).copy()
    q = gk[:, d - 1].astype(np.complex128).copy()
    for k in range(d - 2, -1, -1):
        p = p * r + fk[:, k]
        q = q * r + gk[:, k]
    phi = r * p / (1.0 + q)
    out = np.empty_like(phi)
    kernels.cumulative_simpson(phi, float(theta[1] - theta[0]), out)
    return float(np.max(np.abs(w + out - r)))


def rk_solve(sys: PolarSystem, v, w, cfg: SolverConfig | None = None) -> Trajectory:
    """Independent adaptive Runge-Kutta (4/5 embedded pair) oracle.

    Dense output is sampled on the Picard grid so trajectories compare
    pointwise; the reported residual is the defect against the integral
    equation, the same functional the Picard solver reports.
    """
    from scipy.integrate import solve_ivp

    cfg = cfg or SolverConfig()
    w = complex(w)
    _check_w(np.array([w]))
    rhs = sys.ode_rhs(v)

    def fun(t, y):
        return [rhs(t, y[0])]

    sol = solve_ivp(
        fun,
        (0.0, 2.0 * math.pi),
        np.array([w], dtype=np.complex128),
        method="RK45",
        rtol=cfg.rk_tol,
        atol=cfg.rk_tol * 1e-3,
        dense_output=True,
    )
    if not sol.success:
        msg = (sol.message or "").lower()
        if "step size" in msg or "too small" in msg:
            raise StepUnderflow(sol.message)
        raise SolverFailure(f"runge-kutta integration failed: {sol.message}")
    theta = cfg.theta_grid()
    values = sol.sol(theta)[0]
    return Trajectory(
        theta_grid=theta,
        values=values,
        solver="runge_kutta",
        iterations_or_steps=max(sol.t.size - 1, 0),
        final_residual=integral_residual(sys, v, theta, values, w),
    )


def displacement(sys: PolarSystem, v, w, cfg: SolverConfig | None = None) -> complex:
    """p(v, w) = r(v, w, 2pi) - w via the Picard solver.

    Inside the proven regime (|v|/2 at or below the admissible budget) the
    a-priori bound |p| <= 8 pi d |v| is asserted at relative slack 1e-6.
    """
    cfg = cfg or SolverConfig()
    traj = picard_solve(sys, v, w, cfg)
    p = traj.final - traj.initial
    vec = sys.base_vector if v is None else np.asarray(v)
    vnorm = float(np.linalg.norm(vec))
    if 0.5 * vnorm <= admissible_budget(sys.degree):
        bound = 8.0 * math.pi * sys.degree * vnorm
        if abs(p) > bound * (1.0 + 1e-6) + 1e-300:
            raise SolverFailure(
                f"displacement {abs(p):.3e} violates the a-priori bound {bound:.3e}"
            )
    return p


def calibration_displacement(n_budget: float) -> float:
    """Analytic p(v0, 1/2) = (e^(pi N) - 1)/2 used to normalize the family."""
    return 0.5 * (math.exp(math.pi * n_budget) - 1.0)


def displacement_family(
    degree: int, n_budget: float, cfg: SolverConfig | None = None, strict: bool = True
):
    """Normalized displacement family f_u(z) = p(N u, 3z/4) / p(v0, 1/2).

    The parameter u ranges over the complex ball of radius 2 (so the field
    vector N u stays within the proven contraction regime) and z over the
    unit disk; the family is bounded by 32 d there and reaches modulus 1 on
    the radius-2/3 subdisk at u = v0/N, z = 2/3. Zeros of f_u in the closed
    2/3-disk are exactly zeros of p(N u, .) in the closed 1/2-disk.

    strict=False admits budgets beyond the proven constant for ad-hoc fields
    (rigid ground-truth systems): the solver-level guards take over as the
    admissibility check and the stated bound is scaled linearly with the
    budget excess, so relative thresholds stay proportionate.
    """
    from .families import ParametricFamily

    cfg = cfg or SolverConfig()
    excess = n_budget / admissible_budget(degree)
    if strict and excess > 1.0 + 1e-12:
        raise InadmissibleField(
            f"budget {n_budget:.3e} exceeds the admissible {admissible_budget(degree):.3e} "
            f"for degree {degree}"
        )
    sys = PolarSystem(degree)
    norm_const = calibration_displacement(n_budget)
    dim = degree * (degree + 3)

    def evaluate(u, z):
        u = np.asarray(u)
        if u.shape != (dim,):
            raise ValueError(f"parameter vector must have {dim} entries")
        z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
        w = W_DOMAIN_RADIUS * z
        vec = (n_budget * u).astype(np.complex128)
        _, r, _, _, _, flags = picard_batch_solve(sys, vec, w, cfg)
        bad = flags != kernels.FLAG_OK
        if np.any(bad):
            raise SolverFailure(
                f"{int(np.sum(bad))} of {z.size} contour radii failed to converge"
            )
        return (r[:, -1] - w) / norm_const

    from .fields import v0_field

    witness_u = v0_field(degree, n_budget).vector() / n_budget
    return ParametricFamily(
        evaluate=evaluate,
        param_dim=dim,
        bound_m=32.0 * degree * max(1.0, excess),
        param_radius=2.0,
        disk_radius=2.0 / 3.0,
        label=f"displacement(d={degree})",
        witness_v=witness_u.astype(np.complex128),
        witness_z=2.0 / 3.0,  # |f| = p(v0, 1/2)/p(v0, 1/2) = 1 there
    )


def complex_displacement_count(
    field: PlanarField,
    n_budget: float | None = None,
    cfg: SolverConfig | None = None,
) -> ZeroCountResult:
    """Zeros of p(v, .) in the closed half disk, by contour winding.

    The count runs through the normalized family at parameter u = v/N, so it
    equals the zero count of f_u in the closed 2/3-disk. When no budget is
    supplied the field's own norm is used (the tightest budget for which the
    field is a unit-ball parameter); explicit budgets must dominate the norm.

    Winding numbers only need a few correct digits of f on the contour, so
    the solver tolerance is floored at 1e-10 here; counts are unchanged and
    the contour sweep drops a quarter of its Picard iterations.
    """
    from dataclasses import replace

    from .families import family_zero_count

    cfg = cfg or SolverConfig()
    contour_cfg = replace(cfg, picard_tol=max(cfg.picard_tol, 1e-10))
    vec = field.vector()
    vnorm = float(np.linalg.norm(vec))
    strict = n_budget is not None  # ad-hoc budgets lean on the solver guards
    if n_budget is None:
        n_budget = max(vnorm, 1e-12)
    if vnorm > 2.0 * n_budget * (1.0 + 1e-12):
        raise InadmissibleField(
            f"field norm {vnorm:.3e} exceeds twice the budget {n_budget:.3e}"
        )
    fam = displacement_family(field.degree, n_budget, contour_cfg, strict=strict)
    return family_zero_count(fam, vec / n_budget)


def _auto_center_tol(degree: int, scale_norm: float) -> float:
    # displacement magnitudes live below 8 pi d |v|; anything 1e-11 of that is noise
    return 1e-11 * 8.0 * math.pi * degree * scale_norm


def count_limit_cycles(
    field: PlanarField,
    radius_k: float = 0.5,
    cfg: SolverConfig | None = None,
    n_budget: float | None = None,
) -> CycleCount:
    """Census of limit cycles of the field inside the disk of radius K.

    Real cycles are isolated zeros of w -> p(v, w) on (0, K], located by sign
    changes on a grid_points_w grid refined by bisection to width 1e-10; the
    interval (0, 1e-4] is excluded since the origin is always a fixed point.
    A field whose displacement stays below center_tol on the whole grid is
    reported as a center with sentinel counts. The complex count is filled by
    contour winding on the normalized displacement family.
    """
    cfg = cfg or SolverConfig()
    if not (0.0 < radius_k <= W_DOMAIN_RADIUS):
        raise InvalidGeometry(f"cycle disk radius must lie in (0, {W_DOMAIN_RADIUS}]")
    sys = polar_reduce(field)
    vec = field.vector()
    guard = denominator_guard(sys)
    if guard <= GUARD_THRESHOLD:
        raise InadmissibleField(
            f"denominator guard {guard:.3f} at or below {GUARD_THRESHOLD}; field too large"
        )
    vnorm = float(np.linalg.norm(vec))
    scale = n_budget if n_budget is not None else 0.5 * vnorm
    ctol = cfg.center_tol if cfg.center_tol is not None else _auto_center_tol(field.degree, 2.0 * scale)

    w = np.linspace(ORIGIN_EXCLUSION, radius_k, cfg.grid_points_w)
    _, r, _, resid, _, flags = picard_batch_solve(sys, vec, w.astype(np.complex128), cfg)
    bad = np.flatnonzero(flags)
    if bad.size:
        _raise_for_flag(int(flags[bad[0]]), float(resid[bad[0]]), cfg)
    p = np.real(r[:, -1] - w)  # real field, real w: displacement is real

    if np.max(np.abs(p)) <= ctol:
        return CycleCount(
            real_cycles=None,
            tangential_flags=0,
            complex_zero_count=None,
            is_center=True,
            cycle_radii=np.array([]),
        )

    clear = np.abs(p) > ctol
    idx = np.flatnonzero(clear)
    signs = np.sign(p[idx])
    flips = np.flatnonzero(signs[:-1] * signs[1:] < 0.0)
    lo = w[idx[flips]]
    hi = w[idx[flips + 1]]
    p_lo = p[idx[flips]]

    while lo.size and float(np.max(hi - lo)) > BISECT_WIDTH:
        mid = 0.5 * (lo + hi)
        _, rm, _, rs, _, fl = picard_batch_solve(sys, vec, mid.astype(np.complex128), cfg)
        badm = np.flatnonzero(fl)
        if badm.size:
            _raise_for_flag(int(fl[badm[0]]), float(rs[badm[0]]), cfg)
        pm = np.real(rm[:, -1] - mid)
        left = p_lo * pm > 0.0
        lo = np.where(left, mid, lo)
        p_lo = np.where(left, pm, p_lo)
        hi = np.where(left, hi, mid)
    roots = 0.5 * (lo + hi)

    # dips below the threshold that do not separate opposite signs
    tangential = 0
    if idx.size:
        if idx[0] > 0:
            tangential += 1  # leading dip (beyond the origin exclusion)
        if idx[-1] < w.size - 1:
            tangential += 1
        gap = np.flatnonzero(idx[1:] - idx[:-1] > 1)
        same = signs[gap] * signs[gap + 1] > 0.0
        tangential += int(np.sum(same))
    else:
        tangential += 1

    detail = complex_displacement_count(field, n_budget=n_budget, cfg=cfg)
    return CycleCount(
        real_cycles=int(roots.size),
        tangential_flags=tangential,
        complex_zero_count=detail.count,
        is_center=False,
        cycle_radii=roots,
        complex_detail=detail,
    )
