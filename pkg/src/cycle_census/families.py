"""Parametric families of analytic functions and their zero statistics.

A family assigns to each parameter vector v in a complex ball a function f_v
holomorphic on the unit disk, with a uniform bound M over the parameter ball
of radius r > 1 and at least one unit-ball parameter whose slice reaches
modulus 1 on the inner disk of radius s < 1. Zero counts over the closed
s-disk are random variables on the unit parameter ball; this module counts
them, detects degenerate (identically vanishing) slices, and estimates tail
distributions and moments of the counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .analytic import DEGENERATE_TOL, ZeroCountResult, winding_zero_count
from .errors import (
    DegenerateSlice,
    EmptyInput,
    InvalidGeometry,
    NonConvergence,
    PersistentBoundaryZero,
)
from .sampling import sobol_complex_ball

# multiples of the base jitter eta; all stay below 4, which keeps every
# attempted contour strictly inside the annulus (s, (s+1)/2)
JITTER_MULTIPLIERS = (1.0, 1.7, 2.3, 3.1, 3.3, 3.5, 3.7, 3.9)
FIT_MIN_EXCEEDANCES = 30


@dataclass
class ParametricFamily:
    """Holomorphic family f_v(z) with declared bound and witness data.

    evaluate(v, z) must be pure, accept a parameter vector of length
    param_dim and a complex ndarray of z points, and return values
    elementwise. evaluate_batch, when provided, maps a (B, param_dim) block
    of parameters and a (m,) block of z points to a (B, m) value table and
    must agree with evaluate row by row.
    """

    evaluate: Callable[[np.ndarray, np.ndarray], np.ndarray]
    param_dim: int
    bound_m: float
    param_radius: float
    disk_radius: float
    label: str = ""
    evaluate_batch: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    witness_v: np.ndarray | None = None
    witness_z: complex | None = None

    def __post_init__(self):
        if self.param_dim < 1:
            raise InvalidGeometry("param_dim must be at least 1")
        if not self.bound_m > 1.0:
            raise InvalidGeometry("bound M must exceed 1")
        if not self.param_radius > 1.0:
            raise InvalidGeometry("parameter radius must exceed 1")
        if not (0.0 < self.disk_radius < 1.0):
            raise InvalidGeometry("disk radius s must lie in (0, 1)")

    def slice_of(self, v) -> Callable[[np.ndarray], np.ndarray]:
        v = np.asarray(v, dtype=np.complex128)
        return lambda z: self.evaluate(v, z)


def _check_param(fam: ParametricFamily, v) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    if v.shape != (fam.param_dim,):
        raise InvalidGeometry(
            f"parameter vector must have {fam.param_dim} entries, got shape {v.shape}"
        )
    if np.linalg.norm(v) >= fam.param_radius:
        raise InvalidGeometry(
            f"parameter norm {np.linalg.norm(v):.3f} reaches the family radius {fam.param_radius}"
        )
    return v


def contour_jitter_base(s: float) -> float:
    """Base relative offset eta: contours live at s (1 + eta * multiplier)."""
    return min(0.02, (0.5 * (s + 1.0) - s) / (4.0 * s))


def detect_identically_zero(fam: ParametricFamily, v, tol: float = 1e-8) -> bool:
    """True iff f_v is numerically zero on a 64-point grid in D_{(s+1)/2}.

    The tolerance is relative to the family bound M and is deliberately loose
    (1e-8) so that evaluators with solver-limited absolute accuracy still
    classify their zero slices correctly.
    """
    v = _check_param(fam, v)
    radius = 0.5 * (fam.disk_radius + 1.0)
    rings = (np.arange(8) + 0.5) / 8.0 * radius
    angles = 2.0 * math.pi * np.arange(8) / 8.0
    pts = np.concatenate(
        [r * np.exp(1j * (angles + 0.1 * j)) for j, r in enumerate(rings)]
    )
    vals = np.asarray(fam.evaluate(v, pts))
    return bool(np.max(np.abs(vals)) < tol * fam.bound_m)


def family_zero_count(
    fam: ParametricFamily,
    v,
    disk_radius: float | None = None,
    tol: float = DEGENERATE_TOL,
) -> ZeroCountResult:
    """Zeros of f_v in the closed disk of radius s, with multiplicity.

    Counts by contour winding on a circle slightly outside s; when the
    contour lands on (or numerically near) a zero, up to 8 jittered radii in
    (s, (s+1)/2) are attempted. Identically vanishing slices return the
    degenerate sentinel (count None, read as infinity); a slice that keeps
    defeating every contour without being identically zero raises
    PersistentBoundaryZero.
    """
    v = _check_param(fam, v)
    s = fam.disk_radius if disk_radius is None else float(disk_radius)
    if not (0.0 < s < 1.0):
        raise InvalidGeometry("counting disk radius must lie in (0, 1)")
    eta = contour_jitter_base(s)
    f = fam.slice_of(v)
    last = None
    for mult in JITTER_MULTIPLIERS:
        rho = s * (1.0 + eta * mult)
        try:
            result = winding_zero_count(f, rho, tol=tol)
        except NonConvergence:
            continue  # a zero sits on this contour; jitter and retry
        if not result.is_degenerate:
            return result
        last = result
        if detect_identically_zero(fam, v):
            return result
    if last is not None and detect_identically_zero(fam, v):
        return last
    raise PersistentBoundaryZero(
        f"all {len(JITTER_MULTIPLIERS)} contours near radius {s} hit zeros "
        f"but the slice is not identically zero"
    )


def count_many(
    fam: ParametricFamily,
    vs: np.ndarray,
    tol: float = DEGENERATE_TOL,
) -> tuple[list[int | None], list[int]]:
    """Zero counts for a block of parameter vectors.

    Families exposing evaluate_batch get a vectorized first pass: every row
    whose initial 256-panel contour already satisfies the refinement
    predicate is resolved in bulk; the remaining rows fall back to
    family_zero_count one by one, which reproduces exactly what the scalar
    path would have computed for every row. Returns (counts, failed_indices)
    where counts holds ints and None sentinels (identically zero slices) and
    failed indices mark rows excluded by PersistentBoundaryZero.
    """
    from .analytic import INITIAL_PANELS, _needs_refinement, _phase_increments

    vs = np.asarray(vs, dtype=np.complex128)
    if vs.ndim != 2 or vs.shape[1] != fam.param_dim:
        raise InvalidGeometry(f"parameter block must have shape (B, {fam.param_dim})")
    n = vs.shape[0]
    counts: list[int | None] = [None] * n
    pending = list(range(n))

    if fam.evaluate_batch is not None and n > 0:
        s = fam.disk_radius
        rho = s * (1.0 + contour_jitter_base(s))
        theta = np.linspace(0.0, 2.0 * math.pi, INITIAL_PANELS + 1)
        zpts = rho * np.exp(1j * theta)
        vals = np.asarray(fam.evaluate_batch(vs, zpts), dtype=np.complex128)
        if vals.shape != (n, theta.size):
            raise ValueError("evaluate_batch must return one row per parameter vector")
        absv = np.abs(vals)
        finite = np.all(np.isfinite(vals), axis=1)
        max_mod = np.max(absv, axis=1)
        degenerate = (np.min(absv, axis=1) < tol * max_mod) | (max_mod == 0.0)
        steps = _phase_increments(vals[:, :-1], vals[:, 1:])
        any_bad = np.any(_needs_refinement(vals[:, :-1], vals[:, 1:], steps), axis=1)
        raw = np.sum(steps, axis=1) / (2.0 * math.pi)
        rounded = np.round(raw)
        clean = finite & ~degenerate & ~any_bad & (np.abs(raw - rounded) < 0.25)
        for i in np.flatnonzero(clean):
            counts[i] = int(rounded[i])
        pending = [i for i in range(n) if not clean[i]]

    failed: list[int] = []
    for i in pending:
        try:
            counts[i] = family_zero_count(fam, vs[i], tol=tol).count
        except PersistentBoundaryZero:
            failed.append(i)
    return counts, failed


def normalized_log_sups(fam: ParametricFamily, v, grid: int = 512) -> tuple[float, float]:
    """Normalized log-sups ((M1 - log M)/log M, (M2 - log M)/log M).

    M1 and M2 are sups of log|f_v| over the disks of radius (s+1)/2 and s,
    estimated on their boundary circles (maximum principle). The first
    component dominates the second and cannot exceed 0 beyond grid error.
    """
    v = _check_param(fam, v)
    s = fam.disk_radius
    theta = np.linspace(0.0, 2.0 * math.pi, grid, endpoint=False)
    ring = np.exp(1j * theta)
    sup1 = float(np.max(np.abs(fam.evaluate(v, 0.5 * (s + 1.0) * ring))))
    sup2 = float(np.max(np.abs(fam.evaluate(v, s * ring))))
    if sup1 == 0.0 or sup2 == 0.0:
        raise DegenerateSlice("slice is numerically zero on a whole circle")
    logm = math.log(fam.bound_m)
    return (math.log(sup1) - logm) / logm, (math.log(sup2) - logm) / logm


def log_sups(fam: ParametricFamily, v, grid: int = 512) -> tuple[float, float]:
    """Raw (M1, M2) log-sups, the inputs of the growth-based zero bound."""
    n1, n2 = normalized_log_sups(fam, v, grid)
    logm = math.log(fam.bound_m)
    return n1 * logm + logm, n2 * logm + logm


@dataclass
class TailTable:
    """Empirical tail P(count >= T) with a fitted exponential decay.

    Degenerate sentinels count as exceeding every threshold. fit_c1/fit_c2
    come from least squares of log(fraction) on T over thresholds with at
    least 30 exceedances; fewer than two such thresholds leaves the fit
    fields NaN (the table itself is still valid).
    """

    thresholds: np.ndarray
    tail_fractions: np.ndarray
    exceed_counts: np.ndarray
    sample_count: int
    fit_c1: float
    fit_c2: float
    fit_r2: float
    fit_c2_se: float
    metadata: str = ""


def empirical_tail(counts, thresholds) -> TailTable:
    """Tail table of zero counts over the given integer thresholds."""
    counts = list(counts)
    if not counts:
        raise EmptyInput("no counts supplied")
    thresholds = np.unique(np.asarray(thresholds, dtype=np.int64))
    if thresholds.size == 0:
        raise EmptyInput("no thresholds supplied")
    if np.any(thresholds < 0):
        raise InvalidGeometry("thresholds must be nonnegative")
    finite = np.array([c for c in counts if c is not None], dtype=np.float64)
    n_degenerate = len(counts) - finite.size
    n = len(counts)
    exceed = np.array(
        [int(np.sum(finite >= t)) + n_degenerate for t in thresholds], dtype=np.int64
    )
    fractions = exceed / float(n)

    usable = exceed >= FIT_MIN_EXCEEDANCES
    c1 = c2 = r2 = se = math.nan
    if int(np.sum(usable)) >= 2:
        x = thresholds[usable].astype(np.float64)
        y = np.log(fractions[usable])
        xm = x - x.mean()
        sxx = float(np.dot(xm, xm))
        if sxx > 0.0:
            slope = float(np.dot(xm, y)) / sxx
            intercept = float(y.mean() - slope * x.mean())
            resid = y - (intercept + slope * x)
            ssr = float(np.dot(resid, resid))
            sst = float(np.dot(y - y.mean(), y - y.mean()))
            r2 = 1.0 - ssr / sst if sst > 0.0 else (1.0 if ssr == 0.0 else 0.0)
            c1 = math.exp(intercept)
            c2 = -slope
            dof = x.size - 2
            se = math.sqrt(ssr / dof / sxx) if dof > 0 else math.nan
    return TailTable(
        thresholds=thresholds,
        tail_fractions=fractions,
        exceed_counts=exceed,
        sample_count=n,
        fit_c1=c1,
        fit_c2=c2,
        fit_r2=r2,
        fit_c2_se=se,
        metadata=f"degenerate sentinels included as >= T for all T ({n_degenerate} of {n})",
    )


@dataclass
class SummaryStats:
    """Sample moments of zero counts, with the rearrangement cross-check.

    rearrangement_expectation integrates the sorted-descending counts over
    [0, 1] with uniform weights; it must reproduce the mean to float error.
    """

    expectation: float
    variance: float
    sample_count: int
    rearrangement_expectation: float


def expectation_and_variance(counts) -> SummaryStats:
    """Mean and (population) variance of finite counts.

    Degenerate sentinels (None) are excluded; they form a measure-zero set
    in the underlying model and carry no finite moment contribution.
    """
    finite = np.array([c for c in counts if c is not None], dtype=np.float64)
    if finite.size == 0:
        raise EmptyInput("no finite counts to average")
    mean = float(np.mean(finite))
    var = float(np.var(finite))
    ordered = np.sort(finite)[::-1]
    widths = np.full(ordered.size, 1.0 / ordered.size)
    rearranged = float(np.dot(ordered, widths))
    return SummaryStats(
        expectation=mean,
        variance=var,
        sample_count=int(finite.size),
        rearrangement_expectation=rearranged,
    )


def _min_on_closed_disk(fam: ParametricFamily, v, s: float, grid: int) -> float | None:
    """Certified min of |f_v| over the closed s-disk, or None if uncertifiable.

    With no zeros inside a contour of radius slightly above s, the minimum
    principle puts the minimum of |f_v| over the closed s-disk on the circle
    |z| = s; a nonzero winding count (or an unresolvable contour) means no
    certificate at this v.
    """
    eta = contour_jitter_base(s)
    f = fam.slice_of(np.asarray(v, dtype=np.complex128))
    for mult in JITTER_MULTIPLIERS[:3]:
        try:
            res = winding_zero_count(f, s * (1.0 + eta * mult))
        except NonConvergence:
            continue
        if res.is_degenerate or res.count != 0:
            return None
        theta = np.linspace(0.0, 2.0 * math.pi, grid, endpoint=False)
        vals = fam.evaluate(np.asarray(v, dtype=np.complex128), s * np.exp(1j * theta))
        return float(np.min(np.abs(vals)))
    return None


def check_separation_conditions(
    families,
    delta: float,
    s_prime: float,
    seed: int = 0,
    boundary_grid: int = 256,
) -> list[tuple[bool, bool]]:
    """Witness search for the two premises of the normal-limit theorem.

    For each family: (a) holds when some parameter in the closed unit ball
    keeps |f_v| above delta on the whole closed s-disk; (b) holds when some
    parameter puts a zero inside the open s'-disk while |f_v| exceeds delta
    somewhere in that disk. The search scans quasi-random parameter points
    (32^min(dim,3) for dim <= 3, else 4096) plus local refinements around
    the best candidate; False means no witness at this resolution, not a
    disproof.
    """
    if delta <= 0.0:
        raise InvalidGeometry("delta must be positive")
    out = []
    for idx, fam in enumerate(families):
        if not (0.0 < s_prime < fam.disk_radius):
            raise InvalidGeometry(
                f"s' must lie in (0, s={fam.disk_radius}), got {s_prime}"
            )
        dim = fam.param_dim
        n_pts = 32 ** min(dim, 3) if dim <= 3 else 4096
        pts = sobol_complex_ball(n_pts, dim, seed=seed + idx)
        if fam.witness_v is not None:
            pts = np.vstack([np.asarray(fam.witness_v)[None, :], pts])

        theta = np.linspace(0.0, 2.0 * math.pi, boundary_grid, endpoint=False)
        inner_ring = s_prime * 0.98 * np.exp(1j * theta)

        a_holds = False
        b_holds = False
        best_a = (-math.inf, None)
        for v in pts:
            if not a_holds:
                # cheap prefilter: boundary min must clear delta before the
                # winding certificate is attempted
                bvals = np.abs(fam.evaluate(v, fam.disk_radius * np.exp(1j * theta)))
                bmin = float(np.min(bvals))
                if bmin > best_a[0]:
                    best_a = (bmin, v)
                if bmin > delta:
                    cert = _min_on_closed_disk(fam, v, fam.disk_radius, boundary_grid)
                    if cert is not None and cert > delta:
                        a_holds = True
            if not b_holds:
                ivals = np.abs(fam.evaluate(v, inner_ring))
                if float(np.max(ivals)) > delta:
                    try:
                        res = winding_zero_count(fam.slice_of(v), s_prime * 0.99)
                    except NonConvergence:
                        res = None
                    if res is not None and not res.is_degenerate and res.count >= 1:
                        b_holds = True
            if a_holds and b_holds:
                break

        if not a_holds and best_a[1] is not None:
            # local refinement: shrink Gaussian perturbations of the best candidate
            rng = np.random.default_rng(seed + 7919 * (idx + 1))
            center = np.asarray(best_a[1])
            for scale in (0.1, 0.03):
                for _ in range(16):
                    cand = center + scale * (
                        rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
                    )
                    nrm = np.linalg.norm(cand)
                    if nrm > 1.0:
                        cand = cand / nrm
                    cert = _min_on_closed_disk(fam, cand, fam.disk_radius, boundary_grid)
                    if cert is not None and cert > delta:
                        a_holds = True
                        break
                if a_holds:
                    break
        out.append((a_holds, b_holds))
    return out


def spot_check_bounds(
    fam: ParametricFamily,
    seed: int = 0,
    n_params: int = 24,
    n_radii: int = 4,
    grid: int = 128,
) -> dict:
    """Grid evidence for the family's declared bound and witness.

    Samples parameters up to the family radius and z circles up to the unit
    circle, returning the largest |f| seen (must stay at or below M) and the
    witness modulus (must reach 1) when witness data is attached.
    """
    rng = np.random.default_rng(seed)
    theta = np.linspace(0.0, 2.0 * math.pi, grid, endpoint=False)
    worst = 0.0
    for i in range(n_params):
        scale = fam.param_radius * (1.0 - 1e-9) * ((i + 1) / n_params) ** 0.5
        g = rng.standard_normal(fam.param_dim) + 1j * rng.standard_normal(fam.param_dim)
        v = g / np.linalg.norm(g) * scale
        for rr in np.linspace(0.25, 1.0 - 1e-9, n_radii):
            vals = np.abs(fam.evaluate(v, rr * np.exp(1j * theta)))
            worst = max(worst, float(np.max(vals)))
    witness = None
    if fam.witness_v is not None and fam.witness_z is not None:
        witness = float(
            np.abs(fam.evaluate(np.asarray(fam.witness_v), np.array([fam.witness_z])))[0]
        )
    return {"max_modulus": worst, "bound_m": fam.bound_m, "witness_modulus": witness}
