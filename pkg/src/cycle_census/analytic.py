"""Zero counting for analytic functions on disks.

Three independent routes live here: an argument-principle count from phase
unwrapping on an adaptively refined contour (derivative-free), a growth bound
on the zero count from log-sups on two circles, and polynomial root finding
(companion matrix plus Newton polish) used as the cross-checking oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidGeometry, NonConvergence, OrderViolation, ZeroPolynomial

# contour refinement caps: panels never exceed MAX_PANELS, so the smallest
# panel produced by bisection from the 256-panel start has width 2*pi/MAX_PANELS
INITIAL_PANELS = 256
MAX_PANELS = 2 ** 18
PHASE_STEP_LIMIT = 0.5 * math.pi
MODULUS_RATIO_LIMIT = 4.0
DEGENERATE_TOL = 1e-12


@dataclass
class ZeroCountResult:
    """Outcome of a contour count. `count` is None for a degenerate slice
    (the function is numerically zero somewhere on every attempted contour)."""

    count: int | None
    contour_radius: float
    min_modulus_on_contour: float
    winding_residual: float
    panels: int = 0

    @property
    def is_degenerate(self) -> bool:
        return self.count is None


@dataclass
class ComplexPoly:
    """Polynomial with ascending complex coefficients."""

    coeffs: np.ndarray

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=np.complex128))
        # trim exactly-zero leading (highest-degree) coefficients
        nz = np.nonzero(c)[0]
        self.coeffs = c[: nz[-1] + 1] if nz.size else c[:1] * 0.0

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return bool(np.all(self.coeffs == 0.0))

    def __call__(self, z):
        return np.polyval(self.coeffs[::-1], z)


def _phase_increments(f_left: np.ndarray, f_right: np.ndarray) -> np.ndarray:
    """Principal-value phase steps along consecutive contour samples."""
    return np.angle(f_right * np.conj(f_left))


def _needs_refinement(f_left, f_right, steps):
    bad_phase = np.abs(steps) > PHASE_STEP_LIMIT
    al = np.abs(f_left)
    ar = np.abs(f_right)
    lo = np.minimum(al, ar)
    hi = np.maximum(al, ar)
    # a sharp modulus drop across a panel hints at a zero hiding between
    # samples even when the measured phase step aliases to something small
    bad_modulus = hi > MODULUS_RATIO_LIMIT * np.where(lo > 0.0, lo, np.inf)
    return bad_phase | bad_modulus


def winding_zero_count(f, rho: float, tol: float = DEGENERATE_TOL) -> ZeroCountResult:
    """Count zeros of `f` inside |z| < rho by the argument principle.

    `f` must accept a complex ndarray and return values elementwise. The
    contour starts at 256 uniform panels; any panel whose phase step exceeds
    pi/2 is bisected, up to 2^18 panels total. No derivative of `f` is used.

    Returns a degenerate sentinel (count None) when min |f| over all contour
    evaluations falls below tol * max |f|; raises NonConvergence when a panel
    at the minimum width still cannot be resolved.
    """
    if not (rho > 0.0) or not math.isfinite(rho):
        raise InvalidGeometry(f"contour radius must be positive and finite, got {rho}")
    if tol <= 0.0:
        raise InvalidGeometry("tol must be positive")

    theta = np.linspace(0.0, 2.0 * math.pi, INITIAL_PANELS + 1)
    values = np.asarray(f(rho * np.exp(1j * theta)), dtype=np.complex128)
    if values.shape != theta.shape:
        raise ValueError("evaluator must return one value per contour point")
    if not np.all(np.isfinite(values)):
        raise NonConvergence("contour evaluation produced non-finite values")

    # close the loop exactly: theta=2pi sample re-used as the wrap partner
    min_mod = float(np.min(np.abs(values)))
    max_mod = float(np.max(np.abs(values)))

    left_t = theta[:-1]
    right_t = theta[1:]
    left_f = values[:-1]
    right_f = values[1:]
    panels = INITIAL_PANELS
    min_width = 2.0 * math.pi / MAX_PANELS

    for _ in range(64):  # each round halves the worst panels; 64 >> log2(2^18/256)
        steps = _phase_increments(left_f, right_f)
        if min_mod < tol * max_mod or max_mod == 0.0:
            return ZeroCountResult(None, rho, min_mod, math.nan, panels)
        bad = _needs_refinement(left_f, right_f, steps)
        widths = right_t - left_t
        refinable = bad & (widths > min_width)
        if not np.any(bad):
            break
        if not np.any(refinable):
            raise NonConvergence(
                "phase step above pi/2 on a panel at minimum width; "
                "a zero sits on or numerically on the contour"
            )
        if panels + np.count_nonzero(refinable) > MAX_PANELS:
            # refine only as many as the cap allows; if the cap is hit with
            # bad panels left, the next round raises via the width floor
            allowed = MAX_PANELS - panels
            idx = np.nonzero(refinable)[0][:allowed]
            mask = np.zeros_like(refinable)
            mask[idx] = True
            refinable = mask
            if allowed == 0:
                raise NonConvergence("contour refinement exceeded the panel cap")

        mid_t = 0.5 * (left_t[refinable] + right_t[refinable])
        mid_f = np.asarray(f(rho * np.exp(1j * mid_t)), dtype=np.complex128)
        if not np.all(np.isfinite(mid_f)):
            raise NonConvergence("contour evaluation produced non-finite values")
        min_mod = min(min_mod, float(np.min(np.abs(mid_f))))
        max_mod = max(max_mod, float(np.max(np.abs(mid_f))))

        keep = ~refinable
        left_t = np.concatenate([left_t[keep], left_t[refinable], mid_t])
        right_t = np.concatenate([right_t[keep], mid_t, right_t[refinable]])
        left_f = np.concatenate([left_f[keep], left_f[refinable], mid_f])
        right_f = np.concatenate([right_f[keep], mid_f, right_f[refinable]])
        order = np.argsort(left_t, kind="stable")
        left_t, right_t = left_t[order], right_t[order]
        left_f, right_f = left_f[order], right_f[order]
        panels = left_t.size
    else:
        raise NonConvergence("contour refinement did not settle")

    if min_mod < tol * max_mod or max_mod == 0.0:
        return ZeroCountResult(None, rho, min_mod, math.nan, panels)

    raw = float(np.sum(_phase_increments(left_f, right_f))) / (2.0 * math.pi)
    count = int(round(raw))
    residual = abs(raw - count)
    if residual >= 0.25:
        raise NonConvergence(f"winding number {raw} is not near an integer")
    return ZeroCountResult(count, rho, min_mod, residual, panels)


def jensen_count_constant(s: float) -> float:
    """Multiplier c(s) in the growth bound `count <= c(s) (M1 - M2)`.

    Factor the n zeros in the closed disk of radius s out of h with Moebius
    factors of the disk of radius R = (s+1)/2: each factor has modulus 1 on
    |z| = R and at most kappa = 2 s R / (R^2 + s^2) < 1 on the disk of radius
    s, so M1 - M2 >= n log(1/kappa). The constant 1/log(1/kappa) is sharp
    (powers of a single Moebius factor with its zero at |a| = s attain it).
    """
    if not (0.0 < s < 1.0):
        raise InvalidGeometry(f"inner radius must lie in (0, 1), got {s}")
    big_r = 0.5 * (s + 1.0)
    kappa = 2.0 * s * big_r / (big_r * big_r + s * s)
    return 1.0 / math.log(1.0 / kappa)


def jensen_zero_bound(m1: float, m2: float, s: float, tol: float = 1e-9) -> float:
    """Upper bound on zeros in the closed disk of radius s from log-sups.

    m1, m2 are sups of log|h| over the disks of radius (s+1)/2 and s. The
    bound c(s) * (m1 - m2) dominates the true zero count for every h analytic
    and bounded on the unit disk.
    """
    c = jensen_count_constant(s)
    if m1 < m2 - tol:
        raise OrderViolation(f"log-sup on the larger disk is smaller: M1={m1} < M2={m2}")
    return c * max(m1 - m2, 0.0)


def polynomial_roots(p: ComplexPoly | np.ndarray, polish_steps: int = 8) -> np.ndarray:
    """All complex roots (with multiplicity) of a polynomial.

    Companion-matrix eigenvalues refined by Newton steps that are only kept
    while they reduce |p|. Raises ZeroPolynomial when every coefficient is 0.
    """
    poly = p if isinstance(p, ComplexPoly) else ComplexPoly(p)
    if poly.is_zero:
        raise ZeroPolynomial("all coefficients vanish")
    if poly.degree == 0:
        return np.zeros(0, dtype=np.complex128)

    asc = poly.coeffs
    desc = asc[::-1]
    roots = np.roots(desc)
    dp_desc = np.polyder(desc)
    for _ in range(polish_steps):
        vals = np.polyval(desc, roots)
        dvals = np.polyval(dp_desc, roots)
        ok = dvals != 0.0
        step = np.zeros_like(roots)
        step[ok] = vals[ok] / dvals[ok]
        cand = roots - step
        better = np.abs(np.polyval(desc, cand)) < np.abs(vals)
        if not np.any(better):
            break
        roots = np.where(better, cand, roots)
    return roots
