"""Planar polynomial perturbations of the linear center and their polar form.

A field is dx/dt = -y + F(x,y), dy/dt = x + G(x,y) with F, G polynomials
without constant term, organized by homogeneous degree:
F_k(x,y) = sum_i a_{k,i} x^i y^(k-i), 1 <= k <= degree. In polar
coordinates the orbits satisfy dr/dtheta = r P(v,r,theta) / (1 + Q(v,r,theta))
with P, Q linear in the coefficient vector v, which is what the return-map
solvers consume.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegreeMismatch, ZeroField
from .sampling import uniform_real_ball


def coefficient_count(degree: int) -> int:
    """Length of the flat coefficient vector: d(d+3) for degree d."""
    return degree * (degree + 3)


def _padded(rows, degree, dtype=np.float64):
    out = np.zeros((degree, degree + 1), dtype=dtype)
    for k, row in enumerate(rows, start=1):
        row = np.asarray(row, dtype=dtype)
        if row.shape != (k + 1,):
            raise ValueError(f"degree-{k} row must have {k + 1} entries")
        out[k - 1, : k + 1] = row
    return out


@dataclass
class PlanarField:
    """Real coefficient tensors of the polynomial perturbation.

    `a` and `b` are (degree, degree+1) padded arrays; row k-1 holds the
    coefficients of F_k resp. G_k, entries beyond column k are zero.
    """

    degree: int
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError("degree must be at least 1")
        self.a = np.asarray(self.a, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        shape = (self.degree, self.degree + 1)
        if self.a.shape != shape or self.b.shape != shape:
            raise ValueError(f"coefficient tensors must have shape {shape}")
        for k in range(1, self.degree + 1):
            if np.any(self.a[k - 1, k + 1 :] != 0.0) or np.any(self.b[k - 1, k + 1 :] != 0.0):
                raise ValueError("padding beyond column k must stay zero")
        if not (np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.b))):
            raise ValueError("coefficients must be finite")

    @classmethod
    def from_rows(cls, a_rows, b_rows) -> "PlanarField":
        degree = len(a_rows)
        if len(b_rows) != degree:
            raise DegreeMismatch("a and b must list the same number of degrees")
        return cls(degree, _padded(a_rows, degree), _padded(b_rows, degree))

    @classmethod
    def zero(cls, degree: int) -> "PlanarField":
        return cls(degree, np.zeros((degree, degree + 1)), np.zeros((degree, degree + 1)))

    @classmethod
    def from_vector(cls, degree: int, vec) -> "PlanarField":
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (coefficient_count(degree),):
            raise ValueError(
                f"flat vector for degree {degree} must have {coefficient_count(degree)} entries"
            )
        half = vec.size // 2
        a = np.zeros((degree, degree + 1))
        b = np.zeros((degree, degree + 1))
        pos = 0
        for k in range(1, degree + 1):
            a[k - 1, : k + 1] = vec[pos : pos + k + 1]
            b[k - 1, : k + 1] = vec[half + pos : half + pos + k + 1]
            pos += k + 1
        return cls(degree, a, b)

    def vector(self) -> np.ndarray:
        """Flat coefficient vector: all F rows by ascending degree, then all G rows."""
        parts_a = [self.a[k - 1, : k + 1] for k in range(1, self.degree + 1)]
        parts_b = [self.b[k - 1, : k + 1] for k in range(1, self.degree + 1)]
        return np.concatenate(parts_a + parts_b)

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector()))

    def eval_fg(self, x, y):
        """Evaluate (F, G) at points; broadcasts over array inputs."""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        ftot = np.zeros(np.broadcast(x, y).shape)
        gtot = np.zeros_like(ftot)
        for k in range(1, self.degree + 1):
            fk = np.zeros_like(ftot)
            gk = np.zeros_like(ftot)
            for i in range(k + 1):
                mono = x ** i * y ** (k - i)
                fk += self.a[k - 1, i] * mono
                gk += self.b[k - 1, i] * mono
            ftot += fk
            gtot += gk
        return ftot, gtot

    def to_json(self) -> str:
        payload = {
            "degree": self.degree,
            "a": [self.a[k - 1, : k + 1].tolist() for k in range(1, self.degree + 1)],
            "b": [self.b[k - 1, : k + 1].tolist() for k in range(1, self.degree + 1)],
        }
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "PlanarField":
        payload = json.loads(text)
        degree = int(payload["degree"])
        if len(payload["a"]) != degree or len(payload["b"]) != degree:
            raise DegreeMismatch("row count does not match the declared degree")
        return cls(degree, _padded(payload["a"], degree), _padded(payload["b"], degree))


@dataclass
class Ellipsoid:
    """Coefficient ellipsoid: sum_k (a^(k-1) |F_k|)^2 + (a^(k-1) |G_k|)^2 <= N^2."""

    a: float
    n_budget: float
    degree: int

    def __post_init__(self):
        if not (self.a > 0.0 and math.isfinite(self.a)):
            raise ValueError("disk scale a must be positive and finite")
        if not (self.n_budget > 0.0 and math.isfinite(self.n_budget)):
            raise ValueError("budget N must be positive and finite")
        if self.degree < 1:
            raise ValueError("degree must be at least 1")

    def axis_scales(self) -> np.ndarray:
        """Per-coordinate semi-axes of the ellipsoid in flat-vector order."""
        scales = []
        for k in range(1, self.degree + 1):
            scales.extend([self.n_budget * self.a ** (-(k - 1))] * (k + 1))
        return np.array(scales + scales)


def ellipsoid_membership(field: PlanarField, ell: Ellipsoid, slack: float = 0.0) -> bool:
    """True iff the field's weighted row norms fit inside the ellipsoid."""
    if field.degree != ell.degree:
        raise DegreeMismatch(
            f"field degree {field.degree} does not match ellipsoid degree {ell.degree}"
        )
    total = 0.0
    for k in range(1, field.degree + 1):
        wf = ell.a ** (k - 1) * np.linalg.norm(field.a[k - 1, : k + 1])
        wg = ell.a ** (k - 1) * np.linalg.norm(field.b[k - 1, : k + 1])
        total += wf * wf + wg * wg
    return total <= ell.n_budget ** 2 * (1.0 + slack)


def sample_ellipsoid(ell: Ellipsoid, seed: int) -> PlanarField:
    """Uniform sample from the coefficient ellipsoid.

    A uniform point of the unit ball (Gaussian direction, U^(1/dim) radius)
    is stretched along the per-degree semi-axes; linear images of uniform
    samples stay uniform.
    """
    rng = np.random.default_rng(seed)
    dim = coefficient_count(ell.degree)
    u = uniform_real_ball(rng, dim)
    return PlanarField.from_vector(ell.degree, u * ell.axis_scales())


def rescale_to_unit(field: PlanarField, a: float) -> PlanarField:
    """Change of variables (x, y) -> (x/a, y/a): degree-k rows gain a^(k-1).

    Maps a field in E(a, N) to the equivalent field in E(1, N); cycles in the
    disk of radius a/2 correspond to cycles of the result in radius 1/2.
    """
    if not (a > 0.0 and math.isfinite(a)):
        raise ValueError("scale a must be positive and finite")
    new_a = field.a.copy()
    new_b = field.b.copy()
    for k in range(1, field.degree + 1):
        new_a[k - 1] *= a ** (k - 1)
        new_b[k - 1] *= a ** (k - 1)
    return PlanarField(field.degree, new_a, new_b)


class PolarSystem:
    """Angular coefficient machinery for dr/dtheta = r P / (1 + Q).

    P(v, r, theta) = sum_k r^(k-1) f_k(v, theta) with
    f_k = F_k(cos, sin) cos + G_k(cos, sin) sin and
    g_k = -F_k(cos, sin) sin + G_k(cos, sin) cos. Both are complex-linear in
    the flat coefficient vector v, so complex v (needed for contour counts)
    evaluates through the identical formulas.
    """

    def __init__(self, degree: int, base_vector: np.ndarray | None = None):
        if degree < 1:
            raise ValueError("degree must be at least 1")
        self.degree = degree
        self.base_vector = (
            None if base_vector is None else np.asarray(base_vector)
        )

    def _resolve(self, v):
        if v is None:
            if self.base_vector is None:
                raise ValueError("no coefficient vector bound and none supplied")
            v = self.base_vector
        v = np.asarray(v)
        if v.shape != (coefficient_count(self.degree),):
            raise ValueError(
                f"coefficient vector must have {coefficient_count(self.degree)} entries"
            )
        return v.astype(np.complex128) if np.iscomplexobj(v) else v.astype(np.float64)

    def _rows(self, v):
        v = self._resolve(v)
        d = self.degree
        half = v.size // 2
        a_rows = []
        b_rows = []
        pos = 0
        for k in range(1, d + 1):
            a_rows.append(v[pos : pos + k + 1])
            b_rows.append(v[half + pos : half + pos + k + 1])
            pos += k + 1
        return a_rows, b_rows

    def angular_tables(self, theta: np.ndarray, v=None):
        """Tables (f_k(theta_j), g_k(theta_j)) of shape (len(theta), degree)."""
        theta = np.asarray(theta, dtype=np.float64)
        a_rows, b_rows = self._rows(v)
        dtype = np.complex128 if np.iscomplexobj(a_rows[0]) else np.float64
        d = self.degree
        c = np.cos(theta)
        s = np.sin(theta)
        cpow = np.empty((d + 1, theta.size))
        spow = np.empty((d + 1, theta.size))
        cpow[0] = 1.0
        spow[0] = 1.0
        for i in range(1, d + 1):
            cpow[i] = cpow[i - 1] * c
            spow[i] = spow[i - 1] * s
        fk = np.zeros((theta.size, d), dtype=dtype)
        gk = np.zeros((theta.size, d), dtype=dtype)
        for k in range(1, d + 1):
            mono = cpow[: k + 1] * spow[k::-1]  # row i: cos^i sin^(k-i)
            fcirc = a_rows[k - 1] @ mono
            gcirc = b_rows[k - 1] @ mono
            fk[:, k - 1] = fcirc * c + gcirc * s
            gk[:, k - 1] = -fcirc * s + gcirc * c
        return fk, gk

    def p_q(self, r, theta, v=None):
        """Evaluate (P, Q) with broadcasting; r may be complex."""
        theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
        fk, gk = self.angular_tables(theta, v)
        r = np.asarray(r)
        d = self.degree
        p = np.broadcast_to(fk[:, d - 1], np.broadcast(r, fk[:, d - 1]).shape).copy()
        q = np.broadcast_to(gk[:, d - 1], p.shape).copy()
        for k in range(d - 2, -1, -1):
            p = p * r + fk[:, k]
            q = q * r + gk[:, k]
        return p, q

    def ode_rhs(self, v=None):
        """Right-hand side theta, r -> r P/(1+Q) for adaptive integrators."""
        a_rows, b_rows = self._rows(v)
        d = self.degree

        def rhs(theta, r):
            c = math.cos(theta)
            s = math.sin(theta)
            p = 0.0
            q = 0.0
            for k in range(d, 0, -1):
                ci = np.array([c ** i * s ** (k - i) for i in range(k + 1)])
                fcirc = np.dot(a_rows[k - 1], ci)
                gcirc = np.dot(b_rows[k - 1], ci)
                fk = fcirc * c + gcirc * s
                gk = -fcirc * s + gcirc * c
                rk = r ** (k - 1)
                p = p + rk * fk
                q = q + rk * gk
            return r * p / (1.0 + q)

        return rhs


def polar_reduce(field: PlanarField) -> PolarSystem:
    """Polar form of the field; the field's own vector stays bound as default."""
    return PolarSystem(field.degree, field.vector())


def trig_norm_check(field: PlanarField, grid: int = 720) -> float:
    """Max over k and a theta grid of |F_k|, |G_k| on the unit circle, over |v|.

    The Cauchy-Schwarz bound with binomial weights keeps this ratio at or
    below 1 for every field; returns the observed ratio.
    """
    norm = field.norm()
    if norm == 0.0:
        raise ZeroField("trig norm ratio is undefined for the zero field")
    theta = np.linspace(0.0, 2.0 * math.pi, grid, endpoint=False)
    c = np.cos(theta)
    s = np.sin(theta)
    worst = 0.0
    for k in range(1, field.degree + 1):
        mono = np.stack([c ** i * s ** (k - i) for i in range(k + 1)])
        fvals = field.a[k - 1, : k + 1] @ mono
        gvals = field.b[k - 1, : k + 1] @ mono
        worst = max(worst, float(np.max(np.abs(fvals))), float(np.max(np.abs(gvals))))
    return worst / norm


def v0_field(degree: int, n_budget: float) -> PlanarField:
    """The calibration field F = (N/2) x, G = (N/2) y.

    Its polar form is exactly P = N/2, Q = 0, giving the closed-form orbit
    r(theta) = w exp(N theta / 2).
    """
    f = PlanarField.zero(degree)
    f.a[0, 1] = 0.5 * n_budget
    f.b[0, 0] = 0.5 * n_budget
    return f


def rigid_field(radial_coeffs) -> PlanarField:
    """Field x' = -y + x f(x^2+y^2), y' = x + y f(x^2+y^2).

    `radial_coeffs` are the ascending coefficients of f. The polar form is
    P = f(r^2), Q = 0, so limit cycles sit exactly at radii sqrt(root) for
    each positive root of f.
    """
    gamma = np.asarray(radial_coeffs, dtype=np.float64)
    if gamma.ndim != 1 or gamma.size == 0:
        raise ValueError("radial polynomial needs at least one coefficient")
    ell = gamma.size - 1
    degree = 2 * ell + 1
    f = PlanarField.zero(degree)
    for j in range(ell + 1):
        k = 2 * j + 1
        for i in range(j + 1):
            cji = math.comb(j, i)
            f.a[k - 1, 2 * i + 1] += gamma[j] * cji
            f.b[k - 1, 2 * i] += gamma[j] * cji
    return f


def rigid_field_from_roots(roots, scale: float) -> PlanarField:
    """Rigid field whose radial polynomial is scale * prod (u - root_i)."""
    roots = np.asarray(roots, dtype=np.float64)
    coeffs = np.poly(roots)[::-1] * scale  # ascending
    return rigid_field(coeffs)


def _compose_linear(row: np.ndarray, c00: float, c01: float, c10: float, c11: float) -> np.ndarray:
    """Coefficients of F_k(c00 u + c01 w, c10 u + c11 w) over u^p w^(k-p)."""
    k = row.size - 1
    out = np.zeros(k + 1)
    for i in range(k + 1):
        if row[i] == 0.0:
            continue
        # (c00 u + c01 w)^i expanded over u^p w^(i-p)
        first = np.array([math.comb(i, p) * c00 ** p * c01 ** (i - p) for p in range(i + 1)])
        m = k - i
        second = np.array([math.comb(m, q) * c10 ** q * c11 ** (m - q) for q in range(m + 1)])
        conv = np.convolve(first, second)
        out += row[i] * conv
    return out


def rotate_field(field: PlanarField, phi: float) -> PlanarField:
    """Field expressed in coordinates rotated by phi.

    The linear center part is rotation invariant; the perturbation rows
    transform so that the polar data shifts: f'_k(theta) = f_k(theta - phi).
    """
    c = math.cos(phi)
    s = math.sin(phi)
    out = PlanarField.zero(field.degree)
    for k in range(1, field.degree + 1):
        fa = _compose_linear(field.a[k - 1, : k + 1], c, s, -s, c)
        fb = _compose_linear(field.b[k - 1, : k + 1], c, s, -s, c)
        out.a[k - 1, : k + 1] = c * fa - s * fb
        out.b[k - 1, : k + 1] = s * fa + c * fb
    return out
