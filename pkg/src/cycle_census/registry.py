"""Built-in parametric families and family sequences.

Every family here is an explicit, closed-form (or flow-defined) instance of
the bounded holomorphic class used by the zero-count statistics: a linear
slice through tuples of disk maps (hyperplane sections, including Blaschke
components), simple calibration families (constant, monomial, a two-valued
root-in/root-out family), and the first coordinate of a holomorphic ODE flow
solved by successive approximations along rays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidGeometry, NonConvergence, RadiusViolation, SolverFailure
from .families import ParametricFamily


def _constant_family(params: dict) -> ParametricFamily:
    """f_v(z) = v1: zero count is 0 for every nonzero parameter."""
    s = float(params.get("s", 0.5))

    def evaluate(v, z):
        z = np.asarray(z, dtype=np.complex128)
        return np.full(z.shape, v[0], dtype=np.complex128)

    def evaluate_batch(vs, z):
        z = np.asarray(z, dtype=np.complex128)
        return np.broadcast_to(np.asarray(vs)[:, :1], (len(vs), z.size)).astype(np.complex128)

    return ParametricFamily(
        evaluate=evaluate,
        param_dim=1,
        bound_m=2.0,
        param_radius=2.0,
        disk_radius=s,
        label="constant",
        evaluate_batch=evaluate_batch,
        witness_v=np.array([1.0 + 0.0j]),
        witness_z=0.0 + 0.0j,
    )


def _monomial_family(params: dict) -> ParametricFamily:
    """f_v(z) = v1 (z/s)^m: exactly m zeros (at the origin) for v1 != 0."""
    m = int(params.get("m", 2))
    s = float(params.get("s", 0.5))
    if m < 1:
        raise InvalidGeometry("monomial power m must be at least 1")
    if not (0.0 < s < 1.0):
        raise InvalidGeometry("disk radius s must lie in (0, 1)")
    scale = s ** (-m)

    def evaluate(v, z):
        z = np.asarray(z, dtype=np.complex128)
        return v[0] * scale * z ** m

    def evaluate_batch(vs, z):
        z = np.asarray(z, dtype=np.complex128)
        return np.asarray(vs)[:, :1] * (scale * z ** m)[None, :]

    return ParametricFamily(
        evaluate=evaluate,
        param_dim=1,
        bound_m=2.0 * scale,
        param_radius=2.0,
        disk_radius=s,
        label=f"monomial(m={m})",
        evaluate_batch=evaluate_batch,
        witness_v=np.array([1.0 + 0.0j]),
        witness_z=complex(s * (1.0 - 1e-9)),
    )


def _bernoulli_family(params: dict) -> ParametricFamily:
    """f_v(z) = z - sqrt(2) s v1: the root lies in the closed s-disk with
    probability exactly 1/2 under the uniform unit-disk parameter, so the
    zero count is a fair two-valued coin. Used as the classical CLT oracle.
    """
    s = float(params.get("s", 0.5))
    if not (0.0 < s < 1.0):
        raise InvalidGeometry("disk radius s must lie in (0, 1)")
    shift = math.sqrt(2.0) * s

    def evaluate(v, z):
        z = np.asarray(z, dtype=np.complex128)
        return z - shift * v[0]

    def evaluate_batch(vs, z):
        z = np.asarray(z, dtype=np.complex128)
        return z[None, :] - shift * np.asarray(vs)[:, :1]

    return ParametricFamily(
        evaluate=evaluate,
        param_dim=1,
        bound_m=1.0 + 2.0 * shift,
        param_radius=2.0,
        disk_radius=s,
        label=f"bernoulli(s={s})",
        evaluate_batch=evaluate_batch,
        witness_v=np.array([-1.0 + 0.0j]),
        witness_z=complex(s * (1.0 - 1e-9)),
    )


def blaschke_product(zeros) -> "callable":
    """B(z) = prod (z - a_j) / (1 - conj(a_j) z); modulus below 1 on the disk."""
    zeros = np.asarray(zeros, dtype=np.complex128)
    if np.any(np.abs(zeros) >= 1.0):
        raise InvalidGeometry("Blaschke zeros must lie strictly inside the unit disk")

    def b(z):
        z = np.asarray(z, dtype=np.complex128)
        out = np.ones_like(z)
        for a in zeros:
            out = out * (z - a) / (1.0 - np.conj(a) * z)
        return out

    return b


def _blaschke_hyperplane_family(params: dict) -> ParametricFamily:
    """Hyperplane section f_a(z) = a1 g1(z) + ... + aN gN(z) + a_{N+1}.

    The components g form a holomorphic map of the unit disk into the open
    unit ball: an optional linear piece c z and an optional scaled Blaschke
    product. Bound M = 3 over the parameter ball of radius 2 holds because
    |f_a| <= |a| sqrt(sum |g_i|^2 + 1) < 2 sqrt(2).
    """
    s = float(params.get("s", 2.0 / 3.0))
    c = params.get("c", 0.5)
    zeros = params.get("blaschke_zeros", None)
    sigma = float(params.get("blaschke_scale", 0.6))
    if not (0.0 < s < 1.0):
        raise InvalidGeometry("disk radius s must lie in (0, 1)")

    components = []
    names = []
    if c is not None and c != 0:
        c = complex(c)
        if abs(c) > 1.0:
            raise InvalidGeometry("linear coefficient c must have modulus at most 1")
        components.append(lambda z, c=c: c * z)
        names.append(f"{c:g}*z" if c.imag == 0 else "c*z")
    if zeros is not None and len(zeros) > 0:
        if not (0.0 < sigma <= 1.0):
            raise InvalidGeometry("Blaschke scale must lie in (0, 1]")
        b = blaschke_product(zeros)
        components.append(lambda z, b=b, sg=sigma: sg * b(z))
        names.append(f"{sigma:g}*B{len(zeros)}")
    if not components:
        raise InvalidGeometry("hyperplane family needs at least one component")

    # pointwise membership in the open unit ball: sum |g_i(z)|^2 < 1 on D_1
    probe = 0.999 * np.exp(1j * np.linspace(0.0, 2.0 * math.pi, 256, endpoint=False))
    total = np.zeros(probe.shape)
    for g in components:
        total = total + np.abs(g(probe)) ** 2
    if float(np.max(total)) >= 1.0:
        raise InvalidGeometry(
            "component moduli exceed the unit ball on the disk; rescale c or the Blaschke factor"
        )

    n_comp = len(components)
    dim = n_comp + 1

    def rows(z):
        z = np.asarray(z, dtype=np.complex128)
        table = np.empty((dim, z.size), dtype=np.complex128)
        for i, g in enumerate(components):
            table[i] = g(z)
        table[n_comp] = 1.0
        return table

    def evaluate(v, z):
        z = np.asarray(z, dtype=np.complex128)
        return (np.asarray(v, dtype=np.complex128) @ rows(z)).reshape(z.shape)

    def evaluate_batch(vs, z):
        return np.asarray(vs, dtype=np.complex128) @ rows(z)

    witness = np.zeros(dim, dtype=np.complex128)
    witness[-1] = 1.0
    return ParametricFamily(
        evaluate=evaluate,
        param_dim=dim,
        bound_m=3.0,
        param_radius=2.0,
        disk_radius=s,
        label=f"blaschke-hyperplane[{'+'.join(names)}]",
        evaluate_batch=evaluate_batch,
        witness_v=witness,
        witness_z=0.0 + 0.0j,
    )


@dataclass
class FlowRhs:
    """Right-hand side f(z, x) of the holomorphic ODE system x' = f(z, x).

    kind: "zero" (f = 0), "shift" (f_i = x_{i+1}, f_N = 0: the system whose
    solutions have vanishing N-th derivative, i.e. polynomials of degree
    below N), or "linear" (f = A x for a fixed matrix A).
    """

    kind: str
    dim: int
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidGeometry("state dimension must be at least 1")
        if self.kind not in ("zero", "shift", "linear"):
            raise InvalidGeometry(f"unknown rhs kind {self.kind!r}")
        if self.kind == "linear":
            if self.matrix is None:
                raise InvalidGeometry("linear rhs needs a matrix")
            self.matrix = np.asarray(self.matrix, dtype=np.complex128)
            if self.matrix.shape != (self.dim, self.dim):
                raise InvalidGeometry(f"matrix must be {self.dim}x{self.dim}")

    def bounds(self, r: float) -> tuple[float, float]:
        """(K, K1): range bound over B(0, r) and the Jacobian norm bound."""
        if self.kind == "zero":
            return 0.0, 0.0
        if self.kind == "shift":
            return r, 1.0
        a2 = float(np.linalg.norm(self.matrix, 2))
        return a2 * r, a2

    def apply(self, x: np.ndarray) -> np.ndarray:
        """f(z, x) for the autonomous kinds handled here; x has shape (..., N)."""
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "shift":
            out = np.empty_like(x)
            out[..., :-1] = x[..., 1:]
            out[..., -1] = 0.0
            return out
        return x @ self.matrix.T


def flow_radius(rhs: FlowRhs, r: float) -> float:
    """Convergence radius R = min(r/4K, 1/K1, 1) of the ray-wise iteration."""
    k, k1 = rhs.bounds(r)
    candidates = [1.0]
    if k > 0.0:
        candidates.append(r / (4.0 * k))
    if k1 > 0.0:
        candidates.append(1.0 / k1)
    return min(candidates)


def _cumsimp_axis1(y: np.ndarray, h: float) -> np.ndarray:
    """Cumulative Simpson along axis 1 (odd point count), all axes batched."""
    if y.shape[1] % 2 == 0:
        raise ValueError("ray grid must have an odd number of points")
    out = np.zeros_like(y)
    seg = (h / 3.0) * (y[:, 0:-2:2] + 4.0 * y[:, 1:-1:2] + y[:, 2::2])
    out[:, 2::2] = np.cumsum(seg, axis=1)
    out[:, 1::2] = out[:, 0:-2:2] + (h / 12.0) * (
        5.0 * y[:, 0:-2:2] + 8.0 * y[:, 1:-1:2] - y[:, 2::2]
    )
    return out


def ode_flow_family(
    rhs: FlowRhs,
    r: float = 1.0,
    t: float = 0.2,
    n_tau: int = 128,
    tol: float = 1e-12,
    max_iter: int = 120,
) -> ParametricFamily:
    """First coordinate of the ODE flow as a normalized analytic family.

    The initial value v ranges over B(0, 3r/4) and the flow x(z, v) is built
    by successive approximations x_{n+1} = v + int_0^z f(w, x_n(w)) dw along
    the ray from 0 to z, convergent for |z| < R = min(r/4K, 1/K1, 1). The
    returned family is rescaled to the standard frame: parameter u = v/(r/2)
    over the ball of radius 3/2, disk variable z~ = z/R over the unit disk,
    values x_1/(r/2), bound M = 2 with the witness x_1(0, v) = v_1. Zeros of
    the slice in the closed (t/R)-disk are zeros of x_1(., v) in the closed
    t-disk. Raises RadiusViolation unless t < R.
    """
    if r <= 0.0:
        raise InvalidGeometry("parameter scale r must be positive")
    big_r = flow_radius(rhs, r)
    if not (0.0 < t < big_r):
        raise RadiusViolation(
            f"counting radius t={t} must be below the convergence radius R={big_r:.4f}"
        )
    if n_tau % 2 != 0 or n_tau < 2:
        raise InvalidGeometry("n_tau must be an even panel count")
    half = 0.5 * r
    dim = rhs.dim
    tau = np.linspace(0.0, 1.0, n_tau + 1)
    h = tau[1] - tau[0]

    def evaluate(u, z):
        u = np.asarray(u, dtype=np.complex128)
        if u.shape != (dim,):
            raise InvalidGeometry(f"parameter must have {dim} entries")
        z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
        v = half * u
        zr = big_r * z  # physical disk variable
        x = np.broadcast_to(v, (z.size, tau.size, dim)).copy()
        zcol = zr[:, None, None]
        for _ in range(max_iter):
            integrand = rhs.apply(x) * zcol
            x_new = v + _cumsimp_axis1(integrand, h)
            diff = float(np.max(np.abs(x_new - x)))
            x = x_new
            if not math.isfinite(diff):
                raise SolverFailure("flow iteration produced nonfinite values")
            if diff < tol:
                break
        else:
            raise NonConvergence(
                f"flow iteration did not reach {tol} within {max_iter} steps"
            )
        return x[:, -1, 0] / half

    witness = np.zeros(dim, dtype=np.complex128)
    witness[0] = 1.0
    return ParametricFamily(
        evaluate=evaluate,
        param_dim=dim,
        bound_m=2.0,
        param_radius=1.5,
        disk_radius=t / big_r,
        label=f"ode-flow({rhs.kind}, N={dim}, t={t:g})",
        witness_v=witness,
        witness_z=0.0 + 0.0j,
    )


def _ode_flow_from_params(params: dict) -> ParametricFamily:
    rhs = FlowRhs(
        kind=params.get("rhs", "shift"),
        dim=int(params.get("dim", 3)),
        matrix=np.asarray(params["matrix"], dtype=np.complex128)
        if params.get("matrix") is not None
        else None,
    )
    return ode_flow_family(
        rhs,
        r=float(params.get("r", 1.0)),
        t=float(params.get("t", 0.2)),
        n_tau=int(params.get("n_tau", 128)),
    )


_BUILDERS = {
    "constant": _constant_family,
    "monomial": _monomial_family,
    "bernoulli": _bernoulli_family,
    "blaschke-hyperplane": _blaschke_hyperplane_family,
    "ode-flow": _ode_flow_from_params,
}

DEFAULT_BLASCHKE_ZEROS = (0.3 + 0.0j, -0.25 + 0.2j)


def list_families() -> list[str]:
    return sorted(_BUILDERS)


def build_family(name: str, params: dict | None = None) -> ParametricFamily:
    """Construct a registry family by name with a JSON-style parameter block."""
    if name not in _BUILDERS:
        raise InvalidGeometry(f"unknown family {name!r}; known: {', '.join(list_families())}")
    return _BUILDERS[name](dict(params or {}))


def build_family_sequence(name: str, count: int, params: dict | None = None):
    """Sequence of families f^(1), ..., f^(count) for the limit theorems.

    Stationary names (constant, monomial, bernoulli, ode-flow) repeat one
    family object, which downstream moment calibration can cache. The
    blaschke-hyperplane sequence rotates its Blaschke zeros through an
    8-step cycle so consecutive indices carry genuinely different (but
    uniformly bounded) families, as in the hyperplane-section example.
    """
    if count < 1:
        raise InvalidGeometry("sequence length must be at least 1")
    params = dict(params or {})
    if name == "blaschke-hyperplane":
        base = np.asarray(
            params.get("blaschke_zeros", DEFAULT_BLASCHKE_ZEROS), dtype=np.complex128
        )
        out = []
        cycle = []
        for j in range(8):
            p = dict(params)
            p["blaschke_zeros"] = (base * np.exp(2j * math.pi * j / 8.0)).tolist()
            fam = _blaschke_hyperplane_family(p)
            fam.label = f"{fam.label}#rot{j}"
            cycle.append(fam)
        for k in range(count):
            out.append(cycle[k % 8])
        return out
    fam = build_family(name, params)
    return [fam] * count
