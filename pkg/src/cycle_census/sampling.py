"""Seed mixing and uniform ball samplers used by every randomized component.

All randomness in the package flows through numpy Generators seeded with
64-bit integers produced by :func:`mix_seed`, so per-sample work is a pure
function of (master_seed, index) and parallel schedules cannot change results.
"""

from __future__ import annotations

import numpy as np

# splitmix64 constants; the standard finalizer gives well-mixed 64-bit streams
# from (master, index) pairs without sequential state.
_GOLDEN = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


def mix_seed(master_seed: int, index: int) -> int:
    """Counter-based 64-bit seed for sample `index` under `master_seed`."""
    z = (int(master_seed) + (int(index) + 1) * _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def rng_for(master_seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(mix_seed(master_seed, index))


def uniform_real_ball(rng: np.random.Generator, dim: int, radius: float = 1.0) -> np.ndarray:
    """Uniform point in the closed real ball of the given dimension.

    Gaussian direction times a U^(1/dim) radial factor; the density is exactly
    uniform on the ball, not just on its surface.
    """
    if dim < 1:
        raise ValueError("dim must be positive")
    g = rng.standard_normal(dim)
    norm = np.linalg.norm(g)
    while norm == 0.0:  # probability zero, but keep the map total
        g = rng.standard_normal(dim)
        norm = np.linalg.norm(g)
    r = rng.random() ** (1.0 / dim)
    return (radius * r / norm) * g


def uniform_complex_ball(rng: np.random.Generator, dim: int, radius: float = 1.0) -> np.ndarray:
    """Uniform point in the closed complex ball (real dimension 2 * dim)."""
    x = uniform_real_ball(rng, 2 * dim, radius)
    return x[:dim] + 1j * x[dim:]


def sobol_complex_ball(n_points: int, dim: int, seed: int = 0) -> np.ndarray:
    """Quasi-random points filling the closed complex unit ball.

    Sobol points in the unit cube mapped through the Gaussian-direction /
    radial-power transform, preserving low-discrepancy coverage of the ball.
    Used for witness searches, where only coverage matters.
    """
    from scipy.stats import qmc
    from scipy.special import ndtri

    d = 2 * dim
    eng = qmc.Sobol(d + 1, scramble=True, seed=seed)
    u = eng.random(n_points)
    # clip away exact 0/1 before the Gaussian quantile transform
    u = np.clip(u, 2 ** -32, 1 - 2 ** -32)
    g = ndtri(u[:, :d])
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    r = u[:, d:] ** (1.0 / d)
    pts = g / norms * r
    return pts[:, :dim] + 1j * pts[:, dim:]
