"""Built-in boundary data used by the verifiers and the CLI.

All are functions of the radial coordinate except the random band-limited
family, which is assembled on the frequency lattice. Box-sized plateaus
stand in for the constant function 1: a true constant cannot live in a
finite box, so comparisons against it are restricted to the central quarter
of the box via :func:`central_mask`.
"""

from __future__ import annotations

import numpy as np

from .field import FREQUENCY, Field, SpectralGrid, field_from_function, inverse_fourier

__all__ = [
    "gaussian",
    "bump",
    "plateau",
    "random_bandlimited",
    "central_mask",
    "make_builtin",
]


def _radius_sq(*coords):
    return sum(c * c for c in coords)


def gaussian(grid: SpectralGrid, width: float = 1.0) -> Field:
    """exp(-|x|^2 / (2 width^2))."""
    return field_from_function(grid, lambda *c: np.exp(-_radius_sq(*c) / (2.0 * width**2)))


def bump(grid: SpectralGrid, radius: float = 3.0) -> Field:
    """Smooth compactly supported bump, value 1 at the origin, support |x| < radius."""

    def f(*coords):
        q = _radius_sq(*coords) / radius**2
        out = np.zeros_like(q)
        inside = q < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - q[inside]))
        return out

    return field_from_function(grid, f)


def _smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step: exactly 0 for t <= 0, exactly 1 for t >= 1."""
    lo = np.zeros_like(t)
    hi = np.ones_like(t)
    mid = (t > 0) & (t < 1)
    tm = t[mid]
    a = np.exp(-1.0 / tm)
    b = np.exp(-1.0 / (1.0 - tm))
    out = np.where(t <= 0, lo, hi)
    out[mid] = a / (a + b)
    return out


def plateau(grid: SpectralGrid, half_width: float | None = None, taper: float | None = None) -> Field:
    """Tapered plateau: exactly 1 for |x| <= half_width, 0 beyond half_width + taper.

    Defaults occupy the central half of the box.
    """
    if half_width is None:
        half_width = grid.extent / 2.0
    if taper is None:
        taper = grid.extent / 8.0

    def f(*coords):
        r = np.sqrt(_radius_sq(*coords))
        return _smooth_step((half_width + taper - r) / taper)

    return field_from_function(grid, f)


def random_bandlimited(grid: SpectralGrid, cutoff: float = 3.0, seed: int = 0) -> Field:
    """Real random field with spectrum supported in |xi| <= cutoff, unit L2 norm."""
    rng = np.random.default_rng(seed)
    shape = grid.shape
    coef = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    coef[grid.frequency_norm() > cutoff] = 0.0
    # Hermitian symmetrization in the shifted layout: xi -> -xi is index
    # reversal followed by a roll (the lattice is asymmetric at -M/2).
    rev = coef[(slice(None, None, -1),) * grid.n]
    rev = np.roll(rev, 1, axis=tuple(range(grid.n)))
    coef = 0.5 * (coef + np.conj(rev))
    f = inverse_fourier(Field(grid, coef, FREQUENCY))
    w = grid.spacing**grid.n
    l2 = np.sqrt(w * np.sum(np.abs(f.values) ** 2))
    return f.with_values(f.values / l2)


def central_mask(grid: SpectralGrid, fraction: float = 0.25) -> np.ndarray:
    """Boolean mask of the centered sub-box of the given side fraction."""
    half = fraction * grid.extent
    meshes = grid.meshes()
    mask = np.ones(grid.shape, dtype=bool)
    for m in meshes:
        mask &= np.abs(m) <= half
    return mask


def make_builtin(grid: SpectralGrid, spec: dict) -> Field:
    """Build a field from a CLI input description, e.g. {"builtin": "gaussian", "width": 2}."""
    name = spec.get("builtin")
    if name == "gaussian":
        return gaussian(grid, width=float(spec.get("width", 1.0)))
    if name == "bump":
        return bump(grid, radius=float(spec.get("radius", 3.0)))
    if name == "plateau":
        hw = spec.get("half_width")
        tp = spec.get("taper")
        return plateau(
            grid,
            half_width=None if hw is None else float(hw),
            taper=None if tp is None else float(tp),
        )
    if name == "random-bandlimited":
        return random_bandlimited(
            grid, cutoff=float(spec.get("cutoff", 3.0)), seed=int(spec.get("seed", 0))
        )
    raise ValueError(f"unknown builtin input {name!r}")
