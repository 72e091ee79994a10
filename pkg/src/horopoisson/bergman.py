"""Weighted Bergman norms on tube slices and their Fourier-side identities.

Spatial weights on the level-a tube:

    w_spatial(y) = (2 pi)^{-n/2} / Gamma(alpha) * (1 - |y|^2/a^2)_+^{alpha-1} ,

Fourier-side weights on frequencies (s = Re lam, beta = alpha + n/2 - 1):

    w_fourier(r) = r^{2s} |K_lam(r)|^2 I_beta(2r) / (2r)^beta .

The squared tube norm of a level slice factorizes as a radial Gauss-Jacobi
rule (exact for the (1-r^2)^{alpha-1} endpoint weight) times a sphere rule
over directions, with the inner x-integral done by Parseval on each slice.
The Fourier side is a plain lattice sum of |fhat|^2 against the rescaled
weight; the two agree up to one constant per (n, alpha, lam), which is
calibrated once, frozen, and cross-checked against the closed-form
candidate ``2^{alpha+1-2s} / |Gamma(lam)|^2``.

Conventions: the Banach-norm and norm-limit verifiers use the unnormalized
transform (a factor |c(lam)| above the normalized one); each Report records
which convention it used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _scipy_special

from . import specfun
from .errors import QuadratureError
from .field import Field, fourier
from .poisson import Params, c_function, delta_l1, log_abs_multiplier
from .reporting import Report

__all__ = [
    "WeightSpec",
    "BergmanEvaluation",
    "spatial_weight",
    "fourier_weight",
    "fourier_weight_zero",
    "w_constant",
    "w_constant_closed_form",
    "admissibility",
    "admissibility_threshold",
    "bergman_norm",
    "fourier_side_raw",
    "level_isometry_constant",
    "level_isometry_constant_candidate",
    "banach_norm",
    "norm_limit",
    "ball_radial_rule",
    "sphere_rule",
]


@dataclass(frozen=True)
class WeightSpec:
    """Weight family selector: exponent alpha, side, and the parameter bundle."""

    alpha: float
    side: str
    params: Params

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.side not in ("spatial", "fourier"):
            raise ValueError(f"side must be 'spatial' or 'fourier', got {self.side!r}")


@dataclass(frozen=True)
class BergmanEvaluation:
    """Squared Bergman norm of one level slice."""

    a: float
    value: float
    method: str

    def __post_init__(self):
        if not (self.value >= 0 and math.isfinite(self.value)):
            raise ValueError(f"squared norm must be finite and >= 0, got {self.value}")


def spatial_weight(y, a: float, w: WeightSpec) -> float:
    """Rescaled tube weight at the point with imaginary part ``y``; 0 outside."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    r2 = float(np.sum(y * y)) / (a * a)
    if r2 >= 1.0:
        return 0.0
    n = w.params.n
    return (
        (2.0 * math.pi) ** (-n / 2.0)
        / float(np.real(specfun.gamma(w.alpha)))
        * (1.0 - r2) ** (w.alpha - 1.0)
    )


def _scaled_i_ratio(beta: float, z: np.ndarray) -> np.ndarray:
    """``exp(-z) I_beta(z) / z^beta`` without overflow; finite limit at 0.

    n = 1 with alpha < 1/2 puts beta in (-1/2, 0); the ratio stays regular.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.empty_like(z)
    small = z <= 15.0 + max(beta, 0.0)
    if np.any(small):
        out[small] = np.exp(-z[small]) * specfun.bessel_i_ratio(beta, z[small])
    if np.any(~small):
        zb = z[~small]
        if beta >= 0:
            ivals = specfun.bessel_i(beta, zb, scaled=True)
        else:
            m = -beta
            ivals = specfun.bessel_i(m, zb, scaled=True) + (
                2.0 / math.pi
            ) * math.sin(m * math.pi) * _scipy_special.kve(m, zb) * np.exp(-2.0 * zb)
        out[~small] = ivals / zb**beta
    return out


def fourier_weight(xi_norm, w: WeightSpec):
    """Fourier-side weight ``w_lam^alpha(|xi|)``; analytic limit at ``|xi| = 0``.

    Assembled from exponentially scaled Bessel factors so the ``exp(2r)``
    growth of ``I`` cancels the ``exp(-2r)`` decay of ``|K|^2`` exactly.
    """
    p = w.params
    s = p.s
    beta = w.alpha + p.n / 2.0 - 1.0
    r = np.atleast_1d(np.asarray(xi_norm, dtype=float))
    if np.any(r < 0):
        raise ValueError("xi_norm must be >= 0")
    out = np.empty_like(r)
    zero = r == 0
    if np.any(zero):
        out[zero] = fourier_weight_zero(w)
    pos = ~zero
    if np.any(pos):
        rp = r[pos]
        khat = np.abs(specfun.bessel_k(p.lam, rp, scaled=True))
        out[pos] = rp ** (2.0 * s) * khat**2 * _scaled_i_ratio(beta, 2.0 * rp)
    if np.isscalar(xi_norm) or np.asarray(xi_norm).ndim == 0:
        return float(out[0])
    return out.reshape(np.asarray(xi_norm).shape)


def fourier_weight_zero(w: WeightSpec) -> float:
    """Limit of the Fourier-side weight at 0, from the small-argument forms.

    ``r^lam K_lam(r) -> 2^{lam-1} Gamma(lam)`` and
    ``I_beta(z)/z^beta -> 2^{-beta}/Gamma(beta+1)`` give
    ``2^{2s-1-beta} |Gamma(lam)|^2 / Gamma(beta+1)``.
    """
    p = w.params
    beta = w.alpha + p.n / 2.0 - 1.0
    klim = abs(2.0 ** (p.lam - 1.0) * specfun.gamma(p.lam))
    return klim**2 * 2.0 ** (-beta) / float(np.real(specfun.gamma(beta + 1.0)))


def ball_radial_rule(n: int, alpha: float, m: int):
    """Nodes/weights for radial integrals over the unit ball with the tube weight.

    Returns ``(r_j, W_j)`` with ``sum W_j g(r_j)`` approximating
    ``\\int_0^1 r^{n-1} (1-r^2)^{alpha-1} g(r) dr`` (Gauss-Jacobi in r^2,
    exact for the endpoint singularity when alpha < 1).
    """
    x, wts = _scipy_special.roots_jacobi(m, alpha - 1.0, n / 2.0 - 1.0)
    u = 0.5 * (x + 1.0)
    scale = 0.5 * 2.0 ** (-(alpha + n / 2.0 - 1.0))
    return np.sqrt(u), wts * scale


def sphere_rule(n: int, count: int = 64):
    """Directions and weights summing to the surface of S^{n-1}.

    n=1: the two points. n=2: equispaced angles. n=3: Gauss-Legendre in the
    polar cosine times equispaced azimuths (polynomially exact well past
    order 17).
    """
    if n == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if n == 2:
        th = 2.0 * math.pi * np.arange(count) / count
        dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
        return dirs, np.full(count, 2.0 * math.pi / count)
    ct, cw = _scipy_special.roots_legendre(12)
    st = np.sqrt(1.0 - ct * ct)
    n_az = 24
    ph = 2.0 * math.pi * np.arange(n_az) / n_az
    dirs = []
    wts = []
    for c, s, wgt in zip(ct, st, cw):
        for f in ph:
            dirs.append([s * math.cos(f), s * math.sin(f), c])
            wts.append(wgt * 2.0 * math.pi / n_az)
    return np.asarray(dirs), np.asarray(wts)


def w_constant_closed_form(w: WeightSpec) -> float:
    """``(2^{-n/2} / Gamma(alpha + n/2))^{1/2}`` from the Beta integral."""
    n = w.params.n
    g = float(np.real(specfun.gamma(w.alpha + n / 2.0)))
    return math.sqrt(2.0 ** (-n / 2.0) / g)


def w_constant(w: WeightSpec) -> float:
    """Square root of the total weight mass, by quadrature.

    Cross-checked against the closed form; a mismatch beyond 1e-8 relative
    raises QuadratureError.
    """
    n = w.params.n
    r, wts = ball_radial_rule(n, w.alpha, 64)
    surface = 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
    mass = (2.0 * math.pi) ** (-n / 2.0) / float(np.real(specfun.gamma(w.alpha))) * surface * np.sum(wts)
    val = math.sqrt(mass)
    ref = w_constant_closed_form(w)
    if abs(val - ref) > 1e-8 * ref:
        raise QuadratureError(f"weight-mass quadrature {val} disagrees with closed form {ref}")
    return val


def _admissibility_value(w: WeightSpec, m: int) -> float:
    """Gauss-Jacobi evaluation of the admissibility integral at m radial nodes."""
    p = w.params
    r, wts = ball_radial_rule(p.n, w.alpha, m)
    surface = 2.0 * math.pi ** (p.n / 2.0) / math.gamma(p.n / 2.0)
    pref = (2.0 * math.pi) ** (-p.n / 2.0) / float(np.real(specfun.gamma(w.alpha))) * surface
    total = 0.0
    e1 = np.zeros(p.n)
    for rj, wj in zip(r, wts):
        e1[0] = rj
        total += wj * delta_l1(e1, p) ** 2
    return pref * total


def admissibility(w: WeightSpec, levels=(24, 48, 96, 192, 384), strict: bool = True) -> Report:
    """Finite-vs-divergent evidence for the weight admissibility integral.

    Evaluates the integral under geometric refinement of the radial
    Gauss-Jacobi rule. Verdicts: 'finite' when the refinements converge or
    their increments decay, 'divergent' when the increments grow,
    'at-threshold' when they are flat (logarithmic growth). The raw
    last/first growth ratio is reported as evidence alongside.
    """
    p = w.params
    rep = Report(
        command="admissibility",
        params={"n": p.n, "lam": p.lam, "alpha": w.alpha, "levels": list(levels)},
    )
    vals = np.array([_admissibility_value(w, m) for m in levels])
    rep.values["node_counts"] = list(levels)
    rep.values["values"] = vals.tolist()
    rep.values["last_over_first"] = float(vals[-1] / vals[0])

    incs = np.diff(vals)
    rel_last = abs(incs[-1]) / vals[-1]
    verdict = None
    if rel_last < 1e-7:
        verdict = "finite"
    else:
        if np.any(incs <= 0) and rel_last > 1e-6:
            if strict:
                raise QuadratureError("refinement trend is not monotone; verdict ambiguous")
            verdict = "finite"
        else:
            ratios = incs[1:] / incs[:-1]
            growth = float(np.mean(np.log2(np.abs(ratios))))
            rep.values["increment_growth_exponent"] = growth
            if growth > 0.02:
                verdict = "divergent"
            elif growth < -0.02:
                verdict = "finite"
            else:
                verdict = "at-threshold"
    rep.values["verdict"] = verdict
    if verdict == "finite":
        rep.values["d_lambda"] = float(vals[-1])
    rep.flag("refinement-trend-classified", verdict in ("finite", "divergent", "at-threshold"),
             kind="self-convergence", detail=verdict)
    return rep


def admissibility_threshold(
    p: Params, alpha_lo: float = 0.05, alpha_hi: float = 3.0, iterations: int = 10
) -> float:
    """Bisection in alpha for the finite/divergent transition of the integral.

    Classifies each alpha by the sign of the increment-growth exponent under
    refinement (grows: divergent, decays: finite), which flips exactly at
    the admissibility threshold.
    """

    def is_divergent(alpha: float) -> bool:
        rep = admissibility(WeightSpec(alpha, "spatial", p), strict=False)
        return rep.values["verdict"] == "divergent"

    lo, hi = alpha_lo, alpha_hi
    if not is_divergent(lo):
        return lo
    if is_divergent(hi):
        return hi
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if is_divergent(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _slice_norms_sq(f: Field, a: float, p: Params, y_points: np.ndarray) -> np.ndarray:
    """Parseval values of ``\\int |phi_a(x + iy)|^2 dx`` for a batch of y vectors.

    Works on log-scale so the shift factor exp(-2 y.xi) never overflows
    against the transform's decay.
    """
    g = f.grid
    fhat = fourier(f)
    with np.errstate(divide="ignore"):
        base = 2.0 * np.log(np.abs(fhat.values)) + 2.0 * log_abs_multiplier(
            p, a, g.frequency_norm()
        )
    finite = np.isfinite(base)
    if not np.any(finite):
        return np.zeros(len(y_points))
    keep = finite & (base > np.max(base[finite]) - 600.0)
    coords = np.stack([m[keep] for m in g.frequency_meshes()])  # (n, K)
    base = base[keep]
    cell = g.frequency_spacing**g.n
    out = np.empty(len(y_points))
    chunk = max(1, int(4e6 // max(coords.shape[1], 1)))
    for i0 in range(0, len(y_points), chunk):
        ys = y_points[i0 : i0 + chunk]  # (B, n)
        expo = base[None, :] - 2.0 * ys @ coords
        out[i0 : i0 + chunk] = cell * np.exp(expo).sum(axis=1)
    return out


def bergman_norm(
    f: Field,
    a: float,
    w: WeightSpec,
    method: str = "tube-quadrature",
    convention: str = "normalized",
    radial_nodes: int = 64,
) -> BergmanEvaluation:
    """Squared weighted Bergman norm of the level-a slice of the transform of f.

    tube-quadrature: x-integral per slice by Parseval, y-integral by radial
    Gauss-Jacobi (endpoint exponent alpha-1) times a sphere rule.
    fourier-side: lattice sum of |fhat|^2 against the rescaled Fourier
    weight, scaled by the frozen level-isometry constant.
    """
    p = w.params
    if method == "tube-quadrature":
        r, wts = ball_radial_rule(p.n, w.alpha, radial_nodes)
        dirs, dw = sphere_rule(p.n)
        pts = (a * r[:, None, None]) * dirs[None, :, :]  # (J, S, n)
        flat = pts.reshape(-1, p.n)
        svals = _slice_norms_sq(f, a, p, flat).reshape(len(r), len(dirs))
        pref = a**p.n * (2.0 * math.pi) ** (-p.n / 2.0) / float(np.real(specfun.gamma(w.alpha)))
        value = pref * float(np.sum(wts[:, None] * dw[None, :] * svals))
    elif method == "fourier-side":
        const = level_isometry_constant(w)
        value = const * fourier_side_raw(f, a, w)
    else:
        raise ValueError(f"unknown method {method!r}")
    if convention == "unnormalized":
        value *= abs(c_function(p)) ** 2
    elif convention != "normalized":
        raise ValueError(f"unknown convention {convention!r}")
    return BergmanEvaluation(a=a, value=value, method=method)


def fourier_side_raw(f: Field, a: float, w: WeightSpec) -> float:
    """``a^{2n-2s} \\int |fhat|^2 w_lam^alpha(a |xi|) dxi`` on the lattice (no constant)."""
    p = w.params
    g = f.grid
    fhat = fourier(f)
    dens = np.abs(fhat.values) ** 2
    keep = dens > np.max(dens) * 1e-280
    wvals = fourier_weight(a * g.frequency_norm()[keep], w)
    cell = g.frequency_spacing**g.n
    return a ** (2.0 * p.n - 2.0 * p.s) * cell * float(np.sum(dens[keep] * wvals))


_CONSTANT_REGISTRY: dict = {}

_CALIBRATION_GRIDS = {1: (16.0, 1024), 2: (16.0, 128), 3: (12.0, 32)}


def level_isometry_constant_candidate(w: WeightSpec) -> float:
    """Closed-form candidate ``2^{alpha+1-2s} / |Gamma(lam)|^2``.

    Derived by equating the level-zero limit of the Fourier side,
    ``c * w(0) * |f|^2``, with the norm-limit target ``w_const^2 |f|^2``;
    the calibrated constant must match it for real lam.
    """
    p = w.params
    return 2.0 ** (w.alpha + 1.0 - 2.0 * p.s) / abs(specfun.gamma(p.lam)) ** 2


def level_isometry_constant(w: WeightSpec, spread_tol: float = 1e-4) -> float:
    """Frozen tube/fourier ratio for (n, alpha, lam), calibrated on first use.

    Median ratio over a small Gaussian calibration family; the relative
    spread must stay below ``spread_tol`` or calibration fails.
    """
    p = w.params
    key = (p.n, w.alpha, p.lam)
    if key in _CONSTANT_REGISTRY:
        return _CONSTANT_REGISTRY[key]
    from .builtins import gaussian
    from .field import SpectralGrid

    extent, m = _CALIBRATION_GRIDS[p.n]
    grid = SpectralGrid(p.n, extent, m)
    ratios = []
    for width in (0.8, 1.0, 1.25):
        f = gaussian(grid, width=width)
        for a in (0.5, 1.0, 2.0):
            tube = bergman_norm(f, a, w, method="tube-quadrature").value
            raw = fourier_side_raw(f, a, w)
            ratios.append(tube / raw)
    ratios = np.asarray(ratios)
    spread = float((ratios.max() - ratios.min()) / np.median(ratios))
    if spread > spread_tol:
        raise QuadratureError(
            f"level-isometry calibration spread {spread} exceeds {spread_tol}"
        )
    const = float(np.median(ratios))
    _CONSTANT_REGISTRY[key] = const
    return const


def banach_norm(f: Field, w: WeightSpec, a_grid, convention: str = "unnormalized") -> Report:
    """Sup over levels of ``a^{s-n} |phi_a|_B`` plus the full trace.

    The isometry-normalized ratio divides by ``w_const * |c(lam)|`` (and by
    |f|_2), so for real lam and admissible alpha it approaches 1 as the
    grid's smallest level goes to 0.
    """
    p = w.params
    a_grid = sorted(float(a) for a in a_grid)
    if a_grid[-1] / a_grid[0] < 99.0:
        raise ValueError("a_grid must span at least two decades")
    rep = Report(
        command="banach-norm",
        params={"n": p.n, "lam": p.lam, "alpha": w.alpha, "a_grid": a_grid},
        convention=f"{convention} transform",
    )
    s = p.s
    trace = []
    for a in a_grid:
        ev = bergman_norm(f, a, w, method="tube-quadrature", convention=convention)
        trace.append(a ** (s - p.n) * math.sqrt(ev.value))
    trace = np.asarray(trace)
    rep.values["a"] = a_grid
    rep.values["trace"] = trace.tolist()
    idx = int(np.argmax(trace))
    rep.values["sup"] = float(trace[idx])
    rep.values["sup_attained_at"] = a_grid[idx]
    w2 = f.grid.spacing ** f.grid.n
    l2 = math.sqrt(float(np.sum(np.abs(f.values) ** 2) * w2))
    denom = w_constant(w) * (abs(c_function(p)) if convention == "unnormalized" else 1.0)
    rep.values["isometry_ratio"] = float(trace[idx]) / (denom * l2)
    rep.values["input_l2"] = l2
    return rep


def norm_limit(f: Field, w: WeightSpec, a_ray, final_tol: float = 2e-2) -> Report:
    """Normalized Bergman trace against the L2 norm of the boundary datum.

    Uses the unnormalized transform; the trace
    ``a^{s-n} |phi_a|_B / (w_const |c(lam)|)`` must approach ``|f|_2``
    with eventually decreasing deviation as the level drops to 0. Also
    reports the sup-vs-limit gap over the ray (the norm-sup identity holds
    for real lam; for complex lam the gap is only measured).
    """
    p = w.params
    a_ray = [float(a) for a in a_ray]
    if any(b >= a for a, b in zip(a_ray, a_ray[1:])):
        raise ValueError("a_ray must be strictly decreasing")
    rep = Report(
        command="norm-limit",
        params={"n": p.n, "lam": p.lam, "alpha": w.alpha, "a_ray": a_ray},
        convention="unnormalized transform; trace scaled by 1/(w_const |c|)",
    )
    s = p.s
    denom = w_constant(w) * abs(c_function(p))
    w2 = f.grid.spacing ** f.grid.n
    l2 = math.sqrt(float(np.sum(np.abs(f.values) ** 2) * w2))
    trace = []
    for a in a_ray:
        ev = bergman_norm(f, a, w, method="tube-quadrature", convention="unnormalized")
        trace.append(a ** (s - p.n) * math.sqrt(ev.value) / denom)
    trace = np.asarray(trace)
    dev = np.abs(trace - l2) / l2
    rep.values["a"] = a_ray
    rep.values["trace"] = trace.tolist()
    rep.values["deviation"] = dev.tolist()
    rep.values["input_l2"] = l2
    tail = dev[-5:] if len(dev) >= 5 else dev
    rep.flag(
        "deviation-eventually-decreasing",
        bool(np.all(np.diff(tail) < 0)),
        kind="self-convergence",
        detail=tail.tolist(),
    )
    rep.check("final-deviation", float(dev[-1]), 0.0, final_tol, kind="self-convergence", relative=False)
    rep.values["sup_trace"] = float(np.max(trace))
    rep.values["sup_vs_limit_gap"] = float((np.max(trace) - trace[-1]) / l2)
    return rep
