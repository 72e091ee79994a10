"""Special functions behind the kernel formulas.

Self-contained binary64 evaluation of

* the Gamma function for complex argument (Lanczos approximation with
  reflection for the left half-plane),
* the modified Bessel function of the first kind ``I_nu`` for real order
  ``nu >= 0`` and real argument ``r > 0``,
* the Macdonald function ``K_lam`` for complex order and real argument
  ``r > 0``, via trapezoidal quadrature of the cosh-integral
  ``K_lam(r) = \\int_0^\\infty exp(-r cosh t) cosh(lam t) dt``,
* the Segura ratio chain
  ``I_{nu+1/2}(r)/I_{nu-1/2}(r) < r/(nu + sqrt(nu^2+r^2))
  <= K_{nu-1/2}(r)/K_{nu+1/2}(r)``
  (Segura 2011, J. Math. Anal. Appl. 374, Thm 1.1).

Exponentially scaled variants (``exp(-r) I_nu(r)``, ``exp(r) K_lam(r)``)
are available through the ``scaled`` flag; downstream quadratic forms rely
on them to avoid overflow.

All functions are pure; arrays are accepted where evaluation on a lattice
is the common case.
"""

from __future__ import annotations

import cmath
import math

import numpy as np
from scipy import special as _sp

from .errors import ConvergenceError, DomainError, PoleError

__all__ = [
    "MAX_MACDONALD_REAL_ORDER",
    "gamma",
    "bessel_i",
    "bessel_i_ratio",
    "bessel_k",
    "macdonald_integral",
    "segura_check",
    "SeguraResult",
]

# Largest |Re(order)| admitted for Macdonald evaluation; beyond this the
# cosh-integral exponent can exceed binary64 range at small arguments.
MAX_MACDONALD_REAL_ORDER = 50.0

# Lanczos approximation, g = 7, 9 coefficients (Godfrey/Pugh set).
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_POLE_TOL = 1e-12


def _lanczos_gamma_right(z: complex) -> complex:
    """Lanczos evaluation valid for Re z >= 0.5."""
    zm1 = z - 1.0
    acc = _LANCZOS_COEF[0]
    for k in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[k] / (zm1 + k)
    t = zm1 + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (zm1 + 0.5) * cmath.exp(-t) * acc


def gamma(z: complex) -> complex:
    """Gamma function for complex ``z``.

    Uses the Lanczos rational approximation in the right half-plane and the
    reflection formula ``Gamma(z) Gamma(1-z) = pi / sin(pi z)`` for
    ``Re z < 0.5``.

    Raises
    ------
    PoleError
        If ``z`` is within ``1e-12`` of a non-positive integer.
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"gamma argument must be finite, got {z}")
    if z.real <= 0.5:
        nearest = round(z.real)
        if nearest <= 0 and abs(z - nearest) < _POLE_TOL:
            raise PoleError(f"gamma pole at non-positive integer near {z}")
        # Reflection: Gamma(z) = pi / (sin(pi z) Gamma(1 - z)).
        return math.pi / (cmath.sin(math.pi * z) * _lanczos_gamma_right(1.0 - z))
    return _lanczos_gamma_right(z)


def _bessel_i_series(nu: float, r: np.ndarray, scaled: bool) -> np.ndarray:
    """Ascending series; all terms positive, no cancellation."""
    half = 0.5 * r
    # Leading term (r/2)^nu / Gamma(nu+1), in log form to stay in range.
    with np.errstate(divide="ignore"):
        log_lead = nu * np.log(half) - math.lgamma(nu + 1.0)
    term = np.exp(log_lead)
    if nu == 0.0:
        term = np.where(r == 0.0, 1.0, term)
    total = term.copy()
    q = half * half
    for k in range(1, 400):
        term = term * q / (k * (nu + k))
        total += term
        if np.all(term <= 1e-18 * total):
            break
    else:  # pragma: no cover - series always terminates well before 400
        raise ConvergenceError("bessel_i ascending series did not converge")
    if scaled:
        return total * np.exp(-r)
    return total


def _bessel_i_integral(nu: float, r: np.ndarray, scaled: bool) -> np.ndarray:
    """DLMF 10.32.4: cosine integral plus the sin(nu pi) cosh correction."""
    n_theta = 512
    theta = (np.arange(n_theta + 1) * (math.pi / n_theta))[None, :]
    rr = r[:, None]
    # exp(r (cos(theta) - 1)) is the scaled integrand, bounded by 1.
    main = np.exp(rr * (np.cos(theta) - 1.0)) * np.cos(nu * theta)
    w = np.full(n_theta + 1, math.pi / n_theta)
    w[0] *= 0.5
    w[-1] *= 0.5
    out = main @ w / math.pi

    s = math.sin(nu * math.pi)
    if s != 0.0:
        r_min = float(np.min(r))
        t_max = math.acosh(1.0 + (760.0 / max(r_min, 1e-300)))
        n_t = 512
        t = (np.arange(n_t + 1) * (t_max / n_t))[None, :]
        corr = np.exp(-rr * (np.cosh(t) + 1.0) - nu * t)
        wt = np.full(n_t + 1, t_max / n_t)
        wt[0] *= 0.5
        wt[-1] *= 0.5
        out = out - (s / math.pi) * (corr @ wt)
    if scaled:
        return out
    return out * np.exp(r)


def bessel_i(nu: float, r, scaled: bool = False):
    """Modified Bessel function of the first kind, ``I_nu(r)``.

    Ascending series for ``r <= 15 + nu``, exponentially convergent
    integral representation beyond; the two branches are overlap-validated
    in the test suite.

    Parameters
    ----------
    nu : float
        Order, ``nu >= 0``.
    r : float or ndarray
        Argument, ``r > 0`` (``r = 0`` is admitted and gives the limit).
    scaled : bool
        If true, return ``exp(-r) I_nu(r)``.

    Raises
    ------
    DomainError
        For ``nu < 0`` or ``r < 0``.
    """
    if nu < 0:
        raise DomainError(f"bessel_i requires nu >= 0, got {nu}")
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0):
        raise DomainError("bessel_i requires r >= 0")
    flat = np.atleast_1d(arr).ravel()
    out = np.empty_like(flat)
    cross = 15.0 + nu
    small = flat <= cross
    if np.any(small):
        out[small] = _bessel_i_series(nu, flat[small], scaled)
    if np.any(~small):
        out[~small] = _bessel_i_integral(nu, flat[~small], scaled)
    out = out.reshape(np.atleast_1d(arr).shape)
    if np.isscalar(r) or arr.ndim == 0:
        return float(out.ravel()[0])
    return out


def bessel_i_ratio(beta: float, z) -> np.ndarray:
    """``I_beta(z) / z**beta`` with its finite limit ``2**-beta / Gamma(beta+1)`` at 0.

    This is the combination the Fourier-side weights need; dividing the two
    factors directly would lose the limit and can overflow for large orders.
    Orders down to ``beta > -1`` are admitted (the series is regular there;
    the large-argument branch uses ``I_{-m} = I_m + (2/pi) sin(m pi) K_m``).
    """
    if beta <= -1:
        raise DomainError(f"bessel_i_ratio requires beta > -1, got {beta}")
    arr = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(arr < 0):
        raise DomainError("bessel_i_ratio requires z >= 0")
    out = np.empty_like(arr)
    cross = 15.0 + max(beta, 0.0)
    small = arr <= cross
    if np.any(small):
        # Series for I_beta(z)/z^beta = 2^-beta sum_k (z^2/4)^k / (k! Gamma(beta+k+1)).
        zz = arr[small]
        q = 0.25 * zz * zz
        term = np.full_like(zz, math.exp(-beta * math.log(2.0) - math.lgamma(beta + 1.0)))
        total = term.copy()
        for k in range(1, 400):
            term = term * q / (k * (beta + k))
            total += term
            if np.all(np.abs(term) <= 1e-18 * np.abs(total)):
                break
        out[small] = total
    if np.any(~small):
        big = arr[~small]
        if beta >= 0:
            ivals = _bessel_i_integral(beta, big, scaled=True)
        else:
            m = -beta
            ivals = _bessel_i_integral(m, big, scaled=True) + (
                2.0 / math.pi
            ) * math.sin(m * math.pi) * _sp.kve(m, big) * np.exp(-2.0 * big)
        with np.errstate(over="ignore"):
            out[~small] = np.exp(np.log(ivals) + big - beta * np.log(big))
    if np.isscalar(z) or np.asarray(z).ndim == 0:
        return float(out[0])
    return out.reshape(np.asarray(z).shape)


def _macdonald_t_max(lam: complex, r_min: float) -> float:
    """Truncation point: integrand below the binary64 underflow threshold."""
    s = abs(lam.real)
    t = math.acosh(1.0 + 760.0 / r_min)
    for _ in range(4):
        t = math.acosh(1.0 + (760.0 + s * t + 40.0) / r_min)
    return t


def macdonald_integral(lam: complex, r, scaled: bool = False, refine: int = 1):
    """Macdonald function by trapezoidal quadrature of the cosh-integral.

    Evaluates ``K_lam(r) = \\int_0^\\infty exp(-r cosh t) cosh(lam t) dt``
    (scaled variant: ``exp(r) K_lam(r)``, integrand exp(-r(cosh t - 1))).
    The integrand is even and analytic with double-exponential decay, so the
    trapezoid rule converges geometrically; the step is halved until two
    successive sums agree to 1e-13 relative.

    ``refine`` multiplies the final node count; ``refine=2`` is the
    independent refined-quadrature oracle used in tests.
    """
    lam = complex(lam)
    if abs(lam.real) > MAX_MACDONALD_REAL_ORDER:
        raise DomainError(
            f"|Re(order)| = {abs(lam.real)} exceeds stability cap {MAX_MACDONALD_REAL_ORDER}"
        )
    arr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(arr <= 0):
        raise DomainError("macdonald_integral requires r > 0")
    r_min = float(np.min(arr))
    t_max = _macdonald_t_max(lam, r_min)

    # Peak of the log-integrand, to keep exp() in range.
    s = abs(lam.real)
    if s * t_max - 700.0 > 0.0:
        tt = np.linspace(0.0, t_max, 4096)
        peak = float(np.max(s * tt - r_min * (np.cosh(tt) - 1.0)))
        if peak > 700.0:
            raise ConvergenceError(
                f"macdonald integrand exceeds binary64 range (order {lam}, r_min {r_min})"
            )

    # For heavily imaginary orders the result sits exponentially far below
    # the integrand scale (|K_{i tau}| ~ exp(-pi tau / 2)); an extended
    # accumulator keeps the cancellation-limited corner within tolerance.
    complex_order = lam.imag != 0.0
    work = np.clongdouble if complex_order else np.float64
    rr = arr.astype(np.longdouble if complex_order else np.float64)[:, None]

    def trapezoid(n_nodes: int, absval: bool = False) -> np.ndarray:
        t = np.linspace(0.0, t_max, n_nodes + 1).astype(rr.dtype)[None, :]
        expo = -rr * (np.cosh(t) - 1.0)
        if complex_order:
            ch = np.cosh(np.clongdouble(lam) * t)
        else:
            ch = np.cosh(lam.real * t)
        vals = np.exp(expo) * ch
        if absval:
            vals = np.abs(vals)
        h = np.longdouble(t_max) / n_nodes
        w = np.full(n_nodes + 1, h, dtype=np.longdouble)
        w[0] *= 0.5
        w[-1] *= 0.5
        return vals.astype(work) @ w.astype(work if not absval else np.longdouble)

    n = 512
    prev = trapezoid(n)
    diff = None
    for _ in range(9):
        n *= 2
        cur = trapezoid(n)
        diff = np.abs(cur - prev)
        prev = cur
        if np.all(diff <= 3e-13 * np.abs(cur)):
            break
    else:
        # Heavily imaginary orders are cancellation-limited: accept a
        # roundoff plateau provided it sits safely below the contract.
        if not np.all(diff <= 1e-10 * np.abs(prev)):
            raise ConvergenceError("macdonald_integral trapezoid refinement stalled")
    if refine > 1:
        prev = trapezoid(n * refine)

    if not scaled:
        prev = prev * np.exp(-rr[:, 0])
    if np.isscalar(r) or np.asarray(r).ndim == 0:
        val = prev[0]
        return complex(val) if complex_order else float(np.real(val))
    out = prev.astype(complex if complex_order else float)
    return out.reshape(np.asarray(r).shape)


def bessel_k(lam, r, scaled: bool = False):
    """Macdonald function ``K_lam(r)`` for complex order and real ``r > 0``.

    Real orders go through scipy's ``kv``/``kve``; complex orders are
    evaluated with :func:`macdonald_integral` (no library routine covers
    them). ``scaled=True`` returns ``exp(r) K_lam(r)``.
    """
    lam = complex(lam)
    if abs(lam.real) > MAX_MACDONALD_REAL_ORDER:
        raise DomainError(
            f"|Re(order)| = {abs(lam.real)} exceeds stability cap {MAX_MACDONALD_REAL_ORDER}"
        )
    arr = np.asarray(r, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("bessel_k requires r > 0")
    if lam.imag == 0.0:
        fn = _sp.kve if scaled else _sp.kv
        out = fn(lam.real, arr)
        if np.isscalar(r) or arr.ndim == 0:
            return float(out)
        return out
    return macdonald_integral(lam, r, scaled=scaled)


class SeguraResult:
    """Three members of the Segura chain and whether it holds.

    Both comparisons carry roundoff slack: the strict left inequality
    saturates in binary64 (e.g. tanh r vs 1 at large r), and the right one
    is an exact equality at nu = 0 since K_{-1/2} = K_{1/2}. A genuine
    violation beyond rounding still fails.
    """

    __slots__ = ("nu", "r", "i_ratio", "middle", "k_ratio", "strict_holds", "weak_holds")

    def __init__(self, nu, r, i_ratio, middle, k_ratio):
        self.nu = nu
        self.r = r
        self.i_ratio = i_ratio
        self.middle = middle
        self.k_ratio = k_ratio
        self.strict_holds = bool(i_ratio < middle * (1.0 + 1e-13) + 1e-300)
        self.weak_holds = bool(middle <= k_ratio * (1.0 + 1e-12))

    @property
    def holds(self) -> bool:
        return self.strict_holds and self.weak_holds

    def as_dict(self) -> dict:
        return {
            "nu": self.nu,
            "r": self.r,
            "i_ratio": self.i_ratio,
            "middle": self.middle,
            "k_ratio": self.k_ratio,
            "strict_holds": self.strict_holds,
            "weak_holds": self.weak_holds,
            "holds": self.holds,
        }


def segura_check(nu: float, r: float) -> SeguraResult:
    """Evaluate the Segura ratio chain at ``(nu, r)``.

    Returns the three quantities ``I_{nu+1/2}(r)/I_{nu-1/2}(r)``,
    ``r/(nu + sqrt(nu^2 + r^2))`` and ``K_{nu-1/2}(r)/K_{nu+1/2}(r)`` and
    flags whether strict ``<`` holds on the left and ``<=`` on the right.
    """
    if nu < 0:
        raise DomainError(f"segura_check requires nu >= 0, got {nu}")
    if r <= 0:
        raise DomainError(f"segura_check requires r > 0, got {r}")
    # Scaled variants: the exp(+-r) factors cancel inside each ratio.
    i_num = bessel_i(nu + 0.5, r, scaled=True)
    i_den = bessel_i(abs(nu - 0.5), r, scaled=True)
    if nu < 0.5:
        # I_{nu-1/2} with negative order: I_{-m}(r) = I_m(r) + (2/pi) sin(m pi) K_m(r).
        m = 0.5 - nu
        i_den = i_den + (2.0 / math.pi) * math.sin(m * math.pi) * float(
            _sp.kve(m, r)
        ) * math.exp(-2.0 * r)
    middle = r / (nu + math.hypot(nu, r))
    k_num = float(_sp.kve(nu - 0.5, r))
    k_den = float(_sp.kve(nu + 0.5, r))
    return SeguraResult(nu, r, i_num / i_den, middle, k_num / k_den)
