"""Gram-determinant probe of the unipotent crown model for GL(n, R).

For ``v_i = e_{n-i+1}`` and the bilinear (not Hermitian) pairing
``<z, w> = z^t w``, the functions

    f_k(g) = det( <g v_i, g v_j> )_{1 <= i,j <= n-k} ,   1 <= k <= n-1 ,

are invariant under complex-orthogonal factors on the left and lower
unipotent factors on the right. Zero-freeness of every ``f_k`` along
``exp(iY) N`` is necessary for the direction ``Y`` to lie in the crown
base, so a zero crossing along ``tau -> tau Y`` is an exclusion
certificate; membership is never asserted positively.

On abelian blocks ``Z`` (size k x (n-k)) the closed form
``f_k(exp Z) = det(1 + Z^t Z)`` holds, and the bounded convex block sets

    Upsilon_k = { Y real : 1 - Y^t Y positive definite }

are characterized by all singular values of ``Y`` being < 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg as _linalg

from .errors import ConditioningError
from .reporting import Report

__all__ = [
    "UpperNilpotent",
    "BlockMatrix",
    "f_k",
    "f_k_all",
    "upsilon_membership",
    "expm_nilpotent",
    "random_special_orthogonal",
    "random_lower_unipotent",
    "random_upper_unipotent",
    "tube_probe",
    "invariance_report",
]

CONDITION_BOUND = 1e12


@dataclass(frozen=True)
class UpperNilpotent:
    """Strictly upper-triangular real matrix (a crown direction)."""

    n: int
    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.shape != (self.n, self.n):
            raise ValueError(f"expected {self.n}x{self.n} matrix")
        if np.any(np.tril(a) != 0.0):
            raise ValueError("entries must vanish on and below the diagonal")
        object.__setattr__(self, "entries", a)


@dataclass(frozen=True)
class BlockMatrix:
    """k x (n-k) block of the abelian subalgebra u_k inside n x n matrices."""

    n: int
    k: int
    Z: np.ndarray

    def __post_init__(self):
        if not 1 <= self.k <= self.n - 1:
            raise ValueError(f"split index k must satisfy 1 <= k <= n-1, got {self.k}")
        z = np.asarray(self.Z)
        if z.shape != (self.k, self.n - self.k):
            raise ValueError(f"block must be {self.k}x{self.n - self.k}, got {z.shape}")
        object.__setattr__(self, "Z", z)

    def embed(self) -> np.ndarray:
        """The block placed in the upper-right corner of an n x n matrix."""
        out = np.zeros((self.n, self.n), dtype=self.Z.dtype)
        out[: self.k, self.k :] = self.Z
        return out


def _check_conditioning(g: np.ndarray) -> None:
    sv = np.linalg.svd(g, compute_uv=False)
    if sv[-1] == 0 or sv[0] / sv[-1] > CONDITION_BOUND:
        raise ConditioningError("matrix condition number exceeds 1e12")


def f_k(g: np.ndarray, k: int) -> complex:
    """Gram determinant of the last ``n-k`` reversed basis vectors under g."""
    g = np.asarray(g, dtype=complex)
    n = g.shape[0]
    if g.shape != (n, n):
        raise ValueError("g must be square")
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must satisfy 1 <= k <= n-1, got {k}")
    _check_conditioning(g)
    # Columns g v_1 .. g v_{n-k} with v_i = e_{n-i+1}.
    w = g[:, ::-1][:, : n - k]
    gram = w.T @ w
    return complex(np.linalg.det(gram))


def f_k_all(g: np.ndarray) -> np.ndarray:
    """All ``f_k`` values, k = 1 .. n-1."""
    n = np.asarray(g).shape[0]
    return np.array([f_k(g, k) for k in range(1, n)])


def upsilon_membership(block: BlockMatrix) -> bool:
    """True iff ``1 - Y^t Y`` is positive definite (real block Y)."""
    y = np.asarray(block.Z, dtype=float)
    m = np.eye(block.n - block.k) - y.T @ y
    return bool(np.min(np.linalg.eigvalsh(m)) > 0.0)


def expm_nilpotent(a: np.ndarray) -> np.ndarray:
    """Exact exponential of a nilpotent matrix via the finite series."""
    a = np.asarray(a)
    n = a.shape[0]
    out = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(1, n):
        term = term @ a / k
        out = out + term
    return out


def random_special_orthogonal(n: int, rng, scale: float = 0.7) -> np.ndarray:
    """Random element of SO(n, C): exponential of a complex antisymmetric matrix."""
    a = rng.normal(scale=scale, size=(n, n)) + 1j * rng.normal(scale=scale, size=(n, n))
    a = a - a.T
    return _linalg.expm(a)


def random_lower_unipotent(n: int, rng, scale: float = 1.0) -> np.ndarray:
    m = np.tril(rng.normal(scale=scale, size=(n, n)) + 1j * rng.normal(scale=scale, size=(n, n)), -1)
    return np.eye(n) + m


def random_upper_unipotent(n: int, rng, radius: float) -> np.ndarray:
    m = np.triu(rng.uniform(-radius, radius, size=(n, n)), 1)
    return np.eye(n) + m


def _segment_min_profile(
    y: np.ndarray, taus: np.ndarray, samples: list, per_k: np.ndarray | None = None
) -> np.ndarray:
    """min over k and group samples of |f_k(exp(i tau Y) u)| along the segment.

    When ``per_k`` (length n-1) is passed, it is updated in place with the
    per-index minima over the whole sweep.
    """
    n = y.shape[0]
    out = np.empty(len(taus))
    for i, tau in enumerate(taus):
        e = expm_nilpotent(1j * tau * y)
        best = math.inf
        for u in samples:
            vals = np.abs(f_k_all(e @ u))
            if per_k is not None:
                np.minimum(per_k, vals, out=per_k)
            best = min(best, float(np.min(vals)))
        out[i] = best
    return out


def tube_probe(
    y: UpperNilpotent,
    sample_count: int = 512,
    seed: int = 0,
    radius: float = 5.0,
    tau_steps: int = 256,
) -> Report:
    """Zero-freeness probe along the scaled direction ``tau -> tau Y``.

    Evaluates every ``f_k`` on ``exp(i tau Y) u`` for random unipotent
    samples u (entries uniform in [-radius, radius]; the identity is always
    included) and tracks the minimum modulus continuously in tau. A dip to
    zero is refined by golden-section search; a crossing before tau = 1
    certifies that Y is outside the crown base. Evidence only: no positive
    membership claim is made.
    """
    if y.n > 4:
        raise ValueError("probe supports n <= 4")
    rng = np.random.default_rng(seed)
    samples = [np.eye(y.n, dtype=complex)]
    samples += [random_upper_unipotent(y.n, rng, radius) for _ in range(sample_count)]
    taus = np.linspace(0.0, 1.0, tau_steps + 1)
    per_k = np.full(y.n - 1, np.inf)
    profile = _segment_min_profile(y.entries, taus, samples, per_k=per_k)

    rep = Report(
        command="crown-probe",
        params={
            "n": y.n,
            "Y": y.entries.ravel().tolist(),
            "sample_count": sample_count,
            "radius": radius,
        },
        seed=seed,
    )
    rep.values["tau"] = taus.tolist()
    rep.values["min_abs_fk"] = profile.tolist()
    rep.values["min_over_segment"] = float(np.min(profile))
    rep.values["per_k_minima"] = per_k.tolist()

    crossing = None
    scale = profile[0]
    below = np.nonzero(profile < 0.5 * scale)[0]
    if below.size:
        # Walk from the first dip to its local minimum, then refine there.
        dip = int(below[0])
        while dip + 1 < len(profile) and profile[dip + 1] < profile[dip]:
            dip += 1
        a = taus[max(dip - 1, 0)]
        b = taus[min(dip + 1, len(taus) - 1)]
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
        fc = _segment_min_profile(y.entries, np.array([c]), samples)[0]
        fd = _segment_min_profile(y.entries, np.array([d]), samples)[0]
        while b - a > 1e-9:
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - invphi * (b - a)
                fc = _segment_min_profile(y.entries, np.array([c]), samples)[0]
            else:
                a, c, fc = c, d, fd
                d = a + invphi * (b - a)
                fd = _segment_min_profile(y.entries, np.array([d]), samples)[0]
        tau_star = 0.5 * (a + b)
        val_star = _segment_min_profile(y.entries, np.array([tau_star]), samples)[0]
        if val_star < 1e-6 * scale:
            crossing = float(tau_star)
    rep.values["crossing_tau"] = crossing
    rep.values["excluded"] = crossing is not None
    return rep


def invariance_report(n: int, seed: int = 0, trials: int = 20, tol: float = 1e-8) -> Report:
    """Left SO(n,C)- and right lower-unipotent invariance of every f_k.

    Also checks the Iwasawa-diagonal identity
    ``f_k(kappa a nbar) = (a_{k+1} ... a_n)^2``
    (the Gram pairing squares each diagonal weight) and the abelian-block
    closed form ``f_k(exp Z) = det(1 + Z^t Z)`` on random complex blocks.
    """
    rng = np.random.default_rng(seed)
    rep = Report(command="crown-invariance", params={"n": n, "trials": trials}, seed=seed)
    worst_left = worst_right = worst_diag = worst_block = 0.0
    for _ in range(trials):
        g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        while abs(np.linalg.det(g)) < 1e-3:
            g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        q = random_special_orthogonal(n, rng)
        nb = random_lower_unipotent(n, rng)
        base = f_k_all(g)
        worst_left = max(worst_left, float(np.max(np.abs(f_k_all(q @ g) - base) / np.abs(base))))
        worst_right = max(worst_right, float(np.max(np.abs(f_k_all(g @ nb) - base) / np.abs(base))))

        diag = np.exp(rng.uniform(-0.7, 0.7, size=n) + 1j * rng.uniform(-0.5, 0.5, size=n))
        kappa = random_special_orthogonal(n, rng)
        g2 = kappa @ np.diag(diag) @ random_lower_unipotent(n, rng)
        vals = f_k_all(g2)
        for k in range(1, n):
            target = np.prod(diag[k:]) ** 2
            worst_diag = max(worst_diag, abs(vals[k - 1] - target) / abs(target))

        for k in range(1, n):
            z = rng.normal(size=(k, n - k)) + 1j * rng.normal(size=(k, n - k))
            blk = BlockMatrix(n, k, z)
            direct = f_k(expm_nilpotent(blk.embed()), k)
            closed = complex(np.linalg.det(np.eye(n - k) + z.T @ z))
            worst_block = max(worst_block, abs(direct - closed) / max(abs(closed), 1e-12))

    rep.check("left-orthogonal-invariance", worst_left, 0.0, tol, relative=False)
    rep.check("right-unipotent-invariance", worst_right, 0.0, tol, relative=False)
    rep.check("iwasawa-diagonal-squared", worst_diag, 0.0, 1e-10, relative=False)
    rep.check("abelian-block-closed-form", worst_block, 0.0, 1e-10, relative=False)
    return rep
