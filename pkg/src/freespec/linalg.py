"""Dense complex linear algebra: eigenvalues, ordered invariant subspaces, power orbits.

Everything here delegates the factorizations to LAPACK (via numpy/scipy); the
value added is the verdict logic on top: deciding whether ``lim M^n v = 0``
without assuming diagonalizability, with an explicit uncertainty band around
the unit modulus threshold.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericalError

__all__ = [
    "EigenResult",
    "LimitVerdict",
    "OrbitResult",
    "eigenvalues",
    "spectral_radius",
    "spectral_radii",
    "stable_subspace_membership",
    "power_orbit",
]


def _square(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.view(float))):
        raise ValueError("matrix entries must be finite")
    return a


@dataclass(frozen=True)
class EigenResult:
    """All eigenvalues (with multiplicity); Schur factors Q, T when requested."""

    values: np.ndarray
    schur_q: np.ndarray | None = None
    schur_t: np.ndarray | None = None


class LimitVerdict(enum.Enum):
    CONVERGES_TO_ZERO = "converges_to_zero"
    DOES_NOT_CONVERGE = "does_not_converge"
    UNCERTAIN = "uncertain"


@dataclass(frozen=True)
class OrbitResult:
    verdict: LimitVerdict
    norms: np.ndarray
    iterations: int


def eigenvalues(m, want_schur: bool = False) -> EigenResult:
    """Eigenvalues of a square complex matrix, optionally with a complex Schur form.

    Backward-stable LAPACK QR iteration.  Raises :class:`NumericalError` if the
    iteration fails to converge.
    """
    a = _square(m)
    try:
        if want_schur:
            t, q = scipy.linalg.schur(a, output="complex")
            return EigenResult(values=np.diag(t).copy(), schur_q=q, schur_t=t)
        return EigenResult(values=np.linalg.eigvals(a))
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise NumericalError(f"eigenvalue computation failed: {exc}") from exc


def spectral_radius(m) -> float:
    """max |eigenvalue| of a square matrix."""
    return float(np.max(np.abs(eigenvalues(m).values)))


def spectral_radii(ms) -> np.ndarray:
    """Spectral radii of a stacked array of square matrices, shape (..., n, n) -> (...)."""
    a = np.asarray(ms, dtype=complex)
    return np.max(np.abs(np.linalg.eigvals(a)), axis=-1)


def _sorted_schur(a: np.ndarray, cut: float):
    try:
        return scipy.linalg.schur(a, output="complex", sort=lambda x: bool(abs(x) < cut))
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"sorted Schur decomposition failed: {exc}") from exc


def _residual_against_leading(z: np.ndarray, k: int, v: np.ndarray) -> float:
    # distance from v to the span of the first k Schur vectors
    if k == 0:
        return float(np.linalg.norm(v))
    basis = z[:, :k]
    return float(np.linalg.norm(v - basis @ (basis.conj().T @ v)))


def stable_subspace_membership(m, v, threshold: float = 1.0, tol: float = 1e-6) -> LimitVerdict:
    """Decide whether ``lim_n M^n v = 0`` via ordered Schur forms.

    The strictly stable invariant subspace (eigenvalues of modulus below
    ``threshold - tol``) is ordered to the front of a complex Schur form; v is
    declared convergent when it lies in that span up to ``tol * ||v||``.  If
    the blocking component involves only eigenvalues inside the modulus band
    ``[threshold - tol, threshold + tol]`` the answer is UNCERTAIN rather than
    a guess.  No diagonalizability is assumed.
    """
    a = _square(m)
    vec = np.asarray(v, dtype=complex).reshape(-1)
    if vec.shape[0] != a.shape[0]:
        raise ValueError(f"vector length {vec.shape[0]} does not match matrix dimension {a.shape[0]}")
    nv = float(np.linalg.norm(vec))
    if nv == 0.0:
        return LimitVerdict.CONVERGES_TO_ZERO

    _, z, k_stable = _sorted_schur(a, threshold - tol)
    if _residual_against_leading(z, k_stable, vec) <= tol * nv:
        return LimitVerdict.CONVERGES_TO_ZERO

    # v sticks out of the stable subspace; if the excess lives entirely on
    # band eigenvalues the dichotomy is numerically undecidable here.
    _, z2, k_band = _sorted_schur(a, threshold + tol)
    if k_band > k_stable and _residual_against_leading(z2, k_band, vec) <= tol * nv:
        return LimitVerdict.UNCERTAIN
    return LimitVerdict.DOES_NOT_CONVERGE


def power_orbit(
    m,
    v,
    n_max: int = 10_000,
    grow_bound: float = 1e12,
    zero_tol: float = 1e-12,
) -> OrbitResult:
    """Direct iteration fallback: track ||M^n v|| until it decides or n_max runs out.

    Overflow is clamped and reported as DOES_NOT_CONVERGE.  When neither bound
    is hit, the geometric tail ratio of the norm history breaks the tie
    (ratio > 1 means divergence); a ratio indistinguishable from 1 stays
    UNCERTAIN with the full history attached.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    a = _square(m)
    vec = np.asarray(v, dtype=complex).reshape(-1)
    norms = [float(np.linalg.norm(vec))]
    verdict = None
    n = 0
    for n in range(1, n_max + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            vec = a @ vec
            cur = float(np.linalg.norm(vec))
        if not np.isfinite(cur):
            norms.append(grow_bound)
            verdict = LimitVerdict.DOES_NOT_CONVERGE
            break
        norms.append(cur)
        if cur < zero_tol:
            verdict = LimitVerdict.CONVERGES_TO_ZERO
            break
        if cur > grow_bound:
            verdict = LimitVerdict.DOES_NOT_CONVERGE
            break
    if verdict is None:
        window = min(10, len(norms) - 1)
        base = norms[-1 - window]
        if base > 0.0 and (norms[-1] / base) ** (1.0 / window) > 1.0:
            verdict = LimitVerdict.DOES_NOT_CONVERGE
        else:
            verdict = LimitVerdict.UNCERTAIN
    return OrbitResult(verdict=verdict, norms=np.asarray(norms), iterations=n)
