"""Ginibre matrix models of free circular variables.

Each variable c_i is modelled by an independent N x N matrix with i.i.d.
centered complex Gaussian entries of total variance 1/N (real and imaginary
parts each carry 1/(2N)), matching the normalization tau(c* c) = 1.  Sampling
uses the counter-based Philox generator keyed by an explicit seed so clouds
are bitwise reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ncpoly import CIRCULAR, NCPolynomial

__all__ = [
    "GENERATOR_NAME",
    "GinibreSample",
    "sample",
    "evaluate",
    "eigen_cloud",
    "ContainmentResult",
    "containment",
]

GENERATOR_NAME = "philox"


@dataclass(frozen=True)
class GinibreSample:
    """d independent Ginibre matrices of size n, tagged with their seed."""

    d: int
    n: int
    seed: int
    matrices: tuple

    @property
    def generator(self) -> str:
        return GENERATOR_NAME


def sample(d: int, n: int, seed: int) -> GinibreSample:
    """Draw d independent N x N Ginibre matrices (complex entry variance 1/N)."""
    if n < 1:
        raise ValueError("matrix size must be >= 1")
    if d < 1:
        raise ValueError("variable count must be >= 1")
    rng = np.random.Generator(np.random.Philox(seed))
    scale = np.sqrt(1.0 / (2 * n))
    mats = []
    for _ in range(d):
        re = rng.normal(0.0, scale, size=(n, n))
        im = rng.normal(0.0, scale, size=(n, n))
        mats.append(re + 1j * im)
    return GinibreSample(d=d, n=n, seed=seed, matrices=tuple(mats))


def evaluate(p: NCPolynomial, gin: GinibreSample) -> np.ndarray:
    """Substitute the sample matrices for the variables of a holomorphic polynomial."""
    if p.kind != CIRCULAR or not p.is_holomorphic():
        raise ValueError("matrix models substitute into holomorphic circular polynomials")
    if p.d != gin.d:
        raise ValueError(f"polynomial has d={p.d} but the sample holds {gin.d} matrices")
    n = gin.n
    out = np.zeros((n, n), dtype=complex)
    eye = np.eye(n, dtype=complex)
    for word, coeff in p.sorted_terms():
        prod = eye
        for letter in word:
            prod = prod @ gin.matrices[letter.index - 1]
        out += coeff * prod
    return out


def eigen_cloud(p: NCPolynomial, gin: GinibreSample) -> np.ndarray:
    """Eigenvalues of the polynomial evaluated on the sample."""
    return np.linalg.eigvals(evaluate(p, gin))


@dataclass(frozen=True)
class ContainmentResult:
    """Fraction of eigenvalues inside the (dilated) predicted region, plus a histogram."""

    defined: bool
    fraction: float
    counts: np.ndarray
    bin_edges: np.ndarray


def containment(
    eigs,
    field,
    level: float = 1.0,
    dilation: float = 0.0,
    bins: int = 40,
) -> ContainmentResult:
    """Measure how much of an eigenvalue cloud the region {field >= level} captures.

    ``field`` is the continuous membership indicator (for quadratics the
    transfer-matrix spectral radius); ``dilation`` relaxes the cut to
    ``level - dilation``.  An empty cloud yields ``defined=False``.
    """
    eigs = np.asarray(eigs, dtype=complex).ravel()
    if eigs.size == 0:
        return ContainmentResult(
            defined=False,
            fraction=float("nan"),
            counts=np.zeros(bins, dtype=int),
            bin_edges=np.linspace(0.0, 1.0, bins + 1),
        )
    if getattr(field, "supports_arrays", False):
        values = np.asarray(field(eigs), dtype=float)
    else:
        values = np.asarray([float(field(z)) for z in eigs])
    finite = values[np.isfinite(values)]
    counts, edges = (
        np.histogram(finite, bins=bins) if finite.size else (np.zeros(bins, dtype=int), np.linspace(0.0, 1.0, bins + 1))
    )
    fraction = float(np.mean(values >= level - dilation))
    return ContainmentResult(defined=True, fraction=fraction, counts=counts, bin_edges=edges)
