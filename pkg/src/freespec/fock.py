"""Exact polynomial action on the finitely supported part of the full Fock space.

Semicircular letters act as creation-plus-annihilation in the same basis
direction; circular letters create in their own direction and annihilate in
the conjugate one.  Vectors are sparse maps from packed basis words to complex
amplitudes; the basis is orthonormal, so norms and inner products are direct
sums over stored entries.  Only exact zeros are pruned - small amplitudes are
never dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import MemoryBudgetError
from .ncpoly import (
    CIRCULAR,
    EMPTY_PACKED,
    SEMICIRCULAR,
    Letter,
    NCPolynomial,
    Word,
    pack_word,
    unpack_word,
)

__all__ = [
    "DEFAULT_BUDGET",
    "FockVector",
    "vacuum",
    "apply_creation",
    "apply_annihilation",
    "apply_polynomial",
    "trace",
    "l2_norm",
    "RadiusEstimate",
    "spectral_radius_estimate",
]

# default cap on stored amplitudes; exceeding it raises, never truncates silently
DEFAULT_BUDGET = 20_000_000


@dataclass(frozen=True)
class FockVector:
    """Sparse vector over words in d letters ([d] words or [d, d-bar] words)."""

    d: int
    kind: str  # CIRCULAR words use barred letters; SEMICIRCULAR words never do
    amplitudes: dict = field(default_factory=dict)  # packed word -> complex

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def inner(self, other: "FockVector") -> complex:
        if self.d != other.d or self.kind != other.kind:
            raise ValueError("mismatched Fock vectors")
        if len(self.amplitudes) > len(other.amplitudes):
            return complex(np.conj(other.inner(self)))
        b = other.amplitudes
        return complex(sum(a * np.conj(b.get(w, 0j)) for w, a in self.amplitudes.items()))

    def amplitude(self, word: Word) -> complex:
        return self.amplitudes.get(pack_word(word), 0j)

    def items(self):
        """(word, amplitude) pairs, deterministic order."""
        for packed in sorted(self.amplitudes):
            yield unpack_word(packed), self.amplitudes[packed]

    def __len__(self) -> int:
        return len(self.amplitudes)


def vacuum(d: int, kind: str) -> FockVector:
    return FockVector(d=d, kind=kind, amplitudes={EMPTY_PACKED: 1.0 + 0j})


def _letter_ops(kind: str, letter: Letter) -> tuple[int, int]:
    """(code prepended by the creation part, leading code stripped by the annihilation part)."""
    if kind == SEMICIRCULAR:
        if letter.bar:
            raise ValueError("semicircular polynomials cannot carry adjoint letters")
        code = letter.code()
        return code, code
    create = letter.code()
    strip = Letter(letter.index, not letter.bar).code()
    return create, strip


def _check_budget(count: int, budget: int) -> None:
    if count > budget:
        raise MemoryBudgetError(
            f"Fock vector would store {count} amplitudes, over the budget of {budget}",
            requested=count,
            budget=budget,
        )


def _apply_letter(amps: dict, create: int, strip: int, budget: int) -> dict:
    out: dict[int, complex] = {}
    for w, a in amps.items():
        cw = (w << 4) | create
        out[cw] = out.get(cw, 0j) + a
        if w != EMPTY_PACKED and (w & 15) == strip:
            rw = w >> 4
            out[rw] = out.get(rw, 0j) + a
    for w in [w for w, a in out.items() if a == 0]:
        del out[w]
    _check_budget(len(out), budget)
    return out


def apply_creation(letter, v: FockVector, budget: int = DEFAULT_BUDGET) -> FockVector:
    """Prepend the letter's basis direction to every word of v."""
    letter = Letter(*letter) if not isinstance(letter, Letter) else letter
    code = letter.code()
    out = {(w << 4) | code: a for w, a in v.amplitudes.items()}
    _check_budget(len(out), budget)
    return FockVector(v.d, v.kind, out)


def apply_annihilation(letter, v: FockVector, budget: int = DEFAULT_BUDGET) -> FockVector:
    """Strip a matching leading letter from every word of v; kills the vacuum."""
    letter = Letter(*letter) if not isinstance(letter, Letter) else letter
    code = letter.code()
    out: dict[int, complex] = {}
    for w, a in v.amplitudes.items():
        if w != EMPTY_PACKED and (w & 15) == code:
            rw = w >> 4
            value = out.get(rw, 0j) + a
            if value == 0:
                out.pop(rw, None)
            else:
                out[rw] = value
    return FockVector(v.d, v.kind, out)


def apply_polynomial(p: NCPolynomial, v: FockVector, budget: int = DEFAULT_BUDGET) -> FockVector:
    """Linear extension of the letter actions of p to the sparse vector v."""
    if p.d != v.d or p.kind != v.kind:
        raise ValueError(
            f"polynomial alphabet ({p.kind}, d={p.d}) does not match vector ({v.kind}, d={v.d})"
        )
    result: dict[int, complex] = {}
    for word, coeff in p.terms.items():
        cur = v.amplitudes
        for letter in reversed(word):
            create, strip = _letter_ops(p.kind, letter)
            cur = _apply_letter(cur, create, strip, budget)
        for w, a in cur.items():
            value = result.get(w, 0j) + coeff * a
            if value == 0:
                result.pop(w, None)
            else:
                result[w] = value
        _check_budget(len(result), budget)
    return FockVector(v.d, v.kind, result)


def trace(p: NCPolynomial, budget: int = DEFAULT_BUDGET) -> complex:
    """Vacuum expectation of p: the amplitude the vacuum keeps under p."""
    out = apply_polynomial(p, vacuum(p.d, p.kind), budget)
    return out.amplitudes.get(EMPTY_PACKED, 0j)


def l2_norm(p: NCPolynomial, budget: int = DEFAULT_BUDGET) -> float:
    """L2 norm of p, i.e. the norm of p applied to the vacuum."""
    return apply_polynomial(p, vacuum(p.d, p.kind), budget).norm()


@dataclass(frozen=True)
class RadiusEstimate:
    """Bracketing sequences for the spectral radius from L2 norms of powers.

    lower[i] = ||p^n||_2^(1/n) converges to the spectral radius from below in
    the limit; upper[i] applies the degree-dependent norm comparison factor
    (nk+1)^(3/2) and is a valid upper bound for every n.
    """

    n: np.ndarray
    l2_norms: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    truncated: bool


def spectral_radius_estimate(
    p: NCPolynomial, n_max: int, budget: int = DEFAULT_BUDGET
) -> RadiusEstimate:
    """Bracket the spectral radius of p by iterated application to the vacuum.

    Runs until ``n_max`` or until the amplitude budget is hit, in which case
    the partial sequence is returned with ``truncated=True``.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    k = p.degree()
    v = vacuum(p.d, p.kind)
    ns, norms, lower, upper = [], [], [], []
    truncated = False
    for n in range(1, n_max + 1):
        try:
            v = apply_polynomial(p, v, budget)
        except MemoryBudgetError:
            truncated = True
            break
        l2 = v.norm()
        ns.append(n)
        norms.append(l2)
        if l2 > 0.0:
            log_l2 = math.log(l2)
            lower.append(math.exp(log_l2 / n))
            upper.append(math.exp((1.5 * math.log(n * k + 1) + log_l2) / n))
        else:
            lower.append(0.0)
            upper.append(0.0)
    return RadiusEstimate(
        n=np.asarray(ns, dtype=int),
        l2_norms=np.asarray(norms),
        lower=np.asarray(lower),
        upper=np.asarray(upper),
        truncated=truncated,
    )
