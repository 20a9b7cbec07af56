"""Generic L2 membership test for holomorphic polynomials in free circular variables.

For holomorphic p the resolvent coefficients on the creation-only sector obey
a prefix recursion that closes level by level: writing p = c0 + sum_v a_v c_v
and lam' = lam - c0, the coefficient of a word w is

    alpha_w = (1/lam') * (delta_{w, empty} + sum over nonempty prefixes v of w
                          with a_v != 0 of a_v * alpha_{w minus v}).

Level n holds d^n coefficients stored as one dense array indexed by base-d
word rank, so scattering a lower level under a prefix v is a contiguous slice
update.  Spectral membership is decided from the decay of the level sums
a_n = sum_{|w|=n} |alpha_w|^2: geometric decay means resolvent, growth means
spectrum, and a tail ratio too close to 1 stays BoundaryUncertain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MemoryBudgetError, StructureError
from .ncpoly import CIRCULAR, NCPolynomial, Word, word_rank
from .verdict import MembershipVerdict, Verdict

__all__ = [
    "DEFAULT_WINDOW",
    "DEFAULT_MARGIN",
    "OVERFLOW_BOUND",
    "CoefficientTable",
    "solve_alpha",
    "level_sums",
    "classify_decay",
    "membership_oracle",
]

DEFAULT_WINDOW = 6
DEFAULT_MARGIN = 0.05
OVERFLOW_BOUND = 1e250
DEFAULT_BUDGET = 20_000_000


def _prepare(p: NCPolynomial):
    """Validate p and list its nonconstant terms as (length, rank, coefficient)."""
    if p.kind != CIRCULAR:
        raise StructureError("the membership oracle requires circular variables")
    if not p.is_holomorphic():
        raise StructureError("the membership oracle requires a polynomial without adjoints")
    terms = [
        (len(word), word_rank(word, p.d), coeff)
        for word, coeff in p.sorted_terms()
        if len(word) > 0
    ]
    return p.constant_term, terms


def _next_level(levels, n, terms, inv_shift, d):
    """Level-n coefficient array from the lower levels via the prefix recursion."""
    out = np.zeros(d**n, dtype=complex)
    for m, rank, coeff in terms:
        if m <= n:
            size = d ** (n - m)
            out[rank * size : (rank + 1) * size] += coeff * levels[n - m]
    out *= inv_shift
    return out


@dataclass(frozen=True)
class CoefficientTable:
    """Resolvent expansion coefficients of (lam - p)^{-1} up to a level cap."""

    poly: NCPolynomial
    lam: complex
    lam_shift: complex  # lam minus the constant term
    levels: list  # levels[n] is the dense array of coefficients on words of length n

    @property
    def n_levels(self) -> int:
        return len(self.levels) - 1

    def alpha(self, word: Word) -> complex:
        return complex(self.levels[len(word)][word_rank(word, self.poly.d)])

    def level_items(self, n: int):
        """(rank, coefficient) pairs of level n; ranks are base-d word encodings."""
        return enumerate(self.levels[n])


def solve_alpha(
    p: NCPolynomial, lam: complex, n_levels: int, budget: int = DEFAULT_BUDGET
) -> CoefficientTable:
    """Solve the prefix recursion level by level up to ``n_levels`` (inclusive)."""
    c0, terms = _prepare(p)
    if not terms:
        raise StructureError("polynomial has no nonconstant term")
    lam = complex(lam)
    shift = lam - c0
    if shift == 0:
        raise ValueError(
            "lambda coincides with the constant term; the vacuum-level equation is unsolvable"
        )
    total = sum(p.d**n for n in range(n_levels + 1))
    if total > budget:
        raise MemoryBudgetError(
            f"coefficient table needs {total} entries, over the budget of {budget}",
            requested=total,
            budget=budget,
        )
    inv_shift = 1.0 / shift
    levels = [np.array([inv_shift], dtype=complex)]
    for n in range(1, n_levels + 1):
        levels.append(_next_level(levels, n, terms, inv_shift, p.d))
    return CoefficientTable(poly=p, lam=lam, lam_shift=shift, levels=levels)


def level_sums(table: CoefficientTable) -> np.ndarray:
    """a_n = summed squared coefficient moduli of each level."""
    return np.array([float(np.sum(np.abs(level) ** 2)) for level in table.levels])


def _tail_ratio(sums: np.ndarray, window: int):
    """Per-level geometric ratio of the nonzero tail, or None if the tail vanished."""
    nonzero = np.flatnonzero(sums > 0.0)
    if nonzero.size == 0:
        return None
    n_last = int(nonzero[-1])
    earlier = nonzero[nonzero <= n_last - window]
    if earlier.size == 0:
        return None
    j = int(earlier[-1])
    return float((sums[n_last] / sums[j]) ** (1.0 / (n_last - j)))


def classify_decay(
    sums, window: int = DEFAULT_WINDOW, margin: float = DEFAULT_MARGIN
) -> MembershipVerdict:
    """Decide membership from the decay of the level sums.

    The tail ratio is (a_N / a_{N-window})^(1/window) with N the last nonzero
    level; when a_{N-window} is itself zero (polynomials supported on level
    multiples) the nearest earlier nonzero level is used with the matching
    exponent.  An all-zero tail is geometric decay with ratio 0.
    """
    sums = np.asarray(sums, dtype=float)
    if window < 3:
        raise ValueError("window must be >= 3")
    if sums.size < 2 * window:
        raise ValueError(f"need at least {2 * window} level sums, got {sums.size}")
    diag = {"method": "oracle", "levels": int(sums.size - 1), "partial_norm_sq": float(sums.sum())}
    if np.any(sums > OVERFLOW_BOUND):
        diag["decay_ratio"] = float("inf")
        diag["overflow"] = True
        return MembershipVerdict(Verdict.SPECTRUM, diag)
    ratio = _tail_ratio(sums, window)
    if ratio is None:
        diag["decay_ratio"] = 0.0
        return MembershipVerdict(Verdict.RESOLVENT, diag)
    diag["decay_ratio"] = ratio
    if ratio > 1.0 + margin:
        return MembershipVerdict(Verdict.SPECTRUM, diag)
    if ratio < 1.0 - margin and sums[-1] < np.max(sums[:-1]):
        return MembershipVerdict(Verdict.RESOLVENT, diag)
    return MembershipVerdict(Verdict.BOUNDARY_UNCERTAIN, diag)


def _max_level_for_budget(d: int, max_deg: int, budget: int) -> int:
    """Largest level whose rolling working set (top deg+1 levels) fits the budget."""
    if d == 1:
        return 10_000
    n = 0
    while sum(d**m for m in range(max(0, n + 1 - max_deg), n + 2)) <= budget:
        n += 1
    return n


def membership_oracle(
    p: NCPolynomial,
    lam: complex,
    n_levels: int | None = None,
    window: int = DEFAULT_WINDOW,
    margin: float = DEFAULT_MARGIN,
    budget: int = DEFAULT_BUDGET,
) -> MembershipVerdict:
    """Three-step membership decision: solve coefficients, sum levels, classify decay.

    Streams level sums with a rolling buffer of the top deg(p) levels, so the
    level cap is bounded by the amplitude budget rather than the full table
    size.  Stops as soon as the classification is conclusive; ``n_levels``
    caps the search when given.
    """
    lam = complex(lam)
    c0, terms = _prepare(p)
    if not terms:
        # constant polynomial: its spectrum is the single point c0
        verdict = Verdict.SPECTRUM if lam == c0 else Verdict.RESOLVENT
        return MembershipVerdict(verdict, {"method": "constant"})
    if lam == c0:
        return MembershipVerdict(
            Verdict.SPECTRUM, {"method": "constant-shift", "decay_ratio": float("inf")}
        )
    max_deg = max(m for m, _, _ in terms)
    cap = _max_level_for_budget(p.d, max_deg, budget)
    if n_levels is not None:
        cap = min(cap, n_levels)
    inv_shift = 1.0 / (lam - c0)

    levels = {0: np.array([inv_shift], dtype=complex)}
    sums = [abs(inv_shift) ** 2]
    verdict = None
    for n in range(1, cap + 1):
        levels.pop(n - max_deg - 1, None)
        nxt = _next_level(levels, n, terms, inv_shift, p.d)
        levels[n] = nxt
        sums.append(float(np.sum(np.abs(nxt) ** 2)))
        if sums[-1] > OVERFLOW_BOUND:
            return MembershipVerdict(
                Verdict.SPECTRUM,
                {"method": "oracle", "levels": n, "decay_ratio": float("inf"), "overflow": True},
            )
        if len(sums) >= 2 * window:
            verdict = classify_decay(np.asarray(sums), window, margin)
            if verdict.conclusive:
                return verdict
    if verdict is None:
        return MembershipVerdict(
            Verdict.BOUNDARY_UNCERTAIN,
            {"method": "oracle", "levels": len(sums) - 1, "insufficient_levels": True},
        )
    return verdict
