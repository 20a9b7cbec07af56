"""Membership verdicts shared by the quadratic test, the generic oracle and the closed forms."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any


class Verdict(enum.Enum):
    """Three-way answer of a spectral membership test."""

    SPECTRUM = "spectrum"
    RESOLVENT = "resolvent"
    BOUNDARY_UNCERTAIN = "boundary_uncertain"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class MembershipVerdict:
    """Verdict for one query point plus whatever diagnostics the method produced.

    ``diagnostics`` keys in use: ``method``, ``spectral_radius``, ``decay_ratio``,
    ``levels``, ``iterations``, ``partial_norm_sq``, ``radius_valid``,
    ``disagreement``.
    """

    verdict: Verdict
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def is_spectrum(self) -> bool:
        return self.verdict is Verdict.SPECTRUM

    @property
    def is_resolvent(self) -> bool:
        return self.verdict is Verdict.RESOLVENT

    @property
    def conclusive(self) -> bool:
        return self.verdict is not Verdict.BOUNDARY_UNCERTAIN

    def __str__(self) -> str:
        return str(self.verdict)
