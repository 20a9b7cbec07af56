"""Spectra of non-self-adjoint polynomials in free circular and semicircular operators.

The library decides spectral membership three independent ways - a 6x6
transfer-matrix test for quadratics in two circular variables, closed forms
for homogeneous polynomials and free random-walk products, and a generic
Fock-space resolvent oracle - and validates the predicted regions against
eigenvalue clouds of matching Ginibre matrix models.
"""

__version__ = "0.1.0"

from .errors import MemoryBudgetError, NumericalError, ParseError, StructureError
from .ncpoly import (
    CIRCULAR,
    SEMICIRCULAR,
    Letter,
    NCPolynomial,
    QuadraticForm,
    extract_quadratic,
    parse,
)
from .verdict import MembershipVerdict, Verdict

__all__ = [
    "__version__",
    "CIRCULAR",
    "SEMICIRCULAR",
    "Letter",
    "NCPolynomial",
    "QuadraticForm",
    "extract_quadratic",
    "parse",
    "MembershipVerdict",
    "Verdict",
    "ParseError",
    "StructureError",
    "MemoryBudgetError",
    "NumericalError",
]
