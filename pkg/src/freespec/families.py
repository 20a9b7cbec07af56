"""Closed-form spectral regions: homogeneous polynomials and free random walks.

A homogeneous holomorphic polynomial in free circular variables has spectrum
equal to the closed disk of radius equal to its coefficient L2 norm.  The
k-step walk product (1 + t c_1)...(1 + t c_k) has spectrum
{lam : g(lam) <= t^2} with g(lam) = |lam-1|^2 (|lam|^(2/k) - 1) / (|lam|^2 - 1),
extended by its limits g = |lam-1|^2 / k on the unit circle and g(0) = 1.  The
same region is the reciprocal spectral-radius condition for a k x k matrix
with |lam|^2 above the diagonal and 1 elsewhere, whose eigenvalues are known
in closed form; both routes are exposed for cross-checking.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import StructureError
from .ncpoly import CIRCULAR, NCPolynomial
from .verdict import MembershipVerdict, Verdict

__all__ = [
    "WalkSpec",
    "homogeneous_membership",
    "walk_g",
    "walk_membership",
    "walk_matrix",
    "walk_radius_closed",
    "walk_eigenvalues_closed",
    "walk_char_poly",
    "walk_polynomial",
    "WalkField",
    "DiskField",
]

# |lam| this close to 1 routes to the removable-singularity limit formulas
UNIT_CIRCLE_TOL = 1e-9

# closed forms are exact, so the uncertain shell outside the boundary is thin
CLOSED_FORM_BAND = 1e-9

MAX_EXPANSION_STEPS = 6


@dataclass(frozen=True)
class WalkSpec:
    """k-step free walk: the product (1 + t c_1)(1 + t c_2)...(1 + t c_k)."""

    k: int
    t: float

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("step count k must be >= 1")
        if not math.isfinite(self.t):
            raise ValueError("t must be finite")


def homogeneous_membership(
    p: NCPolynomial, lam: complex, band: float = CLOSED_FORM_BAND
) -> MembershipVerdict:
    """Disk verdict for a homogeneous polynomial: spectrum iff |lam| <= l2 norm.

    The disk is closed, so exact equality is SPECTRUM; the band only widens a
    thin uncertain shell just outside the boundary.
    """
    degree = p.homogeneous_degree()
    if degree is None or degree < 1:
        raise StructureError("polynomial is not homogeneous of degree >= 1")
    if p.kind != CIRCULAR or not p.is_holomorphic():
        raise StructureError("disk membership applies to holomorphic circular polynomials")
    radius = p.coefficient_l2()
    mod = abs(complex(lam))
    diag = {"method": "disk", "disk_radius": radius, "modulus": mod}
    if mod <= radius:
        return MembershipVerdict(Verdict.SPECTRUM, diag)
    if mod <= radius + band:
        return MembershipVerdict(Verdict.BOUNDARY_UNCERTAIN, diag)
    return MembershipVerdict(Verdict.RESOLVENT, diag)


def walk_g(spec: WalkSpec, lam: complex) -> float:
    """Region function g(lam); the spectrum is where g <= t^2.

    Continuously extended: on the unit circle g = |lam-1|^2 / k, and at
    lam = 0 the formula already evaluates to the correct limit value 1.
    """
    lam = complex(lam)
    r2 = abs(lam) ** 2
    front = abs(lam - 1.0) ** 2
    if abs(abs(lam) - 1.0) <= UNIT_CIRCLE_TOL:
        return front / spec.k
    return front * (r2 ** (1.0 / spec.k) - 1.0) / (r2 - 1.0)


def walk_membership(
    spec: WalkSpec, lam: complex, band: float = CLOSED_FORM_BAND
) -> MembershipVerdict:
    """Closed-region verdict: spectrum iff g(lam) <= t^2 (equality included)."""
    g = walk_g(spec, lam)
    threshold = spec.t**2
    diag = {"method": "walk", "g": g, "threshold": threshold}
    if g <= threshold:
        return MembershipVerdict(Verdict.SPECTRUM, diag)
    if g <= threshold + band:
        return MembershipVerdict(Verdict.BOUNDARY_UNCERTAIN, diag)
    return MembershipVerdict(Verdict.RESOLVENT, diag)


def walk_matrix(spec: WalkSpec, lam: complex) -> np.ndarray:
    """k x k recursion matrix: |lam|^2 strictly above the diagonal, 1 on and below."""
    r2 = abs(complex(lam)) ** 2
    m = np.ones((spec.k, spec.k), dtype=complex)
    m[np.triu_indices(spec.k, k=1)] = r2
    return m


def walk_radius_closed(spec: WalkSpec, lam: complex) -> float:
    """Spectral radius (|lam|^2 - 1) / (|lam|^(2/k) - 1), with limit k on the unit circle."""
    r2 = abs(complex(lam)) ** 2
    if abs(abs(complex(lam)) - 1.0) <= UNIT_CIRCLE_TOL:
        return float(spec.k)
    return (r2 - 1.0) / (r2 ** (1.0 / spec.k) - 1.0)


def walk_eigenvalues_closed(spec: WalkSpec, lam: complex) -> list:
    """All k eigenvalues of the recursion matrix in closed form.

    On the unit circle the limit set is {k, 0, ..., 0}.
    """
    k = spec.k
    r2 = abs(complex(lam)) ** 2
    if abs(abs(complex(lam)) - 1.0) <= UNIT_CIRCLE_TOL:
        return [complex(k)] + [0j] * (k - 1)
    root = r2 ** (1.0 / k)
    return [
        (r2 - 1.0) / (root * cmath.exp(2j * cmath.pi * l / k) - 1.0)
        for l in range(k)
    ]


def walk_char_poly(spec: WalkSpec, lam: complex, x: complex) -> complex:
    """Characteristic polynomial ((x - 1 + |lam|^2)^k - |lam|^2 x^k) / (1 - |lam|^2)."""
    r2 = abs(complex(lam)) ** 2
    if abs(r2 - 1.0) <= UNIT_CIRCLE_TOL:
        raise ValueError("characteristic closed form is singular on the unit circle")
    x = complex(x)
    return ((x - 1.0 + r2) ** spec.k - r2 * x**spec.k) / (1.0 - r2)


def walk_polynomial(spec: WalkSpec) -> NCPolynomial:
    """Expand the walk product into a circular polynomial in k variables.

    Term count doubles per step, so expansion is capped at k <= 6; the closed
    forms above have no such limit.
    """
    if spec.k > MAX_EXPANSION_STEPS:
        raise StructureError(f"walk expansion is capped at k <= {MAX_EXPANSION_STEPS}")
    p = NCPolynomial.constant(CIRCULAR, spec.k, 1.0)
    for i in range(1, spec.k + 1):
        step = NCPolynomial.constant(CIRCULAR, spec.k, 1.0) + spec.t * NCPolynomial.variable(
            CIRCULAR, spec.k, i
        )
        p = p * step
    return p


@dataclass(frozen=True)
class WalkField:
    """Picklable lam -> g(lam) field (spectrum side: below t^2)."""

    spec: WalkSpec
    supports_arrays = True

    def __call__(self, lam):
        if np.ndim(lam) == 0:
            return walk_g(self.spec, complex(lam))
        arr = np.asarray(lam, dtype=complex)
        out = np.empty(arr.shape, dtype=float)
        flat_in, flat_out = arr.ravel(), out.ravel()
        # |lam| and |lam - 1| vectorize; the unit-circle branch needs a mask
        mod = np.abs(flat_in)
        front = np.abs(flat_in - 1.0) ** 2
        on_circle = np.abs(mod - 1.0) <= UNIT_CIRCLE_TOL
        r2 = mod**2
        with np.errstate(divide="ignore", invalid="ignore"):
            generic = front * (r2 ** (1.0 / self.spec.k) - 1.0) / (r2 - 1.0)
        flat_out[:] = np.where(on_circle, front / self.spec.k, generic)
        return out


@dataclass(frozen=True)
class DiskField:
    """Picklable lam -> |lam| field (spectrum side: below the disk radius)."""

    supports_arrays = True

    def __call__(self, lam):
        return np.abs(lam) if np.ndim(lam) else abs(complex(lam))
