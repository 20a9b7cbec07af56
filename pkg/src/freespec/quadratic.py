"""Membership test for quadratics in two free circular variables via a 6x6 transfer matrix.

For f = sum a_ij c_i c_j + sum b_i c_i + c0 and lam' = lam - c0 the level sums
x_n and the level correlations y_n, z_n of the resolvent expansion obey a
linear recursion whose state (x_{n+1}, x_n, y_n, z_n, conj y_n, conj z_n) is
propagated by one fixed matrix Q built from A/lam' and b/lam'.  lam lies in
the spectrum exactly when lam = c0 or Q^n e_1 does not tend to zero; when b
vanishes, A is symmetric, or conj(A)A has no two distinct real eigenvalues,
that limit condition is equivalent to the spectral radius of Q being >= 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import StructureError
from .linalg import LimitVerdict
from .ncpoly import QuadraticForm
from .verdict import MembershipVerdict, Verdict

__all__ = [
    "CASE_POLYNOMIALS",
    "QuadraticAtLambda",
    "RadiusTestReport",
    "Trajectory",
    "transfer_matrix",
    "initial_state",
    "state_trajectory",
    "radius_test_conditions",
    "membership",
    "spectral_radius_grid",
    "RadiusField",
]

# the four showcase quadratics rendered by the `figure1` CLI command
CASE_POLYNOMIALS = {
    "A": "0.5*c1^2 + 0.5*c1*c2 + 0.5*c2*c1 + 0.5*c2^2 + 0.5*c1 + 0.5*c2",
    "B": "c1*c2 + c2*c1 + c1 + c2",
    "C": "c1^2 + c2*c1 - c2^2 + c1 + 1i*c2",
    "D": "(0.5i)*c1^2 + c1*c2 + 2*c2*c1 + c2^2",
}

STATE_DIM = 6
E1 = np.array([1, 0, 0, 0, 0, 0], dtype=complex)

DEFAULT_RADIUS_BAND = 1e-6
DEFAULT_SUBSPACE_TOL = 1e-6


@dataclass(frozen=True)
class QuadraticAtLambda:
    """The scaled data A/lam', b/lam' and the 6x6 state-transfer matrix at one lam."""

    form: QuadraticForm
    lam: complex
    lam_shift: complex
    a_lam: np.ndarray
    b_lam: np.ndarray
    q: np.ndarray


def transfer_matrix(form: QuadraticForm, lam: complex) -> QuadraticAtLambda:
    """Build the 6x6 transfer matrix at lam; raises StructureError when lam equals c0."""
    lam = complex(lam)
    shift = lam - form.c0
    if shift == 0:
        raise StructureError(
            "lambda equals the constant term; the point is in the spectrum by definition"
        )
    a_lam = form.a / shift
    b_lam = form.b / shift
    q = np.zeros((STATE_DIM, STATE_DIM), dtype=complex)
    q[0, 0] = np.vdot(b_lam, b_lam)
    q[0, 1] = np.vdot(a_lam, a_lam)
    q[0, 2:4] = b_lam.conj() @ a_lam
    q[0, 4:6] = b_lam @ a_lam.conj()
    q[1, 0] = 1.0
    q[2:4, 0] = b_lam.conj()
    q[2:4, 4:6] = a_lam.conj()
    q[4:6, 0] = b_lam
    q[4:6, 2:4] = a_lam
    return QuadraticAtLambda(form=form, lam=lam, lam_shift=shift, a_lam=a_lam, b_lam=b_lam, q=q)


def initial_state(form: QuadraticForm, lam: complex) -> np.ndarray:
    """State (x_1, x_0, y_0, z_0, conj y_0, conj z_0) seeding the recursion."""
    lam = complex(lam)
    shift = lam - form.c0
    if shift == 0:
        raise StructureError("lambda equals the constant term")
    x0 = 1.0 / abs(shift) ** 2
    b_lam = form.b / shift
    x1 = x0 * np.vdot(b_lam, b_lam)
    y0 = np.conj(form.b[0] / (abs(shift) ** 2 * shift))
    z0 = np.conj(form.b[1] / (abs(shift) ** 2 * shift))
    return np.array([x1, x0, y0, z0, np.conj(y0), np.conj(z0)], dtype=complex)


@dataclass(frozen=True)
class Trajectory:
    """States for n = 0..N (rows); row n holds (x_{n+1}, x_n, y_n, z_n, conj y_n, conj z_n)."""

    states: np.ndarray
    overflow: bool

    def level_sums(self) -> np.ndarray:
        """x_0 .. x_{N+1} (real parts; imaginary parts are rounding noise)."""
        return np.concatenate([self.states[:, 1].real, [self.states[-1, 0].real]])


def state_trajectory(form: QuadraticForm, lam: complex, n: int) -> Trajectory:
    """Iterate the transfer matrix from the initial state for n steps.

    Overflow stops the iteration early and sets the divergence flag; the rows
    computed so far are returned.
    """
    at = transfer_matrix(form, lam)
    state = initial_state(form, lam)
    rows = [state]
    for _ in range(n):
        with np.errstate(over="ignore", invalid="ignore"):
            state = at.q @ state
        if not np.all(np.isfinite(state.view(float))):
            return Trajectory(states=np.asarray(rows), overflow=True)
        rows.append(state)
    return Trajectory(states=np.asarray(rows), overflow=False)


@dataclass(frozen=True)
class RadiusTestReport:
    """Which of the sufficient conditions for the radius shortcut hold for a form."""

    b_is_zero: bool
    a_symmetric: bool
    abar_a_eigenvalues: tuple
    has_distinct_real_eigs: bool

    @property
    def radius_test_valid(self) -> bool:
        return self.b_is_zero or self.a_symmetric or not self.has_distinct_real_eigs


def radius_test_conditions(form: QuadraticForm) -> RadiusTestReport:
    """Check b = 0, symmetry of A, and the eigenvalue structure of conj(A) A."""
    b_is_zero = float(np.linalg.norm(form.b)) <= 1e-12
    a_norm = float(np.linalg.norm(form.a))
    a_symmetric = float(np.linalg.norm(form.a - form.a.T)) <= 1e-12 * max(a_norm, 1e-300)
    abar_a = form.a.conj() @ form.a
    eigs = np.linalg.eigvals(abar_a)
    scale = max(float(np.linalg.norm(abar_a)), 1e-300)
    both_real = bool(np.all(np.abs(eigs.imag) <= 1e-9 * scale))
    distinct = bool(abs(eigs[0] - eigs[1]) > 1e-9 * scale)
    return RadiusTestReport(
        b_is_zero=b_is_zero,
        a_symmetric=a_symmetric,
        abar_a_eigenvalues=(complex(eigs[0]), complex(eigs[1])),
        has_distinct_real_eigs=both_real and distinct,
    )


def _radius_verdict(radius: float, band: float) -> Verdict:
    if radius >= 1.0 + band:
        return Verdict.SPECTRUM
    if radius <= 1.0 - band:
        return Verdict.RESOLVENT
    return Verdict.BOUNDARY_UNCERTAIN


_LIMIT_TO_VERDICT = {
    LimitVerdict.CONVERGES_TO_ZERO: Verdict.RESOLVENT,
    LimitVerdict.DOES_NOT_CONVERGE: Verdict.SPECTRUM,
    LimitVerdict.UNCERTAIN: Verdict.BOUNDARY_UNCERTAIN,
}


def membership(
    form: QuadraticForm,
    lam: complex,
    method: str = "auto",
    band: float = DEFAULT_RADIUS_BAND,
    subspace_tol: float = DEFAULT_SUBSPACE_TOL,
    orbit_n_max: int = 10_000,
) -> MembershipVerdict:
    """Spectral membership of lam for the quadratic form.

    method "radius" thresholds the spectral radius of the transfer matrix at 1
    (guaranteed equivalent when a RadiusTestReport condition holds); "limit"
    tests whether Q^n e_1 tends to zero via the ordered-Schur subspace test
    with a power-orbit fallback; "auto" uses the radius when it is valid and
    otherwise runs the limit test with an orbit confirmation, reporting
    disagreement instead of hiding it.
    """
    if method not in ("auto", "limit", "radius"):
        raise ValueError(f"unknown method {method!r}")
    lam = complex(lam)
    if lam == form.c0:
        return MembershipVerdict(Verdict.SPECTRUM, {"method": "shift-degenerate"})
    at = transfer_matrix(form, lam)
    report = radius_test_conditions(form)
    radius = linalg.spectral_radius(at.q)
    diag = {
        "spectral_radius": radius,
        "radius_valid": report.radius_test_valid,
        "method": method,
    }

    if method == "radius" or (method == "auto" and report.radius_test_valid):
        diag["method"] = "radius"
        return MembershipVerdict(_radius_verdict(radius, band), diag)

    schur_limit = linalg.stable_subspace_membership(at.q, E1, threshold=1.0, tol=subspace_tol)
    if method == "limit":
        diag["method"] = "limit"
        if schur_limit is LimitVerdict.UNCERTAIN:
            orbit = linalg.power_orbit(at.q, E1, n_max=orbit_n_max)
            diag["orbit_iterations"] = orbit.iterations
            return MembershipVerdict(_LIMIT_TO_VERDICT[orbit.verdict], diag)
        return MembershipVerdict(_LIMIT_TO_VERDICT[schur_limit], diag)

    # auto without a valid radius shortcut: Schur limit with orbit confirmation
    diag["method"] = "limit+orbit"
    orbit = linalg.power_orbit(at.q, E1, n_max=orbit_n_max)
    diag["orbit_iterations"] = orbit.iterations
    schur_v = _LIMIT_TO_VERDICT[schur_limit]
    orbit_v = _LIMIT_TO_VERDICT[orbit.verdict]
    if schur_v is Verdict.BOUNDARY_UNCERTAIN:
        return MembershipVerdict(orbit_v, diag)
    if orbit_v is Verdict.BOUNDARY_UNCERTAIN:
        return MembershipVerdict(schur_v, diag)
    if schur_v is not orbit_v:
        diag["disagreement"] = True
        return MembershipVerdict(Verdict.BOUNDARY_UNCERTAIN, diag)
    return MembershipVerdict(schur_v, diag)


def spectral_radius_grid(form: QuadraticForm, lams: np.ndarray) -> np.ndarray:
    """Vectorized spectral radius of the transfer matrix over an array of lambdas.

    Cells where lam equals the constant term get +inf (they are in the
    spectrum by the shift-degenerate clause).
    """
    lams = np.asarray(lams, dtype=complex)
    flat = lams.ravel()
    out = np.full(flat.shape, np.inf)
    shift = flat - form.c0
    ok = shift != 0
    if np.any(ok):
        inv = 1.0 / shift[ok]
        a_lam = form.a[None, :, :] * inv[:, None, None]
        b_lam = form.b[None, :] * inv[:, None]
        m = int(inv.size)
        q = np.zeros((m, STATE_DIM, STATE_DIM), dtype=complex)
        q[:, 0, 0] = np.sum(np.abs(b_lam) ** 2, axis=1)
        q[:, 0, 1] = np.sum(np.abs(a_lam) ** 2, axis=(1, 2))
        q[:, 0, 2:4] = np.einsum("mi,mij->mj", b_lam.conj(), a_lam)
        q[:, 0, 4:6] = np.einsum("mi,mij->mj", b_lam, a_lam.conj())
        q[:, 1, 0] = 1.0
        q[:, 2:4, 0] = b_lam.conj()
        q[:, 2:4, 4:6] = a_lam.conj()
        q[:, 4:6, 0] = b_lam
        q[:, 4:6, 2:4] = a_lam
        out[ok] = linalg.spectral_radii(q)
    return out.reshape(lams.shape)


@dataclass(frozen=True)
class RadiusField:
    """Picklable lam -> r(Q_lam) field for region scans (spectrum side: above 1)."""

    form: QuadraticForm
    supports_arrays = True

    def __call__(self, lam):
        if np.ndim(lam) == 0:
            return float(spectral_radius_grid(self.form, np.asarray([lam]))[0])
        return spectral_radius_grid(self.form, np.asarray(lam))
