import numpy as np
import pytest

from conftest import catalan_numbers, count_noncrossing_pairings
from freespec.errors import MemoryBudgetError
from freespec.fock import (
    apply_annihilation,
    apply_creation,
    apply_polynomial,
    l2_norm,
    spectral_radius_estimate,
    trace,
    vacuum,
)
from freespec.ncpoly import CIRCULAR, SEMICIRCULAR, Letter, NCPolynomial, parse


def fvec(v):
    return dict(v.items())


def test_creation_on_vacuum():
    v = apply_creation(Letter(1), vacuum(2, SEMICIRCULAR))
    assert fvec(v) == {(Letter(1),): 1.0}


def test_annihilation_strips_matching_leading_letter():
    e12 = apply_creation(Letter(1), apply_creation(Letter(2), vacuum(2, SEMICIRCULAR)))
    assert fvec(apply_annihilation(Letter(1), e12)) == {(Letter(2),): 1.0}
    assert fvec(apply_annihilation(Letter(2), e12)) == {}
    assert fvec(apply_annihilation(Letter(1), vacuum(2, SEMICIRCULAR))) == {}


def test_semicircular_square_on_vacuum():
    out = apply_polynomial(parse("s1^2"), vacuum(1, SEMICIRCULAR))
    assert fvec(out) == {(): 1.0, (Letter(1), Letter(1)): 1.0}


def test_single_letter_actions():
    assert fvec(apply_polynomial(parse("s1"), vacuum(1, SEMICIRCULAR))) == {(Letter(1),): 1.0}
    assert fvec(apply_polynomial(parse("c1"), vacuum(1, CIRCULAR))) == {(Letter(1),): 1.0}
    assert fvec(apply_polynomial(parse("c1'"), vacuum(1, CIRCULAR))) == {(Letter(1, True),): 1.0}


def test_circular_letter_cross_term():
    # c1 c1' on the vacuum: create the barred direction, then c1 both prepends
    # and strips, giving the two-letter word plus the vacuum
    out = apply_polynomial(parse("c1*c1'"), vacuum(1, CIRCULAR))
    assert fvec(out) == {(): 1.0, (Letter(1), Letter(1, True)): 1.0}
    # the vacuum expectation is tracial: both orders give 1
    assert trace(parse("c1*c1'")) == 1.0
    assert trace(parse("c1'*c1")) == 1.0


def test_alphabet_mismatch_rejected():
    with pytest.raises(ValueError):
        apply_polynomial(parse("s1"), vacuum(1, CIRCULAR))
    with pytest.raises(ValueError):
        apply_polynomial(parse("c1"), vacuum(2, CIRCULAR))


def test_trace_small_moments_against_pairing_count():
    # ground the Catalan recurrence itself on a brute-force pairing count
    cat = catalan_numbers(5)
    for n in range(1, 4):
        assert count_noncrossing_pairings(n) == cat[n]
        assert trace(parse(f"s1^{2 * n}")) == pytest.approx(cat[n])


def test_trace_catalan_moments(catalan):
    for n in range(1, 11):
        even = trace(parse(f"s1^{2 * n}"))
        assert abs(even - catalan[n]) <= 1e-9 * catalan[n]
        assert trace(parse(f"s1^{2 * n + 1}")) == 0


def test_trace_circular_vanishes():
    assert trace(parse("c1")) == 0


def test_l2_norms():
    for n in (1, 3, 6):
        assert l2_norm(parse(f"c1^{n}")) == pytest.approx(1.0, abs=1e-15)
    cat = catalan_numbers(8)
    for n in (1, 2, 4):
        assert l2_norm(parse(f"s1^{n}")) ** 2 == pytest.approx(cat[n], rel=1e-12)
    assert l2_norm(parse("2*c1*c2 - 1i*c2*c2", d=2)) == pytest.approx(np.sqrt(5), rel=1e-13)


def test_coefficient_l2_matches_fock_norm_for_holomorphic():
    rng = np.random.default_rng(4)
    for _ in range(20):
        terms = {}
        for _ in range(rng.integers(1, 6)):
            word = tuple(Letter(int(i)) for i in rng.integers(1, 3, size=rng.integers(0, 4)))
            terms[word] = complex(rng.normal(), rng.normal())
        p = NCPolynomial(CIRCULAR, 2, terms)
        assert p.coefficient_l2() ** 2 == pytest.approx(l2_norm(p) ** 2, abs=1e-12)


def _random_poly(rng, d=2, max_degree=3, kind=CIRCULAR, n_terms=5):
    terms = {}
    for _ in range(n_terms):
        length = int(rng.integers(0, max_degree + 1))
        word = tuple(
            Letter(int(rng.integers(1, d + 1)), bool(rng.integers(2)) and kind == CIRCULAR)
            for _ in range(length)
        )
        terms[word] = complex(rng.normal(), rng.normal())
    return NCPolynomial(kind, d, terms)


def test_inner_product_is_trace_of_adjoint_product():
    rng = np.random.default_rng(12)
    for _ in range(15):
        p = _random_poly(rng)
        q = _random_poly(rng)
        lhs = apply_polynomial(p, vacuum(2, CIRCULAR)).inner(apply_polynomial(q, vacuum(2, CIRCULAR)))
        rhs = trace(q.adjoint() * p)
        assert abs(lhs - rhs) <= 1e-10 * (1 + abs(rhs))


def test_polynomial_action_is_multiplicative():
    rng = np.random.default_rng(13)
    for kind in (CIRCULAR, SEMICIRCULAR):
        for _ in range(10):
            p = _random_poly(rng, kind=kind, max_degree=2, n_terms=4)
            q = _random_poly(rng, kind=kind, max_degree=2, n_terms=4)
            via_product = apply_polynomial(p * q, vacuum(2, kind))
            via_chain = apply_polynomial(p, apply_polynomial(q, vacuum(2, kind)))
            diff = {w: a for w, a in via_product.amplitudes.items()}
            for w, a in via_chain.amplitudes.items():
                diff[w] = diff.get(w, 0j) - a
            assert max((abs(v) for v in diff.values()), default=0.0) <= 1e-12


def test_radius_estimate_semicircular(catalan):
    cat = catalan_numbers(25)
    est = spectral_radius_estimate(parse("s1"), 24)
    lower_oracle = cat[24] ** (1 / 48)
    upper_oracle = (25**1.5 * np.sqrt(cat[24])) ** (1 / 24)
    assert est.lower[-1] == pytest.approx(lower_oracle, rel=1e-10)
    assert est.upper[-1] == pytest.approx(upper_oracle, rel=1e-10)
    # brackets the known radius 2 of the semicircular generator
    assert est.lower[-1] <= 2.0 <= est.upper[-1]
    assert np.all(est.lower <= est.upper + 1e-12)
    assert np.all(est.upper >= 2.0)


def test_radius_estimate_circular_unit():
    est = spectral_radius_estimate(parse("c1"), 12)
    assert np.allclose(est.lower, 1.0)
    assert np.all(est.upper >= 1.0)
    assert not est.truncated


def test_radius_estimate_scaling():
    base = spectral_radius_estimate(parse("s1"), 10)
    doubled = spectral_radius_estimate(parse("2*s1"), 10)
    assert np.allclose(doubled.lower, 2 * base.lower, rtol=1e-12)
    assert np.allclose(doubled.upper, 2 * base.upper, rtol=1e-12)


def test_budget_enforced():
    with pytest.raises(MemoryBudgetError):
        apply_polynomial(parse("c1*c2 + c2*c1", d=2), vacuum(2, CIRCULAR), budget=1)
    est = spectral_radius_estimate(parse("c1*c2 + c2*c1 + c1 + c2", d=2), 40, budget=500)
    assert est.truncated
    assert est.n.size > 0
