"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (add ``-s`` to see the
ACCEPTANCE lines for passing criteria as well).
"""

import csv
import json
import time

import numpy as np
import pytest
from click.testing import CliRunner

from conftest import catalan_numbers, multiset_distance, random_quadratic_form
from freespec import linalg
from freespec.cli import CASE_WINDOWS, main
from freespec.families import (
    WalkSpec,
    walk_char_poly,
    walk_eigenvalues_closed,
    walk_g,
    walk_matrix,
    walk_membership,
    walk_polynomial,
    walk_radius_closed,
)
from freespec.fock import spectral_radius_estimate, trace
from freespec.ncpoly import QuadraticForm, extract_quadratic, parse
from freespec.quadratic import (
    CASE_POLYNOMIALS,
    E1,
    initial_state,
    membership,
    spectral_radius_grid,
    state_trajectory,
    transfer_matrix,
)
from freespec.region import GridSpec, RegionRaster, contour, scan
from freespec.resolvent import level_sums, membership_oracle, solve_alpha
from freespec.verdict import Verdict


def check(num, name, condition, detail=""):
    status = "PASS" if condition else "FAIL"
    print(f"ACCEPTANCE {num:02d} {name}: {status}" + (f" ({detail})" if detail else ""))
    assert condition, f"acceptance criterion {num} ({name}) failed: {detail}"


def test_01_determinant_identity():
    t0 = time.time()
    rng = np.random.default_rng(101)
    worst = 0.0
    count = 0
    while count < 200:
        form = random_quadratic_form(rng)
        lam = complex(rng.normal(), rng.normal())
        if abs(lam) < 1e-3:
            continue
        count += 1
        at = transfer_matrix(form, lam)
        det_q = np.linalg.det(at.q)
        rhs = -np.vdot(at.a_lam, at.a_lam).real * abs(np.linalg.det(at.a_lam)) ** 2
        worst = max(worst, abs(det_q - rhs) / (1 + abs(det_q)))
    check(1, "determinant identity", worst <= 1e-10,
          f"worst rel err {worst:.2e}, {time.time() - t0:.2f}s")


def test_02_initial_state_identity():
    t0 = time.time()
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(200):
        form = random_quadratic_form(rng, with_constant=True)
        lam = form.c0 + complex(rng.normal(), rng.normal()) + 1.5
        state = initial_state(form, lam)
        via_matrix = transfer_matrix(form, lam).q @ E1 / abs(lam - form.c0) ** 2
        worst = max(worst, float(np.linalg.norm(state - via_matrix) / (1 + np.linalg.norm(state))))
    check(2, "initial-state identity", worst <= 1e-13,
          f"worst err {worst:.2e}, {time.time() - t0:.2f}s")


def test_03_trajectory_oracle_equivalence():
    t0 = time.time()
    rng = np.random.default_rng(103)
    worst = 0.0
    for case, text in sorted(CASE_POLYNOMIALS.items()):
        poly = parse(text, d=2)
        form = extract_quadratic(poly)
        for _ in range(20):
            modulus = rng.uniform(0.2, 5.0)
            lam = modulus * np.exp(2j * np.pi * rng.uniform())
            xs = state_trajectory(form, lam, 11).level_sums()  # x_0 .. x_12
            sums = level_sums(solve_alpha(poly, lam, 12))
            err = np.max(np.abs(xs - sums) / np.maximum(np.maximum(np.abs(xs), np.abs(sums)), 1e-300))
            worst = max(worst, float(err))
    check(3, "trajectory/oracle equivalence", worst <= 1e-10,
          f"worst rel err {worst:.2e}, {time.time() - t0:.2f}s")


def test_04_quadratic_disk_degeneration():
    t0 = time.time()
    form = QuadraticForm(a=np.zeros((2, 2)), b=[3, 4])
    grid = GridSpec(-6, 6, -6, 6, 201, 201)
    lams = grid.lambdas()
    values = spectral_radius_grid(form, lams)
    raster = RegionRaster(grid=grid, values=values, level=1.0, band=1e-6)
    verdicts = raster.verdicts()
    decided = np.abs(values - 1.0) > 1e-6
    expected = np.where(np.abs(lams) < 5.0, 1, -1)
    exact = bool(np.all(verdicts[decided] == expected[decided]))
    check(4, "quadratic-to-disk degeneration", exact,
          f"{int(decided.sum())} decided cells, boundary |lam| = 5, {time.time() - t0:.2f}s")


def test_05_walk_closed_forms():
    t0 = time.time()
    rng = np.random.default_rng(105)
    worst_radius = worst_eigs = 0.0
    for k in (1, 2, 3, 5, 8):
        spec = WalkSpec(k, 1.0)
        done = 0
        while done < 100:
            lam = complex(rng.normal(), rng.normal()) * 1.2
            if abs(abs(lam) - 1.0) <= 0.05:
                continue
            done += 1
            m = walk_matrix(spec, lam)
            r_closed = walk_radius_closed(spec, lam)
            r_numeric = linalg.spectral_radius(m)
            worst_radius = max(worst_radius, abs(r_closed - r_numeric) / abs(r_numeric))
            worst_eigs = max(
                worst_eigs,
                multiset_distance(walk_eigenvalues_closed(spec, lam), linalg.eigenvalues(m).values),
            )
    spec5 = WalkSpec(5, 1.0)
    lam5 = complex(np.sqrt(2.0))
    residual = max(abs(walk_char_poly(spec5, lam5, ev)) for ev in walk_eigenvalues_closed(spec5, lam5))
    ok = worst_radius <= 1e-8 and worst_eigs <= 1e-8 and residual <= 1e-8
    check(5, "walk closed forms", ok,
          f"radius {worst_radius:.2e}, eigs {worst_eigs:.2e}, char-poly {residual:.2e}, "
          f"{time.time() - t0:.2f}s")


def test_06_walk_oracle_agreement():
    t0 = time.time()
    grid = GridSpec(-1.5, 3.5, -2.5, 2.5, 101, 101)
    lams = grid.lambdas().ravel()
    disagreements = []
    conclusive_points = 0
    for k in (1, 2, 3):
        for t in (0.5, 1.0):
            spec = WalkSpec(k, t)
            poly = walk_polynomial(spec)
            t2 = t * t
            for lam in lams:
                g = walk_g(spec, lam)
                if abs(g - t2) <= 0.05 * t2:
                    continue
                walk_v = walk_membership(spec, lam).verdict
                if walk_v is Verdict.BOUNDARY_UNCERTAIN:
                    continue
                oracle_v = membership_oracle(poly, lam, n_levels=10, window=5).verdict
                if oracle_v is Verdict.BOUNDARY_UNCERTAIN:
                    continue
                conclusive_points += 1
                if oracle_v is not walk_v:
                    disagreements.append((k, t, lam))
    ok = not disagreements and conclusive_points > 10_000
    check(6, "walk/oracle agreement", ok,
          f"{conclusive_points} conclusive points, {len(disagreements)} disagreements, "
          f"{time.time() - t0:.1f}s")


def test_07_catalan_moments():
    t0 = time.time()
    cat = catalan_numbers(12)
    worst = 0.0
    odd_ok = True
    for n in range(1, 11):
        even = trace(parse(f"s1^{2 * n}"))
        worst = max(worst, abs(even - cat[n]) / cat[n])
        odd_ok = odd_ok and trace(parse(f"s1^{2 * n + 1}")) == 0
    check(7, "Catalan moments", worst <= 1e-9 and odd_ok,
          f"worst rel err {worst:.2e}, odd moments exact: {odd_ok}, {time.time() - t0:.2f}s")


def test_08_spectral_radius_estimator():
    t0 = time.time()
    cat = catalan_numbers(25)
    est = spectral_radius_estimate(parse("s1"), 24)
    lower_target = cat[24] ** (1 / 48)
    upper_target = (25**1.5 * np.sqrt(cat[24])) ** (1 / 24)
    lower_ok = abs(est.lower[-1] - lower_target) <= 0.01 * lower_target
    upper_ok = abs(est.upper[-1] - upper_target) <= 0.01 * upper_target
    brackets = est.lower[-1] <= 2.0 <= est.upper[-1]
    circ = spectral_radius_estimate(parse("c1"), 20)
    circ_ok = bool(np.all(circ.lower == 1.0))
    check(8, "spectral-radius estimator",
          lower_ok and upper_ok and brackets and circ_ok,
          f"lower {est.lower[-1]:.4f} (target {lower_target:.4f}), "
          f"upper {est.upper[-1]:.4f} (target {upper_target:.4f}), {time.time() - t0:.2f}s")


def test_09_cross_method_quadratic_agreement():
    t0 = time.time()
    rates = {}
    for case, text in sorted(CASE_POLYNOMIALS.items()):
        form = extract_quadratic(parse(text, d=2))
        grid = GridSpec(*CASE_WINDOWS[case], 301, 301)
        lams = grid.lambdas()
        radii = spectral_radius_grid(form, lams)
        flat_lams = lams.ravel()
        flat_r = radii.ravel()
        decided = np.abs(flat_r - 1.0) > 0.01
        agree = 0
        total = 0
        for lam, r in zip(flat_lams[decided], flat_r[decided]):
            total += 1
            radius_v = Verdict.SPECTRUM if r >= 1.0 else Verdict.RESOLVENT
            limit_v = membership(form, lam, method="limit").verdict
            if limit_v is radius_v:
                agree += 1
        rates[case] = agree / total
    ok = all(rate >= 0.999 for rate in rates.values())
    detail = ", ".join(f"{case}={rate:.5f}" for case, rate in rates.items())
    check(9, "cross-method quadratic agreement", ok, f"{detail}, {time.time() - t0:.1f}s")


@pytest.mark.parametrize("case", sorted(CASE_POLYNOMIALS))
def test_10_figure_desk_reproduction(case, tmp_path):
    t0 = time.time()
    out = tmp_path / f"fig_{case}.svg"
    result = CliRunner().invoke(
        main, ["figure1", "--case", case, "--n", "500", "--seed", "7", "--out", str(out)]
    )
    assert result.exit_code == 0, result.output
    meta = json.loads(out.with_suffix(".meta.json").read_text())
    fraction = meta["containment_fraction"]

    verdicts = {}
    with open(out.with_suffix(".csv")) as handle:
        for row in csv.DictReader(handle):
            verdicts[(float(row["re"]), float(row["im"]))] = row["verdict"]
    keys = np.array(list(verdicts.keys()))
    labels = np.array([verdicts[tuple(k)] for k in keys])
    spectrum_pts = keys[labels == "spectrum"]
    nonempty = spectrum_pts.size > 0
    re_min, re_max, im_min, im_max = CASE_WINDOWS[case]
    bounded = (
        nonempty
        and spectrum_pts[:, 0].min() > re_min
        and spectrum_pts[:, 0].max() < re_max
        and spectrum_pts[:, 1].min() > im_min
        and spectrum_pts[:, 1].max() < im_max
    )
    nearest_origin = keys[np.argmin(np.hypot(keys[:, 0], keys[:, 1]))]
    contains_zero = verdicts[tuple(nearest_origin)] == "spectrum"
    ok = nonempty and bounded and contains_zero and fraction >= 0.98
    check(10, f"figure desk reproduction case {case}", ok,
          f"containment {fraction:.4f}, spectrum cells {spectrum_pts.size // 2}, "
          f"{time.time() - t0:.1f}s")


def test_11_marching_squares_circle():
    t0 = time.time()
    grid = GridSpec(-2, 2, -2, 2, 401, 401)
    lams = grid.lambdas()
    raster = RegionRaster(grid=grid, values=np.abs(lams), level=1.0)
    lines = contour(raster)
    ok = len(lines) == 1
    if ok:
        line = lines[0]
        closed = bool(np.allclose(line[0], line[-1]))
        radii = np.hypot(line[:, 0], line[:, 1])
        max_dev = float(np.max(np.abs(radii - 1.0)))
        cell = grid.cell_size()[0]
        ok = closed and max_dev < cell
        detail = f"max deviation {max_dev:.5f} vs cell {cell:.3f}, {time.time() - t0:.2f}s"
    else:
        detail = f"{len(lines)} polylines"
    check(11, "marching squares circle", ok, detail)


def test_12_homogeneous_oracle():
    t0 = time.time()
    p = parse("c1")
    inside = membership_oracle(p, 0.8, n_levels=60)
    outside = membership_oracle(p, 1.2, n_levels=60)
    norm_est = membership_oracle(p, 2.0, n_levels=60)
    levels_ok = (
        inside.diagnostics["levels"] <= 60 and outside.diagnostics["levels"] <= 60
    )
    partial = norm_est.diagnostics["partial_norm_sq"]
    ok = (
        inside.verdict is Verdict.SPECTRUM
        and outside.verdict is Verdict.RESOLVENT
        and levels_ok
        and abs(partial - 1 / 3) <= 0.01 / 3
    )
    check(12, "homogeneous oracle", ok,
          f"verdicts {inside.verdict}/{outside.verdict}, partial sum {partial:.6f}, "
          f"{time.time() - t0:.2f}s")
