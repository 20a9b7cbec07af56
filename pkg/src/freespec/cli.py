"""Command-line surface: region figures, membership queries, estimator tables, clouds.

Every command echoes a JSON metadata block (exact config, tool version, seeds)
either alongside its output files (``<out stem>.meta.json``) or to stdout, and
re-running with identical flags reproduces outputs byte for byte.

Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 inconclusive
single-point query.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__, families, fock, quadratic, region, resolvent, rmt
from .errors import MemoryBudgetError, NumericalError, ParseError, StructureError
from .ncpoly import CIRCULAR, extract_quadratic, parse
from .verdict import Verdict

EXIT_NUMERICAL = 3
EXIT_INCONCLUSIVE = 4

# plot windows for the four showcase quadratics (region bounding boxes plus margin)
CASE_WINDOWS = {
    "A": (-2.5, 2.5, -2.5, 2.5),
    "B": (-3.2, 3.2, -3.2, 3.2),
    "C": (-3.2, 3.2, -3.2, 3.2),
    "D": (-3.2, 3.2, -3.2, 3.2),
}

_NUMERICAL_ERRORS = (NumericalError, MemoryBudgetError, np.linalg.LinAlgError)


def _config_callback(ctx, param, value):
    if not value:
        return value
    data = {}
    for raw in Path(value).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise click.UsageError(f"config line is not KEY=VALUE: {raw!r}")
        data[key.strip().replace("-", "_")] = val.strip()
    # config supplies defaults; explicit flags still win
    ctx.default_map = {**data, **(ctx.default_map or {})}
    return value


def config_option(f):
    return click.option(
        "--config",
        type=click.Path(exists=True, dir_okay=False),
        expose_value=False,
        is_eager=True,
        callback=_config_callback,
        help="Key=value file supplying flag defaults (flags win).",
    )(f)


def _parse_poly(text, d=None, kind=None):
    try:
        return parse(text, d=d, kind=kind)
    except (ParseError, ValueError) as exc:
        raise click.UsageError(f"bad --poly value: {exc}")


def _parse_complex(text):
    try:
        re_part, _, im_part = text.partition(",")
        return complex(float(re_part), float(im_part or 0.0))
    except ValueError:
        raise click.UsageError(f"expected RE,IM - got {text!r}")


def _parse_window(text):
    try:
        parts = [float(v) for v in text.split(",")]
        if len(parts) != 4:
            raise ValueError
        return tuple(parts)
    except ValueError:
        raise click.UsageError(f"expected RE_MIN,RE_MAX,IM_MIN,IM_MAX - got {text!r}")


def _metadata(command, params, **extra):
    doc = {"tool": "freespec", "version": __version__, "command": command, "config": params}
    doc.update(extra)
    return doc


def _write_meta(out_path: Path, doc) -> Path:
    meta_path = out_path.with_suffix(".meta.json")
    meta_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return meta_path


def _echo_meta(doc) -> None:
    click.echo(json.dumps(doc, indent=2, sort_keys=True))


def _auto_window(field, center, radius, level, side):
    """Coarse-scan a crude box and pad the bounding box of the spectrum set."""
    grid = region.GridSpec(
        center.real - radius, center.real + radius,
        center.imag - radius, center.imag + radius, 81, 81,
    )
    raster = region.scan(field, grid, level=level, spectrum_side=side)
    mask = raster.verdicts() >= 0  # spectrum plus the uncertain shell
    xs, ys = grid.xs(), grid.ys()
    if not mask.any():
        return (center.real - 1.0, center.real + 1.0, center.imag - 1.0, center.imag + 1.0)
    x_hit = xs[mask.any(axis=0)]
    y_hit = ys[mask.any(axis=1)]
    pad = 0.35 * max(x_hit.max() - x_hit.min(), y_hit.max() - y_hit.min(), 1.0)
    return (
        float(x_hit.min() - pad), float(x_hit.max() + pad),
        float(y_hit.min() - pad), float(y_hit.max() + pad),
    )


def _emit_region_outputs(out, raster, contours, scatter, title, meta_doc):
    out = Path(out)
    region.emit_svg(out, raster, contours=contours, scatter=scatter, title=title)
    csv_path = out.with_suffix(".csv")
    region.emit_csv(csv_path, raster)
    meta_path = _write_meta(out, meta_doc)
    verdicts = raster.verdicts()
    click.echo(
        f"wrote {out}, {csv_path}, {meta_path} | grid {raster.grid.nx}x{raster.grid.ny}, "
        f"spectrum cells {int((verdicts == 1).sum())}, boundary polylines {len(contours)}"
    )


@click.group()
@click.version_option(__version__, prog_name="freespec")
def main():
    """Spectra of polynomials in free circular/semicircular operators."""


@main.group()
def spectrum():
    """Region computations for specific polynomial families."""


@spectrum.command("quad")
@click.option("--poly", required=True, help="Quadratic in c1, c2 (holomorphic).")
@click.option("--grid", "window", default=None, help="RE_MIN,RE_MAX,IM_MIN,IM_MAX (auto when omitted).")
@click.option("--grid-size", default=301, show_default=True, help="Nodes per axis.")
@click.option("--method", type=click.Choice(["auto", "limit", "radius"]), default="auto", show_default=True)
@click.option("--band", default=1e-6, show_default=True, help="Uncertain band around the level.")
@click.option("--jobs", default=1, show_default=True, help="Worker processes for per-cell methods.")
@click.option("--out", default="quad.svg", show_default=True, type=click.Path(dir_okay=False))
@config_option
def spectrum_quad(poly, window, grid_size, method, band, jobs, out):
    """Transfer-matrix spectral region of a quadratic in two circular variables."""
    p = _parse_poly(poly, d=2, kind=CIRCULAR)
    try:
        form = extract_quadratic(p)
    except StructureError as exc:
        raise click.UsageError(str(exc))
    field = quadratic.RadiusField(form)
    try:
        if window is None:
            crude = 2.0 * (2.0 * np.linalg.norm(form.a) + np.linalg.norm(form.b)) + 1.0
            win = _auto_window(field, complex(form.c0), crude, 1.0, "above")
        else:
            win = _parse_window(window)
        grid = region.GridSpec(*win, grid_size, grid_size)
        raster = region.scan(field, grid, level=1.0, band=band, meta={"poly": poly})
        report = quadratic.radius_test_conditions(form)
        if method == "limit" or (method == "auto" and not report.radius_test_valid):
            decide = _QuadDecider(form, "limit", band)
            override = region.scan_verdicts(decide, grid, jobs=jobs)
            raster = region.RegionRaster(
                grid=grid, values=raster.values, level=1.0, band=band,
                verdict_override=override, meta=raster.meta,
            )
            used = "limit"
        else:
            used = "radius"
        contours = region.contour(raster)
    except _NUMERICAL_ERRORS as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    meta = _metadata(
        "spectrum quad",
        {"poly": poly, "grid": list(win), "grid_size": grid_size, "method": method,
         "band": band, "jobs": jobs},
        method_used=used,
        radius_test_valid=report.radius_test_valid,
    )
    _emit_region_outputs(out, raster, contours, None, poly, meta)


class _QuadDecider:
    """Picklable per-cell verdict for the limit method."""

    def __init__(self, form, method, band):
        self.form = form
        self.method = method
        self.band = band

    def __call__(self, lam):
        v = quadratic.membership(self.form, lam, method=self.method, band=self.band)
        return {Verdict.SPECTRUM: 1, Verdict.RESOLVENT: -1, Verdict.BOUNDARY_UNCERTAIN: 0}[v.verdict]


@spectrum.command("walk")
@click.option("--k", required=True, type=int, help="Step count of the walk product.")
@click.option("--t", required=True, type=float, help="Step weight.")
@click.option("--grid", "window", default=None, help="RE_MIN,RE_MAX,IM_MIN,IM_MAX (auto when omitted).")
@click.option("--grid-size", default=301, show_default=True)
@click.option("--band", default=1e-9, show_default=True)
@click.option("--out", default="walk.svg", show_default=True, type=click.Path(dir_okay=False))
@config_option
def spectrum_walk(k, t, window, grid_size, band, out):
    """Closed-form spectral region of the k-step free walk (1+t c_1)...(1+t c_k)."""
    try:
        spec = families.WalkSpec(k=k, t=t)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    field = families.WalkField(spec)
    level = t * t
    try:
        if window is None:
            crude = 2.0 * (abs(t) * k + 1.0)
            win = _auto_window(field, 1 + 0j, crude, level, "below")
        else:
            win = _parse_window(window)
        grid = region.GridSpec(*win, grid_size, grid_size)
        raster = region.scan(field, grid, level=level, band=band, spectrum_side="below",
                             meta={"k": k, "t": t})
        contours = region.contour(raster)
    except _NUMERICAL_ERRORS as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    meta = _metadata(
        "spectrum walk",
        {"k": k, "t": t, "grid": list(win), "grid_size": grid_size, "band": band},
    )
    title = f"walk k={k}, t={t}"
    _emit_region_outputs(out, raster, contours, None, title, meta)


@spectrum.command("homog")
@click.option("--poly", required=True, help="Homogeneous holomorphic circular polynomial.")
@click.option("--grid-size", default=301, show_default=True)
@click.option("--out", default=None, type=click.Path(dir_okay=False),
              help="Optional disk figure output (SVG).")
@config_option
def spectrum_homog(poly, grid_size, out):
    """Disk report for a homogeneous polynomial: spectrum radius = coefficient L2 norm."""
    p = _parse_poly(poly, kind=CIRCULAR)
    degree = p.homogeneous_degree()
    if degree is None or degree < 1 or not p.is_holomorphic():
        raise click.UsageError("polynomial must be homogeneous of degree >= 1 without adjoints")
    radius = p.coefficient_l2()
    click.echo(f"spectrum is the closed disk |lambda| <= {radius:.12g} (degree {degree})")
    meta = _metadata("spectrum homog", {"poly": poly, "grid_size": grid_size},
                     disk_radius=radius, degree=degree)
    if out:
        half = 1.4 * radius if radius > 0 else 1.0
        grid = region.GridSpec(-half, half, -half, half, grid_size, grid_size)
        raster = region.scan(families.DiskField(), grid, level=radius, band=1e-9,
                             spectrum_side="below", meta={"poly": poly})
        contours = region.contour(raster)
        _emit_region_outputs(out, raster, contours, None, poly, meta)
    else:
        _echo_meta(meta)


@main.command()
@click.option("--poly", required=True, help="Holomorphic circular polynomial.")
@click.option("--lambda", "lam", required=True, help="Query point RE,IM.")
@click.option("--levels", default=None, type=int, help="Level cap (adaptive when omitted).")
@click.option("--window", default=resolvent.DEFAULT_WINDOW, show_default=True, type=int)
@click.option("--margin", default=resolvent.DEFAULT_MARGIN, show_default=True, type=float)
@config_option
def oracle(poly, lam, levels, window, margin):
    """Generic membership verdict from the resolvent coefficient recursion."""
    p = _parse_poly(poly, kind=CIRCULAR)
    z = _parse_complex(lam)
    try:
        verdict = resolvent.membership_oracle(p, z, n_levels=levels, window=window, margin=margin)
    except StructureError as exc:
        raise click.UsageError(str(exc))
    except _NUMERICAL_ERRORS as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    click.echo(f"verdict: {verdict}")
    for key in sorted(verdict.diagnostics):
        click.echo(f"  {key}: {verdict.diagnostics[key]}")
    _echo_meta(_metadata(
        "oracle",
        {"poly": poly, "lambda": [z.real, z.imag], "levels": levels,
         "window": window, "margin": margin},
        verdict=str(verdict),
    ))
    if not verdict.conclusive:
        sys.exit(EXIT_INCONCLUSIVE)


@main.command()
@click.option("--poly", required=True, help="Polynomial in circular or semicircular variables.")
@click.option("--nmax", default=24, show_default=True, type=int)
@click.option("--out", default=None, type=click.Path(dir_okay=False), help="CSV output (stdout when omitted).")
@config_option
def radius(poly, nmax, out):
    """Spectral-radius bracket table from L2 norms of powers."""
    p = _parse_poly(poly)
    try:
        est = fock.spectral_radius_estimate(p, nmax)
    except _NUMERICAL_ERRORS as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    lines = ["n,l2_norm,lower,upper"]
    for i in range(est.n.size):
        lines.append(f"{est.n[i]},{est.l2_norms[i]:.17g},{est.lower[i]:.17g},{est.upper[i]:.17g}")
    text = "\n".join(lines) + "\n"
    meta = _metadata("radius", {"poly": poly, "nmax": nmax}, truncated=est.truncated)
    if out:
        Path(out).write_text(text)
        meta_path = _write_meta(Path(out), meta)
        click.echo(f"wrote {out}, {meta_path}" + (" (truncated by memory budget)" if est.truncated else ""))
    else:
        click.echo(text, nl=False)
        if est.truncated:
            click.echo("# truncated by memory budget")
        _echo_meta(meta)


@main.command("rmt")
@click.option("--poly", required=True, help="Holomorphic circular polynomial.")
@click.option("--n", default=500, show_default=True, type=int, help="Matrix size.")
@click.option("--seed", default=7, show_default=True, type=int)
@click.option("--out", default="eigs.csv", show_default=True, type=click.Path(dir_okay=False))
@config_option
def rmt_command(poly, n, seed, out):
    """Eigenvalue cloud of the polynomial in independent Ginibre matrices."""
    p = _parse_poly(poly, kind=CIRCULAR)
    if not p.is_holomorphic():
        raise click.UsageError("matrix models require a polynomial without adjoints")
    try:
        gin = rmt.sample(p.d, n, seed)
        eigs = rmt.eigen_cloud(p, gin)
    except _NUMERICAL_ERRORS as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    out = Path(out)
    with open(out, "w") as handle:
        handle.write("re,im\n")
        for z in eigs:
            handle.write(f"{z.real:.17g},{z.imag:.17g}\n")
    meta = _write_meta(out, _metadata(
        "rmt",
        {"poly": poly, "n": n, "seed": seed},
        generator=rmt.GENERATOR_NAME,
        entry_variance="1/N total per complex entry (1/(2N) per real part)",
    ))
    click.echo(f"wrote {out}, {meta} | {eigs.size} eigenvalues")


@main.command()
@click.option("--case", "case_", required=True, type=click.Choice(sorted(quadratic.CASE_POLYNOMIALS)))
@click.option("--n", default=500, show_default=True, type=int, help="Ginibre matrix size.")
@click.option("--seed", default=7, show_default=True, type=int)
@click.option("--grid-size", default=301, show_default=True)
@click.option("--dilation", default=0.1, show_default=True, help="Containment relaxation on the field level.")
@click.option("--out", default=None, type=click.Path(dir_okay=False),
              help="SVG output [default: figure1_<case>.svg].")
@config_option
def figure1(case_, n, seed, grid_size, dilation, out):
    """Spectral region, boundary, and Ginibre cloud for one showcase quadratic (A-D)."""
    text = quadratic.CASE_POLYNOMIALS[case_]
    form = extract_quadratic(parse(text, d=2))
    field = quadratic.RadiusField(form)
    win = CASE_WINDOWS[case_]
    out = Path(out) if out else Path(f"figure1_{case_}.svg")
    try:
        grid = region.GridSpec(*win, grid_size, grid_size)
        raster = region.scan(field, grid, level=1.0, band=1e-6,
                             meta={"poly": text, "case": case_, "seed": seed, "n": n})
        contours = region.contour(raster)
        gin = rmt.sample(2, n, seed)
        eigs = rmt.eigen_cloud(parse(text, d=2), gin)
        stat = rmt.containment(eigs, field, level=1.0, dilation=dilation)
    except _NUMERICAL_ERRORS as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    meta = _metadata(
        "figure1",
        {"case": case_, "n": n, "seed": seed, "grid_size": grid_size,
         "dilation": dilation, "grid": list(win)},
        poly=text,
        generator=rmt.GENERATOR_NAME,
        containment_fraction=stat.fraction,
        radius_test_valid=quadratic.radius_test_conditions(form).radius_test_valid,
    )
    _emit_region_outputs(out, raster, contours, eigs, f"({case_}) {text}", meta)
    click.echo(f"containment fraction at dilation {dilation}: {stat.fraction:.4f}")


if __name__ == "__main__":
    main()
