"""Complex-plane rasterization of membership fields, contour extraction, and emission.

A scan evaluates a continuous field (transfer-matrix spectral radius, walk
region function, ...) on a rectangular node grid; verdicts come from
thresholding the field at a level with an uncertainty band, and the boundary
is extracted as sub-cell polylines by marching squares.  Figures are rendered
with matplotlib and written as SVG; the raster itself is written as CSV
(``re,im,value,verdict``) with a JSON metadata document alongside.
"""

from __future__ import annotations

import csv
import json
import multiprocessing
from dataclasses import dataclass, field as dc_field

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from . import __version__

__all__ = [
    "GridSpec",
    "RegionRaster",
    "FigureStyle",
    "scan",
    "scan_verdicts",
    "contour",
    "render_figure",
    "emit_svg",
    "emit_csv",
    "emit_json",
    "VERDICT_NAMES",
]

VERDICT_NAMES = {1: "spectrum", 0: "uncertain", -1: "resolvent"}

_SVG_HASHSALT = "freespec"


@dataclass(frozen=True)
class GridSpec:
    """Rectangle [re_min, re_max] x [im_min, im_max] sampled on nx x ny nodes."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    nx: int = 301
    ny: int = 301

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError("grid rectangle must have positive extent")
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid needs at least 2 nodes per axis")

    def xs(self) -> np.ndarray:
        return np.linspace(self.re_min, self.re_max, self.nx)

    def ys(self) -> np.ndarray:
        return np.linspace(self.im_min, self.im_max, self.ny)

    def lambdas(self) -> np.ndarray:
        """Complex node values, shape (ny, nx); row iy has imaginary part ys()[iy]."""
        x, y = np.meshgrid(self.xs(), self.ys())
        return x + 1j * y

    def cell_size(self) -> tuple:
        return (
            (self.re_max - self.re_min) / (self.nx - 1),
            (self.im_max - self.im_min) / (self.ny - 1),
        )

    def to_dict(self) -> dict:
        return {
            "re_min": self.re_min,
            "re_max": self.re_max,
            "im_min": self.im_min,
            "im_max": self.im_max,
            "nx": self.nx,
            "ny": self.ny,
        }


@dataclass(frozen=True)
class RegionRaster:
    """Field values on a grid plus the thresholding that turns them into verdicts.

    ``spectrum_side`` says on which side of ``level`` the spectrum lies:
    "above" (e.g. transfer-matrix radius >= 1) or "below" (e.g. walk region
    function <= t^2).  ``verdict_override`` replaces the thresholded verdicts
    when a scan used a non-field method (e.g. the Schur limit test).
    """

    grid: GridSpec
    values: np.ndarray
    level: float = 1.0
    band: float = 1e-6
    spectrum_side: str = "above"
    verdict_override: np.ndarray | None = None
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        if self.spectrum_side not in ("above", "below"):
            raise ValueError("spectrum_side must be 'above' or 'below'")
        expected = (self.grid.ny, self.grid.nx)
        if self.values.shape != expected:
            raise ValueError(f"values shape {self.values.shape} != grid shape {expected}")

    def verdicts(self) -> np.ndarray:
        """Per-node verdicts as int8: +1 spectrum, 0 uncertain, -1 resolvent."""
        if self.verdict_override is not None:
            return self.verdict_override
        v = self.values
        if self.spectrum_side == "above":
            return np.where(
                v >= self.level + self.band, 1, np.where(v < self.level - self.band, -1, 0)
            ).astype(np.int8)
        return np.where(
            v <= self.level - self.band, 1, np.where(v > self.level + self.band, -1, 0)
        ).astype(np.int8)


def _eval_rows(field, rows):
    return [[float(field(z)) for z in row] for row in rows]


def scan(field, grid: GridSpec, level: float = 1.0, band: float = 1e-6,
         spectrum_side: str = "above", jobs: int = 1, meta: dict | None = None) -> RegionRaster:
    """Evaluate a field on every grid node.

    Fields advertising ``supports_arrays`` are evaluated in one vectorized
    call; otherwise nodes are evaluated row by row, optionally across
    ``jobs`` worker processes (the assembly is index-ordered, so the raster is
    identical for any worker count).
    """
    lams = grid.lambdas()
    if getattr(field, "supports_arrays", False):
        values = np.asarray(field(lams), dtype=float)
    elif jobs > 1:
        with multiprocessing.get_context("fork").Pool(jobs) as pool:
            chunks = pool.starmap(_eval_rows, [(field, [row]) for row in lams])
        values = np.asarray([chunk[0] for chunk in chunks], dtype=float)
    else:
        values = np.asarray(_eval_rows(field, lams), dtype=float)
    return RegionRaster(
        grid=grid, values=values, level=level, band=band,
        spectrum_side=spectrum_side, meta=dict(meta or {}),
    )


def scan_verdicts(decide, grid: GridSpec, jobs: int = 1) -> np.ndarray:
    """Per-node verdict ints from an arbitrary lam -> {-1, 0, +1} callable."""
    lams = grid.lambdas()
    if jobs > 1:
        with multiprocessing.get_context("fork").Pool(jobs) as pool:
            rows = pool.map(_VerdictRow(decide), list(lams))
    else:
        rows = [_VerdictRow(decide)(row) for row in lams]
    return np.asarray(rows, dtype=np.int8)


@dataclass(frozen=True)
class _VerdictRow:
    decide: object

    def __call__(self, row):
        return [int(self.decide(z)) for z in row]


# -- marching squares -------------------------------------------------------

# segment table: cell corner mask (bl=1, br=2, tr=4, tl=8 inside) -> crossed edge pairs
_SEGMENTS = {
    0: [], 15: [],
    1: [("left", "bottom")],
    2: [("bottom", "right")],
    3: [("left", "right")],
    4: [("right", "top")],
    6: [("bottom", "top")],
    7: [("left", "top")],
    8: [("top", "left")],
    9: [("bottom", "top")],
    11: [("right", "top")],
    12: [("left", "right")],
    13: [("bottom", "right")],
    14: [("left", "bottom")],
}


def _saddle_segments(mask: int, center_inside: bool):
    if mask == 5:
        return [("bottom", "right"), ("top", "left")] if center_inside else [
            ("left", "bottom"), ("right", "top")]
    return [("left", "bottom"), ("right", "top")] if center_inside else [
        ("bottom", "right"), ("top", "left")]


def contour(raster: RegionRaster, level: float | None = None) -> list:
    """Extract level-set polylines by marching squares with linear interpolation.

    Returns a list of (m, 2) float arrays; closed loops repeat their first
    vertex at the end, open lines terminate on the grid boundary.  Saddle
    cells are resolved by the cell-center value.
    """
    lvl = raster.level if level is None else float(level)
    v = raster.values
    xs, ys = raster.grid.xs(), raster.grid.ys()
    ny, nx = v.shape
    inside = v >= lvl

    verts: dict = {}

    def edge_vertex(kind, ix, iy):
        key = (kind, ix, iy)
        cached = verts.get(key)
        if cached is not None:
            return cached
        if kind == "h":
            v0, v1 = v[iy, ix], v[iy, ix + 1]
            t = _interp_t(lvl, v0, v1)
            pt = (xs[ix] + t * (xs[ix + 1] - xs[ix]), ys[iy])
        else:
            v0, v1 = v[iy, ix], v[iy + 1, ix]
            t = _interp_t(lvl, v0, v1)
            pt = (xs[ix], ys[iy] + t * (ys[iy + 1] - ys[iy]))
        verts[key] = pt
        return pt

    adjacency: dict = {}
    for iy in range(ny - 1):
        for ix in range(nx - 1):
            mask = (
                int(inside[iy, ix])
                | int(inside[iy, ix + 1]) << 1
                | int(inside[iy + 1, ix + 1]) << 2
                | int(inside[iy + 1, ix]) << 3
            )
            if mask in (0, 15):
                continue
            if mask in (5, 10):
                center = 0.25 * (v[iy, ix] + v[iy, ix + 1] + v[iy + 1, ix] + v[iy + 1, ix + 1])
                pairs = _saddle_segments(mask, bool(center >= lvl))
            else:
                pairs = _SEGMENTS[mask]
            names = {
                "bottom": ("h", ix, iy),
                "top": ("h", ix, iy + 1),
                "left": ("v", ix, iy),
                "right": ("v", ix + 1, iy),
            }
            for e1, e2 in pairs:
                a, b = names[e1], names[e2]
                edge_vertex(*a)
                edge_vertex(*b)
                adjacency.setdefault(a, []).append(b)
                adjacency.setdefault(b, []).append(a)

    polylines = []
    visited: set = set()

    def walk(start):
        path = [start]
        visited.add(start)
        while True:
            nxt = None
            for nb in adjacency[path[-1]]:
                if nb not in visited:
                    nxt = nb
                    break
            if nxt is None:
                break
            visited.add(nxt)
            path.append(nxt)
        return path

    open_starts = sorted(e for e, nbs in adjacency.items() if len(nbs) == 1)
    for start in open_starts:
        if start in visited:
            continue
        path = walk(start)
        polylines.append(np.asarray([verts[e] for e in path]))
    for start in sorted(adjacency):
        if start in visited:
            continue
        path = walk(start)
        pts = [verts[e] for e in path]
        if len(path) > 2 and path[0] in adjacency[path[-1]]:
            pts.append(verts[path[0]])
        polylines.append(np.asarray(pts))
    return polylines


def _interp_t(level, v0, v1):
    if not np.isfinite(v0) or not np.isfinite(v1):
        # crossings against an infinite node sit at the finite endpoint
        v0 = np.clip(v0, -1e300, 1e300)
        v1 = np.clip(v1, -1e300, 1e300)
    denom = v1 - v0
    if denom == 0:
        return 0.5
    return float(np.clip((level - v0) / denom, 0.0, 1.0))


# -- emission ---------------------------------------------------------------


@dataclass(frozen=True)
class FigureStyle:
    region_color: str = "0.85"
    boundary_color: str = "red"
    scatter_color: str = "tab:blue"
    scatter_size: float = 2.0
    figsize: tuple = (6.0, 6.0)
    dpi: int = 150


def render_figure(
    raster: RegionRaster,
    contours: list | None = None,
    scatter=None,
    style: FigureStyle | None = None,
    title: str | None = None,
) -> Figure:
    """Compose the region figure: gray resolvent fill, red boundary, blue eigenvalues."""
    style = style or FigureStyle()
    fig = Figure(figsize=style.figsize, dpi=style.dpi)
    ax = fig.add_subplot()
    g = raster.grid
    x, y = np.meshgrid(g.xs(), g.ys())
    v = np.clip(np.nan_to_num(raster.values, posinf=1e12, neginf=-1e12), -1e12, 1e12)
    if raster.spectrum_side == "above":
        lo = min(float(v.min()) - 1.0, raster.level - 1.0)
        fill_levels = [lo, raster.level]
    else:
        hi = max(float(v.max()) + 1.0, raster.level + 1.0)
        fill_levels = [raster.level, hi]
    ax.contourf(x, y, v, levels=fill_levels, colors=[style.region_color])
    for line in contours or []:
        ax.plot(line[:, 0], line[:, 1], color=style.boundary_color, linewidth=1.0)
    if scatter is not None:
        pts = np.asarray(scatter, dtype=complex).ravel()
        if pts.size:
            ax.plot(
                pts.real, pts.imag, linestyle="none", marker=".",
                markersize=style.scatter_size, color=style.scatter_color,
            )
    ax.set_xlim(g.re_min, g.re_max)
    ax.set_ylim(g.im_min, g.im_max)
    ax.set_aspect("equal")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    if title:
        ax.set_title(title)
    return fig


def emit_svg(
    path,
    raster: RegionRaster,
    contours: list | None = None,
    scatter=None,
    style: FigureStyle | None = None,
    title: str | None = None,
) -> None:
    """Render and write a self-contained SVG; output is byte-stable for fixed inputs."""
    fig = render_figure(raster, contours=contours, scatter=scatter, style=style, title=title)
    with matplotlib.rc_context({"svg.hashsalt": _SVG_HASHSALT}):
        fig.savefig(path, format="svg", metadata={"Date": None})


def emit_csv(path, raster: RegionRaster) -> None:
    """One row per node: re, im, value, verdict (full float precision)."""
    xs, ys = raster.grid.xs(), raster.grid.ys()
    verdicts = raster.verdicts()
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["re", "im", "value", "verdict"])
        for iy in range(raster.grid.ny):
            for ix in range(raster.grid.nx):
                writer.writerow([
                    f"{xs[ix]:.17g}",
                    f"{ys[iy]:.17g}",
                    f"{raster.values[iy, ix]:.17g}",
                    VERDICT_NAMES[int(verdicts[iy, ix])],
                ])


def emit_json(path, raster: RegionRaster, extra: dict | None = None) -> None:
    """Grid metadata, thresholding, and any extra run info (seeds, polynomial, ...)."""
    doc = {
        "tool": "freespec",
        "version": __version__,
        "grid": raster.grid.to_dict(),
        "level": raster.level,
        "band": raster.band,
        "spectrum_side": raster.spectrum_side,
        "meta": raster.meta | (extra or {}),
    }
    with open(path, "w") as handle:
        json.dump(doc, handle, indent=2, sort_keys=True)
        handle.write("\n")
