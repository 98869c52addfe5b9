"""Cheeger constants: upper bounds from cuts, lower bounds from flow fields.

The horizontal perimeter of a polyline cut integrates
rho(p) * || ( <X_i(p), nu(p)> )_i ||_2 along the segments, where nu is the
chart-Euclidean unit normal; this is the integrand for which the coarea
identity and the dual characterization by unit-coefficient vector fields
hold, and it degenerates exactly where the generating family does.
Upper bounds come from explicit cut families and from level sets of grid
functions (marching squares); lower bounds come from divergence
certificates: a horizontal field V with |V| <= 1 and div V >= h witnesses
h as a Cheeger lower bound (for the Neumann flavor V must in addition
point inward along the boundary).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .discretization import Grid2D
from .geometry import CCStructure, GridFunction, HorizontalField, divergence

__all__ = [
    "Cut",
    "horizontal_perimeter",
    "region_volume",
    "cut_from_level_set",
    "sweep_level_sets",
    "candidate_cuts_grushin",
    "dirichlet_cheeger_upper",
    "FlowCertificate",
    "mfmc_certify",
    "InequalityReport",
    "verify_inequality",
    "CoareaReport",
    "coarea_check",
    "write_cuts_csv",
    "write_cut_segments_csv",
]

_KINDS = ("dirichlet", "neumann", "mixed")


@dataclass(frozen=True)
class Cut:
    """A candidate cut: straight segments with its perimeter and side volumes."""

    kind: str
    segments: tuple
    sigma: float
    vol1: float
    vol2: float

    @property
    def ratio(self) -> float:
        """sigma / min(vol1, vol2); infinite when one side is empty."""
        smaller = min(self.vol1, self.vol2)
        return self.sigma / smaller if smaller > 0.0 else float("inf")


def _segments_array(segments) -> np.ndarray:
    segs = np.asarray(segments, dtype=float)
    if segs.size == 0:
        return np.zeros((0, 2, 2))
    if segs.ndim != 3 or segs.shape[1:] != (2, 2):
        raise ValueError(f"segments must have shape (S, 2, 2), got {segs.shape}")
    return segs


def _validate_in_chart(structure: CCStructure, segs: np.ndarray) -> None:
    chart = structure.chart
    tol_x = 1e-9 * chart.x_length
    tol_y = 1e-9 * chart.y_length
    xs = segs[..., 0]
    ys = segs[..., 1]
    if xs.size == 0:
        return
    if xs.min() < chart.x_range[0] - tol_x or xs.max() > chart.x_range[1] + tol_x:
        raise ValueError("segment endpoint outside the chart in x")
    if ys.min() < chart.y_range[0] - tol_y or ys.max() > chart.y_range[1] + tol_y:
        raise ValueError("segment endpoint outside the chart in y")


def horizontal_perimeter(structure: CCStructure, segments,
                         rel_tol: float = 1e-6, max_refine: int = 16) -> float:
    """Horizontal perimeter of a polyline: adaptive midpoint quadrature of
    rho * ||(<X_i, nu>)_i||_2, refined until successive composite rules agree
    to rel_tol.  Zero-length segments contribute nothing.
    """
    segs = _segments_array(segments)
    _validate_in_chart(structure, segs)
    p0 = segs[:, 0, :]
    p1 = segs[:, 1, :]
    d = p1 - p0
    lengths = np.hypot(d[:, 0], d[:, 1])
    keep = lengths > 0.0
    if not np.any(keep):
        return 0.0
    p0, d, lengths = p0[keep], d[keep], lengths[keep]
    nu = np.stack([d[:, 1], -d[:, 0]], axis=1) / lengths[:, None]
    total_prev = None
    for level in range(max_refine + 1):
        npts = 2 ** level
        tpar = (np.arange(npts) + 0.5) / npts
        px = p0[:, 0:1] + np.outer(d[:, 0], tpar)
        py = p0[:, 1:2] + np.outer(d[:, 1], tpar)
        coeffs = structure.coefficients_at(px, py)          # (m, 2, S, npts)
        pairing = (coeffs[:, 0] * nu[None, :, 0, None]
                   + coeffs[:, 1] * nu[None, :, 1, None])
        integrand = structure.density_at(px, py) * np.sqrt(np.sum(pairing**2, axis=0))
        total = float(np.sum(lengths * integrand.mean(axis=1)))
        if total_prev is not None and abs(total - total_prev) <= rel_tol * max(abs(total), 1e-300):
            return total
        total_prev = total
    raise RuntimeError(f"perimeter quadrature did not reach rel_tol={rel_tol} "
                       f"after {max_refine} refinements")


def _cell_center_meshes(grid: Grid2D) -> tuple[np.ndarray, np.ndarray]:
    xc = grid.chart.x_range[0] + grid.hx * (np.arange(grid.n_cells_x) + 0.5)
    yc = grid.chart.y_range[0] + grid.hy * (np.arange(grid.n_cells_y) + 0.5)
    return np.meshgrid(xc, yc, indexing="ij")


def region_volume(structure: CCStructure, grid: Grid2D, cell_mask: np.ndarray) -> float:
    """omega-volume of a union of grid cells (midpoint quadrature of rho)."""
    cell_mask = np.asarray(cell_mask, dtype=bool)
    shape = (grid.n_cells_x, grid.n_cells_y)
    if cell_mask.shape != shape:
        raise ValueError(f"cell mask must have shape {shape}, got {cell_mask.shape}")
    Xc, Yc = _cell_center_meshes(grid)
    rho = structure.density_at(Xc, Yc)
    return float(np.sum(rho[cell_mask]) * grid.hx * grid.hy)


# Marching squares: corner bits are BL=1, BR=2, TR=4, TL=8; for each case the
# contour is a list of (entry edge, exit edge) pairs among b, r, t, l.
_MS_TABLE: dict[int, tuple[tuple[str, str], ...]] = {
    0: (), 15: (),
    1: (("l", "b"),), 14: (("l", "b"),),
    2: (("b", "r"),), 13: (("b", "r"),),
    4: (("r", "t"),), 11: (("r", "t"),),
    8: (("t", "l"),), 7: (("t", "l"),),
    3: (("l", "r"),), 12: (("l", "r"),),
    6: (("b", "t"),), 9: (("b", "t"),),
}
_MS_SADDLE_HIGH = {5: (("b", "r"), ("t", "l")), 10: (("l", "b"), ("r", "t"))}
_MS_SADDLE_LOW = {5: (("l", "b"), ("r", "t")), 10: (("b", "r"), ("t", "l"))}


def _level_segments(grid: Grid2D, values2d: np.ndarray, t: float) -> np.ndarray:
    """Marching-squares contour of {u = t}; shape (S, 2, 2).

    Crossing points are linearly interpolated on cell edges; saddle cells
    are disambiguated by the sign of the corner average.  Cells wrap on
    periodic axes, so contours close across the seam.
    """
    nx, ny = grid.nx, grid.ny
    ix = np.arange(grid.n_cells_x)
    iy = np.arange(grid.n_cells_y)
    ixp = (ix + 1) % nx
    iyp = (iy + 1) % ny
    w00 = values2d[np.ix_(ix, iy)]
    w10 = values2d[np.ix_(ixp, iy)]
    w01 = values2d[np.ix_(ix, iyp)]
    w11 = values2d[np.ix_(ixp, iyp)]
    case = ((w00 > t).astype(int) + 2 * (w10 > t) + 4 * (w11 > t) + 8 * (w01 > t))

    x0 = grid.chart.x_range[0] + grid.hx * ix
    y0 = grid.chart.y_range[0] + grid.hy * iy
    X0, Y0 = np.meshgrid(x0, y0, indexing="ij")
    with np.errstate(divide="ignore", invalid="ignore"):
        sb = np.clip((t - w00) / (w10 - w00), 0.0, 1.0)
        sr = np.clip((t - w10) / (w11 - w10), 0.0, 1.0)
        st = np.clip((t - w01) / (w11 - w01), 0.0, 1.0)
        sl = np.clip((t - w00) / (w01 - w00), 0.0, 1.0)
    points = {
        "b": (X0 + sb * grid.hx, Y0),
        "r": (X0 + grid.hx, Y0 + sr * grid.hy),
        "t": (X0 + st * grid.hx, Y0 + grid.hy),
        "l": (X0, Y0 + sl * grid.hy),
    }

    out = []

    def emit(cells: np.ndarray, pairs) -> None:
        for ea, eb in pairs:
            ax, ay = points[ea]
            bx, by = points[eb]
            seg = np.stack([
                np.stack([ax[cells], ay[cells]], axis=-1),
                np.stack([bx[cells], by[cells]], axis=-1),
            ], axis=1)
            out.append(seg)

    for k, pairs in _MS_TABLE.items():
        if not pairs:
            continue
        cells = case == k
        if np.any(cells):
            emit(cells, pairs)
    center_high = (w00 + w10 + w01 + w11) > 4.0 * t
    for k in (5, 10):
        cells = case == k
        if np.any(cells):
            hi = cells & center_high
            lo = cells & ~center_high
            if np.any(hi):
                emit(hi, _MS_SADDLE_HIGH[k])
            if np.any(lo):
                emit(lo, _MS_SADDLE_LOW[k])
    if not out:
        return np.zeros((0, 2, 2))
    segs = np.concatenate(out, axis=0)
    lengths = np.hypot(segs[:, 1, 0] - segs[:, 0, 0], segs[:, 1, 1] - segs[:, 0, 1])
    return segs[lengths > 0.0]


def _node_values(grid: Grid2D, u) -> np.ndarray:
    values = np.asarray(getattr(u, "values", u), dtype=float).ravel()
    if values.size != grid.n_nodes:
        raise ValueError(f"expected {grid.n_nodes} node values, got {values.size}")
    return values.reshape(grid.nx, grid.ny)


def cut_from_level_set(structure: CCStructure, grid: Grid2D, u, t: float) -> Cut:
    """Cut along the level set {u = t}; vol1 is the omega-volume of {u > t}.

    Side volumes are summed over cells classified by their corner average,
    so vol1 + vol2 equals the total volume exactly.
    """
    values2d = _node_values(grid, u)
    umin, umax = values2d.min(), values2d.max()
    if not umin < t < umax:
        raise ValueError(f"level t={t} outside the open range ({umin}, {umax}) of u")
    segments = _level_segments(grid, values2d, t)
    sigma = horizontal_perimeter(structure, segments)
    ix = np.arange(grid.n_cells_x)
    iy = np.arange(grid.n_cells_y)
    ixp = (ix + 1) % grid.nx
    iyp = (iy + 1) % grid.ny
    center = (values2d[np.ix_(ix, iy)] + values2d[np.ix_(ixp, iy)]
              + values2d[np.ix_(ix, iyp)] + values2d[np.ix_(ixp, iyp)]) / 4.0
    mask = center > t
    vol1 = region_volume(structure, grid, mask)
    vol2 = region_volume(structure, grid, ~mask)
    seg_tuples = tuple(((float(s[0, 0]), float(s[0, 1])), (float(s[1, 0]), float(s[1, 1])))
                       for s in segments)
    return Cut(kind="level_set", segments=seg_tuples, sigma=sigma, vol1=vol1, vol2=vol2)


def sweep_level_sets(structure: CCStructure, grid: Grid2D, u, n_levels: int = 40) -> Cut:
    """Best (smallest-ratio) level-set cut over n_levels quantiles of u."""
    if n_levels < 1:
        raise ValueError(f"n_levels must be positive, got {n_levels}")
    values = _node_values(grid, u).ravel()
    umin, umax = values.min(), values.max()
    if umax - umin <= 1e-300:
        raise ValueError("cannot sweep level sets of a constant function")
    qs = (np.arange(n_levels) + 1.0) / (n_levels + 1.0)
    best: Cut | None = None
    for t in np.unique(np.quantile(values, qs)):
        if not umin < t < umax:
            continue
        cut = cut_from_level_set(structure, grid, values, float(t))
        if not np.isfinite(cut.ratio):
            continue
        if best is None or cut.ratio < best.ratio:
            best = cut
    if best is None:
        raise ValueError("no level produced a two-sided cut")
    return best


def candidate_cuts_grushin(structure: CCStructure, grid: Grid2D,
                           n_circles: int = 31, n_line_pairs: int = 16) -> list[Cut]:
    """Closed-form cut families for the Grushin cylinder.

    Vertical circles {h} x S^1 for h on an interior grid of (0,1), and
    pairs of horizontal lines {y0, y0 + pi} x (0,1) for y0 in [0, pi).
    Perimeters come from the quadrature (exact for these integrands) and
    volumes from the closed forms h*2*pi resp. pi on each side.
    """
    if structure.name != "grushin-cylinder":
        raise ValueError("candidate cut families require the Grushin cylinder structure")
    chart = structure.chart
    y_lo, y_hi = chart.y_range
    cuts: list[Cut] = []
    for h in np.linspace(0.0, 1.0, n_circles + 2)[1:-1]:
        segments = (((float(h), y_lo), (float(h), y_hi)),)
        sigma = horizontal_perimeter(structure, segments)
        vol1 = float(h) * chart.y_length
        cuts.append(Cut(kind="vertical_circle", segments=segments, sigma=sigma,
                        vol1=vol1, vol2=chart.y_length - vol1))
    half = chart.y_length / 2.0
    for y0 in y_lo + half * np.arange(n_line_pairs) / n_line_pairs:
        segments = (((0.0, float(y0)), (1.0, float(y0))),
                    ((0.0, float(y0 + half)), (1.0, float(y0 + half))))
        sigma = horizontal_perimeter(structure, segments)
        cuts.append(Cut(kind="line_pair", segments=segments, sigma=sigma,
                        vol1=half, vol2=half))
    return cuts


def _superlevel_upper(structure: CCStructure, grid: Grid2D, values2d: np.ndarray,
                      n_levels: int) -> float:
    """min over positive super-levels t of sigma({u = t}) / vol({u > t})."""
    vmax = values2d.max()
    positives = values2d[values2d > 0.0]
    if positives.size == 0:
        raise ValueError("u has no positive part to sweep")
    qs = (np.arange(n_levels) + 0.5) / n_levels
    best = float("inf")
    ix = np.arange(grid.n_cells_x)
    iy = np.arange(grid.n_cells_y)
    ixp = (ix + 1) % grid.nx
    iyp = (iy + 1) % grid.ny
    center = (values2d[np.ix_(ix, iy)] + values2d[np.ix_(ixp, iy)]
              + values2d[np.ix_(ix, iyp)] + values2d[np.ix_(ixp, iyp)]) / 4.0
    for t in np.unique(np.quantile(positives, qs)):
        if not 0.0 < t < vmax:
            continue
        segments = _level_segments(grid, values2d, float(t))
        if segments.shape[0] == 0:
            continue
        sigma = horizontal_perimeter(structure, segments)
        vol = region_volume(structure, grid, center > t)
        if vol <= 0.0:
            continue
        best = min(best, sigma / vol)
    if not np.isfinite(best):
        raise ValueError("no positive level produced a non-empty region")
    return best


def dirichlet_cheeger_upper(structure: CCStructure, grid: Grid2D, u,
                            n_levels: int = 40) -> float:
    """Upper bound for the Dirichlet Cheeger constant from super-level sets.

    u must vanish on the non-periodic boundary (e.g. a Dirichlet
    eigenfunction expanded to the full grid); its super-level sets then
    stay away from the boundary and sigma(boundary of {u > t}) / vol({u > t})
    bounds the constant from above for every admissible t.
    """
    values2d = _node_values(grid, u)
    vmax = np.abs(values2d).max()
    if vmax == 0.0:
        raise ValueError("u is identically zero")
    boundary_max = 0.0
    if not grid.chart.periodic_x:
        boundary_max = max(boundary_max, np.abs(values2d[0, :]).max(),
                           np.abs(values2d[-1, :]).max())
    if not grid.chart.periodic_y:
        boundary_max = max(boundary_max, np.abs(values2d[:, 0]).max(),
                           np.abs(values2d[:, -1]).max())
    if boundary_max > 1e-10 * vmax:
        raise ValueError("u does not vanish on the boundary")
    if -values2d.min() > values2d.max():
        values2d = -values2d
    return _superlevel_upper(structure, grid, values2d, n_levels)


@dataclass(frozen=True)
class FlowCertificate:
    """Divergence lower-bound certificate carried by a horizontal field.

    Valid means: the coefficient norm never exceeds 1 (up to tol), the
    interior divergence never drops below h_certified (up to tol), and in
    neumann mode the field points inward along the non-periodic boundary.
    The divergence is only trusted away from non-periodic boundaries,
    where the stencils are centered.
    """

    mode: str
    h_certified: float
    max_coeff_norm: float
    min_divergence: float
    boundary_inward_min: float
    valid: bool
    tol: float

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "valid": bool(self.valid),
            "h_certified": self.h_certified,
            "max_coeff_norm": self.max_coeff_norm,
            "min_divergence": self.min_divergence,
            "boundary_inward_min": self.boundary_inward_min,
            "tol": self.tol,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def mfmc_certify(structure: CCStructure, grid: Grid2D, V: HorizontalField,
                 mode: str, tol: float = 1e-9) -> FlowCertificate:
    """Evaluate a candidate flow field as a Cheeger lower-bound certificate.

    For any cut, the perimeter dominates the flux of a unit-coefficient
    field through it, and the flux equals the divergence integral over the
    enclosed region; hence min div bounds the Cheeger constant from below.
    In neumann mode the flux argument also needs <V, inward normal> >= 0 on
    the boundary, which is checked on every non-periodic boundary node.
    """
    if mode not in ("dirichlet", "neumann"):
        raise ValueError(f"mode must be 'dirichlet' or 'neumann', got {mode!r}")
    if V.grid != grid:
        raise ValueError("field and grid do not match")
    div2d = divergence(structure, V).as_2d()
    sx = slice(None) if grid.chart.periodic_x else slice(1, -1)
    sy = slice(None) if grid.chart.periodic_y else slice(1, -1)
    interior = div2d[sx, sy]
    if interior.size == 0:
        raise ValueError("grid has no interior nodes")
    min_div = float(interior.min())
    h_certified = min_div
    max_norm = float(np.sqrt(V.squared_length().max()))
    vx, vy = V.chart_components(structure)
    inward_min = float("inf")
    if not grid.chart.periodic_x:
        inward_min = min(inward_min, float(vx[0, :].min()), float((-vx[-1, :]).min()))
    if not grid.chart.periodic_y:
        inward_min = min(inward_min, float(vy[:, 0].min()), float((-vy[:, -1]).min()))
    valid = (max_norm <= 1.0 + tol) and (min_div >= h_certified - tol)
    if mode == "neumann" and np.isfinite(inward_min):
        valid = valid and (inward_min >= -tol)
    return FlowCertificate(mode=mode, h_certified=h_certified,
                           max_coeff_norm=max_norm, min_divergence=min_div,
                           boundary_inward_min=inward_min, valid=bool(valid), tol=tol)


@dataclass(frozen=True)
class InequalityReport:
    """Outcome of checking lambda >= h^2 / 4."""

    kind: str
    lambda_value: float
    h_lower: float
    lower_bound: float
    slack: float
    satisfied: bool

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "lambda": self.lambda_value,
            "h_lower": self.h_lower,
            "lower_bound": self.lower_bound,
            "slack": self.slack,
            "satisfied": bool(self.satisfied),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def verify_inequality(lambda_value: float, h_lower, kind: str,
                      tol: float = 1e-12) -> InequalityReport:
    """Check the Cheeger inequality lambda >= h^2/4 for a certified h.

    h_lower may be a float or a FlowCertificate; an invalid certificate is
    rejected.  kind is dirichlet (lambda_1), neumann (lambda_2) or mixed
    (lambda_1 of the mixed problem).
    """
    if kind not in _KINDS:
        raise ValueError(f"kind must be one of {_KINDS}, got {kind!r}")
    if isinstance(h_lower, FlowCertificate):
        if not h_lower.valid:
            raise ValueError("certificate is not valid")
        h = h_lower.h_certified
    else:
        h = float(h_lower)
    bound = 0.25 * h * h
    slack = float(lambda_value) - bound
    return InequalityReport(kind=kind, lambda_value=float(lambda_value), h_lower=h,
                            lower_bound=bound, slack=slack, satisfied=slack >= -tol)


@dataclass(frozen=True)
class CoareaReport:
    lhs: float
    rhs: float
    rel_gap: float
    n_levels: int


def coarea_check(structure: CCStructure, grid: Grid2D, u,
                 n_levels: int = 200) -> CoareaReport:
    """Compare integral of |grad_H u| d omega with the integral over t of
    the perimeter of {u = t}.

    The left side uses cell-center sampling of the bilinear gradient; the
    right side integrates marching-squares perimeters over equally spaced
    levels by the trapezoid rule (the perimeter vanishes at the extremes).
    """
    values2d = _node_values(grid, u)
    umin, umax = float(values2d.min()), float(values2d.max())
    if umax - umin <= 1e-300:
        raise ValueError("coarea check needs a non-constant function")
    ix = np.arange(grid.n_cells_x)
    iy = np.arange(grid.n_cells_y)
    ixp = (ix + 1) % grid.nx
    iyp = (iy + 1) % grid.ny
    w00 = values2d[np.ix_(ix, iy)]
    w10 = values2d[np.ix_(ixp, iy)]
    w01 = values2d[np.ix_(ix, iyp)]
    w11 = values2d[np.ix_(ixp, iyp)]
    gx = ((w10 - w00) + (w11 - w01)) / (2.0 * grid.hx)
    gy = ((w01 - w00) + (w11 - w10)) / (2.0 * grid.hy)
    Xc, Yc = _cell_center_meshes(grid)
    coeffs = structure.coefficients_at(Xc, Yc)
    rho = structure.density_at(Xc, Yc)
    grad_norm = np.sqrt(np.sum((coeffs[:, 0] * gx + coeffs[:, 1] * gy) ** 2, axis=0))
    lhs = float(np.sum(rho * grad_norm) * grid.hx * grid.hy)

    ts = np.linspace(umin, umax, n_levels + 2)[1:-1]
    perims = [horizontal_perimeter(structure, _level_segments(grid, values2d, float(t)))
              for t in ts]
    t_ext = np.concatenate(([umin], ts, [umax]))
    p_ext = np.concatenate(([0.0], perims, [0.0]))
    rhs = float(np.trapezoid(p_ext, t_ext))
    rel_gap = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
    return CoareaReport(lhs=lhs, rhs=rhs, rel_gap=rel_gap, n_levels=n_levels)


def write_cuts_csv(cuts, path) -> None:
    """Summary CSV, one row per cut: kind,sigma,vol1,vol2,ratio."""
    lines = ["kind,sigma,vol1,vol2,ratio"]
    for cut in cuts:
        lines.append(f"{cut.kind},{repr(float(cut.sigma))},{repr(float(cut.vol1))},"
                     f"{repr(float(cut.vol2))},{repr(float(cut.ratio))}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_cut_segments_csv(cut: Cut, path) -> None:
    """Full CSV for one cut: metadata columns plus one row per segment."""
    lines = ["kind,sigma,vol1,vol2,ratio,x0,y0,x1,y1"]
    meta = (f"{cut.kind},{repr(float(cut.sigma))},{repr(float(cut.vol1))},"
            f"{repr(float(cut.vol2))},{repr(float(cut.ratio))}")
    for (x0, y0), (x1, y1) in cut.segments:
        lines.append(f"{meta},{repr(float(x0))},{repr(float(y0))},"
                     f"{repr(float(x1))},{repr(float(y1))}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
