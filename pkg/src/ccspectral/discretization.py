"""Variational finite-difference discretization of the sub-Laplacian.

The energy form A[u,v] = sum over cells of quadrature samples of
rho * sum_i (X_i u)(X_i v) is assembled from bilinear node interpolation
on each grid cell, sampled at the 2x2 Gauss points (a single center
sample would leave a spurious checkerboard zero-energy mode).  The mass
form is the lumped diagonal rho(node) * hx * hy with half weights on
non-periodic edges and quarter weights at corners.  Dirichlet conditions
are imposed by eliminating boundary nodes; Neumann conditions are
natural (no boundary term).

The assembled stiffness matrix is exactly symmetric: local cell matrices
are mirrored bitwise across the diagonal and duplicate triplets are
summed in a deterministic order that is identical for (r, c) and (c, r).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .geometry import CCStructure, Chart2D, GridFunction, _check_compatible

__all__ = [
    "Grid2D",
    "build_grid",
    "BCSegment",
    "BoundarySpec",
    "AssembledForms",
    "assemble",
    "rayleigh_quotient",
    "write_matrix_market",
]

_EDGES = ("x_min", "x_max", "y_min", "y_max")
_CONDITIONS = ("dirichlet", "neumann")


@dataclass(frozen=True)
class Grid2D:
    """Tensor-product node grid on a chart; nodes are flattened x-major.

    Along a non-periodic axis the n nodes include both endpoints and the
    spacing is length/(n-1); along a periodic axis the last node stops one
    spacing short of the far end (which is identified with the near end)
    and the spacing is length/n.
    """

    chart: Chart2D
    nx: int
    ny: int
    hx: float
    hy: float

    @property
    def n_nodes(self) -> int:
        return self.nx * self.ny

    @cached_property
    def xs(self) -> np.ndarray:
        return self.chart.x_range[0] + self.hx * np.arange(self.nx)

    @cached_property
    def ys(self) -> np.ndarray:
        return self.chart.y_range[0] + self.hy * np.arange(self.ny)

    def meshes(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinate arrays of shape (nx, ny)."""
        return np.meshgrid(self.xs, self.ys, indexing="ij")

    def node_index(self, ix, iy):
        return np.asarray(ix) * self.ny + np.asarray(iy)

    @property
    def n_cells_x(self) -> int:
        return self.nx if self.chart.periodic_x else self.nx - 1

    @property
    def n_cells_y(self) -> int:
        return self.ny if self.chart.periodic_y else self.ny - 1


def build_grid(chart: Chart2D, nx: int, ny: int) -> Grid2D:
    """Grid with nx x ny nodes; both counts must be at least 3."""
    if nx < 3 or ny < 3:
        raise ValueError(f"grid needs at least 3 nodes per axis, got {nx} x {ny}")
    hx = chart.x_length / (nx if chart.periodic_x else nx - 1)
    hy = chart.y_length / (ny if chart.periodic_y else ny - 1)
    return Grid2D(chart=chart, nx=int(nx), ny=int(ny), hx=hx, hy=hy)


@dataclass(frozen=True)
class BCSegment:
    """One boundary condition on a parameter interval of a chart edge.

    ``edge`` is one of x_min, x_max (parameterized by y) or y_min, y_max
    (parameterized by x).  ``lo``/``hi`` bound the parameter; None means
    the full edge.
    """

    edge: str
    condition: str
    lo: float | None = None
    hi: float | None = None

    def __post_init__(self):
        if self.edge not in _EDGES:
            raise ValueError(f"unknown edge {self.edge!r}, expected one of {_EDGES}")
        if self.condition not in _CONDITIONS:
            raise ValueError(f"unknown condition {self.condition!r}, expected one of {_CONDITIONS}")


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary conditions; any uncovered non-periodic boundary is Neumann."""

    segments: tuple[BCSegment, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    @classmethod
    def all_neumann(cls) -> "BoundarySpec":
        return cls(segments=())

    @classmethod
    def all_dirichlet(cls, chart: Chart2D) -> "BoundarySpec":
        segs = []
        if not chart.periodic_x:
            segs += [BCSegment("x_min", "dirichlet"), BCSegment("x_max", "dirichlet")]
        if not chart.periodic_y:
            segs += [BCSegment("y_min", "dirichlet"), BCSegment("y_max", "dirichlet")]
        return cls(segments=tuple(segs))

    def dirichlet_mask(self, grid: Grid2D) -> np.ndarray:
        """Boolean (nx, ny) array marking eliminated nodes.

        A node is Dirichlet when it lies on a closed segment of that kind;
        Dirichlet wins over Neumann wherever segments overlap.
        """
        chart = grid.chart
        mask = np.zeros((grid.nx, grid.ny), dtype=bool)
        for seg in self.segments:
            axis_periodic = chart.periodic_x if seg.edge in ("x_min", "x_max") else chart.periodic_y
            if axis_periodic:
                raise ValueError(f"edge {seg.edge!r} does not exist: that axis is periodic")
            if seg.edge in ("x_min", "x_max"):
                param, prange = grid.ys, chart.y_range
            else:
                param, prange = grid.xs, chart.x_range
            lo = prange[0] if seg.lo is None else float(seg.lo)
            hi = prange[1] if seg.hi is None else float(seg.hi)
            tol = 1e-12 * (prange[1] - prange[0])
            if lo > hi:
                raise ValueError(f"segment on {seg.edge!r} has lo > hi")
            if lo < prange[0] - tol or hi > prange[1] + tol:
                raise ValueError(f"segment on {seg.edge!r} leaves the chart range {prange}")
            if seg.condition != "dirichlet":
                continue
            covered = (param >= lo - tol) & (param <= hi + tol)
            if seg.edge == "x_min":
                mask[0, covered] = True
            elif seg.edge == "x_max":
                mask[-1, covered] = True
            elif seg.edge == "y_min":
                mask[covered, 0] = True
            else:
                mask[covered, -1] = True
        return mask


@dataclass(frozen=True)
class AssembledForms:
    """Stiffness matrix A, lumped mass diagonal and the active-node map."""

    A: sp.csr_matrix
    mass: np.ndarray
    active_nodes: np.ndarray
    grid: Grid2D
    bc: BoundarySpec

    @property
    def n_active(self) -> int:
        return self.active_nodes.size

    @property
    def M(self) -> sp.csr_matrix:
        """The mass form as a sparse diagonal matrix."""
        return sp.diags(self.mass, format="csr")

    def expand(self, u_active: np.ndarray) -> np.ndarray:
        """Scatter active-node values to the full grid, zero on Dirichlet nodes."""
        u_active = np.asarray(u_active, dtype=float)
        if u_active.shape[0] != self.n_active:
            raise ValueError(f"expected {self.n_active} active values, got {u_active.shape[0]}")
        if u_active.ndim == 1:
            full = np.zeros(self.grid.n_nodes)
        else:
            full = np.zeros((self.grid.n_nodes,) + u_active.shape[1:])
        full[self.active_nodes] = u_active
        return full

    def restrict(self, u_full: np.ndarray) -> np.ndarray:
        """Gather full-grid values on the active nodes."""
        u_full = np.asarray(u_full, dtype=float)
        if u_full.shape[0] != self.grid.n_nodes:
            raise ValueError(f"expected {self.grid.n_nodes} node values, got {u_full.shape[0]}")
        return u_full[self.active_nodes]


def _cell_corner_indices(grid: Grid2D) -> np.ndarray:
    """Flat node indices of the four corners of every cell; shape (C, 4).

    Corner order: (i,j), (i+1,j), (i,j+1), (i+1,j+1); indices wrap on
    periodic axes.
    """
    ix = np.arange(grid.n_cells_x)
    iy = np.arange(grid.n_cells_y)
    ixp = (ix + 1) % grid.nx
    iyp = (iy + 1) % grid.ny
    IX, IY = np.meshgrid(ix, iy, indexing="ij")
    IXp, IYp = np.meshgrid(ixp, iyp, indexing="ij")
    corners = np.stack([
        grid.node_index(IX, IY),
        grid.node_index(IXp, IY),
        grid.node_index(IX, IYp),
        grid.node_index(IXp, IYp),
    ], axis=-1)
    return corners.reshape(-1, 4)


def _cell_origin_meshes(grid: Grid2D) -> tuple[np.ndarray, np.ndarray]:
    x0 = grid.chart.x_range[0] + grid.hx * np.arange(grid.n_cells_x)
    y0 = grid.chart.y_range[0] + grid.hy * np.arange(grid.n_cells_y)
    return np.meshgrid(x0, y0, indexing="ij")

# 2x2 Gauss points in unit cell coordinates.
_GAUSS_1D = ((1.0 - 1.0 / np.sqrt(3.0)) / 2.0, (1.0 + 1.0 / np.sqrt(3.0)) / 2.0)
_GAUSS_2D = tuple((gx, gy) for gx in _GAUSS_1D for gy in _GAUSS_1D)


def _local_cell_matrices(structure: CCStructure, grid: Grid2D) -> np.ndarray:
    """Per-cell 4x4 energy contributions, bitwise symmetric; shape (C, 4, 4)."""
    X0, Y0 = _cell_origin_meshes(grid)
    x0 = X0.ravel()
    y0 = Y0.ravel()
    C = x0.size
    L = np.zeros((C, 4, 4))
    for gx, gy in _GAUSS_2D:
        # bilinear gradient at the Gauss point, as vectors over the corners
        vx = np.array([-(1.0 - gy), (1.0 - gy), -gy, gy]) / grid.hx
        vy = np.array([-(1.0 - gx), -gx, (1.0 - gx), gx]) / grid.hy
        px = x0 + gx * grid.hx
        py = y0 + gy * grid.hy
        coeffs = structure.coefficients_at(px, py)  # (m, 2, C)
        rho = structure.density_at(px, py)
        w = rho * (grid.hx * grid.hy / 4.0)
        alpha = np.sum(coeffs[:, 0] ** 2, axis=0)
        beta = np.sum(coeffs[:, 0] * coeffs[:, 1], axis=0)
        gamma = np.sum(coeffs[:, 1] ** 2, axis=0)
        Vxx = np.outer(vx, vx)
        Vxy = np.outer(vx, vy) + np.outer(vy, vx)
        Vyy = np.outer(vy, vy)
        L += ((w * alpha)[:, None, None] * Vxx
              + (w * beta)[:, None, None] * Vxy
              + (w * gamma)[:, None, None] * Vyy)
    # mirror the strict upper triangle so symmetry is bitwise, not just nominal
    for p in range(4):
        for q in range(p + 1, 4):
            L[:, q, p] = L[:, p, q]
    return L


def _assemble_stiffness(structure: CCStructure, grid: Grid2D) -> sp.csr_matrix:
    corners = _cell_corner_indices(grid)
    L = _local_cell_matrices(structure, grid)
    rows = np.repeat(corners, 4, axis=1).ravel()          # corner p, varying slowest
    cols = np.tile(corners, (1, 4)).ravel()               # corner q, varying fastest
    vals = L.ravel()                                      # L[c, p, q] in the same order
    # Deterministic duplicate summation: stable lexsort keeps cell order inside
    # each (row, col) group, and the (col, row) group holds the bitwise-equal
    # mirrored values in the same order, so A comes out exactly symmetric.
    n = grid.n_nodes
    order = np.lexsort((cols, rows))
    rows = rows[order]
    cols = cols[order]
    vals = vals[order]
    keys = rows.astype(np.int64) * n + cols
    starts = np.flatnonzero(np.diff(keys)) + 1
    starts = np.concatenate(([0], starts))
    sums = np.add.reduceat(vals, starts)
    urows = rows[starts]
    ucols = cols[starts]
    A = sp.coo_matrix((sums, (urows, ucols)), shape=(n, n)).tocsr()
    return A


def _lumped_mass(structure: CCStructure, grid: Grid2D) -> np.ndarray:
    X, Y = grid.meshes()
    rho = structure.density_at(X, Y)
    wx = np.ones(grid.nx)
    wy = np.ones(grid.ny)
    if not grid.chart.periodic_x:
        wx[0] = wx[-1] = 0.5
    if not grid.chart.periodic_y:
        wy[0] = wy[-1] = 0.5
    mass = rho * (grid.hx * grid.hy) * wx[:, None] * wy[None, :]
    return mass.ravel()


def assemble(structure: CCStructure, grid: Grid2D, bc: BoundarySpec) -> AssembledForms:
    """Assemble the energy and mass forms, with Dirichlet nodes eliminated."""
    _check_compatible(structure, grid)
    A_full = _assemble_stiffness(structure, grid)
    mass_full = _lumped_mass(structure, grid)
    mask = bc.dirichlet_mask(grid).ravel()
    active = np.flatnonzero(~mask)
    if active.size == 0:
        raise ValueError("boundary conditions eliminate every node")
    A = A_full[active][:, active].tocsr()
    A.sort_indices()
    return AssembledForms(A=A, mass=mass_full[active], active_nodes=active,
                          grid=grid, bc=bc)


def rayleigh_quotient(forms: AssembledForms, u: np.ndarray) -> float:
    """A[u,u] / M[u,u] for a vector on the active nodes."""
    u = np.asarray(u, dtype=float).ravel()
    if u.size != forms.n_active:
        raise ValueError(f"expected {forms.n_active} active values, got {u.size}")
    den = float(u @ (forms.mass * u))
    if den == 0.0:
        raise ValueError("Rayleigh quotient of the zero vector")
    return float(u @ (forms.A @ u)) / den


def write_matrix_market(matrix: sp.spmatrix, path, comment: str = "") -> None:
    """Write a sparse matrix in Matrix Market coordinate format.

    Values are printed with shortest round-trip decimals, so reading the
    file back reproduces the stored doubles exactly.  Symmetric matrices
    are detected and written in symmetric storage (lower triangle).
    """
    matrix = matrix.tocsr()
    symmetric = matrix.shape[0] == matrix.shape[1] and (matrix != matrix.T).nnz == 0
    out = matrix if not symmetric else sp.tril(matrix)
    coo = out.tocoo()
    lines = ["%%MatrixMarket matrix coordinate real "
             + ("symmetric" if symmetric else "general")]
    for row in str(comment).splitlines():
        lines.append(f"% {row}")
    lines.append(f"{matrix.shape[0]} {matrix.shape[1]} {coo.nnz}")
    for i, j, v in zip(coo.row, coo.col, coo.data):
        lines.append(f"{i + 1} {j + 1} {repr(float(v))}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
