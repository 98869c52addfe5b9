"""Carnot-Caratheodory structures on 2D rectangular charts.

A structure is a generating family of horizontal vector fields
X_i = a_i1(x,y) d/dx + a_i2(x,y) d/dy together with a positive density
rho defining the volume form omega = rho dx dy.  The module provides the
horizontal gradient (the tuple of derivatives X_i u along the family),
the omega-divergence of horizontal fields, and their composition, the
geometric sub-Laplacian.  Discrete derivatives are second-order centered
differences, with one-sided second-order stencils on non-periodic edges
and wrap-around on periodic ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:  # only for annotations; discretization imports this module
    from .discretization import Grid2D

__all__ = [
    "Chart2D",
    "CCStructure",
    "GridFunction",
    "HorizontalField",
    "constant_coefficient",
    "builtin_grushin_cylinder",
    "builtin_euclidean",
    "horizontal_gradient",
    "divergence",
    "sub_laplacian_apply",
]

Coefficient = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Chart2D:
    """Axis-aligned rectangular chart, optionally periodic along each axis."""

    x_range: tuple[float, float]
    y_range: tuple[float, float]
    periodic_x: bool = False
    periodic_y: bool = False

    def __post_init__(self):
        xr = (float(self.x_range[0]), float(self.x_range[1]))
        yr = (float(self.y_range[0]), float(self.y_range[1]))
        object.__setattr__(self, "x_range", xr)
        object.__setattr__(self, "y_range", yr)
        if not xr[1] > xr[0]:
            raise ValueError(f"x_range must have positive length, got {xr}")
        if not yr[1] > yr[0]:
            raise ValueError(f"y_range must have positive length, got {yr}")

    @property
    def x_length(self) -> float:
        return self.x_range[1] - self.x_range[0]

    @property
    def y_length(self) -> float:
        return self.y_range[1] - self.y_range[0]

    def wrap(self, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Map coordinates into the fundamental domain along periodic axes."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.periodic_x:
            x = self.x_range[0] + np.mod(x - self.x_range[0], self.x_length)
        if self.periodic_y:
            y = self.y_range[0] + np.mod(y - self.y_range[0], self.y_length)
        return x, y


def constant_coefficient(value: float) -> Coefficient:
    """Coefficient function that is identically ``value``."""

    def fn(x, y):
        shape = np.broadcast_shapes(np.shape(x), np.shape(y))
        return np.full(shape, float(value))

    return fn


@dataclass(frozen=True)
class CCStructure:
    """Generating family (a_i1, a_i2) plus density rho on a chart.

    Coefficient callables must accept numpy arrays and broadcast; scalar
    returns are broadcast automatically at evaluation time.
    """

    chart: Chart2D
    field_coeffs: tuple[tuple[Coefficient, Coefficient], ...]
    density: Coefficient
    name: str = "custom"

    def __post_init__(self):
        if len(self.field_coeffs) == 0:
            raise ValueError("at least one horizontal field is required")
        for pair in self.field_coeffs:
            if len(pair) != 2:
                raise ValueError("each field needs exactly two coefficient functions")

    @property
    def m(self) -> int:
        """Number of generating fields."""
        return len(self.field_coeffs)

    def coefficients_at(self, x, y) -> np.ndarray:
        """Evaluate the coefficient matrix; shape (m, 2) + broadcast(x, y)."""
        xw, yw = self.chart.wrap(x, y)
        shape = np.broadcast_shapes(np.shape(xw), np.shape(yw))
        out = np.empty((self.m, 2) + shape)
        for i, (a1, a2) in enumerate(self.field_coeffs):
            out[i, 0] = _eval_coeff(a1, xw, yw, shape)
            out[i, 1] = _eval_coeff(a2, xw, yw, shape)
        if not np.all(np.isfinite(out)):
            raise ValueError("non-finite field coefficient sample")
        return out

    def density_at(self, x, y) -> np.ndarray:
        """Evaluate rho; raises on non-positive or non-finite samples."""
        xw, yw = self.chart.wrap(x, y)
        shape = np.broadcast_shapes(np.shape(xw), np.shape(yw))
        rho = _eval_coeff(self.density, xw, yw, shape)
        if not np.all(np.isfinite(rho)):
            raise ValueError("non-finite density sample")
        if np.any(rho <= 0.0):
            raise ValueError("non-positive density sample")
        return rho


def _eval_coeff(fn: Coefficient, x: np.ndarray, y: np.ndarray, shape) -> np.ndarray:
    value = np.asarray(fn(x, y), dtype=float)
    return np.broadcast_to(value, shape)


def builtin_grushin_cylinder() -> CCStructure:
    """Grushin cylinder: chart (0,1) x S^1, fields d/dx and x d/dy, rho = 1."""
    chart = Chart2D((0.0, 1.0), (0.0, 2.0 * np.pi), periodic_x=False, periodic_y=True)
    fields = (
        (constant_coefficient(1.0), constant_coefficient(0.0)),
        (constant_coefficient(0.0), lambda x, y: np.asarray(x, dtype=float)),
    )
    return CCStructure(chart=chart, field_coeffs=fields,
                       density=constant_coefficient(1.0), name="grushin-cylinder")


def builtin_euclidean(x_range: tuple[float, float] = (0.0, 1.0),
                      y_range: tuple[float, float] = (0.0, 1.0),
                      periodic_x: bool = False,
                      periodic_y: bool = False) -> CCStructure:
    """Flat structure: fields d/dx and d/dy, rho = 1."""
    chart = Chart2D(x_range, y_range, periodic_x=periodic_x, periodic_y=periodic_y)
    fields = (
        (constant_coefficient(1.0), constant_coefficient(0.0)),
        (constant_coefficient(0.0), constant_coefficient(1.0)),
    )
    return CCStructure(chart=chart, field_coeffs=fields,
                       density=constant_coefficient(1.0), name="euclidean")


@dataclass(frozen=True)
class GridFunction:
    """Scalar samples on every node of a grid, flattened x-major."""

    grid: "Grid2D"
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        if values.size != self.grid.n_nodes:
            raise ValueError(f"expected {self.grid.n_nodes} node values, got {values.size}")
        object.__setattr__(self, "values", values)

    def as_2d(self) -> np.ndarray:
        return self.values.reshape(self.grid.nx, self.grid.ny)


@dataclass(frozen=True)
class HorizontalField:
    """Coefficient functions phi_i of V = sum_i phi_i X_i, sampled on nodes."""

    grid: "Grid2D"
    phi: np.ndarray  # shape (m, n_nodes)

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        if phi.ndim != 2 or phi.shape[1] != self.grid.n_nodes:
            raise ValueError(f"phi must have shape (m, {self.grid.n_nodes}), got {phi.shape}")
        object.__setattr__(self, "phi", phi)

    @property
    def m(self) -> int:
        return self.phi.shape[0]

    def squared_length(self) -> np.ndarray:
        """Pointwise |V|^2 = sum_i phi_i^2 on nodes."""
        return np.sum(self.phi**2, axis=0)

    def chart_components(self, structure: CCStructure) -> tuple[np.ndarray, np.ndarray]:
        """Components of V in the chart frame (d/dx, d/dy), on nodes."""
        _check_compatible(structure, self.grid)
        X, Y = self.grid.meshes()
        coeffs = structure.coefficients_at(X, Y)  # (m, 2, nx, ny)
        phi2 = self.phi.reshape(self.m, self.grid.nx, self.grid.ny)
        vx = np.einsum("ixy,ixy->xy", phi2, coeffs[:, 0])
        vy = np.einsum("ixy,ixy->xy", phi2, coeffs[:, 1])
        return vx, vy


def _check_compatible(structure: CCStructure, grid: "Grid2D") -> None:
    if grid.chart != structure.chart:
        raise ValueError("grid and structure live on different charts")


def _d_axis(values2d: np.ndarray, h: float, periodic: bool, axis: int) -> np.ndarray:
    """Second-order first derivative along one axis of a node array."""
    if periodic:
        return (np.roll(values2d, -1, axis=axis) - np.roll(values2d, 1, axis=axis)) / (2.0 * h)
    return np.gradient(values2d, h, axis=axis, edge_order=2)


def chart_gradient(grid: "Grid2D", values2d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(du/dx, du/dy) on nodes by centered/one-sided second-order stencils."""
    ux = _d_axis(values2d, grid.hx, grid.chart.periodic_x, axis=0)
    uy = _d_axis(values2d, grid.hy, grid.chart.periodic_y, axis=1)
    return ux, uy


def horizontal_gradient(structure: CCStructure, u: GridFunction) -> HorizontalField:
    """Horizontal gradient of u: phi_i = X_i u = a_i1 du/dx + a_i2 du/dy."""
    grid = u.grid
    _check_compatible(structure, grid)
    ux, uy = chart_gradient(grid, u.as_2d())
    X, Y = grid.meshes()
    coeffs = structure.coefficients_at(X, Y)
    phi = coeffs[:, 0] * ux + coeffs[:, 1] * uy
    return HorizontalField(grid=grid, phi=phi.reshape(structure.m, grid.n_nodes))


def divergence(structure: CCStructure, V: HorizontalField) -> GridFunction:
    """Divergence of V with respect to omega = rho dx dy.

    Computed as (d(rho Vx)/dx + d(rho Vy)/dy) / rho, where (Vx, Vy) are
    the chart components of V; this is the unique function with
    L_V omega = (div V) omega.
    """
    grid = V.grid
    _check_compatible(structure, grid)
    X, Y = grid.meshes()
    rho = structure.density_at(X, Y)
    vx, vy = V.chart_components(structure)
    fx = rho * vx
    fy = rho * vy
    div = (_d_axis(fx, grid.hx, grid.chart.periodic_x, axis=0)
           + _d_axis(fy, grid.hy, grid.chart.periodic_y, axis=1)) / rho
    return GridFunction(grid=grid, values=div.reshape(grid.n_nodes))


def sub_laplacian_apply(structure: CCStructure, u: GridFunction) -> GridFunction:
    """Geometric sub-Laplacian: div_omega of the horizontal gradient of u."""
    return divergence(structure, horizontal_gradient(structure, u))
