"""Nodal domains of grid functions and the Courant bound check.

A nodal domain is a connected component (4-neighbor adjacency, wrapping
across periodic axes) of the set where the function is strictly positive
or strictly negative outside a near-zero band.  Connectivity is computed
with a union-find structure.  The Courant check compares the number of
nodal domains of the i-th eigenfunction against i, crediting clusters of
numerically equal eigenvalues with the top index of the cluster.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discretization import AssembledForms, Grid2D
from .eigensolver import Eigenpairs
from .pgm import labels_to_gray, write_pgm

__all__ = [
    "NodalDecomposition",
    "nodal_domains",
    "CourantEntry",
    "CourantReport",
    "check_courant",
    "write_labels_pgm",
]


class _DisjointSet:
    """Union-find with path compression and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, a: int) -> int:
        parent = self.parent
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


@dataclass(frozen=True)
class NodalDecomposition:
    """Signed component labels per node: 0 marks the near-zero band,
    positive components get 1, 2, ... and negative ones -1, -2, ...
    in order of first appearance."""

    labels: np.ndarray
    n_domains: int
    n_positive: int
    n_negative: int
    rel_threshold: float


def _grid_edges(grid: Grid2D) -> np.ndarray:
    """All 4-neighbor node pairs, wrapping on periodic axes; shape (E, 2)."""
    nx, ny = grid.nx, grid.ny
    idx = np.arange(nx * ny).reshape(nx, ny)
    pairs = []
    right = np.stack([idx[:-1, :].ravel(), idx[1:, :].ravel()], axis=1)
    pairs.append(right)
    if grid.chart.periodic_x:
        pairs.append(np.stack([idx[-1, :], idx[0, :]], axis=1))
    up = np.stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()], axis=1)
    pairs.append(up)
    if grid.chart.periodic_y:
        pairs.append(np.stack([idx[:, -1], idx[:, 0]], axis=1))
    return np.concatenate(pairs, axis=0)


def nodal_domains(grid: Grid2D, u, rel_threshold: float = 1e-6) -> NodalDecomposition:
    """Label the nodal domains of u (values on all grid nodes).

    Nodes with |u| <= rel_threshold * max|u| form the zero band (label 0)
    and separate domains.  rel_threshold must lie in [0, 0.1].
    """
    if not 0.0 <= rel_threshold <= 0.1:
        raise ValueError(f"rel_threshold must be in [0, 0.1], got {rel_threshold}")
    values = np.asarray(getattr(u, "values", u), dtype=float).ravel()
    if values.size != grid.n_nodes:
        raise ValueError(f"expected {grid.n_nodes} node values, got {values.size}")
    vmax = np.abs(values).max()
    sign = np.sign(values)
    sign[np.abs(values) <= rel_threshold * vmax] = 0
    dsu = _DisjointSet(grid.n_nodes)
    edges = _grid_edges(grid)
    same = (sign[edges[:, 0]] == sign[edges[:, 1]]) & (sign[edges[:, 0]] != 0)
    for a, b in edges[same]:
        dsu.union(int(a), int(b))
    labels = np.zeros(grid.n_nodes, dtype=int)
    next_pos, next_neg = 1, -1
    assigned: dict[int, int] = {}
    for node in range(grid.n_nodes):
        s = sign[node]
        if s == 0:
            continue
        root = dsu.find(node)
        if root not in assigned:
            if s > 0:
                assigned[root] = next_pos
                next_pos += 1
            else:
                assigned[root] = next_neg
                next_neg -= 1
        labels[node] = assigned[root]
    n_pos = next_pos - 1
    n_neg = -next_neg - 1
    return NodalDecomposition(labels=labels, n_domains=n_pos + n_neg,
                              n_positive=n_pos, n_negative=n_neg,
                              rel_threshold=rel_threshold)


@dataclass(frozen=True)
class CourantEntry:
    index: int          # 1-based eigenvalue index
    eigenvalue: float
    n_domains: int
    bound: int          # top index of the numerically equal cluster
    ok: bool


@dataclass(frozen=True)
class CourantReport:
    entries: tuple[CourantEntry, ...]
    ok: bool

    @property
    def violations(self) -> tuple[CourantEntry, ...]:
        return tuple(e for e in self.entries if not e.ok)


def _cluster_bounds(lambdas: np.ndarray, gap_rel_tol: float) -> list[int]:
    """For each index, the 1-based top index of its near-equal cluster.

    Clusters chain eigenvalues whose consecutive gaps stay below
    gap_rel_tol * max(1, |lambda|); the bound of the cluster is the index
    of its last member, which is the sharp Courant allowance for any
    eigenfunction chosen inside a degenerate eigenspace.
    """
    k = lambdas.size
    bounds = [0] * k
    i = 0
    while i < k:
        j = i
        while j + 1 < k and abs(lambdas[j + 1] - lambdas[j]) <= gap_rel_tol * max(1.0, abs(lambdas[j])):
            j += 1
        for idx in range(i, j + 1):
            bounds[idx] = j + 1
        i = j + 1
    return bounds


def check_courant(pairs: Eigenpairs, forms: AssembledForms,
                  rel_threshold: float = 1e-6,
                  gap_rel_tol: float = 1e-6) -> CourantReport:
    """Count nodal domains of each eigenfunction and compare to its index.

    Violations are reported, never raised: on coarse grids the zero band
    can merge or split domains, and that is a diagnostic, not a bug.
    """
    bounds = _cluster_bounds(pairs.lambdas, gap_rel_tol)
    entries = []
    for i in range(pairs.k):
        full = forms.expand(pairs.vectors[:, i])
        decomp = nodal_domains(forms.grid, full, rel_threshold)
        ok = decomp.n_domains <= bounds[i]
        entries.append(CourantEntry(index=i + 1, eigenvalue=float(pairs.lambdas[i]),
                                    n_domains=decomp.n_domains, bound=bounds[i], ok=ok))
    return CourantReport(entries=tuple(entries), ok=all(e.ok for e in entries))


def write_labels_pgm(grid: Grid2D, decomp: NodalDecomposition, path) -> None:
    """Export the label array as an 8-bit PGM image (band black)."""
    labels2d = decomp.labels.reshape(grid.nx, grid.ny)
    write_pgm(labels_to_gray(labels2d), path)
