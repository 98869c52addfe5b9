"""Shared fixtures: one moderate Grushin Neumann solve reused across suites."""

import pytest

import ccspectral as cc


@pytest.fixture(scope="session")
def grushin():
    return cc.builtin_grushin_cylinder()


@pytest.fixture(scope="session")
def grushin_grid(grushin):
    return cc.build_grid(grushin.chart, 48, 96)


@pytest.fixture(scope="session")
def grushin_neumann_forms(grushin, grushin_grid):
    return cc.assemble(grushin, grushin_grid, cc.BoundarySpec.all_neumann())


@pytest.fixture(scope="session")
def grushin_neumann_pairs(grushin_neumann_forms):
    return cc.solve_smallest(grushin_neumann_forms, k=8, seed=0)


@pytest.fixture(scope="session")
def euclidean():
    return cc.builtin_euclidean()
