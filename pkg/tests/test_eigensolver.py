import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from logfactor.eigensolver import (Grid, PotentialOnGrid, dirichlet_halfline, residual_norm,
                                   richardson_lowest, solve_lowest)
from logfactor.errors import DomainTruncationError, ParameterError


def harmonic(x):
    return 0.5 * x**2


@pytest.fixture(scope="module")
def ho():
    return PotentialOnGrid.from_function(Grid(12, 1201), harmonic)


def test_grid_validation():
    with pytest.raises(ParameterError):
        Grid(10, 200)
    with pytest.raises(ParameterError):
        Grid(10, 101)
    g = Grid.from_spacing(10, 0.05)
    assert g.n % 2 == 1 and ((g.n - 1) // 2) % 2 == 0
    assert g.x[g.mid] == 0.0


def test_asymmetric_potential_rejected():
    g = Grid(5, 201)
    with pytest.raises(ParameterError):
        PotentialOnGrid(g, g.x)


def test_harmonic_levels(ho):
    E = np.array([p.energy for p in solve_lowest(ho, 8)])
    # second-order FD error is ~h^2 E^2 / 24, well below 1e-3 here
    np.testing.assert_allclose(E, np.arange(8) + 0.5, atol=2e-3)
    np.testing.assert_allclose(richardson_lowest(harmonic, 12, 1201, 8), np.arange(8) + 0.5, atol=1e-6)


def test_harmonic_halfline():
    E = richardson_lowest(harmonic, 12, 1201, 3, halfline=True)
    np.testing.assert_allclose(E, [1.5, 3.5, 5.5], atol=1e-6)


def test_pairs_normalized_orthogonal_parity(ho):
    pairs = solve_lowest(ho, 8)
    U = np.column_stack([p.wavefunction for p in pairs])
    G = U.T @ U * ho.grid.h
    np.testing.assert_allclose(np.diag(G), 1, atol=1e-10)
    np.testing.assert_allclose(G - np.diag(np.diag(G)), 0, atol=1e-8)
    assert [p.parity for p in pairs] == [(-1) ** k for k in range(8)]
    for p in pairs:
        assert residual_norm(ho, p) < 1e-8
        u = p.wavefunction
        first = np.argmax(np.abs(u) > 1e-6 * np.abs(u).max())
        assert u[first] > 0


def test_halfline_equals_odd_states(ho):
    full = solve_lowest(ho, 10)
    half = dirichlet_halfline(ho, 5)
    for j, p in enumerate(half):
        assert abs(p.energy - full[2 * j + 1].energy) < 1e-8
        assert p.wavefunction[0] == 0.0


def test_box_ratios():
    # flat bottom with huge walls: levels go as (k+1)^2
    f = lambda x: np.where(x < 5, 0.0, 1e7)
    E = np.array([p.energy for p in solve_lowest(PotentialOnGrid.from_function(Grid(6, 4801), f), 3)])
    np.testing.assert_allclose(E / E[0], [1, 4, 9], atol=1e-3)
    half = np.array([p.energy for p in dirichlet_halfline(PotentialOnGrid.from_function(Grid(6, 4801), f), 3)])
    np.testing.assert_allclose(half / half[0], [1, 4, 9], atol=1e-3)


def test_mirrored_potential_bitwise():
    g = Grid(8, 801)
    v = 0.5 * g.x**2 + 0.1 * g.x**4
    a = [p.energy for p in solve_lowest(PotentialOnGrid(g, v), 5)]
    b = [p.energy for p in solve_lowest(PotentialOnGrid(g, v[::-1].copy()), 5)]
    assert a == b


def test_non_confining_raises():
    with pytest.raises(DomainTruncationError):
        solve_lowest(PotentialOnGrid.from_function(Grid(3, 301), harmonic), 6)


def test_refinement_second_order():
    E1 = np.array([p.energy for p in solve_lowest(PotentialOnGrid.from_function(Grid(12, 601), harmonic), 8)])
    E2 = np.array([p.energy for p in solve_lowest(PotentialOnGrid.from_function(Grid(12, 1201), harmonic), 8)])
    E4 = np.array([p.energy for p in solve_lowest(PotentialOnGrid.from_function(Grid(12, 2401), harmonic), 8)])
    # h^2 model: the change on halving h is a quarter of the previous change
    model = (E1 - E2) / 4
    assert np.all(np.abs(E2 - E4) < 4 * np.abs(model))
    np.testing.assert_allclose((E1 - E2) / (E2 - E4), 4, rtol=1e-2)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 2.0), st.floats(0.0, 0.5))
def test_random_wells_parity_and_orthonormality(a, b):
    g = Grid(8, 401)
    pot = PotentialOnGrid.from_function(g, lambda x: a * x**2 + b * x**4)
    pairs = solve_lowest(pot, 4)
    U = np.column_stack([p.wavefunction for p in pairs])
    np.testing.assert_allclose(U.T @ U * g.h, np.eye(4), atol=1e-8)
    assert [p.parity for p in pairs] == [1, -1, 1, -1]
    E = [p.energy for p in pairs]
    assert all(np.diff(E) > 0)
