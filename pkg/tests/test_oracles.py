"""The frozen constants in oracles.py agree with their generating computations."""

import math

import pytest

import oracles


def test_exp_threshold_frozen():
    lam, gam = oracles.exp_threshold_grid(3)
    assert lam == pytest.approx(oracles.EXP_EXACT_N3, rel=1e-9)
    assert gam == pytest.approx(oracles.EXP_EXACT_GAMMA, abs=1e-5)


def test_exp_bound_is_arithmetic():
    assert oracles.EXP_BOUND_N3 == pytest.approx(3.3416e-3, rel=1e-4)
    assert oracles.EXP_BOUND_N2 == pytest.approx(5.524e-3, rel=1e-3)
    # sup gamma^2 e^-gamma is 4 e^-2 at gamma = 2
    assert max(g * g * math.exp(-g) for g in [1.9, 2.0, 2.1]) == 4 * math.exp(-2)


@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_gasket_counts_frozen(m):
    V = oracles.ifs_points(3, m)
    E = oracles.edge_count_by_distance(3, m)
    cells = oracles.cell_vertex_sets(3, m)
    assert (len(V), E, len(cells)) == oracles.GASKET_COUNTS_N3[m]
