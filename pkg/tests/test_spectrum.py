import math

import numpy as np
import pytest

import oracles
from gasketvar import spectrum
from gasketvar.energy import energy, energy_form
from gasketvar.gasket import build_gasket
from gasketvar.measure import vertex_weights
from gasketvar.spectrum import (
    SpectrumError,
    decimation_check,
    raw_dirichlet_eigenvalues,
    weighted_spectrum,
)


def setup(N, m):
    g = build_gasket(N, m)
    return g, energy_form(g), vertex_weights(g)


def test_interval_pi_squared():
    _, E, w = setup(2, 8)
    res = weighted_spectrum(E, w, -1.0, 2)
    assert res.eigenvalues[0] == pytest.approx(math.pi**2, rel=0.01)
    assert res.eigenvalues[1] / res.eigenvalues[0] == pytest.approx(4.0, rel=0.02)


def test_interval_matches_closed_form():
    _, E, w = setup(2, 6)
    res = weighted_spectrum(E, w, -1.0, 5)
    assert np.allclose(res.eigenvalues, oracles.interval_eigs(6, 5), rtol=1e-10)


def test_scaling_by_coefficient():
    _, E, w = setup(3, 3)
    base = weighted_spectrum(E, w, -1.0, 4).eigenvalues
    scaled = weighted_spectrum(E, w, -2.5, 4).eigenvalues
    assert np.allclose(scaled, base / 2.5, rtol=1e-12)


def test_orthonormal_and_residual():
    g, E, w = setup(3, 4)
    a = -1.0 - g.euclidean()[:, 0]
    res = weighted_spectrum(E, w, a, 6)
    mass = w.values * (-a)
    U = res.eigenfields
    assert np.allclose(U @ np.diag(mass) @ U.T, np.eye(6), atol=1e-10)
    for lam, u in zip(res.eigenvalues, U):
        r = E.stiffness @ u - lam * mass * u
        assert np.linalg.norm(r[g.interior]) <= 1e-8
        rayleigh = energy(E, u) / float(np.sum(mass * u * u))
        assert rayleigh == pytest.approx(lam, rel=1e-9)


def test_courant_ordering():
    for N, m in [(2, 4), (3, 2), (3, 4), (4, 2)]:
        _, E, w = setup(N, m)
        vals = weighted_spectrum(E, w, -1.0, 3).eigenvalues
        assert np.all(vals > 0) and np.all(np.diff(vals) >= 0)
        assert vals[1] - vals[0] > 1e-10


def test_mesh_trend():
    lam1 = []
    for m in range(3, 8):
        _, E, w = setup(3, m)
        lam1.append(weighted_spectrum(E, w, -1.0, 1).eigenvalues[0])
    rel = np.abs(np.diff(lam1)) / np.array(lam1[1:])
    assert np.all(np.diff(rel) < 0)


def test_sparse_path_agrees_with_dense(monkeypatch):
    _, E, w = setup(3, 5)
    dense = weighted_spectrum(E, w, -1.0, 4).eigenvalues
    monkeypatch.setattr(spectrum, "DENSE_LIMIT", 10)
    sparse = weighted_spectrum(E, w, -1.0, 4)
    assert np.allclose(sparse.eigenvalues, dense, rtol=1e-9)


def test_rejects_nonnegative_coefficient():
    _, E, w = setup(3, 2)
    with pytest.raises(SpectrumError):
        weighted_spectrum(E, w, 0.0, 2)
    with pytest.raises(ValueError):
        weighted_spectrum(E, w, -1.0, 100)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_decimation(m):
    rep = decimation_check(build_gasket(3, m), build_gasket(3, m + 1))
    assert rep.match_fraction == 1.0
    assert rep.checked > 0 and rep.excluded > 0
    assert rep.max_error <= 1e-9


def test_decimation_forbidden_values_present():
    nu = raw_dirichlet_eigenvalues(build_gasket(3, 3))
    assert np.any(np.abs(nu - 5.0) < 1e-8) or np.any(np.abs(nu - 6.0) < 1e-8)
    assert np.all(nu > 0)


def test_decimation_errors():
    with pytest.raises(ValueError):
        decimation_check(build_gasket(4, 1), build_gasket(4, 2))
    with pytest.raises(ValueError):
        decimation_check(build_gasket(3, 1), build_gasket(3, 3))


def test_json_export():
    _, E, w = setup(2, 3)
    d = weighted_spectrum(E, w, -1.0, 2).to_json(include_fields=True)
    assert d["normalization"] == "renormalized" and len(d["eigenfields"]) == 2
