import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.distance import pdist

import oracles
from gasketvar.energy import (
    TRUNCATIONS,
    HolderChecker,
    energy,
    energy_form,
    energy_inner,
    graph_laplacian,
    harmonic_extension,
    holder_check,
    holder_exponent,
    standard_laplacian,
    starred_norm,
    truncate,
    weak_laplacian,
)
from gasketvar.gasket import build_gasket, refine
from gasketvar.measure import vertex_weights


def dirichlet_field(g, rng):
    u = np.zeros(g.n_vertices)
    u[g.interior] = rng.uniform(-1, 1, g.interior.size)
    return u


def brute_quotient(g, u):
    sigma = holder_exponent(g.N)
    d = pdist(g.euclidean())
    du = pdist(u[:, None])
    return float(np.max(du / d**sigma))


def test_constant_has_zero_energy():
    E = energy_form(build_gasket(3, 3))
    assert energy(E, np.full(E.graph.n_vertices, 7.0)) == 0.0


@pytest.mark.parametrize("m", [0, 1, 3, 6, 10])
def test_identity_on_interval(m):
    g = build_gasket(2, m)
    E = energy_form(g)
    u = g.euclidean()[:, 0]
    assert energy(E, u) == pytest.approx(1.0, rel=1e-12)
    assert energy(E, u) == pytest.approx(oracles.interval_energy(u), rel=1e-12)


def test_corner_indicator_level0():
    E = energy_form(build_gasket(3, 0))
    assert energy(E, [1.0, 0.0, 0.0]) == 2.0


def test_stiffness_entries():
    g = build_gasket(3, 2)
    E = energy_form(g)
    K = E.stiffness.toarray()
    assert np.allclose(np.diag(K), g.degree() * (5 / 3) ** 2)
    i, j = g.edges[0]
    assert K[i, j] == pytest.approx(-(5 / 3) ** 2)
    assert np.allclose(K, K.T)
    lines = E.to_triplets().splitlines()
    assert len(lines) == E.stiffness.nnz


def test_inner_product_identities(rng):
    E = energy_form(build_gasket(4, 3))
    n = E.graph.n_vertices
    for _ in range(20):
        u, v = rng.normal(size=n), rng.normal(size=n)
        assert energy_inner(E, u, u) == pytest.approx(energy(E, u), rel=1e-12)
        assert energy_inner(E, u, np.ones(n)) == pytest.approx(0.0, abs=1e-10)
        polar = (energy(E, u + v) - energy(E, u - v)) / 4
        assert abs(energy_inner(E, u, v) - polar) <= 1e-12 * max(1.0, energy(E, u) + energy(E, v))
        assert energy_inner(E, u, v) == pytest.approx(energy_inner(E, v, u), rel=1e-13)


def test_misaligned_field():
    E = energy_form(build_gasket(3, 2))
    with pytest.raises(ValueError):
        energy(E, np.zeros(4))


def test_quadratic_form_consistency(rng):
    E = energy_form(build_gasket(3, 4))
    for _ in range(10):
        u = rng.normal(size=E.graph.n_vertices)
        assert energy(E, u) == pytest.approx(float(u @ (E.stiffness @ u)), rel=1e-12)


def test_kernel_trivial_on_dirichlet_fields():
    for N, m in [(2, 3), (3, 2), (4, 1)]:
        K = energy_form(build_gasket(N, m)).interior_stiffness().toarray()
        assert np.linalg.eigvalsh(K).min() > 1e-8


def test_graph_laplacian_constant_and_quadratic():
    g = build_gasket(3, 3)
    assert np.allclose(graph_laplacian(g, np.ones(g.n_vertices)), 0)
    for m in (1, 4, 8):
        gi = build_gasket(2, m)
        x = gi.euclidean()[:, 0]
        lap = standard_laplacian(gi, x * (1 - x))
        assert np.allclose(lap[gi.interior], -2.0, atol=1e-9)


def test_graph_laplacian_midpoint_indicator():
    g = build_gasket(3, 1)
    x = int(g.interior[0])
    u = np.zeros(g.n_vertices)
    u[x] = 1.0
    assert graph_laplacian(g, u, x) == -4.0
    assert graph_laplacian(g, u)[x] == -4.0


def test_summation_by_parts(rng):
    for N, m in [(2, 5), (3, 4), (4, 3)]:
        g = build_gasket(N, m)
        E = energy_form(g)
        w = vertex_weights(g).values
        for _ in range(10):
            u = dirichlet_field(g, rng)
            v = rng.uniform(-1, 1, g.n_vertices)
            lhs = E.factor * float(graph_laplacian(g, u) @ v)
            assert lhs == pytest.approx(-energy_inner(E, u, v), abs=1e-10 * max(1, abs(lhs)))
            # the pointwise version pairs with the vertex weights at interior vertices
            v[g.boundary] = 0.0
            weak = float(np.sum(w * weak_laplacian(g, u) * v))
            assert weak == pytest.approx(-energy_inner(E, u, v), rel=1e-10, abs=1e-10)


def test_extension_classical_values():
    fg, ext = harmonic_extension(build_gasket(3, 0), np.array([1.0, 0.0, 0.0]))
    new = np.setdiff1d(np.arange(6), [fg.index_of((2, 0, 0)), fg.index_of((0, 2, 0)), fg.index_of((0, 0, 2))])
    vals = {tuple(fg.bary[i]): ext[i] for i in new}
    assert vals[(1, 1, 0)] == pytest.approx(0.4, abs=1e-15)
    assert vals[(1, 0, 1)] == pytest.approx(0.4, abs=1e-15)
    assert vals[(0, 1, 1)] == pytest.approx(0.2, abs=1e-15)
    assert energy(energy_form(fg), ext) == pytest.approx(2.0, abs=1e-12)


def test_extension_constant_and_interval():
    g = build_gasket(3, 2)
    fg, ext = harmonic_extension(g, np.full(g.n_vertices, 3.0))
    assert np.allclose(ext, 3.0)
    g2 = build_gasket(2, 3)
    u = np.random.default_rng(1).normal(size=g2.n_vertices)
    fg2, ext2 = harmonic_extension(g2, u)
    assert np.allclose(ext2[1::2], (u[:-1] + u[1:]) / 2)
    assert energy(energy_form(fg2), ext2) == pytest.approx(energy(energy_form(g2), u), rel=1e-12)


@pytest.mark.parametrize("N", [2, 3, 4, 5])
def test_extension_preserves_and_minimizes(N, rng):
    g = build_gasket(N, 2)
    fine = refine(g)
    new = np.setdiff1d(np.arange(fine[0].n_vertices), fine[1])
    E, Ef = energy_form(g), energy_form(fine[0])
    for _ in range(5):
        u = rng.normal(size=g.n_vertices)
        _, ext = harmonic_extension(g, u, fine=fine)
        assert energy(Ef, ext) == pytest.approx(energy(E, u), rel=1e-12)
        for _ in range(20):
            other = ext.copy()
            other[new] += rng.normal(scale=0.05, size=new.size)
            assert energy(Ef, other) >= energy(Ef, ext) - 1e-12


def test_extension_shape_check():
    with pytest.raises(ValueError):
        harmonic_extension(build_gasket(3, 1), np.zeros(3))


def test_sigma_values():
    assert holder_exponent(2) == 0.5
    assert holder_exponent(3) == pytest.approx(math.log(5 / 3) / (2 * math.log(2)))


def test_holder_zero_field():
    E = energy_form(build_gasket(3, 3))
    rep = holder_check(E, np.zeros(E.graph.n_vertices))
    assert (rep.quotient, rep.bound, rep.ok) == (0.0, 0.0, True)


@pytest.mark.parametrize("N,m", [(2, 6), (3, 4), (4, 3)])
def test_holder_quotient_matches_all_pairs(N, m, rng):
    g = build_gasket(N, m)
    checker = HolderChecker(energy_form(g))
    for _ in range(10):
        u = dirichlet_field(g, rng)
        assert checker.quotient(u) == pytest.approx(brute_quotient(g, u), rel=1e-12)
    # a smooth field, where pruning cannot cut early
    x = g.euclidean()
    u = np.sin(2 * x[:, 0]) + x[:, -1] ** 2
    assert checker.quotient(u) == pytest.approx(brute_quotient(g, u), rel=1e-12)


def test_holder_random_fields_n3_m4(rng):
    g = build_gasket(3, 4)
    checker = HolderChecker(energy_form(g))
    reports = [checker.check(dirichlet_field(g, rng)) for _ in range(1000)]
    assert all(r.ok and r.sup_ok for r in reports)


def test_truncation_catalog(rng):
    g = build_gasket(3, 3)
    E = energy_form(g)
    for _ in range(30):
        u = 2 * dirichlet_field(g, rng)
        for h in TRUNCATIONS.values():
            v = truncate(g, u, h)
            assert energy(E, v) <= h.lipschitz**2 * energy(E, u) * (1 + 1e-12)
        assert energy(E, truncate(g, u, TRUNCATIONS["identity"])) == energy(E, u)
        assert energy(E, truncate(g, u, TRUNCATIONS["double"])) == pytest.approx(4 * energy(E, u), rel=1e-14)


def test_truncation_rejects_shift():
    g = build_gasket(3, 2)
    u = np.zeros(g.n_vertices)
    with pytest.raises(ValueError):
        truncate(g, u, lambda t: t + 1)


def test_starred_norm(rng):
    g = build_gasket(3, 1)
    E = energy_form(g)
    w = vertex_weights(g)
    u = dirichlet_field(g, rng)
    assert starred_norm(E, w, u, 0.0) == pytest.approx(math.sqrt(energy(E, u)))
    assert starred_norm(E, w, np.zeros(g.n_vertices), -1.0) == 0.0
    direct = energy(E, u) + sum(wx * ux * ux for wx, ux in zip(w.values, u))
    assert starred_norm(E, w, u, -1.0) ** 2 == pytest.approx(direct, rel=1e-13)
    assert starred_norm(E, w, u, -1.0) >= math.sqrt(energy(E, u))
    with pytest.raises(ValueError):
        starred_norm(E, w, u, 0.5)


@settings(max_examples=40, deadline=None)
@given(
    N=st.integers(2, 4),
    m=st.integers(1, 3),
    seed=st.integers(0, 2**32 - 1),
    scale=st.floats(1e-3, 1e3),
)
def test_energy_homogeneous_and_nonnegative(N, m, seed, scale):
    g = build_gasket(N, m)
    E = energy_form(g)
    u = np.random.default_rng(seed).normal(size=g.n_vertices)
    assert energy(E, u) >= 0
    assert energy(E, scale * u) == pytest.approx(scale * scale * energy(E, u), rel=1e-12)
