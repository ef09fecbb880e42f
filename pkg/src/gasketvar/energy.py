"""Renormalized Dirichlet energy on V_m and the tools built on it.

Fields are plain float arrays aligned with ``LevelGraph`` vertex order.  A
field is "Dirichlet" when it vanishes on the N corners.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .gasket import LevelGraph, refine
from .measure import QuadratureWeights


@dataclass(frozen=True, eq=False)
class EnergyForm:
    """W_m(u) = factor * sum over edges (u(x) - u(y))^2, factor = ((N+2)/N)^m."""

    graph: LevelGraph
    factor: float
    stiffness: sp.csr_matrix

    @property
    def sigma(self) -> float:
        return holder_exponent(self.graph.N)

    def interior_stiffness(self) -> sp.csr_matrix:
        idx = self.graph.interior
        return self.stiffness[idx][:, idx].tocsr()

    def to_triplets(self) -> str:
        """Coordinate-format text, one ``row col value`` line per stored entry."""
        coo = self.stiffness.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return "".join(
            f"{int(coo.row[k])} {int(coo.col[k])} {float(coo.data[k])!r}\n" for k in order
        )


def renormalization(N: int) -> float:
    return (N + 2) / N


def holder_exponent(N: int) -> float:
    return math.log((N + 2) / N) / (2.0 * math.log(2.0))


def sobolev_constant(N: int) -> int:
    return 2 * N + 3


def graph_laplacian_matrix(g: LevelGraph) -> sp.csr_matrix:
    """L = D - A over all vertices; (H_m u) = -L u."""
    n = g.n_vertices
    i, j = g.edges[:, 0], g.edges[:, 1]
    ones = np.ones(len(i))
    adj = sp.coo_matrix((np.concatenate([ones, ones]), (np.concatenate([i, j]), np.concatenate([j, i]))), shape=(n, n))
    return (sp.diags(g.degree().astype(float)) - adj).tocsr()


def energy_form(g: LevelGraph, ratio: float | None = None) -> EnergyForm:
    """Assemble the level-m form.

    ``ratio`` replaces the per-level renormalization (N+2)/N; it exists for
    fault injection in the verification suite and should normally be left
    alone.
    """
    if ratio is None:
        ratio = renormalization(g.N)
    factor = ratio**g.level
    return EnergyForm(graph=g, factor=factor, stiffness=(factor * graph_laplacian_matrix(g)).tocsr())


def _check(E: EnergyForm, *fields: np.ndarray) -> None:
    n = E.graph.n_vertices
    for u in fields:
        if u.shape != (n,):
            raise ValueError(f"field of shape {u.shape} is not aligned with a graph of {n} vertices")


def energy(E: EnergyForm, u) -> float:
    u = np.asarray(u, dtype=float)
    _check(E, u)
    d = u[E.graph.edges[:, 0]] - u[E.graph.edges[:, 1]]
    return float(E.factor * np.sum(d * d))


def energy_inner(E: EnergyForm, u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    _check(E, u, v)
    e = E.graph.edges
    return float(E.factor * np.sum((u[e[:, 0]] - u[e[:, 1]]) * (v[e[:, 0]] - v[e[:, 1]])))


def norm(E: EnergyForm, u) -> float:
    return math.sqrt(energy(E, u))


def graph_laplacian(g: LevelGraph, u, x: int | None = None):
    """(H_m u)(x) = sum over neighbours y of u(y) - u(x); all vertices if ``x`` is None."""
    u = np.asarray(u, dtype=float)
    if x is None:
        return -(graph_laplacian_matrix(g) @ u)
    e = g.edges
    nbrs = np.concatenate([e[e[:, 0] == x, 1], e[e[:, 1] == x, 0]])
    return float(np.sum(u[nbrs] - u[x]))


def standard_laplacian(g: LevelGraph, u) -> np.ndarray:
    """(N+2)^m H_m u."""
    return (g.N + 2) ** g.level * graph_laplacian(g, u)


def weak_laplacian(g: LevelGraph, u) -> np.ndarray:
    """(N/2)(N+2)^m H_m u, the pointwise operator paired with W_m and the vertex weights.

    Summation by parts gives -W_m(u, v) = sum_x w_x (this)(x) v(x) at interior
    vertices, since w_x = 2/N^(m+1) there.  It agrees with the standard
    Laplacian for N = 2.
    """
    return 0.5 * g.N * standard_laplacian(g, u)


def dirichlet(g: LevelGraph, u) -> np.ndarray:
    out = np.array(u, dtype=float, copy=True)
    out[g.boundary] = 0.0
    return out


def is_dirichlet(g: LevelGraph, u) -> bool:
    return bool(np.all(np.asarray(u)[g.boundary] == 0.0))


# -- harmonic extension ------------------------------------------------------


def _local_extension(N: int) -> tuple[list[tuple[int, int]], np.ndarray]:
    """Midpoint values of one cell as a linear map of its N corner values."""
    pairs = [(j, k) for j in range(N) for k in range(j + 1, N)]
    pos = {p: t for t, p in enumerate(pairs)}
    P = len(pairs)
    A = np.zeros((P, P))
    B = np.zeros((P, N))
    for t, (j, k) in enumerate(pairs):
        A[t, t] = 2 * (N - 1)
        B[t, j] = B[t, k] = 1.0
        for l in range(N):
            if l in (j, k):
                continue
            A[t, pos[tuple(sorted((j, l)))]] -= 1.0
            A[t, pos[tuple(sorted((k, l)))]] -= 1.0
    assert abs(np.linalg.det(A)) > 1e-12, "local extension system is singular"
    return pairs, np.linalg.solve(A, B)


def harmonic_extension(g: LevelGraph, u, fine: tuple[LevelGraph, np.ndarray] | None = None):
    """Energy-minimizing extension of a level-m field to V_{m+1}.

    Returns ``(fine_graph, extended_field)``.  Energy decouples over level-m
    cells because every new vertex is the midpoint of exactly one coarse edge.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (g.n_vertices,):
        raise ValueError(f"field of shape {u.shape} does not match {g.n_vertices} vertices")
    fg, old_to_new = refine(g) if fine is None else fine
    N = g.N
    pairs, X = _local_extension(N)
    ext = np.empty(fg.n_vertices)
    ext[old_to_new] = u
    corner_vals = u[g.cells]
    mids = corner_vals @ X.T
    rows = np.arange(g.n_cells) * N
    for t, (j, k) in enumerate(pairs):
        # child j of each coarse cell has the midpoint of p_j p_k in slot k
        ext[fg.cells[rows + j, k]] = mids[:, t]
    return fg, ext


# -- Sobolev / Hoelder inequality ---------------------------------------------


class HolderReport(NamedTuple):
    quotient: float
    bound: float
    ok: bool
    sup_norm: float
    sup_bound: float
    sup_ok: bool


class HolderChecker:
    """Exact max of |u(x) - u(y)| / |x - y|^sigma over all vertex pairs.

    Pairs are scanned by increasing radius R: pairs farther than R cannot beat
    range(u) / R^sigma, so the scan stops once the running max reaches that
    value.  The last resort is a chunked all-pairs pass.
    """

    _brute_chunk = 512
    _max_pairs = 4_000_000

    def __init__(self, E: EnergyForm):
        self.E = E
        g = E.graph
        self.sigma = holder_exponent(g.N)
        self.coords = g.euclidean()
        self._tree = cKDTree(self.coords)
        self._shells: list[tuple[float, np.ndarray, np.ndarray] | None] = []
        self._h = 0.5**g.level

    def _shell(self, k: int):
        while len(self._shells) <= k:
            R = self._h * 2 ** (len(self._shells) + 1)
            if R >= 1.0:
                self._shells.append(None)
                continue
            pairs = self._tree.query_pairs(R * (1 + 1e-9), output_type="ndarray")
            if len(pairs) > self._max_pairs:
                self._shells.append(None)
                continue
            d = np.linalg.norm(self.coords[pairs[:, 0]] - self.coords[pairs[:, 1]], axis=1)
            self._shells.append((R, pairs, d**self.sigma))
        return self._shells[k]

    def _brute(self, u: np.ndarray) -> float:
        best = 0.0
        n = len(u)
        for s in range(0, n, self._brute_chunk):
            blk = slice(s, min(n, s + self._brute_chunk))
            D = cdist(self.coords[blk], self.coords) ** self.sigma
            diff = np.abs(u[blk, None] - u[None, :])
            with np.errstate(divide="ignore", invalid="ignore"):
                q = np.where(D > 0, diff / np.where(D > 0, D, 1.0), 0.0)
            best = max(best, float(q.max()))
        return best

    def quotient(self, u) -> float:
        u = np.asarray(u, dtype=float)
        spread = float(u.max() - u.min()) if u.size else 0.0
        if spread == 0.0:
            return 0.0
        k = 0
        while True:
            shell = self._shell(k)
            if shell is None:
                return self._brute(u)
            R, pairs, dsig = shell
            q = float(np.max(np.abs(u[pairs[:, 0]] - u[pairs[:, 1]]) / dsig)) if len(pairs) else 0.0
            if q >= spread / R**self.sigma:
                return q
            k += 1

    def check(self, u) -> HolderReport:
        u = np.asarray(u, dtype=float)
        _check(self.E, u)
        N = self.E.graph.N
        c = sobolev_constant(N)
        root_w = math.sqrt(energy(self.E, u))
        q = self.quotient(u)
        bound = c * root_w
        sup = float(np.max(np.abs(u))) if u.size else 0.0
        if is_dirichlet(self.E.graph, u):
            sup_bound = bound
            sup_ok = sup <= sup_bound + 1e-10
        else:
            sup_bound, sup_ok = math.inf, True
        return HolderReport(q, bound, q <= bound + 1e-10, sup, sup_bound, sup_ok)


def holder_check(E: EnergyForm, u) -> HolderReport:
    return HolderChecker(E).check(u)


# -- Lipschitz maps ------------------------------------------------------------


class LipschitzMap(NamedTuple):
    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    lipschitz: float


TRUNCATIONS: dict[str, LipschitzMap] = {
    "identity": LipschitzMap("identity", lambda t: t, 1.0),
    "abs_min_one": LipschitzMap("abs_min_one", lambda t: np.abs(np.minimum(t, 1.0)), 1.0),
    "double": LipschitzMap("double", lambda t: 2.0 * t, 2.0),
    "clamp": LipschitzMap("clamp", lambda t: np.clip(t, -1.0, 1.0), 1.0),
}


def truncate(g: LevelGraph, u, h: LipschitzMap | Callable, dirichlet_field: bool | None = None) -> np.ndarray:
    """Pointwise composition h o u; refuses maps with h(0) != 0 on Dirichlet fields."""
    fn = h.fn if isinstance(h, LipschitzMap) else h
    u = np.asarray(u, dtype=float)
    if dirichlet_field is None:
        dirichlet_field = is_dirichlet(g, u)
    if dirichlet_field and float(np.asarray(fn(np.zeros(1)))[0]) != 0.0:
        raise ValueError("h(0) must be 0 to keep the boundary condition")
    return np.asarray(fn(u), dtype=float)


def starred_norm(E: EnergyForm, w: QuadratureWeights, u, a, assume_h1: bool = True) -> float:
    """sqrt(W_m(u) - sum_x w_x a(x) u(x)^2), equivalent to sqrt(W_m) when a <= 0."""
    u = np.asarray(u, dtype=float)
    a = np.broadcast_to(np.asarray(a, dtype=float), u.shape)
    if assume_h1 and np.any(a > 0):
        raise ValueError("coefficient a must be <= 0 at every vertex")
    return math.sqrt(energy(E, u) - float(np.dot(w.values, a * u * u)))
