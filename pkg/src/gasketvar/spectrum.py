"""Dirichlet eigenproblems on V_m.

``weighted_spectrum`` solves K u = lam M u on interior vertices with
M = diag(w (-a)), the discrete form of  Delta u + lam a u = 0.  Values are
renormalized: K carries the factor ((N+2)/N)^m and M the vertex weights, so
for a = -1 they approximate the continuum eigenvalues (pi^2 k^2 for N = 2).

``raw_dirichlet_eigenvalues`` works with the bare graph Laplacian, whose
eigenvalues differ from the renormalized ones by the level-dependent scaling
and are the ones that obey the N = 3 decimation map nu -> nu (5 - nu).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .energy import EnergyForm, graph_laplacian_matrix
from .gasket import LevelGraph
from .measure import QuadratureWeights

DENSE_LIMIT = 2000
FORBIDDEN = (2.0, 5.0, 6.0)


class SpectrumError(RuntimeError):
    pass


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenfields: np.ndarray  # (k, n_vertices), zero on the corners
    level: int
    normalization: str

    def to_json(self, include_fields: bool = False) -> dict:
        out = {
            "level": self.level,
            "normalization": self.normalization,
            "eigenvalues": self.eigenvalues.tolist(),
        }
        if include_fields:
            out["eigenfields"] = self.eigenfields.tolist()
        return out


def weighted_spectrum(E: EnergyForm, w: QuadratureWeights, a, k: int) -> SpectrumResult:
    g = E.graph
    idx = g.interior
    a = np.broadcast_to(np.asarray(a, dtype=float), (g.n_vertices,))
    if np.any(a[idx] >= 0):
        raise SpectrumError("a must be strictly negative at interior vertices")
    n = idx.size
    if not 1 <= k <= n:
        raise ValueError(f"k must be between 1 and the {n} interior unknowns")
    K = E.interior_stiffness()
    mass = w.values[idx] * (-a[idx])
    if n <= DENSE_LIMIT:
        vals, vecs = sla.eigh(K.toarray(), np.diag(mass), subset_by_index=[0, k - 1])
    else:
        try:
            vals, vecs = spla.eigsh(K.tocsc(), k=k, M=sp.diags(mass).tocsc(), sigma=0.0, which="LM")
        except spla.ArpackNoConvergence as exc:
            raise SpectrumError(str(exc)) from exc
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
        # re-normalize in the mass inner product
        vecs = vecs / np.sqrt(np.einsum("ij,i,ij->j", vecs, mass, vecs))
    fields = np.zeros((k, g.n_vertices))
    fields[:, idx] = vecs.T
    return SpectrumResult(eigenvalues=vals, eigenfields=fields, level=g.level, normalization="renormalized")


def raw_dirichlet_eigenvalues(g: LevelGraph) -> np.ndarray:
    """Eigenvalues of D - A restricted to interior vertices, ascending."""
    idx = g.interior
    L = graph_laplacian_matrix(g)[idx][:, idx].toarray()
    return np.linalg.eigvalsh(L)


@dataclass
class DecimationReport:
    level: int
    checked: int
    matched: int
    excluded: int
    max_error: float

    @property
    def match_fraction(self) -> float:
        return self.matched / self.checked if self.checked else 1.0

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "checked": self.checked,
            "matched": self.matched,
            "excluded": self.excluded,
            "match_fraction": self.match_fraction,
            "max_error": self.max_error,
        }


def decimation_check(coarse: LevelGraph, fine: LevelGraph, tol: float = 1e-9) -> DecimationReport:
    """Check that nu (5 - nu) is a level-m eigenvalue for every admissible level-(m+1) nu."""
    if coarse.N != 3 or fine.N != 3:
        raise ValueError("decimation map nu -> nu(5 - nu) holds for N = 3 only")
    if fine.level != coarse.level + 1:
        raise ValueError(f"levels {coarse.level} and {fine.level} are not consecutive")
    mu = raw_dirichlet_eigenvalues(coarse)
    nu = raw_dirichlet_eigenvalues(fine)
    forbidden = np.any(np.abs(nu[:, None] - np.array(FORBIDDEN)[None, :]) < 1e-8, axis=1)
    image = nu[~forbidden] * (5.0 - nu[~forbidden])
    err = np.min(np.abs(image[:, None] - mu[None, :]), axis=1) if image.size else np.zeros(0)
    return DecimationReport(
        level=fine.level,
        checked=int(image.size),
        matched=int(np.sum(err <= tol)),
        excluded=int(forbidden.sum()),
        max_error=float(err.max()) if err.size else 0.0,
    )
