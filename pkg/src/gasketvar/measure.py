"""Vertex quadrature for the normalized self-similar measure."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .gasket import LevelGraph


@dataclass(frozen=True, eq=False)
class QuadratureWeights:
    """Weight of vertex x is count(x) / N^(m+1), count(x) = cells containing x.

    Each level-m cell carries mass N^-m, split equally over its N corners.
    """

    counts: np.ndarray
    denominator: int

    @property
    def values(self) -> np.ndarray:
        return self.counts / float(self.denominator)

    def exact_total(self) -> Fraction:
        return Fraction(int(self.counts.sum()), self.denominator)

    def to_json(self) -> list[float]:
        return self.values.tolist()

    def __len__(self) -> int:
        return int(self.counts.shape[0])


def vertex_weights(g: LevelGraph) -> QuadratureWeights:
    counts = np.bincount(g.cells.ravel(), minlength=g.n_vertices).astype(np.int64)
    return QuadratureWeights(counts=counts, denominator=g.N ** (g.level + 1))


def integrate(g: LevelGraph, w: QuadratureWeights, u) -> float:
    u = np.asarray(u, dtype=float)
    if u.shape != (g.n_vertices,) or len(w) != g.n_vertices:
        raise ValueError(
            f"field of shape {u.shape} and {len(w)} weights do not match a graph with {g.n_vertices} vertices"
        )
    return float(np.dot(w.values, u))
