"""Graded graph approximations V_m of the Sierpinski gasket in R^(N-1).

Vertices are stored in exact integer barycentric coordinates: a level-m
vertex is a tuple of N non-negative integers summing to 2**m, the weights
of the N corners p_1..p_N.  The contraction S_i(x) = x/2 + p_i/2 acting on a
level-m tuple ``b`` gives the level-(m+1) tuple ``b + 2**m * e_i``, so the
whole construction is done in integer arithmetic.

Cells are stored in the order of their address read as a base-N number with
the first letter most significant, so the cell with word ``w`` sits in row
``sum((w_k - 1) * N**(m - k))`` and its N children ``w + (i,)`` sit in rows
``row(w) * N + (i - 1)`` one level down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

DEFAULT_VERTEX_CAP = 5_000_000


class ResourceLimitError(RuntimeError):
    """Raised when a requested level would exceed the configured vertex cap."""


def vertex_count(N: int, m: int) -> int:
    """|V_m| = N + N(N^m - 1)/2, from |V_{m+1}| = N|V_m| - N(N-1)/2."""
    return N + N * (N**m - 1) // 2


def corner_points(N: int) -> np.ndarray:
    """Corners of the unit-edge simplex in R^(N-1), shape (N, N-1).

    N=2 gives 0 and 1 on the line, N=3 gives (0,0), (1,0), (1/2, sqrt(3)/2).
    """
    dim = N - 1
    pts = np.zeros((N, dim))
    for k in range(1, N):
        centroid = pts[:k].mean(axis=0)
        pts[k] = centroid
        pts[k, k - 1] = math.sqrt(max(0.0, 1.0 - float(np.sum((centroid - pts[0]) ** 2))))
    return pts


@dataclass(frozen=True, eq=False)
class LevelGraph:
    """Vertex/edge/cell structure of V_m.

    ``bary`` is an (n, N) int64 array of barycentric tuples, ``edges`` an
    (E, 2) array of index pairs i < j, ``boundary`` the N corner indices in
    corner order, ``words`` an (N^m, m) array of cell addresses over 1..N and
    ``cells`` an (N^m, N) array whose column j holds the image of p_j.
    """

    N: int
    level: int
    bary: np.ndarray
    edges: np.ndarray
    boundary: np.ndarray
    words: np.ndarray
    cells: np.ndarray
    _euclid: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_vertices(self) -> int:
        return int(self.bary.shape[0])

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def n_cells(self) -> int:
        return int(self.cells.shape[0])

    @property
    def scale(self) -> int:
        """Common denominator 2**m of the barycentric coordinates."""
        return 1 << self.level

    @property
    def interior(self) -> np.ndarray:
        mask = np.ones(self.n_vertices, dtype=bool)
        mask[self.boundary] = False
        return np.flatnonzero(mask)

    @property
    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.boundary] = True
        return mask

    def degree(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n_vertices)

    def euclidean(self) -> np.ndarray:
        """Float coordinates in R^(N-1), shape (n, N-1)."""
        if self._euclid is None:
            coords = (self.bary / float(self.scale)) @ corner_points(self.N)
            object.__setattr__(self, "_euclid", coords)
        return self._euclid

    def cell_row(self, word: Sequence[int]) -> int:
        if len(word) != self.level:
            raise KeyError(f"address {tuple(word)} has length {len(word)}, graph level is {self.level}")
        row = 0
        for letter in word:
            if not 1 <= int(letter) <= self.N:
                raise KeyError(f"address letter {letter} outside 1..{self.N}")
            row = row * self.N + (int(letter) - 1)
        return row

    def index_of(self, bary: Sequence[int]) -> int:
        """Vertex index of an exact barycentric tuple at this level."""
        key = np.asarray(bary, dtype=np.int64)
        hits = np.flatnonzero(np.all(self.bary == key, axis=1))
        if hits.size == 0:
            raise KeyError(f"{tuple(bary)} is not a level-{self.level} vertex")
        return int(hits[0])

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "m": self.level,
            "vertices": self.bary.tolist(),
            "euclidean": self.euclidean().tolist(),
            "edges": self.edges.tolist(),
            "boundary": self.boundary.tolist(),
            "cells": [
                {"word": "".join(str(int(c)) for c in w), "members": mem.tolist()}
                for w, mem in zip(self.words, self.cells)
            ],
        }


def _check_args(N: int, m: int, cap: int) -> None:
    if N < 2:
        raise ValueError(f"N must satisfy N >= 2 (got N={N})")
    if m < 0:
        raise ValueError(f"level m must satisfy m >= 0 (got m={m})")
    n = vertex_count(N, m)
    if n > cap:
        raise ResourceLimitError(f"level {m} at N={N} has {n} vertices, above the cap of {cap}")


def _assemble(N: int, m: int, words: np.ndarray, cell_bary: np.ndarray) -> LevelGraph:
    # cell_bary: (n_cells, N, N) barycentric tuples of each cell's corners
    flat = cell_bary.reshape(-1, N)
    # np.unique sorts ascending; reversing puts p_1 first and makes N=2 run 0 -> 1
    uniq, inverse = np.unique(flat, axis=0, return_inverse=True)
    uniq = uniq[::-1].copy()
    inverse = (uniq.shape[0] - 1) - inverse.reshape(-1)
    cells = inverse.reshape(-1, N).astype(np.int64)

    iu, ju = np.triu_indices(N, k=1)
    a = cells[:, iu].ravel()
    b = cells[:, ju].ravel()
    edges = np.stack([np.minimum(a, b), np.maximum(a, b)], axis=1)
    order = np.lexsort((edges[:, 1], edges[:, 0]))
    edges = edges[order]

    corners = (1 << m) * np.eye(N, dtype=np.int64)
    boundary = np.array(
        [int(np.flatnonzero(np.all(uniq == c, axis=1))[0]) for c in corners], dtype=np.int64
    )
    return LevelGraph(N=N, level=m, bary=uniq, edges=edges, boundary=boundary, words=words, cells=cells)


def _level0(N: int) -> tuple[np.ndarray, np.ndarray]:
    words = np.zeros((1, 0), dtype=np.int64)
    cell_bary = np.eye(N, dtype=np.int64)[None, :, :]
    return words, cell_bary


def _apply_maps(N: int, m: int, words: np.ndarray, cell_bary: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Images of level-m cells under S_1..S_N: the new word is (i,) + w."""
    shift = (1 << m) * np.eye(N, dtype=np.int64)
    new_bary = np.concatenate([cell_bary + shift[i][None, None, :] for i in range(N)], axis=0)
    n = words.shape[0]
    lead = np.repeat(np.arange(1, N + 1, dtype=np.int64), n)[:, None]
    new_words = np.concatenate([lead, np.tile(words, (N, 1))], axis=1)
    return new_words, new_bary


def build_gasket(N: int, m: int, cap: int = DEFAULT_VERTEX_CAP) -> LevelGraph:
    """Build V_m for the N-corner gasket."""
    _check_args(N, m, cap)
    words, cell_bary = _level0(N)
    for k in range(m):
        words, cell_bary = _apply_maps(N, k, words, cell_bary)
    return _assemble(N, m, words, cell_bary)


def _cell_bary(g: LevelGraph) -> np.ndarray:
    return g.bary[g.cells]


def refine(g: LevelGraph, cap: int = DEFAULT_VERTEX_CAP) -> tuple[LevelGraph, np.ndarray]:
    """Return V_{m+1} and the map from old vertex indices to new ones."""
    _check_args(g.N, g.level + 1, cap)
    words, cell_bary = _apply_maps(g.N, g.level, g.words, _cell_bary(g))
    fine = _assemble(g.N, g.level + 1, words, cell_bary)
    # an old vertex b (sum 2^m) is the new vertex 2b (sum 2^(m+1))
    lookup = {tuple(row): i for i, row in enumerate(fine.bary.tolist())}
    old_to_new = np.array([lookup[tuple(2 * c for c in row)] for row in g.bary.tolist()], dtype=np.int64)
    return fine, old_to_new


def cell_members(g: LevelGraph, word: Sequence[int] | str) -> list[int]:
    """Vertex indices of S_{w1} o ... o S_{wm}(p_1..p_N), in corner order."""
    if isinstance(word, str):
        word = [int(c) for c in word]
    return g.cells[g.cell_row(word)].tolist()


def adjacent_exact(g: LevelGraph, i: int, j: int) -> bool:
    """Exact adjacency test: a common cell and barycentric tuples differing by +1/-1 in two slots."""
    diff = g.bary[i] - g.bary[j]
    if not (np.count_nonzero(diff) == 2 and np.abs(diff).sum() == 2):
        return False
    shared = np.any(g.cells == i, axis=1) & np.any(g.cells == j, axis=1)
    return bool(shared.any())
