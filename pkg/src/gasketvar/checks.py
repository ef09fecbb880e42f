"""Seeded invariant suites run by ``gasketvar verify``.

Every check returns a ``CheckResult`` whose ``detail`` is JSON-ready; the
suite is deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .energy import (
    TRUNCATIONS,
    EnergyForm,
    HolderChecker,
    energy,
    energy_form,
    energy_inner,
    graph_laplacian,
    harmonic_extension,
    holder_exponent,
    renormalization,
    truncate,
)
from .gasket import LevelGraph, build_gasket, refine
from .measure import vertex_weights

SCHEMA_VERIFY = "gasketvar.verify/1"
SMOOTH_VERTEX_LIMIT = 2000


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def random_dirichlet_fields(g: LevelGraph, count: int, rng: np.random.Generator) -> np.ndarray:
    """(count, n) fields, iid uniform on [-1, 1] at interior vertices and zero on the corners."""
    out = np.zeros((count, g.n_vertices))
    idx = g.interior
    out[:, idx] = rng.uniform(-1.0, 1.0, size=(count, idx.size))
    return out


def multiharmonic_fields(g: LevelGraph, count: int, rng: np.random.Generator, base_level: int = 1) -> np.ndarray:
    """Random Dirichlet data at a coarse level, harmonically extended up to g.level."""
    base_level = min(base_level, g.level)
    chain = [build_gasket(g.N, base_level)]
    maps = []
    for _ in range(base_level, g.level):
        fine, old_to_new = refine(chain[-1])
        chain.append(fine)
        maps.append(old_to_new)
    out = np.zeros((count, g.n_vertices))
    for c in range(count):
        u = random_dirichlet_fields(chain[0], 1, rng)[0]
        for coarse, fine, m in zip(chain, chain[1:], maps):
            _, u = harmonic_extension(coarse, u, fine=(fine, m))
        out[c] = u
    return out


def check_measure(g: LevelGraph) -> CheckResult:
    w = vertex_weights(g)
    total = float(np.sum(w.values))
    exact = w.exact_total()
    ok = exact == 1 and abs(total - 1.0) <= 1e-14 and bool(np.all(w.counts > 0))
    return CheckResult("measure_total", ok, {"float_total": total, "exact_total": str(exact)})


def check_sobolev(E: EnergyForm, fields: np.ndarray) -> CheckResult:
    checker = HolderChecker(E)
    violations = 0
    sup_violations = 0
    worst = 0.0
    for u in fields:
        rep = checker.check(u)
        violations += not rep.ok
        sup_violations += not rep.sup_ok
        if rep.bound > 0:
            worst = max(worst, rep.quotient / rep.bound)
    return CheckResult(
        "sobolev_bound",
        violations == 0 and sup_violations == 0,
        {
            "fields": int(len(fields)),
            "violations": violations,
            "sup_norm_violations": sup_violations,
            "max_quotient_over_bound": worst,
            "sigma": holder_exponent(E.graph.N),
            "constant": 2 * E.graph.N + 3,
        },
    )


def check_extension(g: LevelGraph, ratio: float, fields: np.ndarray, rng: np.random.Generator, perturbed: int = 100) -> CheckResult:
    """W_{m+1}(ext u) = W_m(u), and any other extension has at least that energy."""
    E = energy_form(g, ratio)
    fine = refine(g)
    Ef = energy_form(fine[0], ratio)
    new = np.setdiff1d(np.arange(fine[0].n_vertices), fine[1])
    worst = 0.0
    below = 0
    for k, u in enumerate(fields):
        _, ext = harmonic_extension(g, u, fine=fine)
        Wm = energy(E, u)
        We = energy(Ef, ext)
        worst = max(worst, abs(We - Wm) / max(1.0, Wm))
        if k < perturbed:
            other = ext.copy()
            other[new] += rng.normal(scale=0.1, size=new.size)
            below += energy(Ef, other) < We - 1e-12 * max(1.0, We)
    return CheckResult(
        "harmonic_extension",
        worst <= 1e-12 and below == 0,
        {"max_relative_energy_change": worst, "perturbed_below_minimum": int(below)},
    )


def check_truncation(E: EnergyForm, fields: np.ndarray) -> CheckResult:
    violations = {}
    for name, h in TRUNCATIONS.items():
        bad = 0
        for u in fields:
            v = truncate(E.graph, u, h)
            bad += energy(E, v) > h.lipschitz**2 * energy(E, u) * (1 + 1e-12) + 1e-15
        violations[name] = int(bad)
    return CheckResult("lipschitz_truncation", sum(violations.values()) == 0, {"violations": violations})


def check_summation_by_parts(E: EnergyForm, fields: np.ndarray, rng: np.random.Generator) -> CheckResult:
    g = E.graph
    worst = 0.0
    for u in fields:
        v = rng.uniform(-1.0, 1.0, size=g.n_vertices)
        lhs = E.factor * float(np.dot(graph_laplacian(g, u), v))
        rhs = -energy_inner(E, u, v)
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    return CheckResult("summation_by_parts", worst <= 1e-10, {"max_relative_error": worst})


def check_quadratic_form(E: EnergyForm, fields: np.ndarray) -> CheckResult:
    worst = 0.0
    for u in fields:
        W = energy(E, u)
        q = float(u @ (E.stiffness @ u))
        worst = max(worst, abs(W - q) / max(1.0, W))
    return CheckResult("quadratic_form", worst <= 1e-12, {"max_relative_error": worst})


def run_suite(N: int, m: int, seed: int, samples: int = 1000, corrupt_factor: float = 1.0) -> dict:
    """Run every check; ``corrupt_factor`` scales the per-level renormalization (fault injection)."""
    rng = np.random.default_rng(seed)
    g = build_gasket(N, m)
    ratio = renormalization(N) * corrupt_factor
    E = energy_form(g, ratio)
    fields = random_dirichlet_fields(g, samples, rng)
    # smooth fields defeat the Hoelder pruning, so keep them to graphs where all-pairs is cheap
    n_smooth = min(samples, 50) if g.n_vertices <= SMOOTH_VERTEX_LIMIT else 0
    smooth = multiharmonic_fields(g, n_smooth, rng)
    mixed = np.concatenate([fields, smooth])
    small = np.concatenate([fields[:150], smooth])
    results = [
        check_measure(g),
        check_sobolev(E, mixed),
        check_extension(g, ratio, small, rng),
        check_truncation(E, small),
        check_summation_by_parts(E, small, rng),
        check_quadratic_form(E, small),
    ]
    return {
        "schema": SCHEMA_VERIFY,
        "config": {"N": N, "m": m, "seed": seed, "samples": samples, "corrupt_energy_factor": corrupt_factor},
        "sigma": holder_exponent(N),
        "checks": [r.to_json() for r in results],
        "passed": all(r.passed for r in results),
    }
