"""Command-line front end.

Exit codes: 0 success, 1 failed checks or non-convergence, 2 configuration
error, 3 resource cap.  A JSON config file (``--config``) supplies defaults
that explicit flags override.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import exprs
from .checks import run_suite
from .energy import energy_form, holder_exponent
from .gasket import DEFAULT_VERTEX_CAP, ResourceLimitError, build_gasket
from .measure import vertex_weights
from .solver import (
    HypothesisError,
    ProblemSpec,
    assemble,
    default_gamma_grid,
    gamma_bar_for,
    lambda_at,
    lambda_star,
    max_primitive,
    minimize_restricted,
    radius_for,
    sweep,
)
from .spectrum import SpectrumError, raw_dirichlet_eigenvalues, weighted_spectrum

log = logging.getLogger("gasketvar")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_RESOURCE = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = ""
    N: int = 3
    m: int = 4
    a: str = "-1"
    g: str = "-1"
    f: str = "exp(u)"
    F: str | None = None
    lam: float | None = None
    lambda_grid: str | None = None
    relative_to: str = "none"
    gamma_max: float = 10.0
    gamma_count: int = 400
    gamma_bar: float | None = None
    seed: int = 42
    samples: int = 1000
    tol: float = 1e-9
    max_iter: int = 50_000
    k: int = 4
    raw: bool = False
    corrupt_energy_factor: float = 1.0
    allow_nonconverged: bool = False
    no_warm_start: bool = False
    cap: int = DEFAULT_VERTEX_CAP
    out: str | None = None
    csv: str | None = None

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("out")
        d.pop("csv")
        return d

    def spec(self, lam: float | None = None) -> ProblemSpec:
        return ProblemSpec(
            N=self.N, m=self.m, a=self.a, g=self.g, f=self.f, F=self.F,
            lam=float(lam if lam is not None else (self.lam or 0.0)),
        )


def _dump(obj) -> str:
    # repr-based float output is the shortest string that round-trips exactly
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _write(path: str | None, text: str) -> None:
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def _parse_grid(text: str) -> list[float]:
    try:
        return [float(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError as exc:
        raise ConfigError(f"bad --lambda-grid {text!r}: {exc}") from None


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    return f"{x:.6e}"


def _problem(cfg: RunConfig, lam: float | None = None):
    if cfg.N < 2:
        raise ConfigError(f"N must satisfy N >= 2 (got {cfg.N})")
    if cfg.m < 0:
        raise ConfigError(f"m must satisfy m >= 0 (got {cfg.m})")
    graph = build_gasket(cfg.N, cfg.m, cap=cfg.cap)
    return assemble(cfg.spec(lam), graph=graph)


def _is_exp_example(P) -> bool:
    return P.f_expr == exprs.parse("exp(u)") and bool(np.all(P.g == -1.0))


def _exp_bound(x):
    return np.exp(np.asarray(x, dtype=float))


def _threshold(cfg: RunConfig, P):
    grid = default_gamma_grid(cfg.gamma_max, cfg.gamma_count)
    return lambda_star(P, grid)


def _radius(cfg: RunConfig, P, ls, lam: float) -> tuple[float, float, float]:
    gbar = cfg.gamma_bar if cfg.gamma_bar is not None else gamma_bar_for(P, ls, lam)
    limit = lambda_at(cfg.N, ls.integral_g, gbar, max_primitive(P.primitive, gbar))
    return gbar, radius_for(cfg.N, gbar), limit


# -- commands ----------------------------------------------------------------------


def cmd_build(cfg: RunConfig) -> int:
    if cfg.N < 2:
        raise ConfigError(f"N must satisfy N >= 2 (got {cfg.N})")
    g = build_gasket(cfg.N, cfg.m, cap=cfg.cap)
    w = vertex_weights(g)
    print(f"vertices={g.n_vertices} edges={g.n_edges} cells={g.n_cells}")
    if cfg.out:
        payload = g.to_json()
        payload["weights"] = w.to_json()
        _write(cfg.out, _dump(payload))
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    if cfg.N < 2:
        raise ConfigError(f"N must satisfy N >= 2 (got {cfg.N})")
    build_gasket(cfg.N, cfg.m, cap=cfg.cap)
    report = run_suite(cfg.N, cfg.m, cfg.seed, samples=cfg.samples, corrupt_factor=cfg.corrupt_energy_factor)
    text = _dump(report)
    _write(cfg.out, text)
    print(f"sigma={report['sigma']!r}")
    for c in report["checks"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']}")
    return EXIT_OK if report["passed"] else EXIT_FAILED


def cmd_lambda_star(cfg: RunConfig) -> int:
    P = _problem(cfg, lam=cfg.lam or 1.0)
    ls = _threshold(cfg, P)
    payload = {"config": cfg.to_json(), "result": ls.to_json()}
    step = max(1, len(ls.table) // 20)
    print("gamma            max_F            lambda*(gamma)")
    for gm, fm, lam in ls.table[::step]:
        print(f"{gm:<16.6e} {fm:<16.6e} {_fmt(lam)}")
    if ls.status == "ok":
        print(f"lambda_star={_fmt(ls.value)} gamma_star={ls.gamma:.6f}")
    elif ls.status == "unbounded":
        print("lambda_star=+inf (lambda*(gamma) grows without bound: every lambda > 0 is admissible)")
    else:
        print("lambda_star=+inf (max F <= 0 on a box: every lambda > 0 is admissible)")
    if _is_exp_example(P):
        lb = lambda_star(P, default_gamma_grid(cfg.gamma_max, cfg.gamma_count), primitive=_exp_bound)
        print(f"lambda_star_bound={_fmt(lb.value)} gamma_bound={lb.gamma:.6f} (using max F <= e^gamma)")
        print(f"exact_ge_bound={ls.value >= lb.value}")
        payload["bound"] = lb.to_json()
    _write(cfg.out, _dump(payload))
    return EXIT_OK


def _summary(res) -> str:
    return (
        f"lambda={_fmt(res.lam)} norm_u={_fmt(res.norm_u)} sup_u={_fmt(float(np.max(np.abs(res.u))))} "
        f"I_lambda={_fmt(res.energy)} residual={_fmt(res.strong_residual)} converged={res.converged}"
    )


def cmd_solve(cfg: RunConfig) -> int:
    if cfg.lam is None:
        raise ConfigError("solve needs --lambda")
    P = _problem(cfg)
    ls = _threshold(cfg, P)
    gbar, r, limit = _radius(cfg, P, ls, cfg.lam)
    if cfg.lam >= limit:
        log.warning("lambda=%s is not below lambda*(gamma_bar)=%s", cfg.lam, limit)
    res = minimize_restricted(P, r, rel_tol=cfg.tol, max_iter=cfg.max_iter)
    print(_summary(res))
    payload = {"config": cfg.to_json(), "gamma_bar": gbar, "lambda_gamma_bar": limit, "result": res.to_json()}
    _write(cfg.out, _dump(payload))
    return EXIT_OK if res.converged or cfg.allow_nonconverged else EXIT_FAILED


def cmd_sweep(cfg: RunConfig) -> int:
    if not cfg.lambda_grid:
        raise ConfigError("sweep needs --lambda-grid")
    lams = _parse_grid(cfg.lambda_grid)
    P = _problem(cfg, lam=lams[0] if lams else 1.0)
    ls = _threshold(cfg, P)
    if cfg.relative_to == "bound":
        if not _is_exp_example(P):
            raise ConfigError("--relative-to bound needs f = exp(u) and g = -1")
        scale = lambda_star(P, default_gamma_grid(cfg.gamma_max, cfg.gamma_count), primitive=_exp_bound).value
    elif cfg.relative_to == "exact":
        scale = ls.value
    else:
        scale = 1.0
    if not math.isfinite(scale):
        raise ConfigError("cannot scale the lambda grid by an infinite threshold")
    lams = [scale * x for x in lams]
    gbar, r, limit = _radius(cfg, P, ls, max(lams))
    if max(lams) >= limit:
        log.warning("largest lambda %s is not below lambda*(gamma_bar)=%s", max(lams), limit)
    result = sweep(P, lams, r, warm_start=not cfg.no_warm_start, rel_tol=cfg.tol, max_iter=cfg.max_iter)
    for row in result.rows:
        print(
            f"lambda={_fmt(row.lam)} norm_u={_fmt(row.norm_u)} I_lambda={_fmt(row.energy)} "
            f"residual={_fmt(row.residual)} converged={row.converged}"
        )
    payload = {"config": cfg.to_json(), "gamma_bar": gbar, "lambda_gamma_bar": limit, "result": result.to_json()}
    _write(cfg.out, _dump(payload))
    csv_path = cfg.csv or (str(Path(cfg.out).with_suffix(".csv")) if cfg.out else None)
    _write(csv_path, result.to_csv())
    ok = all(row.converged for row in result.rows)
    return EXIT_OK if ok or cfg.allow_nonconverged else EXIT_FAILED


def cmd_eigen(cfg: RunConfig) -> int:
    P = _problem(cfg, lam=1.0) if not cfg.raw else None
    if cfg.raw:
        g = build_gasket(cfg.N, cfg.m, cap=cfg.cap)
        vals = raw_dirichlet_eigenvalues(g)[: cfg.k]
        payload = {"level": cfg.m, "normalization": "raw", "eigenvalues": vals.tolist()}
    else:
        try:
            spec = weighted_spectrum(P.form, P.weights, P.a, cfg.k)
        except SpectrumError as exc:
            raise ConfigError(str(exc)) from None
        vals = spec.eigenvalues
        payload = spec.to_json()
        payload["renormalization_factor"] = ((cfg.N + 2) / cfg.N) ** cfg.m
    print(" ".join(f"{v!r}" for v in vals.tolist()))
    _write(cfg.out, _dump({"config": cfg.to_json(), "result": payload}))
    return EXIT_OK


COMMANDS = {
    "build": cmd_build,
    "verify": cmd_verify,
    "lambda-star": cmd_lambda_star,
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "eigen": cmd_eigen,
}


def _parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", default=S, help="JSON file of defaults; flags win")
    shared.add_argument("--N", type=int, default=S, help="number of corners (N >= 2)")
    shared.add_argument("--m", type=int, default=S, help="graph level")
    shared.add_argument("--a", default=S, help="coefficient a(x1..), must be <= 0")
    shared.add_argument("--g", default=S, help="coefficient g(x1..), must be <= 0")
    shared.add_argument("--f", default=S, help="nonlinearity f(u)")
    shared.add_argument("--F", default=S, help="closed-form antiderivative of f (optional)")
    shared.add_argument("--lambda", dest="lam", type=float, default=S)
    shared.add_argument("--lambda-grid", dest="lambda_grid", default=S, help="comma-separated ascending values")
    shared.add_argument("--relative-to", dest="relative_to", choices=["none", "bound", "exact"], default=S,
                        help="scale --lambda-grid by a threshold")
    shared.add_argument("--gamma-max", dest="gamma_max", type=float, default=S)
    shared.add_argument("--gamma-count", dest="gamma_count", type=int, default=S)
    shared.add_argument("--gamma-bar", dest="gamma_bar", type=float, default=S)
    shared.add_argument("--seed", type=int, default=S)
    shared.add_argument("--samples", type=int, default=S)
    shared.add_argument("--tol", type=float, default=S)
    shared.add_argument("--max-iter", dest="max_iter", type=int, default=S)
    shared.add_argument("-k", type=int, default=S, help="number of eigenvalues")
    shared.add_argument("--raw", action="store_true", default=S, help="bare graph Laplacian spectrum")
    shared.add_argument("--corrupt-energy-factor", dest="corrupt_energy_factor", type=float, default=S)
    shared.add_argument("--allow-nonconverged", dest="allow_nonconverged", action="store_true", default=S)
    shared.add_argument("--no-warm-start", dest="no_warm_start", action="store_true", default=S)
    shared.add_argument("--cap", type=int, default=S, help="vertex cap")
    shared.add_argument("--out", default=S)
    shared.add_argument("--csv", default=S)
    parser = argparse.ArgumentParser(prog="gasketvar", description="Variational toolkit on the Sierpinski gasket")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[shared])
    return parser


def load_config(argv: list[str] | None = None) -> RunConfig:
    ns = vars(_parser().parse_args(argv))
    merged: dict = {}
    path = ns.pop("config", None)
    if path:
        try:
            merged.update(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
    merged.update(ns)
    known = {f.name for f in fields(RunConfig)}
    unknown = set(merged) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return RunConfig(**merged)


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = load_config(argv)
        return COMMANDS[cfg.command](cfg)
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ConfigError, HypothesisError, exprs.ExprSyntaxError, exprs.DomainError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
