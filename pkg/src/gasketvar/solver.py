"""Discrete energy functional I = Phi - lam * Psi and its restricted minimization.

On V_m with vertex weights w and stiffness K (fields vanish on the corners):

    Phi(u) = 1/2 u.K.u - 1/2 sum_x w_x a(x) u(x)^2
    Psi(u) = -sum_x w_x g(x) F(u(x))
    I(u)   = Phi(u) - lam * Psi(u)

The gradient is taken against the Euclidean pairing on interior vertices, so
a zero gradient is the discrete weak form of  Delta u + a u = lam g f(u).
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import exprs
from .energy import EnergyForm, energy, energy_form, energy_inner, sobolev_constant, weak_laplacian, standard_laplacian
from .gasket import LevelGraph, build_gasket
from .measure import QuadratureWeights, vertex_weights

SCHEMA_SOLVE = "gasketvar.solve/1"
SCHEMA_SWEEP = "gasketvar.sweep/1"
SCHEMA_LAMBDA = "gasketvar.lambda-star/1"
SWEEP_COLUMNS = ("lambda", "norm_u", "I_lambda", "nontrivial", "grad_norm", "residual")


class HypothesisError(ValueError):
    """Coefficient data violate a sign or support condition that was asserted."""


@dataclass(frozen=True)
class ProblemSpec:
    """Data of  Delta u + a u = lam g f(u) on the gasket, u = 0 on the corners."""

    N: int
    m: int
    a: str = "-1"
    g: str = "-1"
    f: str = "exp(u)"
    F: str | None = None
    lam: float = 1e-3
    h1: bool = True
    h2: bool = True

    def to_json(self) -> dict:
        return {
            "N": self.N, "m": self.m, "a": self.a, "g": self.g, "f": self.f, "F": self.F,
            "lambda": self.lam, "h1": self.h1, "h2": self.h2,
        }


def support_surrogate(graph: LevelGraph, g_vals: np.ndarray, level: int | None = None) -> bool:
    """True when g is non-zero at some vertex of every cell at level ceil(m/2)."""
    m = graph.level
    k = math.ceil(m / 2) if level is None else level
    parent = np.arange(graph.n_cells) // graph.N ** (m - k)
    hit = np.any(g_vals[graph.cells] != 0.0, axis=1)
    covered = np.zeros(graph.N**k, dtype=bool)
    np.logical_or.at(covered, parent, hit)
    return bool(covered.all())


@dataclass(frozen=True, eq=False)
class DiscreteProblem:
    spec: ProblemSpec
    graph: LevelGraph
    form: EnergyForm
    weights: QuadratureWeights
    a: np.ndarray
    g: np.ndarray
    primitive: exprs.Primitive
    f_expr: exprs.Expr

    @property
    def lam(self) -> float:
        return self.spec.lam

    @property
    def w(self) -> np.ndarray:
        return self.weights.values

    @property
    def interior(self) -> np.ndarray:
        return self.graph.interior

    def with_lambda(self, lam: float) -> "DiscreteProblem":
        return replace(self, spec=replace(self.spec, lam=float(lam)))

    def with_g(self, g_vals: np.ndarray) -> "DiscreteProblem":
        return replace(self, g=np.asarray(g_vals, dtype=float))

    def embed(self, x: np.ndarray) -> np.ndarray:
        u = np.zeros(self.graph.n_vertices)
        u[self.interior] = x
        return u

    def f_of(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(self.primitive.f_values(u), dtype=float)

    def integral_g(self) -> float:
        return float(np.dot(self.w, self.g))

    # -- functionals --

    def phi(self, u) -> float:
        u = np.asarray(u, dtype=float)
        return 0.5 * energy(self.form, u) - 0.5 * float(np.dot(self.w, self.a * u * u))

    def psi(self, u) -> float:
        u = np.asarray(u, dtype=float)
        return -float(np.dot(self.w, self.g * self.primitive(u)))

    def i_lambda(self, u) -> float:
        return self.phi(u) - self.lam * self.psi(u)

    def i_lambda_expanded(self, u) -> float:
        """1/2 ||u||^2 - 1/2 int a u^2 + lam int g F(u), term by term."""
        u = np.asarray(u, dtype=float)
        return (
            0.5 * energy(self.form, u)
            - 0.5 * float(np.dot(self.w, self.a * u * u))
            + self.lam * float(np.dot(self.w, self.g * self.primitive(u)))
        )

    def gradient(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        G = self.form.stiffness @ u - self.w * self.a * u + self.lam * self.w * self.g * self.f_of(u)
        G[self.graph.boundary] = 0.0
        return G

    def grad_norm(self, u) -> float:
        return float(np.linalg.norm(self.gradient(u)[self.interior]))

    def hessian(self, u) -> sp.csr_matrix:
        """Interior Hessian K - diag(w a) + lam diag(w g f'(u)), f' by central differences."""
        u = np.asarray(u, dtype=float)
        idx = self.interior
        fp = np.asarray(self.primitive.f_prime(u[idx]), dtype=float)
        diag = -self.w[idx] * self.a[idx] + self.lam * self.w[idx] * self.g[idx] * fp
        return (self.form.interior_stiffness() + sp.diags(diag)).tocsr()

    def phi_hessian(self) -> sp.csr_matrix:
        idx = self.interior
        return (self.form.interior_stiffness() + sp.diags(-self.w[idx] * self.a[idx])).tocsr()

    def weak_residual(self, u, v) -> float:
        """W_m(u, v) - sum w a u v + lam sum w g f(u) v."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return (
            energy_inner(self.form, u, v)
            - float(np.dot(self.w, self.a * u * v))
            + self.lam * float(np.dot(self.w, self.g * self.f_of(u) * v))
        )

    def strong_residual(self, u) -> float:
        """max over interior vertices of |(N/2)(N+2)^m H_m u + a u - lam g f(u)|."""
        u = np.asarray(u, dtype=float)
        r = weak_laplacian(self.graph, u) + self.a * u - self.lam * self.g * self.f_of(u)
        return float(np.max(np.abs(r[self.interior]))) if self.interior.size else 0.0

    def standard_residual(self, u) -> float:
        """Same as ``strong_residual`` with the unscaled (N+2)^m H_m."""
        u = np.asarray(u, dtype=float)
        r = standard_laplacian(self.graph, u) + self.a * u - self.lam * self.g * self.f_of(u)
        return float(np.max(np.abs(r[self.interior]))) if self.interior.size else 0.0


def assemble(spec: ProblemSpec, graph: LevelGraph | None = None) -> DiscreteProblem:
    """Discretize ``spec`` on V_m and check the asserted hypotheses."""
    if graph is None:
        graph = build_gasket(spec.N, spec.m)
    xvars = [f"x{k + 1}" for k in range(spec.N - 1)]
    a_expr = exprs.parse(spec.a, variables=xvars)
    g_expr = exprs.parse(spec.g, variables=xvars)
    f_expr = exprs.parse(spec.f, variables=["u"])
    F_expr = exprs.parse(spec.F, variables=["u"]) if spec.F else None
    coords = graph.euclidean()
    a_vals = exprs.evaluate_on(a_expr, coords)
    g_vals = exprs.evaluate_on(g_expr, coords)
    if spec.h1 and np.any(a_vals > 0):
        raise HypothesisError("a must be <= 0 at every vertex")
    if spec.h2:
        if np.any(g_vals > 0):
            raise HypothesisError("g must be <= 0 at every vertex")
        if not support_surrogate(graph, g_vals):
            raise HypothesisError("g vanishes on a whole cell of level ceil(m/2)")
    return DiscreteProblem(
        spec=spec,
        graph=graph,
        form=energy_form(graph),
        weights=vertex_weights(graph),
        a=a_vals,
        g=g_vals,
        primitive=exprs.Primitive(f_expr, F_expr),
        f_expr=f_expr,
    )


# -- thresholds ------------------------------------------------------------------


def golden_max(fn: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200) -> tuple[float, float]:
    """Golden-section search for a maximum of a unimodal fn on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    best = max([(fn(lo), lo), (fc, c), (fd, d), (fn(hi), hi)])
    return best[1], best[0]


def max_primitive(F: Callable, gamma: float, samples: int = 10_000) -> float:
    """max of F over [-gamma, gamma]: dense sampling, then golden refinement."""
    xs = np.linspace(-gamma, gamma, samples + 1)
    vals = np.asarray(F(xs), dtype=float)
    k = int(np.argmax(vals))
    lo = xs[max(k - 1, 0)]
    hi = xs[min(k + 1, samples)]
    _, best = golden_max(lambda t: float(F(np.array([t]))[0]), lo, hi)
    return max(float(vals[k]), best)


@dataclass
class LambdaStarResult:
    value: float
    gamma: float
    status: str
    integral_g: float
    table: list[tuple[float, float, float]] = field(default_factory=list)  # (gamma, max F, lambda*(gamma))

    def lambda_of(self, gamma: float) -> float:
        for gm, _, lam in self.table:
            if gm == gamma:
                return lam
        raise KeyError(gamma)

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA_LAMBDA,
            "lambda_star": _jfloat(self.value),
            "gamma_star": self.gamma,
            "status": self.status,
            "integral_g": self.integral_g,
            "table": [
                {"gamma": gm, "max_F": fm, "lambda_gamma": _jfloat(lam)} for gm, fm, lam in self.table
            ],
        }


def _jfloat(x: float):
    """JSON-safe float: infinities as signed strings, NaN as null."""
    if math.isnan(x):
        return None
    return x if math.isfinite(x) else ("+inf" if x > 0 else "-inf")


def lambda_at(N: int, integral_g: float, gamma: float, fmax: float) -> float:
    """-gamma^2 / (2 (2N+3)^2 int g * max_{|xi| <= gamma} F)."""
    if fmax <= 0:
        return math.inf
    c = sobolev_constant(N)
    return -gamma * gamma / (2.0 * c * c * integral_g * fmax)


def default_gamma_grid(gamma_max: float = 10.0, count: int = 400) -> np.ndarray:
    return np.geomspace(1e-3, gamma_max, count)


def lambda_star(
    problem: DiscreteProblem,
    gammas: Sequence[float] | None = None,
    primitive: Callable | None = None,
    samples: int = 10_000,
) -> LambdaStarResult:
    """Threshold table lambda*(gamma) and its sup.

    ``primitive`` replaces the problem's F, e.g. by an upper bound for it.
    Status is ``ok``, ``unbounded`` (the table keeps growing past the grid) or
    ``nonpositive-F`` (max F <= 0 on some box, so every lam > 0 qualifies).
    """
    F = primitive if primitive is not None else problem.primitive
    ig = problem.integral_g()
    if not ig < 0:
        raise HypothesisError(f"integral of g must be negative (got {ig})")
    N = problem.spec.N
    gammas = default_gamma_grid() if gammas is None else np.asarray(gammas, dtype=float)

    def at(gm: float) -> tuple[float, float]:
        fm = max_primitive(F, gm, samples)
        return fm, lambda_at(N, ig, gm, fm)

    table = []
    for gm in gammas:
        fm, lam = at(float(gm))
        table.append((float(gm), fm, lam))
    lams = np.array([t[2] for t in table])
    if np.any(np.isinf(lams)):
        gbar = max(t[0] for t in table if math.isinf(t[2]))
        return LambdaStarResult(math.inf, gbar, "nonpositive-F", ig, table)
    k = int(np.argmax(lams))
    if k == len(table) - 1:
        gm, lam = table[-1][0], table[-1][2]
        for _ in range(40):
            fm2, lam2 = at(2 * gm)
            if math.isinf(lam2):
                return LambdaStarResult(math.inf, 2 * gm, "nonpositive-F", ig, table)
            if lam2 <= lam:
                break
            gm, lam = 2 * gm, lam2
        else:
            return LambdaStarResult(math.inf, gm, "unbounded", ig, table)
        lo, hi = gm / 2, 2 * gm
    else:
        lo = table[max(k - 1, 0)][0]
        hi = table[k + 1][0]
    gbest, lbest = golden_max(lambda t: at(t)[1], lo, hi, tol=1e-10)
    if lbest < lams[k]:
        gbest, lbest = table[k][0], float(lams[k])
    return LambdaStarResult(lbest, gbest, "ok", ig, table)


def gamma_bar_for(problem: DiscreteProblem, ls: LambdaStarResult, lam: float) -> float:
    """Default box size: the optimal gamma, or, when the sup is infinite, one that certifies 2*lam."""
    if ls.status != "unbounded":
        return ls.gamma
    F = problem.primitive
    gm = ls.table[0][0] if ls.table else 1.0
    for _ in range(200):
        if lambda_at(problem.spec.N, ls.integral_g, gm, max_primitive(F, gm, 2000)) >= 2 * lam:
            return gm
        gm *= 2
    return gm


def radius_for(N: int, gamma_bar: float) -> float:
    """r = gamma_bar^2 / (2 (2N+3)^2)."""
    c = sobolev_constant(N)
    return gamma_bar * gamma_bar / (2.0 * c * c)


# -- minimization ----------------------------------------------------------------


@dataclass
class SolveResult:
    u: np.ndarray
    lam: float
    r: float
    phi: float
    psi: float
    energy: float
    grad_norm: float
    iterations: int
    converged: bool
    strong_residual: float
    standard_residual: float
    tol: float
    max_phi: float
    newton_steps: int = 0
    status: str = ""
    trace: list[tuple[int, float, float]] = field(default_factory=list)
    norm_u: float = 0.0

    def to_json(self, include_field: bool = True) -> dict:
        out = {
            "schema": SCHEMA_SOLVE,
            "lambda": self.lam,
            "r": _jfloat(self.r),
            "phi": self.phi,
            "psi": self.psi,
            "I_lambda": self.energy,
            "norm_u": self.norm_u,
            "sup_u": float(np.max(np.abs(self.u))) if self.u.size else 0.0,
            "grad_norm": self.grad_norm,
            "iterations": self.iterations,
            "newton_steps": self.newton_steps,
            "converged": self.converged,
            "tol": self.tol,
            "strong_residual": self.strong_residual,
            "standard_residual": self.standard_residual,
            "max_phi": self.max_phi,
            "status": self.status,
            "trace": [list(t) for t in self.trace],
        }
        if include_field:
            out["u"] = self.u.tolist()
        return out


def _result(P: DiscreteProblem, u: np.ndarray, r: float, iters: int, tol: float, max_phi: float,
            newton_steps: int, status: str, trace) -> SolveResult:
    gn = P.grad_norm(u)
    res = SolveResult(
        u=u,
        lam=P.lam,
        r=r,
        phi=P.phi(u),
        psi=P.psi(u),
        energy=P.i_lambda(u),
        grad_norm=gn,
        iterations=iters,
        converged=gn <= tol,
        strong_residual=P.strong_residual(u),
        standard_residual=P.standard_residual(u),
        tol=tol,
        max_phi=max_phi,
        newton_steps=newton_steps,
        status=status,
        trace=list(trace),
        norm_u=math.sqrt(energy(P.form, u)),
    )
    return res


def _step_cap(P: DiscreteProblem, A: sp.csr_matrix, u: np.ndarray, d_int: np.ndarray, r: float) -> float:
    """Largest alpha with Phi(u + alpha d) <= r (1 - 1e-9); Phi is quadratic."""
    if not math.isfinite(r):
        return math.inf
    idx = P.interior
    target = r * (1.0 - 1e-9)
    phi0 = P.phi(u)
    b = float(np.dot(A @ u[idx], d_int))
    c = float(np.dot(d_int, A @ d_int))
    slack = target - phi0
    if c <= 0:
        return math.inf
    if slack <= 0:
        return 0.0
    disc = b * b + 2.0 * c * slack
    return (-b + math.sqrt(disc)) / c


def _tolerance(P: DiscreteProblem, u: np.ndarray, rel: float) -> float:
    return rel * max(1.0, abs(P.i_lambda(u)))


def _ncg(P: DiscreteProblem, u0: np.ndarray, r: float, rel_tol: float, max_iter: int, trace: list):
    """Polak-Ribiere+ nonlinear CG with Armijo backtracking, capped to stay in Phi < r."""
    idx = P.interior
    A = P.phi_hessian()
    u = u0.copy()
    I = P.i_lambda(u)
    G = P.gradient(u)[idx]
    d = -G
    max_phi = P.phi(u)
    restarted = False
    it = 0
    for it in range(1, max_iter + 1):
        gn = float(np.linalg.norm(G))
        if gn <= rel_tol * max(1.0, abs(I)):
            return u, it - 1, max_phi, "converged"
        slope = float(np.dot(G, d))
        if slope >= 0:
            d = -G
            slope = -gn * gn
        Hd = P.hessian(u) @ d
        curv = float(np.dot(d, Hd))
        alpha = -slope / curv if curv > 0 else 1.0 / max(gn, 1e-300)
        alpha = min(alpha, _step_cap(P, A, u, d, r))
        accepted = False
        for _ in range(60):
            if alpha <= 0:
                break
            trial = u.copy()
            trial[idx] += alpha * d
            try:
                It = P.i_lambda(trial)
            except exprs.DomainError:
                alpha *= 0.5
                continue
            if It <= I + 1e-4 * alpha * slope:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            if restarted:
                return u, it, max_phi, "line search stalled"
            restarted = True
            d = -G
            continue
        restarted = False
        u = trial
        max_phi = max(max_phi, P.phi(u))
        I = It
        G_new = P.gradient(u)[idx]
        beta = max(0.0, float(np.dot(G_new, G_new - G)) / float(np.dot(G, G)))
        d = -G_new + beta * d
        G = G_new
        if it % 10 == 0 or it == 1:
            trace.append((it, I, float(np.linalg.norm(G))))
    return u, max_iter, max_phi, "iteration cap"


def newton_refine(
    P: DiscreteProblem,
    u0,
    r: float = math.inf,
    tol: float = 1e-12,
    max_steps: int = 50,
    rel_tol: float = 1e-9,
) -> SolveResult:
    """Damped Newton on the gradient system, staying inside Phi < r."""
    idx = P.interior
    A = P.phi_hessian()
    u = np.asarray(u0, dtype=float).copy()
    u[P.graph.boundary] = 0.0
    max_phi = P.phi(u)
    trace = []
    status = "converged"
    steps = 0
    for steps in range(max_steps + 1):
        G = P.gradient(u)[idx]
        gn = float(np.linalg.norm(G))
        trace.append((steps, P.i_lambda(u), gn))
        if gn <= tol:
            break
        if steps == max_steps:
            status = "step cap"
            break
        H = P.hessian(u)
        fallback = False
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("error", spla.MatrixRankWarning)
                delta = spla.spsolve(H.tocsc(), -G)
            if not np.all(np.isfinite(delta)) or float(np.dot(G, delta)) >= 0:
                fallback = True
        except (spla.MatrixRankWarning, RuntimeError):
            fallback = True
        if fallback:
            status = "singular Hessian: gradient steps used"
            delta = -G
        alpha = min(1.0, _step_cap(P, A, u, delta, r))
        I0 = P.i_lambda(u)
        moved = False
        for _ in range(60):
            trial = u.copy()
            trial[idx] += alpha * delta
            try:
                It = P.i_lambda(trial)
                gt = float(np.linalg.norm(P.gradient(trial)[idx]))
            except exprs.DomainError:
                alpha *= 0.5
                continue
            if It <= I0 + 1e-4 * alpha * float(np.dot(G, delta)) or gt < gn:
                moved = True
                break
            alpha *= 0.5
        if not moved:
            status = "no progress"
            break
        u = trial
        max_phi = max(max_phi, P.phi(u))
    return _result(P, u, r, steps, _tolerance(P, u, rel_tol), max_phi, steps, status, trace)


def torsion_probe(P: DiscreteProblem) -> np.ndarray:
    """|min(T, 1)| for T the solution of K T = w scaled to peak at 2: a plateau bump."""
    idx = P.interior
    if idx.size == 0:
        return np.zeros(P.graph.n_vertices)
    T = spla.spsolve(P.form.interior_stiffness().tocsc(), P.w[idx])
    T = np.atleast_1d(T)
    T = 2.0 * T / np.max(np.abs(T))
    v = P.embed(np.abs(np.minimum(T, 1.0)))
    return v


def _better(a: SolveResult, b: SolveResult | None) -> bool:
    if b is None:
        return True
    if a.energy < b.energy - 1e-12:
        return True
    if abs(a.energy - b.energy) <= 1e-12:
        return a.norm_u < b.norm_u
    return False


def minimize_restricted(
    P: DiscreteProblem,
    r: float,
    lam: float | None = None,
    warm_start=None,
    rel_tol: float = 1e-9,
    max_iter: int = 50_000,
    newton: bool = True,
    newton_tol: float = 1e-12,
    lambda_limit: float | None = None,
) -> SolveResult:
    """Multi-start restricted minimization of I over {Phi < r}.

    Starts: 0, ``warm_start`` and small multiples of a truncated bump.  Each
    start runs nonlinear CG and then Newton polish; the lowest energy wins,
    ties going to the smaller norm.
    """
    if lam is not None:
        P = P.with_lambda(lam)
    if lambda_limit is not None and P.lam >= lambda_limit:
        warnings.warn(f"lambda={P.lam} is not below the certified threshold {lambda_limit}", stacklevel=2)
    starts = [np.zeros(P.graph.n_vertices)]
    if warm_start is not None:
        w0 = np.asarray(warm_start, dtype=float).copy()
        w0[P.graph.boundary] = 0.0
        if P.phi(w0) < r:
            starts.append(w0)
    v = torsion_probe(P)
    phi_v = P.phi(v)
    if phi_v > 0:
        xi_max = math.sqrt(r * (1 - 1e-6) / phi_v) if math.isfinite(r) else 1.0
        for frac in (0.5, 0.1, 0.01):
            starts.append(frac * min(xi_max, 1.0) * v)

    best = None
    total_iters = 0
    max_phi = 0.0
    for u0 in starts:
        trace: list = []
        u, iters, mphi, status = _ncg(P, u0, r, rel_tol, max_iter, trace)
        total_iters += iters
        max_phi = max(max_phi, mphi)
        if newton:
            res = newton_refine(P, u, r=r, tol=newton_tol, rel_tol=rel_tol)
            max_phi = max(max_phi, res.max_phi)
            res.trace = trace + [(iters + k, e, gn) for k, e, gn in res.trace]
            res.iterations = iters
            res.status = f"cg: {status}; newton: {res.status}"
        else:
            res = _result(P, u, r, iters, _tolerance(P, u, rel_tol), mphi, 0, f"cg: {status}", trace)
        if _better(res, best):
            best = res
    best.iterations = total_iters
    best.max_phi = max_phi
    return best


# -- sweeps ----------------------------------------------------------------------


@dataclass
class SweepRow:
    lam: float
    norm_u: float
    energy: float
    nontrivial: bool
    grad_norm: float
    residual: float
    converged: bool
    max_phi: float
    error: str | None = None


@dataclass
class SweepResult:
    r: float
    rows: list[SweepRow]

    @property
    def lambdas(self) -> list[float]:
        return [row.lam for row in self.rows]

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA_SWEEP,
            "r": _jfloat(self.r),
            "rows": [
                {
                    "lambda": row.lam, "norm_u": _jfloat(row.norm_u), "I_lambda": _jfloat(row.energy),
                    "nontrivial": row.nontrivial, "grad_norm": _jfloat(row.grad_norm),
                    "residual": _jfloat(row.residual), "converged": row.converged,
                    "max_phi": _jfloat(row.max_phi), "error": row.error,
                }
                for row in self.rows
            ],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for row in self.rows:
            writer.writerow([repr(row.lam), repr(row.norm_u), repr(row.energy), int(row.nontrivial),
                             repr(row.grad_norm), repr(row.residual)])
        return buf.getvalue()


def sweep(P: DiscreteProblem, lams: Sequence[float], r: float, warm_start: bool = True, **kw) -> SweepResult:
    """Restricted minimization over an ascending lambda list, warm-started from the previous point."""
    lams = [float(x) for x in lams]
    if any(b <= a for a, b in zip(lams, lams[1:])):
        raise ValueError("lambda list must be strictly ascending")
    rows = []
    prev = None
    for lam in lams:
        try:
            res = minimize_restricted(P, r, lam=lam, warm_start=prev if warm_start else None, **kw)
        except (exprs.DomainError, ArithmeticError, np.linalg.LinAlgError) as exc:
            nan = float("nan")
            rows.append(SweepRow(lam, nan, nan, False, nan, nan, False, nan, error=str(exc)))
            continue
        prev = res.u
        rows.append(SweepRow(lam, res.norm_u, res.energy, res.norm_u > 1e-8, res.grad_norm,
                             res.strong_residual, res.converged, res.max_phi))
    return SweepResult(r=r, rows=rows)
