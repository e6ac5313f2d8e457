"""Dantzig-Wolfe column generation over the complicating rows.

The restricted master is the LP over convex weights of the extreme points
collected so far,

    min  sum_i cost(x_i) lam_i + sum_j cost(y_j) mu_j
    s.t. sum_i (A.x_i) lam_i + sum_j (B.y_j) mu_j >= b     (duals alpha >= 0)
         sum_i lam_i = 1                                   (dual xi, free)
         sum_j mu_j  = 1                                   (dual eta, free)

Real pricing is the LP  min (c - alpha.A).x over X, solved exactly; binary
pricing is the diagonal QUBO  min (d - alpha.B).y over the hypercube, handed
to a sampler.  A column joins its pool when its value beats the matching
convexity dual (reduced cost test r < xi, p < eta).

The reported dual bound is Lagrangian: for any alpha >= 0,

    bound(alpha) = alpha.b + min_X (c - alpha.A).x + min_Y (d - alpha.B).y,

where the hypercube minimum has the closed form sum_j min(0, (d - alpha.B)_j).
Both terms are computed exactly from the master duals, so a suboptimal
sampler answer can delay progress but never corrupt the bound.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from . import annealer, qubo, simplex
from .errors import MasterInfeasible, PricingInfeasible, PricingUnbounded
from .milp import MilpProblem, validate

IMPROVE_TOL = 1e-9
COLUMN_DUP_TOL = 1e-9


@dataclass(frozen=True)
class Column:
    kind: str                     # "real_point" | "binary_point"
    point: np.ndarray
    cost: float
    coupling: np.ndarray          # A.x or B.y

    def __post_init__(self):
        for name in ("point", "coupling"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def real_column(problem: MilpProblem, x: np.ndarray) -> Column:
    x = np.asarray(x, dtype=float)
    return Column(kind="real_point", point=x, cost=float(problem.c @ x),
                  coupling=problem.A @ x)


def binary_column(problem: MilpProblem, y: np.ndarray) -> Column:
    y = np.asarray(y, dtype=float)
    return Column(kind="binary_point", point=y, cost=float(problem.d @ y),
                  coupling=problem.B @ y)


@dataclass(frozen=True)
class DwDuals:
    """Row multipliers of the restricted master: coupling block and the two
    convexity rows.  xi/eta are the reduced-cost thresholds of Alg-style
    column tests."""

    alpha: np.ndarray
    xi: float
    eta: float


@dataclass(frozen=True)
class DwConfig:
    theta: float = 1.0
    max_steps: int = 20
    sampler: str = "exact"        # exact | sa
    seed: int = 0
    anneal: annealer.AnnealConfig | None = None

    def __post_init__(self):
        if self.theta < 0 or self.max_steps < 1:
            raise ValueError("need theta >= 0 and max_steps >= 1")
        if self.sampler not in ("exact", "sa"):
            raise ValueError(f"unknown sampler '{self.sampler}'")

    def anneal_config(self) -> annealer.AnnealConfig:
        return self.anneal or annealer.AnnealConfig(seed=self.seed)


@dataclass(frozen=True)
class DwStep:
    step: int
    phi: float
    phi_hat: float
    r: float
    xi: float
    p: float
    eta: float
    cols_real: int
    cols_bin: int
    qubits: int


@dataclass
class DwTrace:
    steps: list[DwStep]
    status: str                   # converged | no_improving | step_limit
    phi: float
    phi_hat: float

    def max_qubits(self) -> int:
        return max((s.qubits for s in self.steps), default=0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("step,phi,phi_hat,r,xi,p,eta,cols_real,cols_bin,qubits\n")
        for s in self.steps:
            buf.write(f"{s.step},{s.phi:.12g},{s.phi_hat:.12g},{s.r:.12g},"
                      f"{s.xi:.12g},{s.p:.12g},{s.eta:.12g},"
                      f"{s.cols_real},{s.cols_bin},{s.qubits}\n")
        return buf.getvalue()


def solve_restricted_master(real_pool: list[Column], binary_pool: list[Column],
                            b: np.ndarray) -> tuple[float, np.ndarray, np.ndarray, DwDuals]:
    """LP over the current pools; returns (phi, lambda, mu, duals)."""
    if not real_pool or not binary_pool:
        raise MasterInfeasible("both column pools must be non-empty")
    m = b.shape[0]
    n_i, n_j = len(real_pool), len(binary_pool)
    cols = np.zeros((m + 2, n_i + n_j))
    for i, col in enumerate(real_pool):
        cols[:m, i] = col.coupling
        cols[m, i] = 1.0
    for j, col in enumerate(binary_pool):
        cols[:m, n_i + j] = col.coupling
        cols[m + 1, n_i + j] = 1.0
    objective = np.array([c.cost for c in real_pool] +
                         [c.cost for c in binary_pool])
    rhs = np.concatenate([b, [1.0, 1.0]])
    senses = (simplex.SENSE_GE,) * m + (simplex.SENSE_EQ, simplex.SENSE_EQ)
    lp = simplex.LpProblem(objective, cols, rhs, senses,
                           np.zeros(n_i + n_j), np.full(n_i + n_j, np.inf))
    out = simplex.solve(lp)
    if out.status != "optimal":
        raise MasterInfeasible(
            f"restricted master is {out.status}; initial columns cannot cover b")
    duals = DwDuals(alpha=np.maximum(out.dual[:m], 0.0),
                    xi=float(out.dual[m]), eta=float(out.dual[m + 1]))
    return float(out.objective), out.primal[:n_i], out.primal[n_i:], duals


def real_pricing(problem: MilpProblem,
                 alpha: np.ndarray) -> tuple[float, np.ndarray]:
    """min (c - alpha.A).x over X = {C.x >= e}, solved exactly.

    Raises PricingInfeasible when X is empty and PricingUnbounded when X has
    a cost-improving ray (only extreme points are generated here).
    """
    reduced = problem.c - np.asarray(alpha, dtype=float) @ problem.A
    n_x = problem.n_x
    lp = simplex.LpProblem(reduced, problem.C, problem.e,
                           (simplex.SENSE_GE,) * problem.m_x,
                           np.full(n_x, -np.inf), np.full(n_x, np.inf))
    out = simplex.solve(lp)
    if out.status == "infeasible":
        raise PricingInfeasible("easy set X is empty")
    if out.status == "unbounded":
        raise PricingUnbounded(
            "real pricing found an improving ray; X must be bounded for "
            "point-only column generation")
    return float(out.objective), out.primal


def binary_pricing(problem: MilpProblem, alpha: np.ndarray,
                   sampler: str = "exact",
                   anneal_cfg: annealer.AnnealConfig | None = None
                   ) -> tuple[float, np.ndarray]:
    """min (d - alpha.B).y over the hypercube as a diagonal QUBO.

    The exact sampler takes each bit by the sign of its coefficient, which
    is also the closed-form optimum sum_j min(0, coeff_j).
    """
    coeff = problem.d - np.asarray(alpha, dtype=float) @ problem.B
    if problem.n_y == 0:
        return 0.0, np.zeros(0)
    if sampler == "exact":
        y = (coeff < 0.0).astype(float)
        return float(np.minimum(coeff, 0.0).sum()), y
    diag = qubo.diag_qubo(coeff)
    result = annealer.sample_sa(diag, anneal_cfg or annealer.AnnealConfig())
    return float(result.best_energy), result.best_assignment.astype(float)


def hypercube_pricing_bound(problem: MilpProblem, alpha: np.ndarray) -> float:
    """Exact hypercube minimum of (d - alpha.B).y, independent of the sampler."""
    coeff = problem.d - np.asarray(alpha, dtype=float) @ problem.B
    return float(np.minimum(coeff, 0.0).sum())


def _improve_tol(threshold: float) -> float:
    return IMPROVE_TOL * max(1.0, abs(threshold))


def _contains(pool: list[Column], point: np.ndarray) -> bool:
    return any(col.point.shape == point.shape
               and np.all(np.abs(col.point - point) <= COLUMN_DUP_TOL)
               for col in pool)


def add_if_improving(problem: MilpProblem, real_pool: list[Column],
                     binary_pool: list[Column], duals: DwDuals,
                     r: float, x_point: np.ndarray,
                     p: float, y_point: np.ndarray) -> int:
    """Apply the reduced-cost tests r < xi and p < eta; returns columns added.

    Duplicate points (within componentwise 1e-9) are never re-added.
    """
    added = 0
    if r < duals.xi - _improve_tol(duals.xi) and not _contains(real_pool, x_point):
        real_pool.append(real_column(problem, x_point))
        added += 1
    if p < duals.eta - _improve_tol(duals.eta) and not _contains(binary_pool, y_point):
        binary_pool.append(binary_column(problem, y_point))
        added += 1
    return added


def dual_bound(history: list[tuple[DwDuals, np.ndarray]]) -> float:
    """max over recorded entries of alpha.b - xi - eta.

    Entries are expected in the sign convention where the bound reads
    alpha.b - xi - eta; run() records certified entries with xi = -r and
    eta = -p so each one is a Lagrangian lower bound.
    """
    if not history:
        raise ValueError("dual bound needs at least one entry")
    return max(float(d.alpha @ b) - d.xi - d.eta for d, b in history)


def initial_columns(problem: MilpProblem) -> tuple[list[Column], list[Column]]:
    """Seed columns from a phase-1 point of the relaxed instance (y in [0,1]).

    The pair jointly satisfies the complicating rows, so the one-column
    restricted master is feasible.  The y part may be fractional; it lies in
    the hypercube's convex hull, which leaves the master optimum unchanged.
    """
    from .milp import lp_relaxation

    point = simplex.phase1_feasible_point(lp_relaxation(problem))
    x0, y0 = point[:problem.n_x], point[problem.n_x:]
    return [real_column(problem, x0)], [binary_column(problem, y0)]


def run(problem: MilpProblem, init: tuple[list[Column], list[Column]] | None = None,
        config: DwConfig | None = None) -> DwTrace:
    """Column generation: master solve, pricing, bound update, column entry.

    Stops when |phi - phi_hat| <= theta, when no column improves, or at the
    step cap.  The per-step qubit count is the constant integer-pricing
    budget n_y + m_y * n_s.
    """
    config = config or DwConfig()
    validate(problem)
    if init is None:
        init = initial_columns(problem)
    real_pool = list(init[0])
    binary_pool = list(init[1])
    history: list[tuple[DwDuals, np.ndarray]] = []
    steps: list[DwStep] = []
    status = "step_limit"
    qubits = qubo.qubit_count("dantzig_wolfe", problem.n_y, m_y=problem.m_y)
    phi = np.inf
    phi_hat = -np.inf
    for t in range(1, config.max_steps + 1):
        phi, _, _, duals = solve_restricted_master(real_pool, binary_pool, problem.b)
        r, x_point = real_pricing(problem, duals.alpha)
        p, y_point = binary_pricing(problem, duals.alpha, config.sampler,
                                    config.anneal_config())
        p_exact = hypercube_pricing_bound(problem, duals.alpha)
        history.append((DwDuals(alpha=duals.alpha, xi=-r, eta=-p_exact), problem.b))
        phi_hat = dual_bound(history)
        steps.append(DwStep(step=t, phi=phi, phi_hat=phi_hat, r=r, xi=duals.xi,
                            p=p, eta=duals.eta, cols_real=len(real_pool),
                            cols_bin=len(binary_pool), qubits=qubits))
        if abs(phi - phi_hat) <= config.theta:
            status = "converged"
            break
        if add_if_improving(problem, real_pool, binary_pool, duals,
                            r, x_point, p, y_point) == 0:
            status = "no_improving"
            break
    return DwTrace(steps=steps, status=status, phi=phi, phi_hat=phi_hat)
