"""Benders decomposition with delayed constraint generation.

The binary master chooses y; the bounded dual subproblem

    max  alpha.(b - B.y) + beta.e
    s.t. alpha.A + beta.C = c,  0 <= alpha, beta <= alpha_bound

prices it.  A subproblem optimum with some multiplier at its bound is treated
as an extreme ray (feasibility cut, value <= 0); otherwise it is an extreme
point (optimality cut, value <= eta).  The master is solved either exactly by
enumeration or as a penalized QUBO through a sampler; in the QUBO modes only
y is trusted from the sampler and eta is recomputed exactly from the cut
pool, so the reported bound stays cut-consistent.
"""

from __future__ import annotations

import io
import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import annealer, qubo, simplex
from .errors import MasterInfeasible, NoPointCuts, SubInfeasible
from .milp import MilpProblem, validate

RAY_BOUND_TOL = 1e-6
CUT_DUP_TOL = 1e-9


@dataclass(frozen=True)
class Cut:
    """Dual multipliers of one subproblem solve.

    alpha multiplies the complicating rows and is what couples to y in the
    master; const carries the easy-set contribution beta.e, a constant per
    cut.  The cut reads  alpha.(b - B.y) + const <= eta  (point) or <= 0 (ray).
    """

    alpha: np.ndarray
    kind: str                     # "point" | "ray"
    const: float = 0.0

    def __post_init__(self):
        arr = np.asarray(self.alpha, dtype=float)
        if np.any(arr < -1e-9):
            raise ValueError("cut multipliers must be nonnegative")
        arr.setflags(write=False)
        object.__setattr__(self, "alpha", arr)
        if self.kind not in ("point", "ray"):
            raise ValueError(f"unknown cut kind '{self.kind}'")


@dataclass(frozen=True)
class BendersConfig:
    alpha_bound: float = 5.0
    theta: float = 1.0
    max_steps: int = 15
    code: qubo.FixedPointCode = field(default_factory=qubo.FixedPointCode)
    w_a: float = 0.1
    w_p: float = 0.01
    master_mode: str = "exact"    # exact | qubo_sa | qubo_exact
    max_cut_pool: int | None = 5
    eta_shift: float = 0.0
    prune_threshold: float = 0.0  # applied on the qubo_sa path only
    anneal: annealer.AnnealConfig = field(default_factory=annealer.AnnealConfig)

    def __post_init__(self):
        if self.alpha_bound <= 0 or self.theta < 0 or self.max_steps < 1:
            raise ValueError("need alpha_bound > 0, theta >= 0, max_steps >= 1")


@dataclass(frozen=True)
class BendersStep:
    step: int
    lower: float
    upper: float
    cut_kind: str
    qubits: int


@dataclass
class BendersTrace:
    steps: list[BendersStep]
    status: str                   # converged | step_limit | master_infeasible
    objective: float | None
    best_y: np.ndarray | None
    lower: float
    upper: float

    def max_qubits(self) -> int:
        return max((s.qubits for s in self.steps), default=0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("step,lower,upper,cut_kind,qubits\n")
        for s in self.steps:
            buf.write(f"{s.step},{s.lower:.12g},{s.upper:.12g},{s.cut_kind},{s.qubits}\n")
        return buf.getvalue()


def solve_subproblem(problem: MilpProblem, y: np.ndarray,
                     alpha_bound: float) -> tuple[Cut, float]:
    """Bounded dual subproblem at a fixed binary assignment.

        max  alpha.(b - B.y) + beta.e
        s.t. alpha.A + beta.C = c,  0 <= alpha, beta <= alpha_bound

    beta prices the easy-set rows; both multiplier blocks share the same
    bound.  Returns the cut and the dual objective (= the residual-LP value
    q(y) when no multiplier is at its bound).  Any multiplier within
    RAY_BOUND_TOL of alpha_bound marks the solution as an extreme ray.
    """
    rhs_gap = problem.b - problem.B @ np.asarray(y, dtype=float)
    m, m_x = problem.m, problem.m_x
    lp = simplex.LpProblem(
        objective=-np.concatenate([rhs_gap, problem.e]),
        rows=np.vstack([problem.A, problem.C]).T,   # n_x rows: alpha.A + beta.C = c
        rhs=problem.c,
        senses=(simplex.SENSE_EQ,) * problem.n_x,
        lower=np.zeros(m + m_x),
        upper=np.full(m + m_x, float(alpha_bound)),
    )
    out = simplex.solve(lp)
    if out.status != "optimal":
        raise SubInfeasible("no multiplier satisfies alpha.A + beta.C = c")
    mult = np.clip(out.primal, 0.0, alpha_bound)
    alpha, beta = mult[:m], mult[m:]
    kind = "ray" if np.any(mult >= alpha_bound - RAY_BOUND_TOL) else "point"
    const = float(problem.e @ beta)
    return Cut(alpha=alpha, kind=kind, const=const), float(rhs_gap @ alpha) + const


def _cut_value(cut: Cut, problem: MilpProblem, y: np.ndarray) -> float:
    return float(cut.alpha @ (problem.b - problem.B @ y)) + cut.const


def _eta_of(cuts: list[Cut], problem: MilpProblem, y: np.ndarray) -> float:
    vals = [_cut_value(c, problem, y) for c in cuts if c.kind == "point"]
    if not vals:
        raise NoPointCuts("eta undefined without a point cut")
    return max(vals)


def _ray_feasible(cuts: list[Cut], problem: MilpProblem, y: np.ndarray) -> bool:
    return all(_cut_value(c, problem, y) <= 1e-6
               for c in cuts if c.kind == "ray")


def _enumerate_master(problem: MilpProblem, cuts: list[Cut]) -> tuple[np.ndarray, float, float]:
    best = None
    for bits in itertools.product((0.0, 1.0), repeat=problem.n_y):
        y = np.array(bits)
        if not _ray_feasible(cuts, problem, y):
            continue
        eta = _eta_of(cuts, problem, y)
        obj = float(problem.d @ y) + eta
        if best is None or obj < best[1]:
            best = (y, obj, eta)
    if best is None:
        raise MasterInfeasible("every binary assignment violates a ray cut")
    return best[0], best[1], best[2]


def master_qubo(problem: MilpProblem, cuts: list[Cut],
                config: BendersConfig) -> tuple[qubo.Qubo, qubo.BendersQuboLayout]:
    """Penalized QUBO of the current master; layout [y | eta | slacks]."""
    lins = [-(c.alpha @ problem.B) for c in cuts]
    consts = [float(c.alpha @ problem.b) + c.const for c in cuts]
    kinds = [c.kind for c in cuts]
    return qubo.benders_master_qubo(lins, consts, kinds, problem.d, config.code,
                                    w_a=config.w_a, w_p=config.w_p,
                                    eta_shift=config.eta_shift)


def solve_master(problem: MilpProblem, cuts: list[Cut],
                 config: BendersConfig) -> tuple[np.ndarray, float, float]:
    """Master argmin of d.y + eta over the accumulated cuts.

    Returns (y, eta, objective).  QUBO modes decode y from the sampler, then
    recompute eta exactly from the cut pool; an assignment violating a ray
    cut is kept (the subproblem will answer with another ray cut).
    """
    if not any(c.kind == "point" for c in cuts):
        raise NoPointCuts("master requires at least one point cut")
    if config.master_mode == "exact":
        y, obj, eta = _enumerate_master(problem, cuts)
        return y, eta, obj
    built, layout = master_qubo(problem, cuts, config)
    if config.master_mode == "qubo_sa":
        if config.prune_threshold > 0.0:
            built = qubo.prune(built, config.prune_threshold)
        result = annealer.sample_sa(built, config.anneal)
    elif config.master_mode == "qubo_exact":
        result = annealer.solve_exact(built)
    else:
        raise ValueError(f"unknown master_mode '{config.master_mode}'")
    y = layout.y_of(result.best_assignment)
    eta = _eta_of(cuts, problem, y)
    if eta > config.eta_shift + config.code.max_value + 1e-9 or eta < config.eta_shift - 1e-9:
        warnings.warn(
            f"eta={eta:.6g} falls outside the fixed-point range "
            f"[{config.eta_shift:.6g}, {config.eta_shift + config.code.max_value:.6g}]; "
            "widen the code or shift", RuntimeWarning)
    return y, eta, float(problem.d @ y) + eta


def _append_cut(cuts: list[Cut], new: Cut, cap: int | None) -> bool:
    for c in cuts:
        if (c.kind == new.kind and abs(c.const - new.const) <= CUT_DUP_TOL
                and np.all(np.abs(c.alpha - new.alpha) <= CUT_DUP_TOL)):
            return False
    cuts.append(new)
    if cap is not None and len(cuts) > cap:
        for i, c in enumerate(cuts):
            if c.kind == "point":
                del cuts[i]       # evict the oldest point cut, never a ray
                break
    return True


def run(problem: MilpProblem, config: BendersConfig | None = None) -> BendersTrace:
    """Delayed constraint generation until |upper - lower| <= theta or step cap.

    Starts from y = 0.  Each step solves the subproblem at the incumbent y
    (ray outcome appends a feasibility cut, point outcome an optimality cut
    and a valid upper bound), then re-solves the master for the next y and
    the lower bound.  Cut-pool eviction beyond max_cut_pool drops the oldest
    point cut, which keeps bounds valid but not necessarily monotone.
    """
    config = config or BendersConfig()
    validate(problem)
    cuts: list[Cut] = []
    y = np.zeros(problem.n_y)
    lower, upper = -np.inf, np.inf
    best_y = None
    steps: list[BendersStep] = []
    status = "step_limit"
    n_s = config.code.n_s
    for t in range(1, config.max_steps + 1):
        cut, sub_obj = solve_subproblem(problem, y, config.alpha_bound)
        if cut.kind == "point":
            cand = float(problem.d @ y) + sub_obj
            if cand < upper:
                upper, best_y = cand, y.copy()
        _append_cut(cuts, cut, config.max_cut_pool)
        qubits = qubo.qubit_count("benders", problem.n_y, n_s, cuts=len(cuts))
        if not any(c.kind == "point" for c in cuts):
            # No optimality cut yet: pick any ray-feasible assignment.
            try:
                y = min((np.array(bits) for bits in
                         itertools.product((0.0, 1.0), repeat=problem.n_y)
                         if _ray_feasible(cuts, problem, np.array(bits))),
                        key=lambda v: float(problem.d @ v))
            except ValueError:
                steps.append(BendersStep(t, lower, upper, cut.kind, qubits))
                status = "master_infeasible"
                break
            steps.append(BendersStep(t, lower, upper, cut.kind, qubits))
            continue
        try:
            y, _, master_obj = solve_master(problem, cuts, config)
        except MasterInfeasible:
            steps.append(BendersStep(t, lower, upper, cut.kind, qubits))
            status = "master_infeasible"
            break
        lower = master_obj
        steps.append(BendersStep(t, lower, upper, cut.kind, qubits))
        if np.isfinite(upper) and abs(upper - lower) <= config.theta:
            status = "converged"
            break
    objective = upper if np.isfinite(upper) else None
    return BendersTrace(steps=steps, status=status, objective=objective,
                        best_y=best_y, lower=lower, upper=upper)
