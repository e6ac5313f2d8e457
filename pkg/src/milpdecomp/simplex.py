"""Dense LP kernel: two-phase revised simplex with bounded variables.

Solves   min c.x  s.t.  rows.x (>= or ==) rhs,  lower <= x <= upper
and returns, depending on the outcome,

* the primal optimum plus one dual multiplier per row (nonnegative on
  ``>=`` rows for a minimization, free on equality rows) and the reduced
  costs of the structural variables,
* an improving ray when the problem is unbounded, or
* a Farkas certificate (the phase-1 duals) when it is infeasible.

Exact basic duals and rays are the reason a simplex method is used here:
both decompositions built on top of this kernel consume dual extreme
points/rays directly.  Dense storage only; instances in scope are tiny.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, Infeasible, NonFiniteEntry, NumericalBreakdown

SENSE_GE = ">="
SENSE_EQ = "="

FEAS_TOL = 1e-6
PIVOT_TOL = 1e-9
# Reduced-cost threshold for entering candidates; also the margin of the
# "verified improving ray" rule for declaring unboundedness.
DUAL_TOL = 1e-9
# Iterations without objective improvement before Bland's rule engages.
BLAND_AFTER = 1000

MAX_DENSE_SIZE = 2000


@dataclass
class LpProblem:
    """min objective.x s.t. rows.x >= / == rhs, lower <= x <= upper."""

    objective: np.ndarray
    rows: np.ndarray
    rhs: np.ndarray
    senses: tuple[str, ...]
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.objective = np.atleast_1d(np.asarray(self.objective, dtype=float))
        self.rhs = np.atleast_1d(np.asarray(self.rhs, dtype=float))
        self.lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        self.upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        n = self.objective.shape[0]
        m = self.rhs.shape[0]
        self.rows = np.asarray(self.rows, dtype=float)
        if self.rows.size == 0 and m * n == 0:
            self.rows = np.zeros((m, n))
        if self.rows.shape != (m, n):
            raise DimensionMismatch("rows", f"expected {(m, n)}, got {self.rows.shape}")
        if len(self.senses) != m:
            raise DimensionMismatch("senses", f"expected {m}, got {len(self.senses)}")
        if any(s not in (SENSE_GE, SENSE_EQ) for s in self.senses):
            raise DimensionMismatch("senses", "each sense must be '>=' or '='")
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise DimensionMismatch("bounds", f"expected ({n},)")
        if np.any(self.lower > self.upper):
            raise DimensionMismatch("bounds", "lower > upper")
        for name, arr in (("objective", self.objective), ("rows", self.rows),
                          ("rhs", self.rhs)):
            if not np.all(np.isfinite(arr)):
                raise NonFiniteEntry(name)
        if max(n, m) > MAX_DENSE_SIZE:
            raise DimensionMismatch("rows", f"dense kernel capped at {MAX_DENSE_SIZE}")

    @property
    def n_vars(self) -> int:
        return self.objective.shape[0]

    @property
    def n_rows(self) -> int:
        return self.rhs.shape[0]


@dataclass
class LpOutcome:
    """Result of one solve: exactly one of optimal/infeasible/unbounded."""

    status: str
    primal: np.ndarray | None = None
    dual: np.ndarray | None = None
    objective: float | None = None
    reduced_costs: np.ndarray | None = None
    ray: np.ndarray | None = None
    farkas: np.ndarray | None = None
    iterations: int = 0


# nonbasic rest positions
_AT_LOWER = 0
_AT_UPPER = 1
_AT_FREE = 2
_BASIC = 3


@dataclass
class _Workspace:
    """All columns (structural | slacks | artificials) of the standardized LP."""

    cols: np.ndarray          # m x N
    b: np.ndarray             # m
    lower: np.ndarray         # N
    upper: np.ndarray         # N
    x: np.ndarray             # N current values
    state: np.ndarray         # N int flags
    basis: np.ndarray         # m column indices
    n_struct: int
    n_rows: int
    iterations: int = 0
    ray: np.ndarray | None = None
    leaving_dual: np.ndarray | None = None


def _initial_value(lo: float, up: float) -> float:
    if np.isfinite(lo):
        return lo
    if np.isfinite(up):
        return up
    return 0.0


def _initial_state(lo: float, up: float) -> int:
    if np.isfinite(lo):
        return _AT_LOWER
    if np.isfinite(up):
        return _AT_UPPER
    return _AT_FREE


def _build_workspace(lp: LpProblem) -> _Workspace:
    n, m = lp.n_vars, lp.n_rows
    total = n + 2 * m                      # structural + slack + artificial
    cols = np.zeros((m, total))
    cols[:, :n] = lp.rows
    lower = np.full(total, 0.0)
    upper = np.full(total, np.inf)
    lower[:n] = lp.lower
    upper[:n] = lp.upper
    for i, sense in enumerate(lp.senses):
        cols[i, n + i] = -1.0              # surplus: rows.x - s = rhs
        if sense == SENSE_EQ:
            upper[n + i] = 0.0             # pinned slack keeps column layout uniform

    x = np.zeros(total)
    state = np.full(total, _AT_LOWER, dtype=np.int64)
    for j in range(n + m):
        x[j] = _initial_value(lower[j], upper[j])
        state[j] = _initial_state(lower[j], upper[j])

    resid = lp.rhs - cols[:, :n + m] @ x[:n + m]
    for i in range(m):
        sigma = 1.0 if resid[i] >= 0 else -1.0
        cols[i, n + m + i] = sigma
        x[n + m + i] = abs(resid[i])
        state[n + m + i] = _BASIC
    basis = np.arange(n + m, n + 2 * m)
    return _Workspace(cols=cols, b=lp.rhs.copy(), lower=lower, upper=upper,
                      x=x, state=state, basis=basis, n_struct=n, n_rows=m)


def _refresh_basics(ws: _Workspace) -> np.ndarray:
    """Recompute basic values from scratch; returns the basis matrix."""
    m = ws.n_rows
    if m == 0:
        return np.zeros((0, 0))
    B = ws.cols[:, ws.basis]
    nb_mask = np.ones(ws.cols.shape[1], dtype=bool)
    nb_mask[ws.basis] = False
    rhs = ws.b - ws.cols[:, nb_mask] @ ws.x[nb_mask]
    try:
        ws.x[ws.basis] = np.linalg.solve(B, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalBreakdown("singular basis") from exc
    return B


def _pick_entering(d: np.ndarray, ws: _Workspace, bland: bool) -> tuple[int, float] | None:
    """Eligible nonbasic column with an improving reduced cost, or None."""
    best_j, best_dir, best_score = -1, 0.0, DUAL_TOL
    for j in range(ws.cols.shape[1]):
        st = ws.state[j]
        if st == _BASIC or ws.lower[j] == ws.upper[j]:
            continue
        if st == _AT_LOWER and d[j] < -DUAL_TOL:
            direction, score = 1.0, -d[j]
        elif st == _AT_UPPER and d[j] > DUAL_TOL:
            direction, score = -1.0, d[j]
        elif st == _AT_FREE and abs(d[j]) > DUAL_TOL:
            direction, score = (1.0 if d[j] < 0 else -1.0), abs(d[j])
        else:
            continue
        if bland:
            return j, direction
        if score > best_score:
            best_j, best_dir, best_score = j, direction, score
    if best_j < 0:
        return None
    return best_j, best_dir


def _ratio_test(ws: _Workspace, j_ent: int, direction: float,
                w: np.ndarray) -> tuple[float, int]:
    """Max step along the entering direction.

    Returns (t, leaving_pos) where leaving_pos is the basis position that
    blocks, -1 for a bound flip of the entering column, or -2 when no bound
    blocks (unbounded).
    """
    t_best = np.inf
    leave = -2
    span = ws.upper[j_ent] - ws.lower[j_ent]
    if np.isfinite(span):
        t_best, leave = span, -1
    for pos in range(ws.n_rows):
        k = ws.basis[pos]
        delta = direction * w[pos]
        if delta > PIVOT_TOL:                      # basic value decreasing
            bound = ws.lower[k]
            if np.isfinite(bound):
                t = (ws.x[k] - bound) / delta
                if t < t_best - PIVOT_TOL or (t < t_best + PIVOT_TOL and
                                              (leave < 0 or k < ws.basis[leave])):
                    t_best, leave = max(t, 0.0), pos
        elif delta < -PIVOT_TOL:                   # basic value increasing
            bound = ws.upper[k]
            if np.isfinite(bound):
                t = (ws.x[k] - bound) / delta
                if t < t_best - PIVOT_TOL or (t < t_best + PIVOT_TOL and
                                              (leave < 0 or k < ws.basis[leave])):
                    t_best, leave = max(t, 0.0), pos
    return t_best, leave


def _run_simplex(ws: _Workspace, c: np.ndarray, max_iter: int) -> str:
    """Drive the workspace to optimality; returns 'optimal' or 'unbounded'."""
    no_improve = 0
    last_obj = np.inf
    while True:
        if ws.iterations > max_iter:
            raise NumericalBreakdown(
                f"iteration cap {max_iter} exceeded ({ws.iterations} pivots)")
        ws.iterations += 1
        B = _refresh_basics(ws)
        if ws.n_rows:
            try:
                y = np.linalg.solve(B.T, c[ws.basis])
            except np.linalg.LinAlgError as exc:
                raise NumericalBreakdown("singular basis (dual solve)") from exc
        else:
            y = np.zeros(0)
        d = c - ws.cols.T @ y
        obj = float(c @ ws.x)
        if obj < last_obj - 1e-12:
            last_obj, no_improve = obj, 0
        else:
            no_improve += 1
        entering = _pick_entering(d, ws, bland=no_improve > BLAND_AFTER)
        if entering is None:
            ws.leaving_dual = y
            return "optimal"
        j_ent, direction = entering
        if ws.n_rows:
            try:
                w = np.linalg.solve(B, ws.cols[:, j_ent])
            except np.linalg.LinAlgError as exc:
                raise NumericalBreakdown("singular basis (column solve)") from exc
        else:
            w = np.zeros(0)
        t, leave = _ratio_test(ws, j_ent, direction, w)
        if leave == -2:
            ray = np.zeros(ws.cols.shape[1])
            ray[j_ent] = direction
            ray[ws.basis] = -direction * w
            ws.ray = ray
            return "unbounded"
        ws.x[j_ent] += direction * t
        ws.x[ws.basis] -= direction * t * w
        if leave == -1:
            ws.state[j_ent] = _AT_UPPER if direction > 0 else _AT_LOWER
            continue
        k_out = ws.basis[leave]
        moved_down = direction * w[leave] > 0
        ws.state[k_out] = _AT_LOWER if moved_down else _AT_UPPER
        ws.x[k_out] = ws.lower[k_out] if moved_down else ws.upper[k_out]
        ws.basis[leave] = j_ent
        ws.state[j_ent] = _BASIC


def _phase1(ws: _Workspace, max_iter: int) -> tuple[float, np.ndarray]:
    n, m = ws.n_struct, ws.n_rows
    c1 = np.zeros(ws.cols.shape[1])
    c1[n + m:] = 1.0
    status = _run_simplex(ws, c1, max_iter)
    if status != "optimal":
        raise NumericalBreakdown("phase-1 objective is bounded below; ray reported")
    return float(c1 @ ws.x), ws.leaving_dual


def _verify_ray(lp: LpProblem, ray: np.ndarray, slope: float) -> bool:
    activity = lp.rows @ ray
    for i, sense in enumerate(lp.senses):
        if sense == SENSE_EQ:
            if abs(activity[i]) > FEAS_TOL:
                return False
        elif activity[i] < -FEAS_TOL:
            return False
    up_ok = (ray <= FEAS_TOL) | ~np.isfinite(lp.upper)
    lo_ok = (ray >= -FEAS_TOL) | ~np.isfinite(lp.lower)
    return bool(np.all(up_ok) and np.all(lo_ok) and slope <= -DUAL_TOL)


def solve(lp: LpProblem) -> LpOutcome:
    """Classify and solve: optimal (primal, duals, reduced costs), unbounded
    (verified improving ray), or infeasible (Farkas certificate)."""
    ws = _build_workspace(lp)
    n, m = lp.n_vars, lp.n_rows
    max_iter = 50 * (m + n) + 50
    p1_obj, p1_dual = _phase1(ws, max_iter)
    if p1_obj > FEAS_TOL:
        return LpOutcome(status="infeasible", farkas=p1_dual.copy(),
                         iterations=ws.iterations)

    # Phase 2: artificials pinned at zero, real objective on structural part.
    ws.upper[n + m:] = 0.0
    np.clip(ws.x[n + m:], 0.0, 0.0, out=ws.x[n + m:])
    c2 = np.zeros(ws.cols.shape[1])
    c2[:n] = lp.objective
    status = _run_simplex(ws, c2, max_iter)
    if status == "unbounded":
        ray = ws.ray[:n]
        slope = float(lp.objective @ ray)
        if not _verify_ray(lp, ray, slope):
            raise NumericalBreakdown("unverified unbounded ray")
        return LpOutcome(status="unbounded", ray=ray, iterations=ws.iterations)

    x = ws.x[:n].copy()
    y = ws.leaving_dual.copy()
    reduced = lp.objective - lp.rows.T @ y
    return LpOutcome(status="optimal", primal=x, dual=y,
                     objective=float(lp.objective @ x),
                     reduced_costs=reduced, iterations=ws.iterations)


def phase1_feasible_point(lp: LpProblem) -> np.ndarray:
    """Any point feasible within tolerance, ignoring the objective."""
    ws = _build_workspace(lp)
    max_iter = 50 * (lp.n_rows + lp.n_vars) + 50
    p1_obj, _ = _phase1(ws, max_iter)
    if p1_obj > FEAS_TOL:
        raise Infeasible("phase 1 left positive artificial residual")
    return ws.x[:lp.n_vars].copy()


def dual_objective(lp: LpProblem, outcome: LpOutcome) -> float:
    """Dual objective value at the returned multipliers.

    rhs.dual plus the bound contribution of the reduced costs: positive
    reduced costs sit on lower bounds, negative ones on upper bounds.
    """
    if outcome.status != "optimal":
        raise ValueError("dual objective requires an optimal outcome")
    z = outcome.reduced_costs
    bound_part = 0.0
    for j in range(lp.n_vars):
        if z[j] > DUAL_TOL:
            bound_part += z[j] * lp.lower[j]
        elif z[j] < -DUAL_TOL:
            bound_part += z[j] * lp.upper[j]
    return float(outcome.dual @ lp.rhs + bound_part)
