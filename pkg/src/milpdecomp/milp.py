"""Canonical MILP data model, LP relaxation, and the brute-force reference solver.

The canonical instance is

    min  c.x + d.y
    s.t. A.x + B.y >= b          (complicating rows, m of them)
         x in X = {x : C.x >= e} (easy real polyhedron, m_x rows)
         y in {0,1}^{n_y}        (easy binary hypercube)

All data is 64-bit float with feasibility tolerance 1e-6.  Constraint sense
is normalized to >= internally; callers store an equality as two opposed >=
rows.  Values are immutable after construction and safe to share.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from . import simplex
from .errors import DimensionMismatch, NonFiniteEntry, TooManyBinaries

TOL = 1e-6
BRUTE_FORCE_MAX_BINARIES = 20


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class MilpProblem:
    c: np.ndarray                 # objective on reals, length n_x
    d: np.ndarray                 # objective on binaries, length n_y
    b: np.ndarray                 # complicating RHS, length m
    A: np.ndarray                 # m x n_x
    B: np.ndarray                 # m x n_y
    C: np.ndarray = field(default_factory=lambda: np.zeros(0))
    e: np.ndarray = field(default_factory=lambda: np.zeros(0))
    m_y: int = 0                  # constraints defining Y; 0 = plain hypercube

    def __post_init__(self):
        if np.size(self.C) == 0:
            object.__setattr__(self, "C", np.zeros((0, np.shape(self.c)[0])))
        for name in ("c", "d", "b", "A", "B", "C", "e"):
            object.__setattr__(self, name, _freeze(getattr(self, name)))

    @property
    def n_x(self) -> int:
        return self.c.shape[0]

    @property
    def n_y(self) -> int:
        return self.d.shape[0]

    @property
    def m(self) -> int:
        return self.b.shape[0]

    @property
    def m_x(self) -> int:
        return self.e.shape[0]


@dataclass(frozen=True)
class MilpSolution:
    status: str                   # optimal | infeasible | unbounded
    x: np.ndarray | None = None
    y: np.ndarray | None = None
    objective: float | None = None


def validate(problem: MilpProblem) -> None:
    """Raise DimensionMismatch / NonFiniteEntry unless all invariants hold."""
    n_x, n_y, m = problem.n_x, problem.n_y, problem.m
    if m < 1:
        raise DimensionMismatch("b", "at least one complicating row required")
    if problem.A.shape != (m, n_x):
        raise DimensionMismatch("A", f"expected {(m, n_x)}, got {problem.A.shape}")
    if problem.B.shape != (m, n_y):
        raise DimensionMismatch("B", f"expected {(m, n_y)}, got {problem.B.shape}")
    if problem.C.ndim != 2 or problem.C.shape[1] != n_x:
        raise DimensionMismatch("C", f"expected (m_x, {n_x}), got {problem.C.shape}")
    if problem.e.shape != (problem.C.shape[0],):
        raise DimensionMismatch("e", f"expected ({problem.C.shape[0]},)")
    for name in ("c", "d", "b", "A", "B", "C", "e"):
        if not np.all(np.isfinite(getattr(problem, name))):
            raise NonFiniteEntry(name)


def lp_relaxation(problem: MilpProblem) -> simplex.LpProblem:
    """The LP with y relaxed to [0,1]^{n_y}; variables ordered [x | y]."""
    validate(problem)
    n_x, n_y = problem.n_x, problem.n_y
    rows = np.block([[problem.A, problem.B],
                     [problem.C, np.zeros((problem.m_x, n_y))]])
    rhs = np.concatenate([problem.b, problem.e])
    senses = (simplex.SENSE_GE,) * (problem.m + problem.m_x)
    lower = np.concatenate([np.full(n_x, -np.inf), np.zeros(n_y)])
    upper = np.concatenate([np.full(n_x, np.inf), np.ones(n_y)])
    objective = np.concatenate([problem.c, problem.d])
    return simplex.LpProblem(objective, rows, rhs, senses, lower, upper)


def residual_lp(problem: MilpProblem, y: np.ndarray) -> simplex.LpProblem:
    """The LP in x left after fixing the binary vector y."""
    rows = np.vstack([problem.A, problem.C])
    rhs = np.concatenate([problem.b - problem.B @ y, problem.e])
    senses = (simplex.SENSE_GE,) * rows.shape[0]
    n_x = problem.n_x
    return simplex.LpProblem(problem.c, rows, rhs, senses,
                             np.full(n_x, -np.inf), np.full(n_x, np.inf))


def brute_force_solve(problem: MilpProblem) -> MilpSolution:
    """Reference oracle: enumerate every binary assignment, solve the residual LP.

    Deterministic: assignments are visited in lexicographic order and only a
    strict objective improvement replaces the incumbent.
    """
    validate(problem)
    if problem.n_y > BRUTE_FORCE_MAX_BINARIES:
        raise TooManyBinaries(
            f"n_y={problem.n_y} exceeds enumeration guard {BRUTE_FORCE_MAX_BINARIES}")
    best: MilpSolution | None = None
    any_feasible = False
    for bits in itertools.product((0.0, 1.0), repeat=problem.n_y):
        y = np.array(bits)
        out = simplex.solve(residual_lp(problem, y))
        if out.status == "unbounded":
            return MilpSolution(status="unbounded")
        if out.status != "optimal":
            continue
        any_feasible = True
        obj = out.objective + float(problem.d @ y)
        if best is None or obj < best.objective - 0.0:
            best = MilpSolution(status="optimal", x=out.primal, y=y, objective=obj)
    if not any_feasible:
        return MilpSolution(status="infeasible")
    return best


def milp_from_json(text: str) -> MilpProblem:
    """Parse the MILP JSON schema: keys c, d, b, A, B, C, e, n_y.

    Matrices are row-major arrays of arrays.  Missing C/e means X = R^{n_x}.
    """
    from .errors import ParseError

    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    for key in ("c", "d", "b", "A", "B"):
        if key not in data:
            raise ParseError(f"missing field '{key}'")
    try:
        c = np.asarray(data["c"], dtype=float)
        d = np.asarray(data["d"], dtype=float)
        b = np.asarray(data["b"], dtype=float)
        A = np.asarray(data["A"], dtype=float).reshape(len(b), len(c))
        B = np.asarray(data["B"], dtype=float).reshape(len(b), len(d))
        if "C" in data and data["C"]:
            e = np.asarray(data.get("e", []), dtype=float)
            C = np.asarray(data["C"], dtype=float).reshape(len(e), len(c))
        else:
            C = np.zeros((0, len(c)))
            e = np.zeros(0)
    except (ValueError, TypeError) as exc:
        raise ParseError(f"malformed field: {exc}") from exc
    n_y = int(data.get("n_y", len(d)))
    if n_y != len(d):
        raise ParseError(f"field 'n_y'={n_y} disagrees with len(d)={len(d)}")
    problem = MilpProblem(c=c, d=d, b=b, A=A, B=B, C=C, e=e)
    validate(problem)
    return problem


def milp_to_json(problem: MilpProblem) -> str:
    data = {
        "c": problem.c.tolist(),
        "d": problem.d.tolist(),
        "b": problem.b.tolist(),
        "A": problem.A.tolist(),
        "B": problem.B.tolist(),
        "n_y": problem.n_y,
    }
    if problem.m_x:
        data["C"] = problem.C.tolist()
        data["e"] = problem.e.tolist()
    return json.dumps(data)
