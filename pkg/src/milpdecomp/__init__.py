"""MILP decomposition toolkit: Benders and Dantzig-Wolfe column generation
with a QUBO back end (simulated annealing plus an exact oracle), applied to
robustness certification of ReLU networks."""

from .annealer import AnnealConfig, SampleResult, sample_sa, solve_exact
from .benders import BendersConfig, BendersTrace, Cut
from .benders import run as benders_run
from .dantzig_wolfe import Column, DwConfig, DwDuals, DwTrace
from .dantzig_wolfe import run as dantzig_wolfe_run
from .milp import MilpProblem, MilpSolution, brute_force_solve, lp_relaxation, validate
from .qubo import FixedPointCode, Qubo, diag_qubo, energy, prune, qubit_count, to_ising
from .simplex import LpOutcome, LpProblem, phase1_feasible_point, solve
from .verifier import (
    LayerBounds,
    Network,
    Verdict,
    VerificationInstance,
    certify_bd,
    certify_dw,
    early_certificate,
    encode_milp,
    exact_certify,
    ibp_bounds,
)

__version__ = "0.1.0"

__all__ = [
    "AnnealConfig", "SampleResult", "sample_sa", "solve_exact",
    "BendersConfig", "BendersTrace", "Cut", "benders_run",
    "Column", "DwConfig", "DwDuals", "DwTrace", "dantzig_wolfe_run",
    "MilpProblem", "MilpSolution", "brute_force_solve", "lp_relaxation", "validate",
    "FixedPointCode", "Qubo", "diag_qubo", "energy", "prune", "qubit_count", "to_ising",
    "LpOutcome", "LpProblem", "phase1_feasible_point", "solve",
    "LayerBounds", "Network", "Verdict", "VerificationInstance",
    "certify_bd", "certify_dw", "early_certificate", "encode_milp",
    "exact_certify", "ibp_bounds",
    "__version__",
]
