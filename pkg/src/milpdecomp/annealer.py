"""QUBO samplers: seeded simulated annealing and an exhaustive exact oracle.

The annealer is the stand-in for annealing hardware: single-bit-flip
Metropolis sweeps over a geometric inverse-temperature schedule, a fixed
number of independent reads, and a per-read result equal to the lowest-energy
state visited along the trajectory.  Per-read RNG streams are derived from
the master seed by a counter-based split, so reads are order-independent and
may run in parallel with results identical to sequential execution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .errors import LengthMismatch, TooLarge
from .qubo import Qubo, energy

EXACT_MAX_BITS = 24


@dataclass(frozen=True)
class AnnealConfig:
    reads: int = 100
    sweeps: int = 50_000
    seed: int = 0
    beta_start: float = 0.1
    beta_end: float = 10.0

    def __post_init__(self):
        if self.reads < 1 or self.sweeps < 1:
            raise ValueError("reads and sweeps must be >= 1")
        if not (0.0 < self.beta_start < self.beta_end):
            raise ValueError("need 0 < beta_start < beta_end")


@dataclass(frozen=True)
class SampleResult:
    best_assignment: np.ndarray
    best_energy: float
    energies: np.ndarray          # one entry per read

    def __post_init__(self):
        arr = np.asarray(self.best_assignment, dtype=np.int8)
        arr.setflags(write=False)
        object.__setattr__(self, "best_assignment", arr)
        eng = np.asarray(self.energies, dtype=float)
        eng.setflags(write=False)
        object.__setattr__(self, "energies", eng)


def _split_fields(qubo: Qubo) -> tuple[np.ndarray, np.ndarray]:
    """(linear, symmetric coupling) so that E = lin.q + 0.5 q.W.q + offset."""
    lin = np.ascontiguousarray(np.diag(qubo.Q))
    coup = np.triu(qubo.Q, 1)
    W = np.ascontiguousarray(coup + coup.T)
    return lin, W


@njit(cache=True, inline="always")
def _splitmix64(state: np.uint64) -> np.uint64:
    z = (state + np.uint64(0x9E3779B97F4A7C15)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def _next_u64(state: np.ndarray) -> np.uint64:
    # xorshift64*; state is a length-1 uint64 array
    x = state[0]
    x ^= x >> np.uint64(12)
    x ^= (x << np.uint64(25)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    x ^= x >> np.uint64(27)
    state[0] = x
    return (x * np.uint64(0x2545F4914F6CDD1D)) & np.uint64(0xFFFFFFFFFFFFFFFF)


@njit(cache=True, inline="always")
def _uniform(state: np.ndarray) -> float:
    return float(_next_u64(state) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True, parallel=True)
def _anneal_kernel(lin, W, n, reads, sweeps, beta_start, beta_end, seed,
                   out_bits, out_energy):
    ratio = (beta_end / beta_start) ** (1.0 / max(sweeps - 1, 1))
    for read in prange(reads):
        rng = np.empty(1, dtype=np.uint64)
        rng[0] = _splitmix64(np.uint64(seed) + np.uint64(read) * np.uint64(0x9E3779B97F4A7C15))
        if rng[0] == np.uint64(0):
            rng[0] = np.uint64(1)
        q = np.empty(n, dtype=np.int8)
        field = np.zeros(n)
        e = 0.0
        for i in range(n):
            q[i] = np.int8(_next_u64(rng) & np.uint64(1))
        for i in range(n):
            if q[i]:
                e += lin[i]
                for j in range(n):
                    field[j] += W[j, i]
        for i in range(n):
            if q[i]:
                for j in range(i + 1, n):
                    if q[j]:
                        e += W[i, j]
        best_e = e
        for i in range(n):
            out_bits[read, i] = q[i]
        beta = beta_start
        for sweep in range(sweeps):
            for i in range(n):
                delta = (1.0 - 2.0 * q[i]) * (lin[i] + field[i])
                accept = delta <= 0.0
                if not accept:
                    accept = _uniform(rng) < np.exp(-beta * delta)
                if accept:
                    sign = 1.0 - 2.0 * q[i]
                    q[i] = 1 - q[i]
                    e += delta
                    for j in range(n):
                        field[j] += sign * W[j, i]
                    if e < best_e:
                        best_e = e
                        for k in range(n):
                            out_bits[read, k] = q[k]
            beta *= ratio
        out_energy[read] = best_e


@njit(cache=True)
def _exact_kernel(lin, W, n):
    """Lexicographic sweep over all assignments with incremental energy.

    Vector index 0 is the most significant counter bit, so assignments are
    visited in lexicographic order and a strict improvement keeps the first
    (lexicographically smallest) minimizer.
    """
    q = np.zeros(n, dtype=np.int8)
    field = np.zeros(n)
    e = 0.0
    best_e = 0.0
    best_idx = np.uint64(0)
    total = np.uint64(1) << np.uint64(n)
    k = np.uint64(0)
    while k + np.uint64(1) < total:
        k += np.uint64(1)
        # flip the trailing counter bits that change between k-1 and k
        bit = np.uint64(0)
        while True:
            i = n - 1 - int(bit)
            sign = 1.0 - 2.0 * q[i]
            delta = sign * (lin[i] + field[i])
            e += delta
            q[i] = 1 - q[i]
            for j in range(n):
                field[j] += sign * W[j, i]
            if (k >> bit) & np.uint64(1):
                break
            bit += np.uint64(1)
        if e < best_e:
            best_e = e
            best_idx = k
    return best_e, best_idx


def sample_sa(qubo: Qubo, cfg: AnnealConfig | None = None) -> SampleResult:
    """Best-of-reads simulated annealing, deterministic given (qubo, seed).

    Ties across reads break toward the lexicographically smallest assignment.
    """
    cfg = cfg or AnnealConfig()
    n = qubo.n_q
    if n < 1:
        raise LengthMismatch("empty QUBO")
    lin, W = _split_fields(qubo)
    bits = np.zeros((cfg.reads, n), dtype=np.int8)
    eng = np.zeros(cfg.reads)
    _anneal_kernel(lin, W, n, cfg.reads, cfg.sweeps,
                   cfg.beta_start, cfg.beta_end, np.uint64(cfg.seed & (2**64 - 1)),
                   bits, eng)
    # Recompute read energies exactly from the recorded assignments; the
    # kernel's incremental sums only steer the search.
    exact = np.array([energy(qubo, bits[r]) for r in range(cfg.reads)])
    order = np.lexsort(np.column_stack([bits[:, ::-1], exact]).T)
    best = order[0]
    return SampleResult(best_assignment=bits[best].copy(),
                        best_energy=float(exact[best]),
                        energies=exact)


def solve_exact(qubo: Qubo) -> SampleResult:
    """Exhaustive minimum over all 2^n assignments; lexicographic tie-break."""
    n = qubo.n_q
    if n > EXACT_MAX_BITS:
        raise TooLarge(f"n_q={n} exceeds exhaustive guard {EXACT_MAX_BITS}")
    if n < 1:
        raise LengthMismatch("empty QUBO")
    lin, W = _split_fields(qubo)
    _, best_idx = _exact_kernel(lin, W, n)
    bits = np.array([(int(best_idx) >> (n - 1 - i)) & 1 for i in range(n)],
                    dtype=np.int8)
    e = energy(qubo, bits)
    return SampleResult(best_assignment=bits, best_energy=e,
                        energies=np.array([e]))
