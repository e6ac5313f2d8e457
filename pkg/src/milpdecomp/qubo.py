"""QUBO construction, fixed-point encoding, Ising mapping, pruning, qubit budgets.

Energy convention: for q in {0,1}^n,

    energy(q) = q.Q.q + offset,   Q strictly upper triangular plus diagonal,

so a diagonal entry is a linear coefficient (q_i^2 = q_i) and each coupling
is stored once at (i, j) with i < j.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, NoPointCuts, ParseError

DEFAULT_N_S = 8
DEFAULT_SCALE = 0.1


@dataclass(frozen=True)
class Qubo:
    Q: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise LengthMismatch(f"Q must be square, got {Q.shape}")
        if np.any(np.tril(Q, -1) != 0.0):
            raise LengthMismatch("Q must be upper triangular (couplings stored once)")
        Q = Q.copy()
        Q.setflags(write=False)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def n_q(self) -> int:
        return self.Q.shape[0]


@dataclass(frozen=True)
class FixedPointCode:
    """Nonnegative fixed-point code: value = w * sum_i 2^i * bit_i (LSB first)."""

    n_s: int = DEFAULT_N_S
    w: float = DEFAULT_SCALE

    def __post_init__(self):
        if self.n_s < 0:
            raise LengthMismatch("n_s must be nonnegative")

    @property
    def max_value(self) -> float:
        return self.w * (2 ** self.n_s - 1)

    def weights(self) -> np.ndarray:
        return self.w * (2.0 ** np.arange(self.n_s))


def fixed_point_decode(bits: np.ndarray, code: FixedPointCode) -> float:
    bits = np.asarray(bits, dtype=float)
    if bits.shape != (code.n_s,):
        raise LengthMismatch(f"expected {code.n_s} bits, got {bits.shape}")
    return float(code.weights() @ bits)


def diag_qubo(linear: np.ndarray) -> Qubo:
    """Purely diagonal QUBO: minimizing it equals minimizing linear.q."""
    linear = np.asarray(linear, dtype=float)
    return Qubo(Q=np.diag(linear), offset=0.0)


def energy(qubo: Qubo, q: np.ndarray) -> float:
    """q.Q.q + offset for a binary assignment q."""
    q = np.asarray(q, dtype=float)
    if q.shape != (qubo.n_q,):
        raise LengthMismatch(f"expected {qubo.n_q} bits, got {q.shape}")
    return float(q @ (qubo.Q @ q) + qubo.offset)


def _accumulate_squared(Q: np.ndarray, offset: float, coeffs: np.ndarray,
                        const: float, weight: float) -> float:
    """Add weight * (coeffs.q + const)^2 onto (Q, offset); returns new offset."""
    Q += weight * (np.triu(2.0 * np.outer(coeffs, coeffs), 1)
                   + np.diag(coeffs * coeffs + 2.0 * const * coeffs))
    return offset + weight * const * const


@dataclass(frozen=True)
class BendersQuboLayout:
    """Bit layout of the penalized master: [y | eta | one slack per cut]."""

    n_y: int
    code: FixedPointCode
    cut_kinds: tuple[str, ...]
    eta_shift: float = 0.0

    @property
    def n_q(self) -> int:
        return self.n_y + (1 + len(self.cut_kinds)) * self.code.n_s

    def y_of(self, q: np.ndarray) -> np.ndarray:
        return np.asarray(q)[: self.n_y].astype(float)

    def eta_of(self, q: np.ndarray) -> float:
        bits = np.asarray(q)[self.n_y: self.n_y + self.code.n_s]
        return self.eta_shift + fixed_point_decode(bits, self.code)

    def slack_of(self, q: np.ndarray, k: int) -> float:
        start = self.n_y + (1 + k) * self.code.n_s
        return fixed_point_decode(np.asarray(q)[start: start + self.code.n_s], self.code)


def benders_master_qubo(cut_lins: list[np.ndarray], cut_consts: list[float],
                        cut_kinds: list[str], d: np.ndarray, code: FixedPointCode,
                        w_a: float = 0.1, w_p: float = 0.01,
                        eta_shift: float = 0.0) -> tuple[Qubo, BendersQuboLayout]:
    """Penalized QUBO of the delayed-constraint master.

    Cut k demands  const_k + lin_k.y <= eta  (kind 'point')  or  <= 0 (kind
    'ray').  Each inequality becomes an equality via one nonnegative
    fixed-point slack and is squared:

        energy = d.y + eta + w_a * sum_point (const + lin.y - eta + s_k)^2
                           + w_p * sum_ray   (const + lin.y       + s_k)^2

    Any assignment exactly satisfying every cut has zero total penalty.  eta
    is encoded nonnegative as eta_shift + code value.
    """
    if "point" not in cut_kinds:
        raise NoPointCuts("master needs at least one point cut (eta unbounded below)")
    d = np.asarray(d, dtype=float)
    n_y, n_s = d.shape[0], code.n_s
    layout = BendersQuboLayout(n_y=n_y, code=code, cut_kinds=tuple(cut_kinds),
                               eta_shift=eta_shift)
    n_q = layout.n_q
    Q = np.zeros((n_q, n_q))
    offset = float(eta_shift)
    eta_sl = slice(n_y, n_y + n_s)
    np.fill_diagonal(Q[:n_y, :n_y], d)
    Q[eta_sl, eta_sl] += np.diag(code.weights())

    for k, (lin, const, kind) in enumerate(zip(cut_lins, cut_consts, cut_kinds)):
        coeffs = np.zeros(n_q)
        coeffs[:n_y] = np.asarray(lin, dtype=float)
        shift = float(const)
        if kind == "point":
            coeffs[eta_sl] = -code.weights()
            shift -= eta_shift
        start = n_y + (1 + k) * n_s
        coeffs[start: start + n_s] = code.weights()
        weight = w_a if kind == "point" else w_p
        offset = _accumulate_squared(Q, offset, coeffs, shift, weight)
    return Qubo(Q=np.triu(Q), offset=offset), layout


def qubit_count(method: str, n_y: int, n_s: int = DEFAULT_N_S, m_y: int = 0,
                cuts: int = 0) -> int:
    """Binary variables in the QUBO submitted per iteration.

    Benders grows one fixed-point slack per accumulated cut on top of the
    eta register; the integer pricing step of Dantzig-Wolfe is constant.
    """
    if min(n_y, n_s, m_y, cuts) < 0:
        raise LengthMismatch("qubit_count arguments must be nonnegative")
    if method == "benders":
        return n_y + (1 + cuts) * n_s
    if method == "dantzig_wolfe":
        return n_y + m_y * n_s
    raise ValueError(f"unknown method '{method}'")


def to_ising(qubo: Qubo) -> tuple[np.ndarray, np.ndarray, float]:
    """Map q = (1+s)/2: returns (h, J, offset) with J strictly upper triangular.

    Energies agree with the QUBO on every assignment:
    E(s) = sum_{i<j} J_ij s_i s_j + h.s + offset.
    """
    n = qubo.n_q
    diag = np.diag(qubo.Q)
    coup = np.triu(qubo.Q, 1)
    J = coup / 4.0
    h = diag / 2.0 + (coup.sum(axis=1) + coup.sum(axis=0)) / 4.0
    offset = qubo.offset + diag.sum() / 2.0 + coup.sum() / 4.0
    return h, J, float(offset)


def ising_energy(h: np.ndarray, J: np.ndarray, offset: float, s: np.ndarray) -> float:
    s = np.asarray(s, dtype=float)
    return float(s @ (J @ s) + h @ s + offset)


def prune(qubo: Qubo, threshold_fraction: float) -> Qubo:
    """Zero couplings below threshold_fraction * max|Q|; diagonal untouched."""
    if not 0.0 <= threshold_fraction < 1.0:
        raise ValueError("threshold_fraction must be in [0, 1)")
    scale = np.max(np.abs(qubo.Q)) if qubo.n_q else 0.0
    if scale == 0.0 or threshold_fraction == 0.0:
        return qubo
    Q = np.array(qubo.Q)
    coup = np.triu(Q, 1)
    coup[np.abs(coup) < threshold_fraction * scale] = 0.0
    return Qubo(Q=np.triu(coup) + np.diag(np.diag(Q)), offset=qubo.offset)


def qubo_to_json(qubo: Qubo) -> str:
    entries = []
    for i in range(qubo.n_q):
        for j in range(i, qubo.n_q):
            if qubo.Q[i, j] != 0.0:
                entries.append([i, j, qubo.Q[i, j]])
    return json.dumps({"n": qubo.n_q, "Q": entries, "offset": qubo.offset})


def qubo_from_json(text: str) -> Qubo:
    try:
        data = json.loads(text)
        n = int(data["n"])
        Q = np.zeros((n, n))
        for i, j, v in data["Q"]:
            if not 0 <= i <= j < n:
                raise ParseError(f"entry ({i},{j}) outside upper triangle of size {n}")
            Q[i, j] = float(v)
        return Qubo(Q=Q, offset=float(data.get("offset", 0.0)))
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ParseError(f"malformed QUBO JSON: {exc}") from exc
