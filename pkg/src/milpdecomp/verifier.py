"""Robustness certification of ReLU networks under an l-infinity input ball.

A feedforward net of affine layers with ReLU after each hidden layer is
certified for one (true, adversarial) class pair by minimizing the output
margin f_true - f_adv over the ball; the margin is positive on the whole
ball iff the pair is robust.  The minimization is encoded as a canonical
MILP with one binary per unstable neuron (big-M rows built from interval
bounds) and solved three ways:

* exact_certify: brute force over the binaries (the complete baseline),
* certify_bd:    Benders decomposition per class pair,
* certify_dw:    Dantzig-Wolfe column generation per class pair, whose
                 master value lower-bounds the true margin (a convex
                 relaxation), so "robust" answers stay sound while some
                 robust pairs come back unknown.

Interval bound propagation is plain: affine layers split into positive and
negative parts, ReLU clamps at zero.  Certified counts are therefore lower
than with tighter propagators, which only makes the verdicts more
conservative, never unsound.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import benders as bd
from . import dantzig_wolfe as dw
from .errors import ParseError, TooManyUnstable
from .milp import MilpProblem, brute_force_solve

EXACT_MAX_UNSTABLE = 16


@dataclass(frozen=True)
class Network:
    """Affine layers (W, v); ReLU after every layer except the last."""

    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]

    def __post_init__(self):
        ws = tuple(np.asarray(w, dtype=float) for w in self.weights)
        vs = tuple(np.asarray(v, dtype=float) for v in self.biases)
        if len(ws) != len(vs) or not ws:
            raise ParseError("need one bias vector per weight matrix")
        for i, (w, v) in enumerate(zip(ws, vs)):
            if w.ndim != 2 or v.shape != (w.shape[0],):
                raise ParseError(f"layer {i}: weight/bias shapes disagree")
            if i and w.shape[1] != ws[i - 1].shape[0]:
                raise ParseError(f"layer {i}: input width {w.shape[1]} does not "
                                 f"chain with previous width {ws[i - 1].shape[0]}")
        for w in ws:
            w.setflags(write=False)
        for v in vs:
            v.setflags(write=False)
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "biases", vs)

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def n_classes(self) -> int:
        return self.weights[-1].shape[0]

    def forward(self, z: np.ndarray) -> np.ndarray:
        x = np.asarray(z, dtype=float)
        for i, (w, v) in enumerate(zip(self.weights, self.biases)):
            x = w @ x + v
            if i < self.n_layers - 1:
                x = np.maximum(x, 0.0)
        return x

    def predict(self, z: np.ndarray) -> int:
        return int(np.argmax(self.forward(z)))


@dataclass(frozen=True)
class LayerBounds:
    """Input box plus per-layer pre-activation intervals."""

    input_lower: np.ndarray
    input_upper: np.ndarray
    pre_lower: tuple[np.ndarray, ...]
    pre_upper: tuple[np.ndarray, ...]


@dataclass(frozen=True)
class VerificationInstance:
    network: Network
    z: np.ndarray
    epsilon: float
    true_class: int
    adversarial_class: int | None = None    # None = test every other class

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        z.setflags(write=False)
        object.__setattr__(self, "z", z)
        k = self.network.n_classes
        if not 0 <= self.true_class < k:
            raise ParseError(f"true_class {self.true_class} out of range")
        if self.adversarial_class is not None:
            if not 0 <= self.adversarial_class < k or self.adversarial_class == self.true_class:
                raise ParseError("adversarial_class must differ from true_class")

    def adversarial_classes(self) -> list[int]:
        if self.adversarial_class is not None:
            return [self.adversarial_class]
        return [a for a in range(self.network.n_classes) if a != self.true_class]


@dataclass(frozen=True)
class ClassResult:
    adversarial_class: int
    phi: float
    phi_hat: float
    steps: int
    max_qubits: int


@dataclass(frozen=True)
class Verdict:
    verdict: str                  # robust | not_robust | unknown
    per_class: tuple[ClassResult, ...] = ()
    note: str = ""

    def max_qubits(self) -> int:
        return max((c.max_qubits for c in self.per_class), default=0)


def ibp_bounds(network: Network, z: np.ndarray, epsilon: float,
               domain: tuple[float, float] = (0.0, 1.0)) -> LayerBounds:
    """Interval propagation: sound pre-activation boxes for the whole ball."""
    z = np.asarray(z, dtype=float)
    in_lo = np.clip(z - epsilon, domain[0], domain[1])
    in_hi = np.clip(z + epsilon, domain[0], domain[1])
    lo, hi = in_lo, in_hi
    pre_lo, pre_hi = [], []
    for i, (w, v) in enumerate(zip(network.weights, network.biases)):
        w_pos = np.maximum(w, 0.0)
        w_neg = np.minimum(w, 0.0)
        l = w_pos @ lo + w_neg @ hi + v
        u = w_pos @ hi + w_neg @ lo + v
        pre_lo.append(l)
        pre_hi.append(u)
        if i < network.n_layers - 1:
            lo, hi = np.maximum(l, 0.0), np.maximum(u, 0.0)
    return LayerBounds(input_lower=in_lo, input_upper=in_hi,
                       pre_lower=tuple(pre_lo), pre_upper=tuple(pre_hi))


def margin_lower_bounds(network: Network, bounds: LayerBounds,
                        true_class: int) -> np.ndarray:
    """IBP lower bound of f_true - f_adv for every class (true entry = +inf).

    The margin row (W_t - W_a) is propagated through the last layer's
    post-activation box directly, which is tighter than subtracting output
    intervals.
    """
    w, v = network.weights[-1], network.biases[-1]
    if network.n_layers == 1:
        post_lo, post_hi = bounds.input_lower, bounds.input_upper
    else:
        post_lo = np.maximum(bounds.pre_lower[-2], 0.0)
        post_hi = np.maximum(bounds.pre_upper[-2], 0.0)
    out = np.full(network.n_classes, np.inf)
    for a in range(network.n_classes):
        if a == true_class:
            continue
        row = w[true_class] - w[a]
        const = v[true_class] - v[a]
        out[a] = float(np.maximum(row, 0.0) @ post_lo
                       + np.minimum(row, 0.0) @ post_hi + const)
    return out


def early_certificate(network: Network, bounds: LayerBounds,
                      true_class: int,
                      adversarial_classes: list[int] | None = None) -> bool:
    """True iff the IBP margin lower bound is strictly positive for every
    tested adversarial class."""
    lbs = margin_lower_bounds(network, bounds, true_class)
    classes = adversarial_classes if adversarial_classes is not None else \
        [a for a in range(network.n_classes) if a != true_class]
    return all(lbs[a] > 0.0 for a in classes)


def encode_milp(network: Network, bounds: LayerBounds, true_class: int,
                adversarial_class: int) -> MilpProblem:
    """Margin-minimization MILP for one class pair.

    Variables x = [input | hidden post-activations | outputs]; one binary per
    unstable hidden neuron.  Per unstable neuron with pre-activation bounds
    l < 0 < u the complicating rows enforce

        x >= xhat,   x >= 0,   x <= xhat - l.(1 - y),   x <= u.y,

    so y = 1 forces x = xhat (within [0, u]) and y = 0 forces x = 0.  Stable
    neurons are pinned by easy-set equalities (identity or zero), the input
    box and unstable-output boxes live in the easy set too, so X is bounded.
    The objective selects output_true - output_adv; the instance is robust
    for the pair iff the optimum is positive.
    """
    n_layers = network.n_layers
    widths = [network.input_dim] + [w.shape[0] for w in network.weights]
    starts = np.concatenate([[0], np.cumsum(widths)])
    n_x = int(starts[-1])

    unstable: list[tuple[int, int]] = []
    for i in range(n_layers - 1):
        for j in range(widths[i + 1]):
            l, u = bounds.pre_lower[i][j], bounds.pre_upper[i][j]
            if l < 0.0 < u:
                unstable.append((i, j))
    n_y = len(unstable)

    a_rows, b_rows, b_rhs = [], [], []
    c_rows, e_rhs = [], []

    def easy(row: np.ndarray, rhs: float):
        c_rows.append(row)
        e_rhs.append(rhs)

    def easy_eq(row: np.ndarray, rhs: float):
        easy(row, rhs)
        easy(-row, -rhs)

    # input box
    for j in range(widths[0]):
        row = np.zeros(n_x)
        row[j] = 1.0
        easy(row.copy(), float(bounds.input_lower[j]))
        row[j] = -1.0
        easy(row, -float(bounds.input_upper[j]))

    y_index = {pair: k for k, pair in enumerate(unstable)}
    for i in range(n_layers - 1):
        w, v = network.weights[i], network.biases[i]
        prev = slice(starts[i], starts[i + 1])
        for j in range(widths[i + 1]):
            var = starts[i + 1] + j
            l, u = float(bounds.pre_lower[i][j]), float(bounds.pre_upper[i][j])
            pre_row = np.zeros(n_x)
            pre_row[prev] = w[j]
            if u <= 0.0:                       # stably off
                row = np.zeros(n_x)
                row[var] = 1.0
                easy_eq(row, 0.0)
                continue
            if l >= 0.0:                       # stably on: x = W.prev + v
                row = -pre_row.copy()
                row[var] = 1.0
                easy_eq(row, float(v[j]))
                continue
            k = y_index[(i, j)]
            y_row = np.zeros(n_y)
            # x - W.prev >= v
            row = -pre_row.copy()
            row[var] = 1.0
            a_rows.append(row)
            b_rows.append(y_row.copy())
            b_rhs.append(float(v[j]))
            # x >= 0
            row = np.zeros(n_x)
            row[var] = 1.0
            a_rows.append(row)
            b_rows.append(y_row.copy())
            b_rhs.append(0.0)
            # W.prev - x + l.y >= l - v
            row = pre_row.copy()
            row[var] = -1.0
            yr = y_row.copy()
            yr[k] = l
            a_rows.append(row)
            b_rows.append(yr)
            b_rhs.append(l - float(v[j]))
            # u.y - x >= 0
            row = np.zeros(n_x)
            row[var] = -1.0
            yr = y_row.copy()
            yr[k] = u
            a_rows.append(row)
            b_rows.append(yr)
            b_rhs.append(0.0)
            # post-activation box keeps X bounded
            row = np.zeros(n_x)
            row[var] = 1.0
            easy(row.copy(), 0.0)
            row[var] = -1.0
            easy(row, -u)

    # output layer equalities
    w, v = network.weights[-1], network.biases[-1]
    prev = slice(starts[n_layers - 1], starts[n_layers])
    for j in range(widths[-1]):
        row = np.zeros(n_x)
        row[prev] = -w[j]
        row[starts[n_layers] + j] = 1.0
        easy_eq(row, float(v[j]))

    if not a_rows:
        # keep the complicating block non-empty (m >= 1 instance invariant)
        a_rows.append(np.zeros(n_x))
        b_rows.append(np.zeros(n_y))
        b_rhs.append(0.0)

    c = np.zeros(n_x)
    c[starts[n_layers] + true_class] = 1.0
    c[starts[n_layers] + adversarial_class] = -1.0
    return MilpProblem(c=c, d=np.zeros(n_y), b=np.array(b_rhs),
                       A=np.array(a_rows), B=np.array(b_rows),
                       C=np.array(c_rows), e=np.array(e_rhs))


def exact_certify(network: Network, z: np.ndarray, epsilon: float,
                  domain: tuple[float, float] = (0.0, 1.0)
                  ) -> tuple[Verdict, float]:
    """Complete verdict by brute force over the encoded MILPs.

    Returns (verdict, worst margin).  A tie at the clean argmax counts as
    not robust.
    """
    z = np.asarray(z, dtype=float)
    scores = network.forward(z)
    true_class = int(np.argmax(scores))
    order = np.sort(scores)
    if len(order) > 1 and order[-1] == order[-2]:
        return Verdict(verdict="not_robust", note="tied clean prediction"), 0.0
    bounds = ibp_bounds(network, z, epsilon, domain)
    n_unstable = sum(
        1 for i in range(network.n_layers - 1)
        for j in range(len(bounds.pre_lower[i]))
        if bounds.pre_lower[i][j] < 0.0 < bounds.pre_upper[i][j])
    if n_unstable > EXACT_MAX_UNSTABLE:
        raise TooManyUnstable(f"{n_unstable} unstable neurons exceed guard "
                              f"{EXACT_MAX_UNSTABLE}")
    worst = np.inf
    results = []
    for a in range(network.n_classes):
        if a == true_class:
            continue
        sol = brute_force_solve(encode_milp(network, bounds, true_class, a))
        margin = sol.objective if sol.status == "optimal" else np.inf
        worst = min(worst, margin)
        results.append(ClassResult(adversarial_class=a, phi=margin,
                                   phi_hat=margin, steps=0, max_qubits=0))
    verdict = "robust" if worst > 0.0 else "not_robust"
    return Verdict(verdict=verdict, per_class=tuple(results)), float(worst)


def certify_dw(instance: VerificationInstance,
               dw_config: dw.DwConfig | None = None,
               domain: tuple[float, float] = (0.0, 1.0)) -> Verdict:
    """Column-generation certification of one instance.

    IBP may certify immediately; otherwise each adversarial class runs the
    column-generation loop on its margin MILP.  The pair is declared not
    robust when the master value phi drops to zero or below (a relaxation
    adversary: the convexified margin vanished), unknown when the dual bound
    stays nonpositive, and robust only when every tested class ends with a
    strictly positive dual bound.
    """
    dw_config = dw_config or dw.DwConfig()
    net, z = instance.network, instance.z
    classes = instance.adversarial_classes()
    bounds = ibp_bounds(net, z, instance.epsilon, domain)
    if early_certificate(net, bounds, instance.true_class, classes):
        return Verdict(verdict="robust", note="interval certificate")
    results = []
    for a in classes:
        problem = encode_milp(net, bounds, instance.true_class, a)
        trace = dw.run(problem, config=dw_config)
        results.append(ClassResult(adversarial_class=a, phi=trace.phi,
                                   phi_hat=trace.phi_hat, steps=len(trace.steps),
                                   max_qubits=trace.max_qubits()))
        if trace.phi <= 0.0:
            return Verdict(verdict="not_robust", per_class=tuple(results),
                           note="relaxation adversary")
        if trace.phi_hat <= 0.0:
            return Verdict(verdict="unknown", per_class=tuple(results),
                           note="dual bound not positive")
    return Verdict(verdict="robust", per_class=tuple(results))


def certify_bd(instance: VerificationInstance,
               config: bd.BendersConfig | None = None,
               domain: tuple[float, float] = (0.0, 1.0)) -> Verdict:
    """Benders certification of one instance, same shell as certify_dw.

    A class pair is certified when its master lower bound ends strictly
    positive; a converged nonpositive objective is an adversary; a
    nonpositive bound at the step cap abstains.
    """
    config = config or bd.BendersConfig()
    net, z = instance.network, instance.z
    classes = instance.adversarial_classes()
    bounds = ibp_bounds(net, z, instance.epsilon, domain)
    if early_certificate(net, bounds, instance.true_class, classes):
        return Verdict(verdict="robust", note="interval certificate")
    results = []
    for a in classes:
        problem = encode_milp(net, bounds, instance.true_class, a)
        trace = bd.run(problem, config)
        lower, upper = trace.lower, trace.upper
        results.append(ClassResult(adversarial_class=a, phi=lower,
                                   phi_hat=upper, steps=len(trace.steps),
                                   max_qubits=trace.max_qubits()))
        if trace.status == "converged" and upper <= 0.0:
            return Verdict(verdict="not_robust", per_class=tuple(results),
                           note="adversary")
        if not lower > 0.0:
            return Verdict(verdict="unknown", per_class=tuple(results),
                           note="lower bound not positive")
    return Verdict(verdict="robust", per_class=tuple(results))


def network_from_json(text: str) -> Network:
    """Parse {"layers": [{"weights": [[...]], "bias": [...]}, ...]}."""
    try:
        data = json.loads(text)
        layers = data["layers"]
        weights = [np.asarray(layer["weights"], dtype=float) for layer in layers]
        biases = [np.asarray(layer["bias"], dtype=float) for layer in layers]
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ParseError(f"malformed network JSON: {exc}") from exc
    return Network(weights=tuple(weights), biases=tuple(biases))


def network_to_json(network: Network) -> str:
    return json.dumps({"layers": [
        {"weights": w.tolist(), "bias": v.tolist()}
        for w, v in zip(network.weights, network.biases)]})
