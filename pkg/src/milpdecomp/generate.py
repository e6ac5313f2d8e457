"""Deterministic random instances: desk-scale MILPs and tiny ReLU networks."""

from __future__ import annotations

import numpy as np

from .milp import MilpProblem
from .verifier import Network


def random_milp(n_x: int = 4, n_y: int = 4, m: int = 4, seed: int = 0,
                box: float = 10.0) -> MilpProblem:
    """Feasible-by-construction MILP.

    A feasible pair (x0, y0) is drawn first and b is set strictly below its
    row activities, so brute force is always 'optimal'.  The easy set X is
    the box [0, box]^{n_x}, which keeps every residual LP and pricing LP
    bounded.
    """
    rng = np.random.default_rng(seed)
    A = rng.uniform(-1.0, 1.0, (m, n_x))
    B = rng.uniform(-1.0, 1.0, (m, n_y))
    x0 = rng.uniform(0.0, box / 2.0, n_x)
    y0 = rng.integers(0, 2, n_y).astype(float)
    b = A @ x0 + B @ y0 - rng.uniform(0.1, 2.0, m)
    C = np.vstack([np.eye(n_x), -np.eye(n_x)])
    e = np.concatenate([np.zeros(n_x), -box * np.ones(n_x)])
    c = rng.uniform(-1.0, 1.0, n_x)
    d = rng.uniform(-1.0, 1.0, n_y)
    return MilpProblem(c=c, d=d, b=b, A=A, B=B, C=C, e=e)


def random_network(input_dim: int = 4, hidden: tuple[int, ...] = (4, 4),
                   classes: int = 2, seed: int = 0,
                   scale: float = 1.0) -> Network:
    """Fully connected ReLU net with weights uniform in [-scale, scale].

    The last-layer biases are kept small so class scores stay comparable at
    moderate scales.
    """
    rng = np.random.default_rng(seed)
    dims = [input_dim, *hidden, classes]
    weights, biases = [], []
    for i in range(len(dims) - 1):
        weights.append(scale * rng.uniform(-1.0, 1.0, (dims[i + 1], dims[i])))
        width = 0.2 if i == len(dims) - 2 else 0.5
        biases.append(rng.uniform(-width, width, dims[i + 1]))
    return Network(weights=tuple(weights), biases=tuple(biases))


def centered_network(input_dim: int = 3, hidden: tuple[int, ...] = (4, 4),
                     classes: int = 2, seed: int = 0,
                     jitter: float = 0.02) -> tuple[Network, np.ndarray]:
    """Hard verification case: hidden biases cancel the pre-activations at a
    reference input, so every hidden ReLU straddles zero for any positive
    ball.  Returns (network, reference input)."""
    rng = np.random.default_rng(seed)
    z = rng.uniform(0.2, 0.8, input_dim)
    dims = [input_dim, *hidden, classes]
    weights, biases = [], []
    x = z
    for i in range(len(dims) - 1):
        w = rng.uniform(-1.0, 1.0, (dims[i + 1], dims[i]))
        if i < len(dims) - 2:
            v = -(w @ x) + rng.uniform(-jitter, jitter, dims[i + 1])
            x = np.maximum(w @ x + v, 0.0)
        else:
            v = rng.uniform(-0.2, 0.2, dims[i + 1])
        weights.append(w)
        biases.append(v)
    return Network(weights=tuple(weights), biases=tuple(biases)), z


def random_samples(network: Network, count: int, seed: int = 0) -> np.ndarray:
    """Sample rows of [features..., label]; the label is the net's own
    prediction, so certified fraction at epsilon = 0 equals clean accuracy."""
    rng = np.random.default_rng(seed)
    rows = np.zeros((count, network.input_dim + 1))
    for i in range(count):
        z = rng.uniform(0.1, 0.9, network.input_dim)
        rows[i, :-1] = z
        rows[i, -1] = network.predict(z)
    return rows
