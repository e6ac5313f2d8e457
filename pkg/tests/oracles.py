"""Independent reference implementations used only to check the package.

Everything here deliberately avoids the package's own solvers: LPs go to
scipy's HiGHS, MILPs are enumerated with nested loops, QUBO energies are
double loops, and network margins come from activation-pattern enumeration.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import linprog


def lp_solve(c, A_ge, b_ge, A_eq=None, b_eq=None, bounds=None):
    """scipy wrapper for min c.x s.t. A_ge.x >= b_ge, A_eq.x == b_eq.

    Returns (status, objective, x) with status in
    {optimal, infeasible, unbounded}.
    """
    c = np.asarray(c, dtype=float)
    kw = {}
    if A_ge is not None and len(b_ge):
        kw["A_ub"] = -np.asarray(A_ge, dtype=float)
        kw["b_ub"] = -np.asarray(b_ge, dtype=float)
    if A_eq is not None and len(b_eq):
        kw["A_eq"] = np.asarray(A_eq, dtype=float)
        kw["b_eq"] = np.asarray(b_eq, dtype=float)
    if bounds is None:
        bounds = [(None, None)] * len(c)
    res = linprog(c, bounds=bounds, method="highs", **kw)
    status = {0: "optimal", 2: "infeasible", 3: "unbounded"}.get(res.status, "other")
    return status, (float(res.fun) if res.status == 0 else None), res.x


def milp_enumerate(problem):
    """Brute-force MILP reference: loop over binaries, residual LPs by scipy."""
    best_obj, best_y, best_x = None, None, None
    feasible = False
    for bits in itertools.product((0.0, 1.0), repeat=problem.n_y):
        y = np.array(bits)
        rows = np.vstack([problem.A, problem.C])
        rhs = np.concatenate([problem.b - problem.B @ y, problem.e])
        status, obj, x = lp_solve(problem.c, rows, rhs)
        if status == "unbounded":
            return "unbounded", None, None, None
        if status != "optimal":
            continue
        feasible = True
        total = obj + float(problem.d @ y)
        if best_obj is None or total < best_obj:
            best_obj, best_y, best_x = total, y, x
    if not feasible:
        return "infeasible", None, None, None
    return "optimal", best_obj, best_y, best_x


def qubo_energy(Q, offset, q):
    """Double-loop QUBO energy, no linear algebra."""
    n = len(q)
    total = float(offset)
    for i in range(n):
        for j in range(i, n):
            total += float(Q[i][j]) * q[i] * q[j]
    return total


def qubo_brute_minimum(Q, offset):
    """Exhaustive scan in lexicographic order; first minimizer wins ties."""
    n = np.asarray(Q).shape[0]
    best_e, best_q = None, None
    for bits in itertools.product((0, 1), repeat=n):
        e = qubo_energy(Q, offset, bits)
        if best_e is None or e < best_e:
            best_e, best_q = e, np.array(bits)
    return best_e, best_q


def ising_energy(h, J, offset, s):
    n = len(s)
    total = float(offset)
    for i in range(n):
        total += float(h[i]) * s[i]
        for j in range(i + 1, n):
            total += float(J[i][j]) * s[i] * s[j]
    return total


def _interval_forward(weights, biases, lo, hi):
    """Tiny interval propagation used only to prune impossible patterns."""
    pre = []
    for i, (w, v) in enumerate(zip(weights, biases)):
        wp, wn = np.maximum(w, 0), np.minimum(w, 0)
        l = wp @ lo + wn @ hi + v
        u = wp @ hi + wn @ lo + v
        pre.append((l, u))
        if i < len(weights) - 1:
            lo, hi = np.maximum(l, 0), np.maximum(u, 0)
    return pre


def pattern_margin(weights, biases, z, epsilon, true_class, adv_class,
                   domain=(0.0, 1.0)):
    """Exact minimum of f_true - f_adv over the ball by activation-pattern
    enumeration: every hidden ReLU is fixed on/off, each pattern is an LP in
    the input alone, and the minimum over patterns is the true margin.

    Patterns contradicting the interval bounds are skipped (sound pruning).
    Returns +inf when no pattern admits a feasible input (cannot happen for
    a nonempty ball).
    """
    z = np.asarray(z, dtype=float)
    lo = np.clip(z - epsilon, domain[0], domain[1])
    hi = np.clip(z + epsilon, domain[0], domain[1])
    pre = _interval_forward(weights, biases, lo, hi)
    hidden_sizes = [w.shape[0] for w in weights[:-1]]
    free: list[tuple[int, int]] = []
    forced: dict[tuple[int, int], int] = {}
    for li, size in enumerate(hidden_sizes):
        l, u = pre[li]
        for j in range(size):
            if u[j] <= 0.0:
                forced[(li, j)] = 0
            elif l[j] >= 0.0:
                forced[(li, j)] = 1
            else:
                free.append((li, j))

    d0 = len(z)
    best = np.inf
    for bits in itertools.product((0, 1), repeat=len(free)):
        pattern = dict(forced)
        pattern.update({pos: bit for pos, bit in zip(free, bits)})
        # with the pattern fixed, every layer output is affine in the input
        M = np.eye(d0)
        k = np.zeros(d0)
        rows, rhs = [], []
        for li, (w, v) in enumerate(zip(weights[:-1], biases[:-1])):
            pre_M = w @ M
            pre_k = w @ k + v
            for j in range(w.shape[0]):
                if pattern[(li, j)]:
                    rows.append(-pre_M[j])    # pre >= 0  ->  -pre <= 0
                    rhs.append(pre_k[j])
                else:
                    rows.append(pre_M[j])     # pre <= 0
                    rhs.append(-pre_k[j])
            act = np.array([pattern[(li, j)] for j in range(w.shape[0])], dtype=float)
            M = pre_M * act[:, None]
            k = pre_k * act
        w, v = weights[-1], biases[-1]
        obj_M = (w[true_class] - w[adv_class]) @ M
        obj_k = float((w[true_class] - w[adv_class]) @ k
                      + v[true_class] - v[adv_class])
        if rows:
            res = linprog(obj_M, A_ub=np.array(rows), b_ub=np.array(rhs),
                          bounds=list(zip(lo, hi)), method="highs")
        else:
            res = linprog(obj_M, bounds=list(zip(lo, hi)), method="highs")
        if res.status == 0:
            best = min(best, float(res.fun) + obj_k)
        elif res.status != 2:
            raise RuntimeError(f"pattern LP status {res.status}")
    return best
