import numpy as np
import pytest

import oracles
from milpdecomp.annealer import AnnealConfig
from milpdecomp.dantzig_wolfe import (
    Column,
    DwConfig,
    DwDuals,
    add_if_improving,
    binary_column,
    binary_pricing,
    dual_bound,
    initial_columns,
    real_column,
    real_pricing,
    run,
    solve_restricted_master,
)
from milpdecomp.errors import MasterInfeasible, PricingInfeasible, PricingUnbounded
from milpdecomp.generate import random_milp
from milpdecomp.milp import MilpProblem


def lp_relax_oracle(p):
    n_x, n_y = p.n_x, p.n_y
    rows = np.vstack([np.hstack([p.A, p.B]),
                      np.hstack([p.C, np.zeros((p.m_x, n_y))])])
    rhs = np.concatenate([p.b, p.e])
    status, obj, _ = oracles.lp_solve(
        np.concatenate([p.c, p.d]), rows, rhs,
        bounds=[(None, None)] * n_x + [(0, 1)] * n_y)
    assert status == "optimal"
    return obj


def test_restricted_master_single_columns():
    p = random_milp(n_x=2, n_y=2, m=2, seed=1)
    x0 = np.array([1.0, 1.0])
    y0 = np.array([1.0, 1.0])
    cov = p.A @ x0 + p.B @ y0
    # shift b below the joint coupling so the one-column master is feasible
    p2 = MilpProblem(c=p.c, d=p.d, b=cov - 0.5, A=p.A, B=p.B, C=p.C, e=p.e)
    phi, lam, mu, duals = solve_restricted_master(
        [real_column(p2, x0)], [binary_column(p2, y0)], p2.b)
    assert lam[0] == pytest.approx(1.0, abs=1e-9)
    assert mu[0] == pytest.approx(1.0, abs=1e-9)
    assert phi == pytest.approx(float(p2.c @ x0 + p2.d @ y0), abs=1e-9)
    assert np.all(duals.alpha >= -1e-9)


def test_restricted_master_degenerate_duplicate_columns():
    p = random_milp(n_x=2, n_y=2, m=2, seed=2)
    x0 = np.array([2.0, 2.0])
    y0 = np.array([1.0, 0.0])
    p2 = MilpProblem(c=p.c, d=p.d, b=p.A @ x0 + p.B @ y0 - 1.0,
                     A=p.A, B=p.B, C=p.C, e=p.e)
    phi, lam, _, _ = solve_restricted_master(
        [real_column(p2, x0), real_column(p2, x0)], [binary_column(p2, y0)], p2.b)
    assert lam.sum() == pytest.approx(1.0, abs=1e-9)
    assert phi == pytest.approx(float(p2.c @ x0 + p2.d @ y0), abs=1e-9)


def test_restricted_master_matches_flat_lp():
    p = random_milp(n_x=3, n_y=3, m=3, seed=3)
    reals = [np.array([1.0, 2.0, 0.5]), np.array([4.0, 0.0, 1.0])]
    bins = [np.zeros(3), np.ones(3)]
    cov = p.A @ reals[0] + p.B @ bins[1]
    p2 = MilpProblem(c=p.c, d=p.d, b=cov - 0.25, A=p.A, B=p.B, C=p.C, e=p.e)
    phi, _, _, _ = solve_restricted_master(
        [real_column(p2, x) for x in reals],
        [binary_column(p2, y) for y in bins], p2.b)
    # independent flat LP over the convex weights
    costs = [float(p2.c @ x) for x in reals] + [float(p2.d @ y) for y in bins]
    cols = np.column_stack([p2.A @ x for x in reals] + [p2.B @ y for y in bins])
    conv = np.zeros((2, 4))
    conv[0, :2] = 1.0
    conv[1, 2:] = 1.0
    status, obj, _ = oracles.lp_solve(costs, cols, p2.b, conv, np.ones(2),
                                      bounds=[(0, None)] * 4)
    assert status == "optimal"
    assert phi == pytest.approx(obj, abs=1e-7)


def test_restricted_master_infeasible_detected():
    p = MilpProblem(c=[1.0], d=[1.0], b=[10.0], A=[[1.0]], B=[[1.0]])
    with pytest.raises(MasterInfeasible):
        solve_restricted_master([real_column(p, np.zeros(1))],
                                [binary_column(p, np.zeros(1))], p.b)


def test_real_pricing_cases():
    p = random_milp(n_x=3, n_y=2, m=2, seed=4)
    r, x = real_pricing(p, np.zeros(2))
    status, obj, _ = oracles.lp_solve(p.c, p.C, p.e)
    assert r == pytest.approx(obj, abs=1e-7)
    # zero reduced vector: r = 0 at any feasible point
    alpha_zero_cost = np.zeros(2)
    p_zero = MilpProblem(c=np.zeros(3), d=p.d, b=p.b, A=p.A, B=p.B, C=p.C, e=p.e)
    r, _ = real_pricing(p_zero, alpha_zero_cost)
    assert r == pytest.approx(0.0, abs=1e-9)


def test_real_pricing_error_cases():
    empty_x = MilpProblem(c=[1.0], d=[0.0], b=[0.0], A=[[1.0]], B=[[0.0]],
                          C=[[1.0], [-1.0]], e=[1.0, 0.0])
    with pytest.raises(PricingInfeasible):
        real_pricing(empty_x, np.zeros(1))
    unbounded_x = MilpProblem(c=[-1.0], d=[0.0], b=[0.0], A=[[0.0]], B=[[0.0]],
                              C=[[1.0]], e=[0.0])
    with pytest.raises(PricingUnbounded):
        real_pricing(unbounded_x, np.zeros(1))


def test_binary_pricing_hand_cases():
    p = MilpProblem(c=[0.0], d=np.zeros(2), b=[0.0, 0.0],
                    A=[[1.0], [1.0]], B=np.array([[1.0, 1.0], [0.0, 0.0]]))
    val, y = binary_pricing(p, np.array([1.0, 0.0]))        # -alpha.B = (-1,-1)
    assert val == pytest.approx(-2.0) and np.array_equal(y, [1.0, 1.0])

    p2 = MilpProblem(c=[0.0], d=np.zeros(2), b=[0.0, 0.0],
                     A=[[1.0], [1.0]], B=np.array([[-3.0, -2.0], [0.0, 0.0]]))
    val, y = binary_pricing(p2, np.array([1.0, 0.0]))       # -alpha.B = (3,2)
    assert val == pytest.approx(0.0) and np.array_equal(y, [0.0, 0.0])

    p3 = MilpProblem(c=[0.0], d=np.zeros(2), b=[0.0, 0.0],
                     A=[[1.0], [1.0]], B=np.array([[1.0, 0.0], [0.0, 2.0]]))
    val, y = binary_pricing(p3, np.array([1.0, 0.5]))       # -alpha.B = (-1,-1)
    assert val == pytest.approx(-2.0) and np.array_equal(y, [1.0, 1.0])


def test_binary_pricing_sa_equals_exact():
    p = random_milp(n_x=2, n_y=6, m=3, seed=6)
    alpha = np.array([0.5, 1.0, 0.25])
    v_exact, y_exact = binary_pricing(p, alpha, "exact")
    v_sa, y_sa = binary_pricing(p, alpha, "sa",
                                AnnealConfig(reads=10, sweeps=1000, seed=1))
    assert v_sa == pytest.approx(v_exact, abs=1e-9)
    assert np.array_equal(y_sa, y_exact)


def test_add_if_improving_boundaries():
    p = random_milp(n_x=2, n_y=2, m=2, seed=7)
    duals = DwDuals(alpha=np.zeros(2), xi=1.0, eta=0.5)
    reals: list[Column] = []
    bins: list[Column] = []
    x_pt, y_pt = np.array([1.0, 1.0]), np.array([1.0, 0.0])
    assert add_if_improving(p, reals, bins, duals, 1.0, x_pt, 0.5, y_pt) == 0
    assert add_if_improving(p, reals, bins, duals, 0.0, x_pt, 0.5, y_pt) == 1
    assert add_if_improving(p, reals, bins, duals, -1.0, x_pt, -0.5, y_pt) == 1
    assert add_if_improving(p, reals, bins, duals, -1.0, x_pt, -0.5, np.array([0.0, 1.0])) == 1
    assert len(reals) == 1 and len(bins) == 2


def test_dual_bound_formula():
    b = np.array([1.0, 2.0])
    assert dual_bound([(DwDuals(np.zeros(2), 0.0, 0.0), b)]) == 0.0
    entries = [(DwDuals(np.zeros(2), 3.0, 0.0), b),     # -3
               (DwDuals(np.zeros(2), -1.0, 0.0), b),    # 1
               (DwDuals(np.zeros(2), 0.0, 0.0), b)]     # 0
    assert dual_bound(entries) == pytest.approx(1.0)


def test_run_reaches_lp_relaxation():
    for seed in range(8):
        p = random_milp(n_x=3, n_y=4, m=4, seed=seed + 40)
        tr = run(p, config=DwConfig(theta=1e-6, max_steps=300))
        assert tr.phi == pytest.approx(lp_relax_oracle(p), abs=1e-5)
        phis = [s.phi for s in tr.steps]
        assert all(b <= a + 1e-9 for a, b in zip(phis, phis[1:]))
        assert all(s.phi_hat <= s.phi + 1e-6 for s in tr.steps)
        assert abs(tr.phi - tr.phi_hat) <= max(1e-6, 1e-6 * abs(tr.phi))


def test_run_qubits_constant():
    p = random_milp(n_x=3, n_y=5, m=3, seed=90)
    tr = run(p, config=DwConfig(theta=1e-6, max_steps=200))
    assert {s.qubits for s in tr.steps} == {5}


def test_run_with_sa_sampler_keeps_valid_bound():
    for seed in range(4):
        p = random_milp(n_x=3, n_y=4, m=3, seed=seed + 60)
        cfg = DwConfig(theta=1e-6, max_steps=200, sampler="sa",
                       anneal=AnnealConfig(reads=8, sweeps=800, seed=seed))
        tr = run(p, config=cfg)
        relax = lp_relax_oracle(p)
        for s in tr.steps:
            assert s.phi_hat <= relax + 1e-6


def test_run_converged_bound_close_to_phi():
    p = random_milp(n_x=3, n_y=3, m=3, seed=70)
    tr = run(p, config=DwConfig(theta=1e-4, max_steps=300))
    assert tr.status == "converged"
    assert abs(tr.phi - tr.phi_hat) <= 1e-4


def test_initial_columns_feasible():
    p = random_milp(n_x=3, n_y=3, m=3, seed=71)
    reals, bins = initial_columns(p)
    phi, _, _, _ = solve_restricted_master(reals, bins, p.b)
    assert np.isfinite(phi)


def test_trace_csv_shape():
    p = random_milp(n_x=2, n_y=3, m=2, seed=72)
    csv = run(p, config=DwConfig(theta=1e-6, max_steps=50)).to_csv()
    header = csv.splitlines()[0]
    assert header == "step,phi,phi_hat,r,xi,p,eta,cols_real,cols_bin,qubits"
    assert run(p, config=DwConfig(theta=1e-6, max_steps=50)).to_csv() == csv
