"""Command-line entry points: solve | verify | gen | bench-qubits.

Every command is deterministic under a fixed --seed; reports are emitted as
CSV with stable formatting so reruns are byte-identical.  Wall-clock times
are written as 0 unless --timings is passed, keeping the default output
reproducible.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import io
import sys
import time

import numpy as np

from . import annealer, benders, dantzig_wolfe, generate, qubo, report, verifier
from .errors import MilpDecompError
from .milp import brute_force_solve, milp_from_json, milp_to_json

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_STEP_LIMIT = 2


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _anneal_config(args, seed_offset: int = 0) -> annealer.AnnealConfig:
    return annealer.AnnealConfig(reads=args.reads, sweeps=args.sweeps,
                                 seed=args.seed + seed_offset)


def _benders_config(args, seed_offset: int = 0) -> benders.BendersConfig:
    return benders.BendersConfig(
        alpha_bound=args.alpha_bound, theta=args.gap, max_steps=args.max_steps_bd,
        code=qubo.FixedPointCode(n_s=args.ns, w=args.w),
        w_a=args.wa, w_p=args.wp, master_mode=args.master,
        max_cut_pool=args.cut_pool if args.cut_pool > 0 else None,
        prune_threshold=args.prune, anneal=_anneal_config(args, seed_offset))


def _dw_config(args, seed_offset: int = 0) -> dantzig_wolfe.DwConfig:
    return dantzig_wolfe.DwConfig(theta=args.gap, max_steps=args.max_steps_dw,
                                  sampler=args.sampler, seed=args.seed,
                                  anneal=_anneal_config(args, seed_offset))


def cmd_solve(args) -> int:
    with open(args.instance) as fh:
        problem = milp_from_json(fh.read())
    if args.method == "bd":
        trace = benders.run(problem, _benders_config(args))
        _write(args.out, trace.to_csv())
        return EXIT_OK if trace.status == "converged" else EXIT_STEP_LIMIT
    trace = dantzig_wolfe.run(problem, config=_dw_config(args))
    _write(args.out, trace.to_csv())
    # a no-improving-column stop is optimality under exact pricing but may be
    # a sampler stall under sa
    converged = trace.status == "converged" or (
        trace.status == "no_improving" and args.sampler == "exact")
    return EXIT_OK if converged else EXIT_STEP_LIMIT


def _verify_one(net_json: str, row: np.ndarray, sample_id: int, epsilon: float,
                method: str, args) -> list[report.ReportRow]:
    net = verifier.network_from_json(net_json)
    z, label = row[:-1], int(row[-1])
    rows = []
    for adv in range(net.n_classes):
        if adv == label:
            continue
        t0 = time.perf_counter()
        inst = verifier.VerificationInstance(network=net, z=z, epsilon=epsilon,
                                             true_class=label, adversarial_class=adv)
        seed_offset = sample_id * 1000 + adv
        if method == "dw":
            verdict = verifier.certify_dw(inst, _dw_config(args, seed_offset))
        elif method == "bd":
            verdict = verifier.certify_bd(inst, _benders_config(args, seed_offset))
        else:
            bounds = verifier.ibp_bounds(net, z, epsilon)
            sol = brute_force_solve(verifier.encode_milp(net, bounds, label, adv))
            margin = sol.objective if sol.status == "optimal" else np.inf
            verdict = verifier.Verdict(
                verdict="robust" if margin > 0.0 else "not_robust",
                per_class=(verifier.ClassResult(adversarial_class=adv, phi=margin,
                                                phi_hat=margin, steps=0,
                                                max_qubits=0),))
        wall = (time.perf_counter() - t0) * 1000.0 if args.timings else 0.0
        per = verdict.per_class[-1] if verdict.per_class else None
        rows.append(report.ReportRow(
            sample_id=sample_id, class_pair=f"{label}>{adv}",
            verdict=verdict.verdict,
            steps=per.steps if per else 0,
            max_qubits=per.max_qubits if per else 0,
            phi=per.phi if per else 0.0,
            phi_hat=per.phi_hat if per else 0.0,
            wall_ms=wall))
    return rows


def cmd_verify(args) -> int:
    with open(args.network) as fh:
        net_json = fh.read()
    verifier.network_from_json(net_json)        # fail fast on schema errors
    samples = np.loadtxt(args.samples, delimiter=",", ndmin=2)
    if args.epsilon < 0:
        raise MilpDecompError("epsilon must be nonnegative")
    jobs = [(i, samples[i]) for i in range(samples.shape[0])]
    rows: list[report.ReportRow] = []
    if args.workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.workers) as pool:
            futs = [pool.submit(_verify_one, net_json, row, i, args.epsilon,
                                args.method, args) for i, row in jobs]
            for fut in futs:
                rows.extend(fut.result())
    else:
        for i, row in jobs:
            rows.extend(_verify_one(net_json, row, i, args.epsilon, args.method, args))
    _write(args.out, report.write_report(rows))
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.kind == "milp":
        problem = generate.random_milp(n_x=args.nx, n_y=args.ny_milp, m=args.m,
                                       seed=args.seed)
        _write(args.out, milp_to_json(problem) + "\n")
    else:
        net = generate.random_network(input_dim=args.input_dim,
                                      hidden=tuple(args.hidden),
                                      classes=args.classes, seed=args.seed,
                                      scale=args.scale)
        _write(args.out, verifier.network_to_json(net) + "\n")
        if args.samples_out:
            rows = generate.random_samples(net, args.n_samples, seed=args.seed + 1)
            buf = io.StringIO()
            for row in rows:
                feats = ",".join(f"{v:.12g}" for v in row[:-1])
                buf.write(f"{feats},{int(row[-1])}\n")
            _write(args.samples_out, buf.getvalue())
    return EXIT_OK


def cmd_bench_qubits(args) -> int:
    buf = io.StringIO()
    buf.write("step,bd_qubits,dw_qubits,reduction_pct\n")
    for t in range(1, args.steps + 1):
        bd_q = qubo.qubit_count("benders", args.ny, args.ns, cuts=t)
        dw_q = qubo.qubit_count("dantzig_wolfe", args.ny, args.ns, m_y=args.my)
        red = 100.0 * (1.0 - dw_q / bd_q) if bd_q else 0.0
        buf.write(f"{t},{bd_q},{dw_q},{red:.12g}\n")
    _write(args.out, buf.getvalue())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="milpdecomp",
        description="MILP decomposition (Benders / Dantzig-Wolfe) with a QUBO "
                    "back end, plus ReLU robustness certification.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="output path (default stdout)")

    def solver_flags(p):
        p.add_argument("--gap", type=float, default=1.0,
                       help="stopping gap between master and sub")
        p.add_argument("--max-steps-bd", type=int, default=15, dest="max_steps_bd")
        p.add_argument("--max-steps-dw", type=int, default=20, dest="max_steps_dw")
        p.add_argument("--reads", type=int, default=100)
        p.add_argument("--sweeps", type=int, default=50_000)
        p.add_argument("--alpha-bound", type=float, default=5.0, dest="alpha_bound")
        p.add_argument("--wa", type=float, default=0.1)
        p.add_argument("--wp", type=float, default=0.01)
        p.add_argument("--ns", type=int, default=8)
        p.add_argument("--w", type=float, default=0.1,
                       help="fixed-point scale weight")
        p.add_argument("--prune", type=float, default=0.05,
                       help="coupling prune fraction on the annealer path")
        p.add_argument("--cut-pool", type=int, default=5, dest="cut_pool",
                       help="max Benders cuts kept (0 = unlimited)")
        p.add_argument("--master", choices=["exact", "qubo_sa", "qubo_exact"],
                       default="exact", help="Benders master mode")
        p.add_argument("--sampler", choices=["exact", "sa"], default="exact",
                       help="Dantzig-Wolfe binary pricing sampler")

    p_solve = sub.add_parser("solve", help="run one decomposition on a MILP JSON file")
    p_solve.add_argument("instance")
    p_solve.add_argument("--method", choices=["bd", "dw"], required=True)
    common(p_solve)
    solver_flags(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_verify = sub.add_parser("verify", help="certify samples against a network")
    p_verify.add_argument("network")
    p_verify.add_argument("samples")
    p_verify.add_argument("--epsilon", type=float, required=True)
    p_verify.add_argument("--method", choices=["dw", "bd", "exact"], default="dw")
    p_verify.add_argument("--workers", type=int, default=1)
    p_verify.add_argument("--timings", action="store_true",
                          help="record wall-clock ms (breaks byte-identical reruns)")
    common(p_verify)
    solver_flags(p_verify)
    p_verify.set_defaults(func=cmd_verify)

    p_gen = sub.add_parser("gen", help="generate a random MILP or network")
    p_gen.add_argument("kind", choices=["milp", "network"])
    p_gen.add_argument("--nx", type=int, default=4)
    p_gen.add_argument("--ny", type=int, default=4, dest="ny_milp")
    p_gen.add_argument("--m", type=int, default=4)
    p_gen.add_argument("--input-dim", type=int, default=4, dest="input_dim")
    p_gen.add_argument("--hidden", type=int, nargs="*", default=[4, 4])
    p_gen.add_argument("--classes", type=int, default=2)
    p_gen.add_argument("--scale", type=float, default=1.0,
                       help="network weight range [-scale, scale]")
    p_gen.add_argument("--samples-out", default=None, dest="samples_out")
    p_gen.add_argument("--n-samples", type=int, default=10, dest="n_samples")
    common(p_gen)
    p_gen.set_defaults(func=cmd_gen)

    p_bench = sub.add_parser("bench-qubits",
                             help="per-step qubit budgets of both methods")
    p_bench.add_argument("--ny", type=int, required=True)
    p_bench.add_argument("--ns", type=int, default=8)
    p_bench.add_argument("--my", type=int, default=0)
    p_bench.add_argument("--steps", type=int, default=10)
    common(p_bench)
    p_bench.set_defaults(func=cmd_bench_qubits)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MilpDecompError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
