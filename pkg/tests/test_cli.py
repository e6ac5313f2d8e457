import json

import pytest

from milpdecomp.cli import main
from milpdecomp.generate import random_milp
from milpdecomp.milp import brute_force_solve, milp_from_json
from milpdecomp.report import aggregate_rows, parse_report


def run_cli(*argv):
    return main(list(argv))


def read(path):
    return path.read_text()


def test_gen_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run_cli("gen", "milp", "--seed", "3", "--out", str(a)) == 0
    assert run_cli("gen", "milp", "--seed", "3", "--out", str(b)) == 0
    assert read(a) == read(b)
    c = tmp_path / "c.json"
    assert run_cli("gen", "milp", "--seed", "4", "--out", str(c)) == 0
    assert read(a) != read(c)


def test_generated_milps_always_solvable():
    for seed in range(20):
        p = random_milp(n_x=3, n_y=3, m=3, seed=seed)
        assert brute_force_solve(p).status == "optimal"


def test_solve_both_methods_converge(tmp_path):
    inst = tmp_path / "inst.json"
    run_cli("gen", "milp", "--nx", "3", "--ny", "3", "--m", "3",
            "--seed", "5", "--out", str(inst))
    dw_csv = tmp_path / "dw.csv"
    bd_csv = tmp_path / "bd.csv"
    assert run_cli("solve", str(inst), "--method", "dw", "--gap", "1e-6",
                   "--max-steps-dw", "300", "--out", str(dw_csv)) == 0
    assert run_cli("solve", str(inst), "--method", "bd", "--gap", "1e-6",
                   "--max-steps-bd", "64", "--cut-pool", "0",
                   "--out", str(bd_csv)) == 0
    # final bd bounds agree with brute force
    p = milp_from_json(read(inst))
    ref = brute_force_solve(p).objective
    last = read(bd_csv).strip().splitlines()[-1].split(",")
    assert float(last[1]) == pytest.approx(ref, abs=1e-6)
    assert float(last[2]) == pytest.approx(ref, abs=1e-6)


def test_solve_step_limit_exit_code(tmp_path):
    inst = tmp_path / "inst.json"
    run_cli("gen", "milp", "--nx", "4", "--ny", "4", "--m", "4",
            "--seed", "6", "--out", str(inst))
    assert run_cli("solve", str(inst), "--method", "dw", "--gap", "0",
                   "--max-steps-dw", "1", "--out", str(tmp_path / "t.csv")) == 2


def test_solve_malformed_json_names_field(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"c": [1.0], "d": [0.0], "A": [[1.0]], "B": [[1.0]]}))
    assert run_cli("solve", str(bad), "--method", "dw") == 1
    assert "'b'" in capsys.readouterr().err


def test_verify_clean_accuracy_at_zero_epsilon(tmp_path):
    net = tmp_path / "net.json"
    samples = tmp_path / "s.csv"
    run_cli("gen", "network", "--input-dim", "3", "--hidden", "4",
            "--classes", "2", "--seed", "8", "--out", str(net),
            "--samples-out", str(samples), "--n-samples", "6")
    # flip one label so clean accuracy drops below 1
    rows = read(samples).strip().splitlines()
    feats, label = rows[0].rsplit(",", 1)
    rows[0] = f"{feats},{1 - int(label)}"
    samples.write_text("\n".join(rows) + "\n")
    out = tmp_path / "r.csv"
    assert run_cli("verify", str(net), str(samples), "--epsilon", "0",
                   "--method", "exact", "--out", str(out)) == 0
    parsed, agg = parse_report(read(out))
    assert agg.certified_fraction == pytest.approx(5 / 6)


def test_verify_certified_fraction_monotone_in_epsilon(tmp_path):
    net = tmp_path / "net.json"
    samples = tmp_path / "s.csv"
    run_cli("gen", "network", "--input-dim", "3", "--hidden", "4", "4",
            "--classes", "2", "--scale", "4.0", "--seed", "9",
            "--out", str(net), "--samples-out", str(samples),
            "--n-samples", "5")
    fractions = []
    for i, eps in enumerate(["0", "0.0157", "0.0627", "0.12"]):
        out = tmp_path / f"r{i}.csv"
        assert run_cli("verify", str(net), str(samples), "--epsilon", eps,
                       "--method", "dw", "--gap", "1e-6",
                       "--max-steps-dw", "300", "--out", str(out)) == 0
        _, agg = parse_report(read(out))
        fractions.append(agg.certified_fraction)
    assert all(b <= a + 1e-12 for a, b in zip(fractions, fractions[1:]))


def test_verify_rerun_byte_identical(tmp_path):
    net = tmp_path / "net.json"
    samples = tmp_path / "s.csv"
    run_cli("gen", "network", "--input-dim", "3", "--hidden", "4", "4",
            "--classes", "2", "--scale", "4.0", "--seed", "10",
            "--out", str(net), "--samples-out", str(samples),
            "--n-samples", "3")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert run_cli("verify", str(net), str(samples), "--epsilon", "0.0627",
                       "--method", "bd", "--master", "qubo_sa",
                       "--reads", "10", "--sweeps", "500",
                       "--alpha-bound", "100", "--seed", "17",
                       "--out", str(out)) == 0
    assert read(a) == read(b)


def test_verify_worker_pool_matches_sequential(tmp_path):
    net = tmp_path / "net.json"
    samples = tmp_path / "s.csv"
    run_cli("gen", "network", "--input-dim", "3", "--hidden", "4", "4",
            "--classes", "2", "--scale", "4.0", "--seed", "14",
            "--out", str(net), "--samples-out", str(samples),
            "--n-samples", "4")
    seq, par = tmp_path / "seq.csv", tmp_path / "par.csv"
    base = ["verify", str(net), str(samples), "--epsilon", "0.0627",
            "--method", "dw", "--gap", "1e-6", "--max-steps-dw", "300"]
    assert run_cli(*base, "--out", str(seq)) == 0
    assert run_cli(*base, "--workers", "2", "--out", str(par)) == 0
    assert read(seq) == read(par)


def test_report_roundtrip_reproduces_aggregate(tmp_path):
    net = tmp_path / "net.json"
    samples = tmp_path / "s.csv"
    run_cli("gen", "network", "--input-dim", "3", "--hidden", "4", "4",
            "--classes", "2", "--scale", "4.0", "--seed", "11",
            "--out", str(net), "--samples-out", str(samples),
            "--n-samples", "4")
    out = tmp_path / "r.csv"
    assert run_cli("verify", str(net), str(samples), "--epsilon", "0.0627",
                   "--method", "dw", "--gap", "1e-6", "--max-steps-dw", "300",
                   "--out", str(out)) == 0
    rows, agg = parse_report(read(out))
    recomputed = aggregate_rows(rows)
    assert recomputed.certified_fraction == pytest.approx(agg.certified_fraction, abs=1e-9)
    assert recomputed.qubits_mean == pytest.approx(agg.qubits_mean, abs=1e-9)
    assert recomputed.qubits_std == pytest.approx(agg.qubits_std, abs=1e-9)


def test_bench_qubits_values(tmp_path):
    out = tmp_path / "bench.csv"
    assert run_cli("bench-qubits", "--ny", "10", "--ns", "8", "--steps", "10",
                   "--out", str(out)) == 0
    lines = read(out).strip().splitlines()
    assert lines[1].startswith("1,26,10,")
    assert lines[10].startswith("10,98,10,")
    zero = tmp_path / "zero.csv"
    assert run_cli("bench-qubits", "--ny", "7", "--ns", "0", "--steps", "3",
                   "--out", str(zero)) == 0
    for line in read(zero).strip().splitlines()[1:]:
        step, bd_q, dw_q, red = line.split(",")
        assert bd_q == dw_q == "7" and float(red) == 0.0
