"""Verdict report CSV: one row per (sample, class pair) plus one aggregate row.

Schema: sample_id,class_pair,verdict,steps,max_qubits,phi,phi_hat,wall_ms
followed by a single line

    #aggregate,certified_fraction=...,qubits_mean=...,qubits_std=...

The aggregate is recomputable from the rows: certified fraction over
samples, mean and population std of max_qubits over rows whose
decomposition loop actually ran (max_qubits > 0); both statistics are 0
when no row qualifies.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import ParseError


def _fmt(v: float) -> str:
    return f"{v:.12g}"


@dataclass(frozen=True)
class ReportRow:
    sample_id: int
    class_pair: str               # "true>adv"
    verdict: str
    steps: int
    max_qubits: int
    phi: float
    phi_hat: float
    wall_ms: float


@dataclass(frozen=True)
class Aggregate:
    certified_fraction: float
    qubits_mean: float
    qubits_std: float


def aggregate_rows(rows: list[ReportRow]) -> Aggregate:
    if not rows:
        return Aggregate(0.0, 0.0, 0.0)
    by_sample: dict[int, bool] = {}
    for r in rows:
        by_sample[r.sample_id] = by_sample.get(r.sample_id, True) and r.verdict == "robust"
    certified = sum(by_sample.values()) / len(by_sample)
    qubits = np.array([r.max_qubits for r in rows if r.max_qubits > 0], dtype=float)
    if qubits.size:
        return Aggregate(certified, float(qubits.mean()), float(qubits.std()))
    return Aggregate(certified, 0.0, 0.0)


def write_report(rows: list[ReportRow]) -> str:
    buf = io.StringIO()
    buf.write("sample_id,class_pair,verdict,steps,max_qubits,phi,phi_hat,wall_ms\n")
    for r in sorted(rows, key=lambda r: (r.sample_id, r.class_pair)):
        buf.write(f"{r.sample_id},{r.class_pair},{r.verdict},{r.steps},"
                  f"{r.max_qubits},{_fmt(r.phi)},{_fmt(r.phi_hat)},{_fmt(r.wall_ms)}\n")
    agg = aggregate_rows(rows)
    buf.write(f"#aggregate,certified_fraction={_fmt(agg.certified_fraction)},"
              f"qubits_mean={_fmt(agg.qubits_mean)},qubits_std={_fmt(agg.qubits_std)}\n")
    return buf.getvalue()


def parse_report(text: str) -> tuple[list[ReportRow], Aggregate]:
    lines = [ln for ln in text.strip().splitlines() if ln]
    if not lines or not lines[0].startswith("sample_id,"):
        raise ParseError("missing report header")
    rows: list[ReportRow] = []
    agg: Aggregate | None = None
    for ln in lines[1:]:
        if ln.startswith("#aggregate,"):
            fields = dict(part.split("=", 1) for part in ln.split(",")[1:])
            agg = Aggregate(float(fields["certified_fraction"]),
                            float(fields["qubits_mean"]),
                            float(fields["qubits_std"]))
            continue
        parts = ln.split(",")
        if len(parts) != 8:
            raise ParseError(f"bad report row: {ln!r}")
        rows.append(ReportRow(sample_id=int(parts[0]), class_pair=parts[1],
                              verdict=parts[2], steps=int(parts[3]),
                              max_qubits=int(parts[4]), phi=float(parts[5]),
                              phi_hat=float(parts[6]), wall_ms=float(parts[7])))
    if agg is None:
        raise ParseError("missing aggregate row")
    return rows, agg
