"""Command-line front end: analytic / simulate / sweep / validate / oracle / report.

Every command emits CSV with a fixed column order and numbers printed at
10 significant digits, so identical invocations produce identical
bytes.  Exit codes: 0 success, 1 validation failure (bad configuration,
tolerance exceeded, oracle mismatch), 2 engine/structural error.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import replace

from .chains import ChainError, ValidationError
from .config import COMMANDS, RunSpec, parse_config
from .contention import s_count, s_count_oracle
from .handoff import AnalysisResult, analyze
from .simulator import SimResult, run

ANALYTIC_COLUMNS = [
    "M", "N", "c", "h", "p", "s", "v", "Ts", "scheme",
    "u", "q", "theta", "pr_collision", "ds",
]
SIM_COLUMNS = ["slots", "warmup", "seed", "theta_sim", "pr_collision_sim", "ds_sim", "q_hat"]
REL_COLUMNS = ["theta_rel_diff", "pr_collision_rel_diff", "ds_rel_diff"]

_OVERRIDE_KEYS = (
    "M", "N", "c", "h", "p", "s", "v", "Ts", "scheme",
    "slots", "warmup", "seed", "tolerance",
    "exclude_su_occupied", "saturated", "oracle_n1", "oracle_theta",
    "trace_out", "sweep",
)


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.10g}"
    return str(x)


def _analytic_cells(res: AnalysisResult) -> list:
    pm = res.params
    return [
        pm.M, pm.N, pm.c, pm.h, pm.p, pm.s, pm.v, pm.t_s, pm.scheme,
        res.u, res.q, res.metrics.theta, res.metrics.pr_collision, res.metrics.ds,
    ]


def _sim_cells(spec_sim, sim: SimResult) -> list:
    return [
        spec_sim.slots, spec_sim.warmup, sim.seed,
        sim.theta_sim, sim.pr_collision_sim, sim.ds_sim, sim.q_hat,
    ]


def _rel_diff(sim_value: float, analytic_value: float) -> float:
    """Relative difference |sim - analytic| / |analytic|.

    Degenerate references: an analytic 0 (or infinity) agrees with a
    matching measurement and is infinitely far from anything else; a NaN
    measurement (no completed backlog episodes) only agrees with an
    infinite analytic delay.
    """
    if math.isnan(sim_value):
        return 0.0 if math.isinf(analytic_value) else math.inf
    if math.isinf(analytic_value):
        return 0.0 if math.isinf(sim_value) else math.inf
    if analytic_value == 0.0:
        return 0.0 if sim_value == 0.0 else math.inf
    return abs(sim_value - analytic_value) / abs(analytic_value)


def _write_csv(out_path, header: list, rows: list):
    def dump(stream):
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(cell) for cell in row])

    if out_path:
        with open(out_path, "w", newline="") as stream:
            dump(stream)
    else:
        dump(sys.stdout)


def _write_trace(spec: RunSpec, sim: SimResult):
    if spec.trace_out and sim.trace is not None:
        with open(spec.trace_out, "w", newline="") as stream:
            writer = csv.writer(stream, lineterminator="\n")
            writer.writerow(["slot", "su", "status", "channel"])
            for row in sim.trace:
                writer.writerow([str(cell) for cell in row])


def _grid(spec: RunSpec):
    """The (params, sim_config) points a sweeping command visits."""
    if spec.sweep is None:
        return [(spec.params, spec.sim)]
    key, values = spec.sweep
    points = []
    for value in values:
        params = spec.params_for(key, value)
        points.append((params, replace(spec.sim, params=params)))
    return points


def _cmd_analytic(spec: RunSpec) -> int:
    rows = [_analytic_cells(analyze(spec.params))]
    _write_csv(spec.out, ANALYTIC_COLUMNS, rows)
    return 0


def _cmd_simulate(spec: RunSpec) -> int:
    res = analyze(spec.params)
    sim = run(spec.sim)
    rows = [_analytic_cells(res) + _sim_cells(spec.sim, sim)]
    _write_csv(spec.out, ANALYTIC_COLUMNS + SIM_COLUMNS, rows)
    _write_trace(spec, sim)
    return 0


def _sweep_rows(spec: RunSpec) -> list:
    rows = []
    for params, sim_cfg in _grid(spec):
        res = analyze(params)
        sim = run(sim_cfg)
        rows.append(_analytic_cells(res) + _sim_cells(sim_cfg, sim))
    return rows


def _cmd_sweep(spec: RunSpec) -> int:
    if spec.sweep is None:
        raise ValidationError(
            "the sweep command needs a sweep axis, e.g. --sweep p:0.01,0.05,0.1"
        )
    _write_csv(spec.out, ANALYTIC_COLUMNS + SIM_COLUMNS, _sweep_rows(spec))
    return 0


def _cmd_validate(spec: RunSpec) -> int:
    header = ["point"] + ANALYTIC_COLUMNS + SIM_COLUMNS + REL_COLUMNS
    rows = []
    maxima = [0.0, 0.0, 0.0]
    for n, (params, sim_cfg) in enumerate(_grid(spec)):
        res = analyze(params)
        sim = run(sim_cfg)
        rels = [
            _rel_diff(sim.theta_sim, res.metrics.theta),
            _rel_diff(sim.pr_collision_sim, res.metrics.pr_collision),
            _rel_diff(sim.ds_sim, res.metrics.ds),
        ]
        maxima = [max(old, new) for old, new in zip(maxima, rels)]
        rows.append([n] + _analytic_cells(res) + _sim_cells(sim_cfg, sim) + rels)
    blank = [""] * (len(ANALYTIC_COLUMNS) + len(SIM_COLUMNS))
    rows.append(["max"] + blank + maxima)
    _write_csv(spec.out, header, rows)
    if any(m > spec.tolerance for m in maxima):
        print(
            f"validation failed: max relative differences "
            f"theta={_fmt(maxima[0])}, pr_collision={_fmt(maxima[1])}, "
            f"ds={_fmt(maxima[2])} exceed tolerance {_fmt(spec.tolerance)}",
            file=sys.stderr,
        )
        return 1
    return 0


def _cmd_oracle(spec: RunSpec) -> int:
    header = ["n1", "theta", "d", "s_recursion", "s_oracle", "match"]
    rows = []
    mismatches = 0
    for n1 in range(1, spec.oracle_n1 + 1):
        for theta in range(1, spec.oracle_theta + 1):
            for d in range(n1 + 1):
                rec = s_count(n1, theta, d)
                orc = s_count_oracle(n1, theta, d)
                ok = rec == orc
                mismatches += 0 if ok else 1
                rows.append([n1, theta, d, rec, orc, "true" if ok else "false"])
    _write_csv(spec.out, header, rows)
    print(f"oracle: {mismatches} mismatches in {len(rows)} cases", file=sys.stderr)
    return 1 if mismatches else 0


def _cmd_report(spec: RunSpec) -> int:
    if spec.sweep is None:
        raise ValidationError(
            "the report command needs a sweep axis, e.g. --sweep p:0.01,0.05,0.1"
        )
    from . import report  # matplotlib import deferred until needed

    rows = _sweep_rows(spec)
    base = spec.out or "report"
    if base.endswith(".csv"):
        base = base[:-4]
    _write_csv(base + ".csv", ANALYTIC_COLUMNS + SIM_COLUMNS, rows)
    figure_path = report.render(spec.sweep[0], rows, base + ".png")
    print(f"report written: {base}.csv, {figure_path}", file=sys.stderr)
    return 0


_DISPATCH = {
    "analytic": _cmd_analytic,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "validate": _cmd_validate,
    "oracle": _cmd_oracle,
    "report": _cmd_report,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specmarkov",
        description="Markov-chain analysis and slot-level simulation of "
        "spectrum handoff in cognitive-radio ad hoc networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for command in COMMANDS:
        p = sub.add_parser(command, help=f"run the {command} command")
        p.add_argument("--config", metavar="FILE", help="key = value configuration file")
        p.add_argument("--out", metavar="FILE", help="output file (default: stdout)")
        for key in _OVERRIDE_KEYS:
            p.add_argument(f"--{key.replace('_', '-')}", dest=f"key_{key}", metavar="VALUE")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        text = ""
        if args.config:
            with open(args.config) as fh:
                text = fh.read()
        overrides = {}
        for key in _OVERRIDE_KEYS:
            value = getattr(args, f"key_{key}")
            if value is not None:
                overrides[key] = value
        spec = parse_config(text, command=args.command, overrides=overrides, out=args.out)
        return _DISPATCH[spec.command](spec)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ChainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
