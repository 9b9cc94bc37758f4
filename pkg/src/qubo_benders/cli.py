"""Command line entry points: generate, solve, bench, report."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .bench import (
    BenchConfig,
    ConfigSpec,
    read_records_csv,
    report,
    run_bench,
)
from .engine import run
from .tnep import GeneratorKnobs, TnepInstance, generate, scale_units, to_milp

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qubo-benders",
        description="Hybrid decomposition solver with a QUBO master, plus a "
        "transmission-expansion instance generator and benchmark harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random expansion-planning instance")
    g.add_argument("--buses", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="instance JSON path")
    g.add_argument("--total-demand", type=float, default=None)

    s = sub.add_parser("solve", help="solve one instance file")
    s.add_argument("instance", help="instance JSON from `generate`")
    s.add_argument("--config", help="solver configuration JSON", default=None)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="write the run trace JSON here", default=None)
    s.add_argument(
        "--no-rebalance",
        action="store_true",
        help="skip the automatic monetary/energy unit rebalancing",
    )

    b = sub.add_parser("bench", help="run a full benchmark sweep")
    b.add_argument("--config", help="benchmark configuration JSON", default=None)
    b.add_argument("--out", help="output directory (overrides config)", default=None)

    r = sub.add_parser("report", help="rebuild summary and plots from results.csv")
    r.add_argument("results", help="results.csv from a previous bench run")
    r.add_argument("--out", default=None, help="output directory (default: alongside input)")
    r.add_argument("--quantile", type=float, default=0.10)

    return parser


def _cmd_generate(args) -> int:
    knobs = GeneratorKnobs() if args.total_demand is None else GeneratorKnobs(
        total_demand=args.total_demand
    )
    inst = generate(args.buses, args.seed, knobs)
    with open(args.out, "w") as fh:
        fh.write(inst.to_json())
    print(f"wrote {args.out}: {inst.buses} buses, {inst.num_lines} candidate lines")
    return 0


def _cmd_solve(args) -> int:
    with open(args.instance) as fh:
        inst = TnepInstance.from_json(fh.read())
    prog = to_milp(inst)
    if not args.no_rebalance:
        prog, _, _ = scale_units(prog)
    if args.config is not None:
        with open(args.config) as fh:
            spec_dict = json.load(fh)
        spec_dict.setdefault("name", "solve")
        spec = ConfigSpec.from_dict(spec_dict)
    else:
        spec = ConfigSpec(name="solve", sampler="exact_master")
    result = run(prog, spec.to_run_config(args.seed))
    print(f"x = {result.assignment.x.astype(int).tolist()}")
    print(f"objective = {result.best_objective:.6g}")
    print(f"bounds = [{result.lower_bound:.6g}, {result.upper_bound:.6g}], gap = {result.gap:.4g}")
    print(f"stopped: {result.stop_reason.value} after {len(result.records)} iterations")
    if args.out is not None:
        with open(args.out, "w") as fh:
            fh.write(result.to_json())
        print(f"trace written to {args.out}")
    return 0


def _cmd_bench(args) -> int:
    if args.config is not None:
        with open(args.config) as fh:
            cfg = BenchConfig.from_json(fh.read())
    else:
        cfg = BenchConfig()
    outdir = args.out if args.out is not None else cfg.output_dir
    records = run_bench(cfg)
    written = report(
        records,
        outdir,
        success_quantile=cfg.success_quantile,
        config_order=[spec.name for spec in cfg.configurations],
        metadata={"bench_config": cfg.to_dict()},
    )
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_report(args) -> int:
    timings = os.path.join(os.path.dirname(args.results) or ".", "timings.csv")
    records = read_records_csv(args.results, timings)
    outdir = args.out if args.out is not None else (os.path.dirname(args.results) or ".")
    order = []
    for rec in records:
        if rec.config not in order:
            order.append(rec.config)
    written = report(records, outdir, success_quantile=args.quantile, config_order=order)
    for path in written:
        print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "generate": _cmd_generate,
        "solve": _cmd_solve,
        "bench": _cmd_bench,
        "report": _cmd_report,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
