"""Run the full desk-scale benchmarking protocol.

Sweeps TNEP instances of increasing size with an enumerated master and a
simulated-annealing master, once per (runs, reads) setting, and writes one
report directory per setting:

    outdir/
      runs100_reads10/   results.csv timings.csv summary.json *.svg
      runs100_reads100/  ...
      runs10_reads1000/  ...

The runs100_reads100 setting is the headline configuration; the other two
probe the trade-off between repetition count and per-iteration sampling
effort.  Use --quick for a small smoke version (seconds instead of minutes).

Usage:
    python3 scripts/run_protocol.py [--out protocol_out] [--quick]
                                    [--buses 3 4 5 6] [--seeds 0 1 2]
"""

import argparse
import json
import os
import time

from qubo_benders.bench import BenchConfig, ConfigSpec, report, run_bench

SWEEPS = [(100, 10), (100, 100), (10, 1000)]
QUICK_SWEEPS = [(10, 100)]


def build_config(buses, seeds, runs, reads, outdir):
    return BenchConfig(
        bus_counts=tuple(buses),
        instance_seeds=tuple(seeds),
        configurations=(
            ConfigSpec(name="exact", sampler="exact_master"),
            ConfigSpec(name="sa", sampler="sa", reads=reads, sweeps=100),
        ),
        runs=runs,
        output_dir=outdir,
    )


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="protocol_out", help="output directory")
    ap.add_argument("--buses", type=int, nargs="+", default=[3, 4, 5, 6])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--quick", action="store_true", help="small smoke sweep")
    args = ap.parse_args()

    sweeps = QUICK_SWEEPS if args.quick else SWEEPS
    buses = args.buses[:2] if args.quick else args.buses
    seeds = args.seeds[:1] if args.quick else args.seeds
    workers = os.environ.get("QUBO_BENDERS_WORKERS", "1")

    manifest = {"sweeps": [], "buses": buses, "seeds": seeds, "workers": workers}
    for runs, reads in sweeps:
        label = f"runs{runs}_reads{reads}"
        outdir = os.path.join(args.out, label)
        cfg = build_config(buses, seeds, runs, reads, outdir)
        print(f"[{label}] {len(buses) * len(seeds)} instances x "
              f"{len(cfg.configurations)} configs x {runs} runs ...", flush=True)
        t0 = time.perf_counter()
        records = run_bench(cfg)
        elapsed = time.perf_counter() - t0
        paths = report(
            records,
            outdir,
            success_quantile=cfg.success_quantile,
            config_order=[spec.name for spec in cfg.configurations],
            metadata={"bench_config": cfg.to_json(), "wall_time_s": elapsed},
        )
        rate = sum(r.success for r in records) / len(records)
        print(f"[{label}] {len(records)} records, success rate {rate:.2f}, "
              f"{elapsed:.1f} s, wrote {len(paths)} files", flush=True)
        manifest["sweeps"].append(
            {"label": label, "runs": runs, "reads": reads,
             "records": len(records), "success_rate": rate,
             "wall_time_s": round(elapsed, 3)}
        )

    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
    print(f"done: {os.path.join(args.out, 'manifest.json')}")


if __name__ == "__main__":
    main()
