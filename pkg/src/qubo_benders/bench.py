"""Benchmark harness: seeded instance sweeps, success accounting, reports.

A benchmark crosses solver configurations with generated instances and
repeats each cell `runs` times under derived seeds.  Success of a run is
judged only on its re-evaluated objective in the original mixed-binary
program: |objective - reference| / |reference| < success_threshold, with
the reference from the brute-force oracle below.  Aggregates per
(configuration, bus count) pool the first ceil(success_quantile * runs)
successful runs of each instance, by run index.

results.csv intentionally carries no wall-clock columns so repeated
invocations with the same master seed are byte-identical; timings go to
timings.csv alongside.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .engine import RunConfig, RunResult, run
from .milp import Assignment, MixedBinaryProgram, check_feasibility, evaluate, split
from .samplers import SamplerConfig
from .simplex import LpStatus, solve_lp
from .tnep import GeneratorKnobs, generate, scale_units, to_milp

__all__ = [
    "ConfigSpec",
    "BenchConfig",
    "BenchRecord",
    "reference_solve",
    "run_bench",
    "aggregate",
    "report",
    "write_results_csv",
    "write_timings_csv",
    "read_records_csv",
    "instance_program",
]

WORKERS_ENV = "QUBO_BENDERS_WORKERS"

RESULTS_COLUMNS = (
    "config",
    "buses",
    "instance_seed",
    "run_index",
    "success",
    "objective",
    "reference",
    "reference_kind",
    "iterations",
    "final_qubo_size",
    "stop_reason",
)
TIMINGS_COLUMNS = (
    "config",
    "buses",
    "instance_seed",
    "run_index",
    "solve_time",
    "total_time",
)
METRICS = ("objective", "iterations", "final_qubo_size", "solve_time", "total_time")


@dataclass(frozen=True)
class ConfigSpec:
    """One named solver configuration of the sweep."""

    name: str
    sampler: str = "sa"
    reads: int = 100
    sweeps: int = 100
    epsilon_rel: float = 0.05
    epsilon_abs: float | None = None
    q_max: int = 160
    precision_p: int = 1
    penalty: float | None = None
    alpha_init: tuple[int, int] | None = None
    max_iterations: int = 50
    relax_headroom: int | None = None

    def __post_init__(self):
        if not self.name:
            raise ValueError("configuration name must be nonempty")
        if self.alpha_init is not None:
            object.__setattr__(self, "alpha_init", tuple(self.alpha_init))

    def to_run_config(self, seed: int) -> RunConfig:
        return RunConfig(
            epsilon_rel=self.epsilon_rel,
            epsilon_abs=self.epsilon_abs,
            q_max=self.q_max,
            precision_p=self.precision_p,
            penalty=self.penalty,
            alpha_init=self.alpha_init,
            max_iterations=self.max_iterations,
            sampler=self.sampler,
            sampler_config=SamplerConfig(reads=self.reads, sweeps=self.sweeps),
            relax_headroom=self.relax_headroom,
            seed=seed,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["alpha_init"] is not None:
            d["alpha_init"] = list(d["alpha_init"])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ConfigSpec":
        return cls(**d)


@dataclass(frozen=True)
class BenchConfig:
    bus_counts: tuple = (3, 4, 5)
    instance_seeds: tuple = (0, 1, 2, 3)
    configurations: tuple = (
        ConfigSpec(name="benders-exact", sampler="exact_master"),
        ConfigSpec(name="benders-sa", sampler="sa"),
    )
    runs: int = 100
    success_threshold: float = 0.05
    success_quantile: float = 0.10
    master_seed: int = 0
    rebalance_units: bool = True
    output_dir: str = "bench_out"

    def __post_init__(self):
        object.__setattr__(self, "bus_counts", tuple(int(b) for b in self.bus_counts))
        object.__setattr__(self, "instance_seeds", tuple(int(s) for s in self.instance_seeds))
        object.__setattr__(self, "configurations", tuple(self.configurations))
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not (0 < self.success_threshold < 1):
            raise ValueError("success_threshold must lie in (0, 1)")
        if not (0 < self.success_quantile <= 1):
            raise ValueError("success_quantile must lie in (0, 1]")
        names = [spec.name for spec in self.configurations]
        if len(set(names)) != len(names):
            raise ValueError("configuration names must be unique")

    def to_dict(self) -> dict:
        return {
            "bus_counts": list(self.bus_counts),
            "instance_seeds": list(self.instance_seeds),
            "configurations": [spec.to_dict() for spec in self.configurations],
            "runs": self.runs,
            "success_threshold": self.success_threshold,
            "success_quantile": self.success_quantile,
            "master_seed": self.master_seed,
            "rebalance_units": self.rebalance_units,
            "output_dir": self.output_dir,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "BenchConfig":
        d = dict(d)
        if "configurations" in d:
            d["configurations"] = tuple(
                ConfigSpec.from_dict(spec) for spec in d["configurations"]
            )
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "BenchConfig":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class BenchRecord:
    config: str
    buses: int
    instance_seed: int
    run_index: int
    success: bool
    objective: float
    reference: float
    reference_kind: str
    iterations: int
    final_qubo_size: int
    solve_time: float
    total_time: float
    stop_reason: str

    @property
    def sort_key(self) -> tuple:
        return (self.config, self.buses, self.instance_seed, self.run_index)


MAX_REFERENCE_BITS = 24


def reference_solve(
    prog: MixedBinaryProgram, sp_lower_bound: float | None = None, max_bits: int = MAX_REFERENCE_BITS
) -> float:
    """Brute-force optimum: enumerate x, solve the LP for each.

    Candidates are visited in ascending binary cost; once c @ x plus a valid
    lower bound on every subproblem value reaches the incumbent, the rest
    cannot win and enumeration stops.  When no bound is supplied and the
    binary side only relaxes constraints (G <= 0, A = 0), the all-ones
    subproblem value is such a bound; otherwise enumeration is exhaustive.
    """
    n = prog.num_binary
    if n > max_bits:
        raise ValueError(f"{n} binaries exceed the brute-force limit {max_bits}")
    _, template = split(prog)
    if n == 0:
        sol = solve_lp(template, np.zeros(0))
        if sol.status is not LpStatus.OPTIMAL:
            raise RuntimeError(f"degenerate instance is {sol.status.value}")
        return float(sol.objective)

    if sp_lower_bound is None and np.all(prog.G <= 0) and not np.any(prog.A):
        loosest = solve_lp(template, np.ones(n))
        if loosest.status is LpStatus.OPTIMAL:
            sp_lower_bound = float(loosest.objective)

    codes = np.arange(1 << n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    states = ((codes[:, None] >> shifts) & 1).astype(float)
    binary_cost = states @ prog.c
    order = np.argsort(binary_cost, kind="stable")

    best = np.inf
    feasible_seen = False
    for idx in order:
        cx = float(binary_cost[idx])
        if sp_lower_bound is not None and cx + sp_lower_bound >= best:
            break
        if cx >= best:
            break
        sol = solve_lp(template, states[idx])
        if sol.status is LpStatus.UNBOUNDED:
            raise RuntimeError("subproblem unbounded; problem has no finite optimum")
        if sol.status is not LpStatus.OPTIMAL:
            continue
        feasible_seen = True
        best = min(best, cx + sol.objective)
    if not feasible_seen:
        raise RuntimeError("no binary assignment admits a feasible subproblem")
    return float(best)


def instance_program(
    buses: int, seed: int, rebalance_units: bool = True, knobs: GeneratorKnobs = GeneratorKnobs()
) -> MixedBinaryProgram:
    """Generated instance compiled to mixed-binary form, units rebalanced."""
    prog = to_milp(generate(buses, seed, knobs))
    if rebalance_units:
        prog, _, _ = scale_units(prog)
    return prog


def _run_seed(master_seed: int, config_index: int, buses: int, instance_seed: int, run_index: int) -> int:
    words = [master_seed, config_index, buses, instance_seed, run_index]
    return int(np.random.SeedSequence(words).generate_state(1)[0])


def _execute_task(task: dict) -> dict:
    prog = instance_program(task["buses"], task["instance_seed"], task["rebalance_units"])
    spec = ConfigSpec.from_dict(task["spec"])
    result: RunResult = run(prog, spec.to_run_config(task["seed"]))
    a: Assignment = result.assignment
    feas = check_feasibility(prog, a)
    if not feas.feasible:
        raise RuntimeError(
            f"run produced an infeasible assignment (eq {feas.max_equality_violation:g}, "
            f"ineq {feas.max_inequality_violation:g})"
        )
    last = result.records[-1]
    return {
        "config": spec.name,
        "buses": task["buses"],
        "instance_seed": task["instance_seed"],
        "run_index": task["run_index"],
        "objective": float(evaluate(prog, a)),
        "iterations": len(result.records),
        "final_qubo_size": int(last.qubo_size),
        "solve_time": float(sum(r.master_time + r.sp_time for r in result.records)),
        "total_time": float(result.total_time),
        "stop_reason": result.stop_reason.value,
    }


def run_bench(cfg: BenchConfig) -> list[BenchRecord]:
    """Execute the full sweep; deterministic given cfg.master_seed."""
    references: dict[tuple[int, int], tuple[float | None, str]] = {}
    for buses in cfg.bus_counts:
        for iseed in cfg.instance_seeds:
            prog = instance_program(buses, iseed, cfg.rebalance_units)
            if prog.num_binary <= MAX_REFERENCE_BITS:
                references[(buses, iseed)] = (reference_solve(prog), "exact")
            else:
                references[(buses, iseed)] = (None, "best_known")

    tasks = []
    for ci, spec in enumerate(cfg.configurations):
        for buses in cfg.bus_counts:
            for iseed in cfg.instance_seeds:
                for r in range(cfg.runs):
                    tasks.append(
                        {
                            "spec": spec.to_dict(),
                            "buses": buses,
                            "instance_seed": iseed,
                            "run_index": r,
                            "rebalance_units": cfg.rebalance_units,
                            "seed": _run_seed(cfg.master_seed, ci, buses, iseed, r),
                        }
                    )

    workers = int(os.environ.get(WORKERS_ENV, "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(_execute_task, tasks, chunksize=8))
    else:
        raw = [_execute_task(t) for t in tasks]

    # Instances beyond the brute-force limit fall back to the best objective
    # seen across all configurations and runs.
    for key, (ref, kind) in references.items():
        if ref is None:
            candidates = [
                d["objective"]
                for d in raw
                if (d["buses"], d["instance_seed"]) == key
            ]
            references[key] = (min(candidates), kind)

    records = []
    for d in raw:
        ref, kind = references[(d["buses"], d["instance_seed"])]
        rel_err = abs(d["objective"] - ref) / max(abs(ref), 1e-12)
        records.append(
            BenchRecord(
                config=d["config"],
                buses=d["buses"],
                instance_seed=d["instance_seed"],
                run_index=d["run_index"],
                success=bool(rel_err < cfg.success_threshold),
                objective=d["objective"],
                reference=float(ref),
                reference_kind=kind,
                iterations=d["iterations"],
                final_qubo_size=d["final_qubo_size"],
                solve_time=d["solve_time"],
                total_time=d["total_time"],
                stop_reason=d["stop_reason"],
            )
        )
    records.sort(key=lambda rec: rec.sort_key)
    return records


def aggregate(
    records: list[BenchRecord],
    success_quantile: float = 0.10,
    config_order: list[str] | None = None,
) -> list[dict]:
    """Per (config, buses) summary over the first-k successful runs.

    k = ceil(success_quantile * runs) per instance; the selected runs of all
    instances of a (config, buses) cell are pooled for means and standard
    deviations.  success_rate counts all runs.  Cells without any
    successful run report success_rate 0 and null metric aggregates.
    """
    groups: dict[tuple[str, int], list[BenchRecord]] = {}
    for rec in records:
        groups.setdefault((rec.config, rec.buses), []).append(rec)

    names = config_order or sorted({rec.config for rec in records})
    rows = []
    for config in names:
        for buses in sorted({b for (c, b) in groups if c == config}):
            cell = sorted(groups[(config, buses)], key=lambda r: r.sort_key)
            by_instance: dict[int, list[BenchRecord]] = {}
            for rec in cell:
                by_instance.setdefault(rec.instance_seed, []).append(rec)
            selected: list[BenchRecord] = []
            for iseed in sorted(by_instance):
                runs_here = by_instance[iseed]
                k = math.ceil(success_quantile * len(runs_here))
                successes = [r for r in runs_here if r.success]
                selected.extend(successes[:k])
            row = {
                "config": config,
                "buses": buses,
                "n_runs": len(cell),
                "n_success": sum(r.success for r in cell),
                "success_rate": sum(r.success for r in cell) / len(cell),
                "n_selected": len(selected),
                "reference_kind": ",".join(sorted({r.reference_kind for r in cell})),
            }
            for metric in METRICS:
                if selected:
                    vals = np.array([getattr(r, metric) for r in selected], dtype=float)
                    row[f"{metric}_mean"] = float(vals.mean())
                    row[f"{metric}_std"] = float(vals.std())
                else:
                    row[f"{metric}_mean"] = None
                    row[f"{metric}_std"] = None
            rows.append(row)
    return rows


def write_results_csv(records: list[BenchRecord], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_COLUMNS)
        for rec in sorted(records, key=lambda r: r.sort_key):
            writer.writerow(
                [
                    rec.config,
                    rec.buses,
                    rec.instance_seed,
                    rec.run_index,
                    int(rec.success),
                    repr(rec.objective),
                    repr(rec.reference),
                    rec.reference_kind,
                    rec.iterations,
                    rec.final_qubo_size,
                    rec.stop_reason,
                ]
            )


def write_timings_csv(records: list[BenchRecord], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TIMINGS_COLUMNS)
        for rec in sorted(records, key=lambda r: r.sort_key):
            writer.writerow(
                [
                    rec.config,
                    rec.buses,
                    rec.instance_seed,
                    rec.run_index,
                    repr(rec.solve_time),
                    repr(rec.total_time),
                ]
            )


def read_records_csv(results_path: str, timings_path: str | None = None) -> list[BenchRecord]:
    timings: dict[tuple, tuple[float, float]] = {}
    if timings_path is not None and os.path.exists(timings_path):
        with open(timings_path, newline="") as fh:
            for row in csv.DictReader(fh):
                key = (row["config"], int(row["buses"]), int(row["instance_seed"]), int(row["run_index"]))
                timings[key] = (float(row["solve_time"]), float(row["total_time"]))
    records = []
    with open(results_path, newline="") as fh:
        for row in csv.DictReader(fh):
            key = (row["config"], int(row["buses"]), int(row["instance_seed"]), int(row["run_index"]))
            solve_time, total_time = timings.get(key, (0.0, 0.0))
            records.append(
                BenchRecord(
                    config=row["config"],
                    buses=int(row["buses"]),
                    instance_seed=int(row["instance_seed"]),
                    run_index=int(row["run_index"]),
                    success=bool(int(row["success"])),
                    objective=float(row["objective"]),
                    reference=float(row["reference"]),
                    reference_kind=row["reference_kind"],
                    iterations=int(row["iterations"]),
                    final_qubo_size=int(row["final_qubo_size"]),
                    solve_time=solve_time,
                    total_time=total_time,
                    stop_reason=row["stop_reason"],
                )
            )
    return records


def report(
    records: list[BenchRecord],
    outdir: str,
    success_quantile: float = 0.10,
    config_order: list[str] | None = None,
    metadata: dict | None = None,
) -> list[str]:
    """Write results.csv, timings.csv, summary.json, and one SVG per metric."""
    from . import plots

    if not records:
        raise ValueError("no records to report")
    os.makedirs(outdir, exist_ok=True)
    written = []

    results_path = os.path.join(outdir, "results.csv")
    write_results_csv(records, results_path)
    written.append(results_path)
    timings_path = os.path.join(outdir, "timings.csv")
    write_timings_csv(records, timings_path)
    written.append(timings_path)

    rows = aggregate(records, success_quantile, config_order)
    summary_path = os.path.join(outdir, "summary.json")
    with open(summary_path, "w") as fh:
        json.dump(
            {
                "metadata": metadata or {},
                "success_quantile": success_quantile,
                "aggregates": rows,
            },
            fh,
            indent=2,
        )
    written.append(summary_path)

    for metric in ("success_rate",) + METRICS:
        path = os.path.join(outdir, f"{metric}.svg")
        plots.plot_metric(rows, metric, path)
        written.append(path)
    return written
