"""Hybrid decomposition loop with a QUBO master problem.

Each iteration builds the master over the binaries x and a discretized
surrogate alpha for the subproblem value, samples it, fixes x in the exact
LP subproblem, and turns the dual sensitivities into an optimality cut

    alpha >= c_cont @ y_j + lambda_j @ (x - x_j)

whose right hand side is conservatively floored to an integer before
encoding.  Alpha and per-cut slack bounds are recomputed from all cuts at
every iteration; revisited x double the penalty weight of their cut and add
a fresh slack register.  Stops on relative gap, QUBO bit budget, or
iteration budget.
"""

from __future__ import annotations

import enum
import json
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .milp import Assignment, MixedBinaryProgram, split
from .qubo import LinearExpr, PenaltySpec, Qubo, encode_bounds, penalize_equality
from .samplers import SamplerConfig, pick_best, solve_exact, solve_sa
from .simplex import LpSolution, LpStatus, compute_sensitivities, solve_lp

__all__ = [
    "Cut",
    "AlphaBounds",
    "IterationRecord",
    "RunConfig",
    "RunResult",
    "StopReason",
    "MasterLayout",
    "QuboBudgetError",
    "InfeasibleSubproblemError",
    "UnboundedProblemError",
    "make_cut",
    "alpha_and_slack_bounds",
    "build_master_qubo",
    "solve_master_exact",
    "handle_duplicate",
    "run",
]

_ROUND_TOL = 1e-9

SAMPLER_MODES = ("exact", "sa", "exact_master")


class QuboBudgetError(RuntimeError):
    def __init__(self, required: int, budget: int):
        super().__init__(f"master QUBO needs {required} bits, budget is {budget}")
        self.required = required
        self.budget = budget


class InfeasibleSubproblemError(RuntimeError):
    """Subproblem infeasible: feasibility cuts are unsupported, so the
    instance violates the relatively-complete-recourse assumption."""


class UnboundedProblemError(RuntimeError):
    """Subproblem unbounded for some x, hence the full problem is unbounded."""


def _floor(v: float) -> int:
    return int(np.floor(v + _ROUND_TOL))


def _ceil(v: float) -> int:
    return int(np.ceil(v - _ROUND_TOL))


@dataclass(frozen=True)
class Cut:
    """One optimality cut alpha >= raw_bound + lam @ x, floored to eta."""

    lam: np.ndarray
    raw_bound: float
    eta: int
    origin_x: np.ndarray
    penalty_multiplier: int = 1

    def __post_init__(self):
        object.__setattr__(self, "lam", np.atleast_1d(np.asarray(self.lam, dtype=float)))
        object.__setattr__(
            self, "origin_x", np.atleast_1d(np.asarray(self.origin_x, dtype=np.int64))
        )
        if not np.all(np.isfinite(self.lam)):
            raise ValueError("cut sensitivities must be finite")
        if self.eta != _floor(self.raw_bound):
            raise ValueError(f"eta must be floor(raw_bound), got {self.eta} vs {self.raw_bound}")
        if self.penalty_multiplier < 1:
            raise ValueError("penalty_multiplier must be >= 1")

    @property
    def lam_neg(self) -> float:
        return float(np.sum(self.lam[self.lam < 0]))

    @property
    def lam_pos(self) -> float:
        return float(np.sum(self.lam[self.lam > 0]))

    def value_at(self, x: np.ndarray) -> float:
        """Unrounded cut level C_j(x) = raw_bound + lam @ x."""
        return self.raw_bound + float(self.lam @ np.asarray(x, dtype=float))


@dataclass(frozen=True)
class AlphaBounds:
    lo: int
    hi: int
    relax_headroom: int = 0

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"alpha bounds crossed: [{self.lo}, {self.hi}]")
        if self.relax_headroom < 0:
            raise ValueError("headroom must be nonnegative")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    x: np.ndarray
    alpha: float
    lower_bound: float
    upper_bound: float
    qubo_size: int
    master_time: float
    sp_time: float
    duplicate: bool
    alpha_bits: int = 0
    slack_bits: tuple = ()

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "x": np.asarray(self.x).astype(int).tolist(),
            "alpha": self.alpha,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "qubo_size": self.qubo_size,
            "master_time": self.master_time,
            "sp_time": self.sp_time,
            "duplicate": self.duplicate,
            "alpha_bits": self.alpha_bits,
            "slack_bits": list(self.slack_bits),
        }


class StopReason(enum.Enum):
    GAP_CLOSED = "gap_closed"
    QUBO_BUDGET = "qubo_budget"
    ITERATION_BUDGET = "iteration_budget"


@dataclass(frozen=True)
class RunConfig:
    """Knobs of one decomposition run.

    sampler is one of "exact" (enumerate the master QUBO), "sa" (Metropolis
    annealer, per-iteration seeds derived from `seed`), or "exact_master"
    (closed-form master optimum, bypassing the QUBO penalties but still
    building the QUBO for size accounting).  penalty=None defers to the
    default 1/max(1, |first subproblem objective|).
    """

    epsilon_rel: float = 0.05
    epsilon_abs: float | None = None
    q_max: int = 160
    precision_p: int = 1
    penalty: float | None = None
    alpha_init: tuple[int, int] | None = None
    max_iterations: int = 50
    sampler: str = "exact_master"
    sampler_config: SamplerConfig | None = None
    relax_headroom: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.epsilon_rel <= 0:
            raise ValueError("epsilon_rel must be positive")
        if self.epsilon_abs is not None and self.epsilon_abs <= 0:
            raise ValueError("epsilon_abs must be positive when given")
        if self.q_max < 1:
            raise ValueError("q_max must be >= 1")
        if self.precision_p < 1 or int(self.precision_p) != self.precision_p:
            raise ValueError("precision_p must be a positive integer")
        if self.penalty is not None and self.penalty <= 0:
            raise ValueError("penalty must be positive when given")
        if self.alpha_init is not None:
            lo, hi = self.alpha_init
            if int(lo) != lo or int(hi) != hi or lo > hi:
                raise ValueError(f"alpha_init must be an integer interval, got {self.alpha_init}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.sampler not in SAMPLER_MODES:
            raise ValueError(f"sampler must be one of {SAMPLER_MODES}, got {self.sampler!r}")
        if self.relax_headroom is not None and self.relax_headroom < 0:
            raise ValueError("relax_headroom must be nonnegative when given")


@dataclass(frozen=True)
class RunResult:
    assignment: Assignment
    upper_bound: float
    lower_bound: float
    records: list[IterationRecord]
    stop_reason: StopReason
    best_objective: float
    gap: float
    total_time: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "iterations": [r.to_dict() for r in self.records],
                "summary": {
                    "best_x": np.asarray(self.assignment.x).astype(int).tolist(),
                    "objective": self.best_objective,
                    "upper_bound": self.upper_bound,
                    "lower_bound": self.lower_bound,
                    "gap": self.gap,
                    "stop_reason": self.stop_reason.value,
                    "total_time": self.total_time,
                },
            }
        )


def make_cut(sol: LpSolution, lam: np.ndarray, x_i: np.ndarray) -> Cut:
    """Cut from one subproblem solve at x_i, with the floored integer bound."""
    if sol.status is not LpStatus.OPTIMAL:
        raise ValueError(f"cuts require an optimal subproblem, got {sol.status}")
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    x = np.atleast_1d(np.asarray(x_i, dtype=float))
    raw = float(sol.objective - lam @ x)
    return Cut(lam=lam, raw_bound=raw, eta=_floor(raw), origin_x=x_i)


def _auto_headroom(span: int) -> int:
    """Smallest power of two covering a quarter of the alpha span, min 1."""
    h = 1
    while h < span / 4:
        h <<= 1
    return h


def alpha_and_slack_bounds(
    cuts: list[Cut], cfg: RunConfig
) -> tuple[AlphaBounds, list[tuple[int, int]]]:
    """Worst-case integer bounds on alpha and on every cut's slack.

    Per cut j the extreme cut levels over all x are raw_bound + lam_neg
    (all negative coefficients active) and raw_bound + lam_pos; the alpha
    interval is the floored min / ceiled max over cuts, widened by the
    user's alpha_init if present and by the relax headroom above.  Slack j
    ranges over [0, hi - eta_j - floor(lam_neg_j)].
    """
    if not cuts:
        raise ValueError("bounds need at least one cut")
    lo = min(_floor(cut.raw_bound + cut.lam_neg) for cut in cuts)
    hi = max(_ceil(cut.raw_bound + cut.lam_pos) for cut in cuts)
    if cfg.alpha_init is not None:
        lo = min(lo, int(cfg.alpha_init[0]))
        hi = max(hi, int(cfg.alpha_init[1]))
    headroom = cfg.relax_headroom if cfg.relax_headroom is not None else _auto_headroom(hi - lo)
    bounds = AlphaBounds(lo, hi + headroom, headroom)
    intervals = [(0, bounds.hi - cut.eta - _floor(cut.lam_neg)) for cut in cuts]
    return bounds, intervals


@dataclass(frozen=True)
class MasterLayout:
    """Bit layout of one master QUBO: x first, then alpha, then slacks."""

    num_binary: int
    alpha_encoding: object = None
    slack_bit_counts: tuple = ()

    @property
    def alpha_bits(self) -> int:
        return self.alpha_encoding.bit_count if self.alpha_encoding is not None else 0

    @property
    def num_bits(self) -> int:
        return self.num_binary + self.alpha_bits + sum(self.slack_bit_counts)

    def decode(self, bits: np.ndarray) -> tuple[np.ndarray, float | None]:
        bits = np.atleast_1d(np.asarray(bits))
        x = bits[: self.num_binary].astype(np.int64)
        if self.alpha_encoding is None:
            return x, None
        a = self.alpha_encoding.decode(bits[self.num_binary : self.num_binary + self.alpha_bits])
        return x, a


def build_master_qubo(
    cuts: list[Cut],
    bounds: AlphaBounds | None,
    c: np.ndarray,
    cfg: RunConfig,
    slack_intervals: list[tuple[int, int]] | None = None,
) -> tuple[Qubo, MasterLayout]:
    """Assemble the master QUBO: objective c @ x + encoded alpha, plus one
    penalized equality alpha - lam @ x - eta - slack = 0 per cut register.

    bounds=None drops alpha entirely (first iteration without a configured
    interval, where the master minimizes c @ x alone).  A cut with
    penalty_multiplier m contributes m identical penalty terms, each with
    its own slack register.  Raises QuboBudgetError before assembly when
    the total bit count would exceed cfg.q_max.
    """
    c = np.atleast_1d(np.asarray(c, dtype=float))
    n = c.size
    p = cfg.precision_p
    if cuts and bounds is None:
        raise ValueError("cuts require alpha bounds")
    if cuts and slack_intervals is None:
        raise ValueError("cuts require slack intervals")
    if cuts and cfg.penalty is None:
        raise ValueError("cuts require a resolved penalty weight")

    alpha_enc = encode_bounds(bounds.lo, bounds.hi, p) if bounds is not None else None
    slack_encs = []
    for j, cut in enumerate(cuts):
        lo_s, hi_s = slack_intervals[j]
        enc = encode_bounds(lo_s, hi_s, p)
        slack_encs.extend([(j, rep, enc) for rep in range(cut.penalty_multiplier)])

    total_bits = (
        n
        + (alpha_enc.bit_count if alpha_enc is not None else 0)
        + sum(enc.bit_count for _, _, enc in slack_encs)
    )
    if total_bits > cfg.q_max:
        raise QuboBudgetError(total_bits, cfg.q_max)

    q = Qubo()
    x_labels = [f"x[{i}]" for i in range(n)]
    for lab in x_labels:
        q.add_variable(lab)
    for i, lab in enumerate(x_labels):
        q.add_linear(lab, c[i])

    alpha_expr = None
    if alpha_enc is not None:
        alpha_labels = q.add_register("alpha", alpha_enc.bit_count)
        alpha_expr = LinearExpr.combination(alpha_labels, alpha_enc.coefficients, alpha_enc.offset)
        q.add_expr(alpha_expr)

    for j, rep, enc in slack_encs:
        cut = cuts[j]
        slack_labels = q.add_register(f"s{j}.{rep}", enc.bit_count)
        slack_expr = LinearExpr.combination(slack_labels, enc.coefficients, enc.offset)
        residual = (
            alpha_expr
            + LinearExpr.combination(x_labels, -cut.lam)
            + LinearExpr({}, -float(cut.eta))
            + slack_expr.scaled(-1.0)
        )
        penalize_equality(q, residual, 0.0, PenaltySpec(cfg.penalty, label=f"cut{j}.{rep}"))

    layout = MasterLayout(
        num_binary=n,
        alpha_encoding=alpha_enc,
        slack_bit_counts=tuple(enc.bit_count for _, _, enc in slack_encs),
    )
    return q, layout


def solve_master_exact(
    cuts: list[Cut], c: np.ndarray, alpha_lo: float
) -> tuple[np.ndarray, float, float]:
    """Closed-form master optimum: enumerate x, set alpha to the tightest
    level max(alpha_lo, max_j C_j(x)).  Ties go to the lexicographically
    smallest x."""
    c = np.atleast_1d(np.asarray(c, dtype=float))
    n = c.size
    if n > 24:
        raise ValueError(f"{n} binaries exceed the enumeration limit 24")
    codes = np.arange(1 << n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    states = ((codes[:, None] >> shifts) & 1).astype(float)
    alpha = np.full(codes.size, float(alpha_lo))
    for cut in cuts:
        np.maximum(alpha, cut.raw_bound + states @ cut.lam, out=alpha)
    objective = states @ c + alpha
    best = int(np.argmin(objective))
    return states[best].astype(np.int64), float(alpha[best]), float(objective[best])


def handle_duplicate(x_i: np.ndarray, cuts: list[Cut], history: dict) -> list[Cut]:
    """Bump the penalty multiplier of the cut first generated at x_i."""
    key = tuple(int(b) for b in np.atleast_1d(np.asarray(x_i)).round().astype(int))
    j = history[key]
    cuts[j] = replace(cuts[j], penalty_multiplier=cuts[j].penalty_multiplier + 1)
    return cuts


def _iteration_seed(seed: int, iteration: int) -> int:
    return int(np.random.SeedSequence([seed, iteration]).generate_state(1)[0])


def run(prog: MixedBinaryProgram, cfg: RunConfig) -> RunResult:
    """Full decomposition loop; see the module docstring for the flow."""
    t_start = time.perf_counter()
    master, template = split(prog)
    c = master.c
    n = c.size

    cuts: list[Cut] = []
    history: dict[tuple, int] = {}
    records: list[IterationRecord] = []
    penalty = cfg.penalty
    best_obj = np.inf
    best_assignment: Assignment | None = None
    stop_reason = StopReason.ITERATION_BUDGET
    zlb = -np.inf
    zub = np.inf

    for i in range(1, cfg.max_iterations + 1):
        if cuts:
            bounds, intervals = alpha_and_slack_bounds(cuts, cfg)
        elif cfg.alpha_init is not None:
            bounds = AlphaBounds(int(cfg.alpha_init[0]), int(cfg.alpha_init[1]), 0)
            intervals = []
        else:
            bounds, intervals = None, []

        build_cfg = cfg if penalty is None else replace(cfg, penalty=penalty)
        try:
            qubo, layout = build_master_qubo(cuts, bounds, c, build_cfg, intervals)
        except QuboBudgetError:
            stop_reason = StopReason.QUBO_BUDGET
            break

        t0 = time.perf_counter()
        if cfg.sampler == "exact_master":
            alpha_lo = float(bounds.lo) if bounds is not None else 0.0
            x, alpha, _ = solve_master_exact(cuts, c, alpha_lo)
            if bounds is None:
                alpha = 0.0
        else:
            if cfg.sampler == "exact":
                sampleset = solve_exact(qubo)
            else:
                base = cfg.sampler_config if cfg.sampler_config is not None else SamplerConfig()
                sampleset = solve_sa(
                    qubo, replace(base, seed=_iteration_seed(cfg.seed, i))
                )
            bits, _ = pick_best(sampleset)
            x, alpha = layout.decode(bits)
            if alpha is None:
                alpha = 0.0
        master_time = time.perf_counter() - t0

        key = tuple(int(b) for b in x)
        duplicate = key in history

        t0 = time.perf_counter()
        sol = solve_lp(template, x)
        sp_time = time.perf_counter() - t0
        if sol.status is LpStatus.INFEASIBLE:
            raise InfeasibleSubproblemError(
                f"subproblem infeasible at x={list(key)}; instances must have "
                "feasible recourse for every x"
            )
        if sol.status is LpStatus.UNBOUNDED:
            raise UnboundedProblemError(f"subproblem unbounded at x={list(key)}")

        if penalty is None:
            penalty = 1.0 / max(1.0, abs(sol.objective))

        cx = float(c @ x)
        zub = cx + sol.objective
        zlb = cx + float(alpha)
        if zub < best_obj:
            best_obj = zub
            best_assignment = Assignment(x=x.copy(), y=sol.y.copy())

        records.append(
            IterationRecord(
                iteration=i,
                x=x.copy(),
                alpha=float(alpha),
                lower_bound=zlb,
                upper_bound=zub,
                qubo_size=qubo.num_variables,
                master_time=master_time,
                sp_time=sp_time,
                duplicate=duplicate,
                alpha_bits=layout.alpha_bits,
                slack_bits=tuple(layout.slack_bit_counts),
            )
        )

        gap = (zub - zlb) / max(abs(zub), 1.0)
        if gap <= cfg.epsilon_rel or (
            cfg.epsilon_abs is not None and (zub - zlb) <= cfg.epsilon_abs
        ):
            stop_reason = StopReason.GAP_CLOSED
            break

        if duplicate:
            cuts = handle_duplicate(x, cuts, history)
        else:
            lam = compute_sensitivities(template, sol)
            cuts.append(make_cut(sol, lam, x))
            history[key] = len(cuts) - 1

    if best_assignment is None:
        raise QuboBudgetError(n, cfg.q_max)

    final_gap = (zub - zlb) / max(abs(zub), 1.0)
    return RunResult(
        assignment=best_assignment,
        upper_bound=float(zub),
        lower_bound=float(zlb),
        records=records,
        stop_reason=stop_reason,
        best_objective=float(best_obj),
        gap=float(final_gap),
        total_time=time.perf_counter() - t_start,
    )
