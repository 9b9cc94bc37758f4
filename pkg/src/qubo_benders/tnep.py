"""Synthetic greenfield transmission expansion instances.

Topology is a random spanning tree plus random chords (about 1.5 candidate
lines per bus).  Buses carry one generator each, drawn from two archetypes
(cheap high-capacity renewable, dearer gas), plus load shedding at a cost
above any generation cost, so the operational subproblem is feasible for
every line-building decision.  Total demand is normalized to the same
value for all sizes so objectives stay comparable across instance scales.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .milp import MixedBinaryProgram

__all__ = [
    "TnepInstance",
    "GeneratorKnobs",
    "generate",
    "to_milp",
    "scale_units",
    "apply_scaling",
]

TOTAL_DEMAND = 100.0


@dataclass(frozen=True)
class GeneratorKnobs:
    """Sampling ranges for the instance generator; all costs per MW."""

    renewable_cost: tuple[float, float] = (1.0, 3.0)
    gas_cost: tuple[float, float] = (8.0, 15.0)
    shed_cost: float = 100.0
    line_unit_cost: tuple[float, float] = (3.0, 30.0)
    line_capacity: tuple[float, float] = (20.0, 60.0)
    capacity_margin: tuple[float, float] = (1.2, 1.6)
    lines_per_bus: float = 1.5
    total_demand: float = TOTAL_DEMAND
    annualization: float = 1.0


@dataclass(frozen=True)
class TnepInstance:
    buses: int
    candidate_lines: list  # (from_bus, to_bus, capacity, cost) tuples
    demand: np.ndarray
    gen_cap: np.ndarray
    gen_cost: np.ndarray
    shed_cost: np.ndarray
    annualization: float = 1.0
    seed: int = 0

    def __post_init__(self):
        for name in ("demand", "gen_cap", "gen_cost", "shed_cost"):
            object.__setattr__(
                self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            )
        object.__setattr__(
            self,
            "candidate_lines",
            [(int(a), int(b), float(cap), float(cost)) for a, b, cap, cost in self.candidate_lines],
        )
        N = self.buses
        for name in ("demand", "gen_cap", "gen_cost", "shed_cost"):
            if getattr(self, name).size != N:
                raise ValueError(f"{name} must have one entry per bus")
        if any(not (0 <= a < N and 0 <= b < N and a != b) for a, b, _, _ in self.candidate_lines):
            raise ValueError("candidate line endpoints out of range")
        if np.any(self.demand < 0) or np.any(self.gen_cap < 0):
            raise ValueError("demand and generation capacity must be nonnegative")
        if any(cap < 0 for _, _, cap, _ in self.candidate_lines):
            raise ValueError("line capacities must be nonnegative")
        if np.any(self.shed_cost <= np.max(self.gen_cost)):
            raise ValueError("shedding must cost more than any generation")
        if float(np.sum(self.gen_cap)) < float(np.sum(self.demand)) - 1e-9:
            raise ValueError("total generation capacity must cover total demand")
        if not self.is_connected():
            raise ValueError("candidate-line graph must be connected")

    @property
    def num_lines(self) -> int:
        return len(self.candidate_lines)

    def is_connected(self) -> bool:
        seen = {0}
        frontier = [0]
        adj: dict[int, list[int]] = {k: [] for k in range(self.buses)}
        for a, b, _, _ in self.candidate_lines:
            adj[a].append(b)
            adj[b].append(a)
        while frontier:
            k = frontier.pop()
            for nb in adj[k]:
                if nb not in seen:
                    seen.add(nb)
                    frontier.append(nb)
        return len(seen) == self.buses

    def to_dict(self) -> dict:
        return {
            "buses": self.buses,
            "candidate_lines": [list(line) for line in self.candidate_lines],
            "demand": self.demand.tolist(),
            "gen_cap": self.gen_cap.tolist(),
            "gen_cost": self.gen_cost.tolist(),
            "shed_cost": self.shed_cost.tolist(),
            "annualization": self.annualization,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "TnepInstance":
        return cls(
            buses=int(d["buses"]),
            candidate_lines=[tuple(line) for line in d["candidate_lines"]],
            demand=np.array(d["demand"]),
            gen_cap=np.array(d["gen_cap"]),
            gen_cost=np.array(d["gen_cost"]),
            shed_cost=np.array(d["shed_cost"]),
            annualization=float(d.get("annualization", 1.0)),
            seed=int(d.get("seed", 0)),
        )

    @classmethod
    def from_json(cls, text: str) -> "TnepInstance":
        return cls.from_dict(json.loads(text))


def generate(buses: int, seed: int, knobs: GeneratorKnobs = GeneratorKnobs()) -> TnepInstance:
    """Deterministic random instance with `buses` buses."""
    if buses < 2:
        raise ValueError("need at least 2 buses")
    rng = np.random.default_rng(seed)
    N = buses

    # Spanning tree by random attachment, then chords up to ~1.5 per bus.
    edges: set[tuple[int, int]] = set()
    for k in range(1, N):
        a = int(rng.integers(0, k))
        edges.add((min(a, k), max(a, k)))
    target = min(int(round(knobs.lines_per_bus * N)), N * (N - 1) // 2)
    all_pairs = [(i, j) for i in range(N) for j in range(i + 1, N) if (i, j) not in edges]
    extra = max(0, target - len(edges))
    if extra and all_pairs:
        chosen = rng.choice(len(all_pairs), size=min(extra, len(all_pairs)), replace=False)
        for idx in np.sort(chosen):
            edges.add(all_pairs[int(idx)])

    lines = []
    for a, b in sorted(edges):
        cap = float(rng.uniform(*knobs.line_capacity))
        unit = float(rng.uniform(*knobs.line_unit_cost))
        lines.append((a, b, cap, unit * cap))

    weights = rng.uniform(0.2, 1.0, N)
    demand = knobs.total_demand * weights / weights.sum()

    n_renewable = int(rng.integers(1, N)) if N > 2 else 1
    renewable = np.zeros(N, dtype=bool)
    renewable[rng.choice(N, size=n_renewable, replace=False)] = True
    gen_cost = np.where(
        renewable,
        rng.uniform(*knobs.renewable_cost, N),
        rng.uniform(*knobs.gas_cost, N),
    )
    raw_cap = np.where(renewable, rng.uniform(0.8, 1.5, N), rng.uniform(0.4, 1.0, N))
    margin = rng.uniform(*knobs.capacity_margin)
    gen_cap = raw_cap * (margin * knobs.total_demand / raw_cap.sum())

    return TnepInstance(
        buses=N,
        candidate_lines=lines,
        demand=demand,
        gen_cap=gen_cap,
        gen_cost=gen_cost,
        shed_cost=np.full(N, knobs.shed_cost),
        annualization=knobs.annualization,
        seed=seed,
    )


def to_milp(inst: TnepInstance) -> MixedBinaryProgram:
    """Compile to mixed-binary form with y = (flows, generation, shedding).

    Equalities are the bus balance rows B f + g + u = d with incidence +1
    at the origin and -1 at the terminus of each candidate line.
    Inequalities, in order: f <= cap*x, -f <= cap*x, g <= gen_cap,
    u <= demand, -g <= 0, -u <= 0.  Flows are free in sign.
    """
    N, L = inst.buses, inst.num_lines
    m = L + 2 * N
    p = 2 * L + 4 * N

    c = inst.annualization * np.array([cost for _, _, _, cost in inst.candidate_lines])
    c_cont = np.concatenate([np.zeros(L), inst.gen_cost, inst.shed_cost])

    B = np.zeros((N, L))
    for idx, (a, b, _, _) in enumerate(inst.candidate_lines):
        B[a, idx] = 1.0
        B[b, idx] = -1.0
    A_cont = np.concatenate([B, np.eye(N), np.eye(N)], axis=1)
    A = np.zeros((N, L))
    b_vec = inst.demand.copy()

    caps = np.array([cap for _, _, cap, _ in inst.candidate_lines])
    G = np.zeros((p, L))
    G_cont = np.zeros((p, m))
    h = np.zeros(p)
    # f <= cap*x and -f <= cap*x
    G_cont[:L, :L] = np.eye(L)
    G[:L] = -np.diag(caps)
    G_cont[L : 2 * L, :L] = -np.eye(L)
    G[L : 2 * L] = -np.diag(caps)
    # g <= gen_cap, u <= demand
    G_cont[2 * L : 2 * L + N, L : L + N] = np.eye(N)
    h[2 * L : 2 * L + N] = inst.gen_cap
    G_cont[2 * L + N : 2 * L + 2 * N, L + N :] = np.eye(N)
    h[2 * L + N : 2 * L + 2 * N] = inst.demand
    # -g <= 0, -u <= 0
    G_cont[2 * L + 2 * N : 2 * L + 3 * N, L : L + N] = -np.eye(N)
    G_cont[2 * L + 3 * N :, L + N :] = -np.eye(N)

    names = [f"line{idx}:{a}-{b}" for idx, (a, b, _, _) in enumerate(inst.candidate_lines)]
    return MixedBinaryProgram(
        c=c, c_cont=c_cont, G=G, G_cont=G_cont, h=h, A=A, A_cont=A_cont, b=b_vec, names=names
    )


def apply_scaling(
    prog: MixedBinaryProgram, money_scale: float, energy_scale: float
) -> MixedBinaryProgram:
    """Change monetary and energy units.

    Costs pick up money_scale; per-MW costs additionally pick up
    energy_scale because the MW variables shrink by it; constraint rows in
    MW are divided by it.  Objective ranking over x is preserved exactly
    (uniform positive rescaling of every z(x))."""
    if money_scale <= 0 or energy_scale <= 0:
        raise ValueError("scales must be positive")
    m, e = float(money_scale), float(energy_scale)
    return MixedBinaryProgram(
        c=m * prog.c,
        c_cont=m * e * prog.c_cont,
        G=prog.G / e,
        G_cont=prog.G_cont.copy(),
        h=prog.h / e,
        A=prog.A / e,
        A_cont=prog.A_cont.copy(),
        b=prog.b / e,
        names=prog.names,
    )


def scale_units(
    prog: MixedBinaryProgram, target_ratio: float = 4.0
) -> tuple[MixedBinaryProgram, float, float]:
    """Rebalance units until max|c| / max|c_cont| lies in the target band.

    Returns the scaled program plus (money_scale, energy_scale); scales are
    1 when the program is already balanced."""
    if target_ratio < 1:
        raise ValueError("target_ratio must be >= 1")
    top_bin = float(np.max(np.abs(prog.c))) if prog.c.size else 0.0
    top_cont = float(np.max(np.abs(prog.c_cont))) if prog.c_cont.size else 0.0
    if top_bin == 0.0 or top_cont == 0.0:
        raise ValueError("both objective blocks must be nonzero to rebalance units")
    ratio = top_bin / top_cont
    if 1.0 / target_ratio <= ratio <= target_ratio:
        return prog, 1.0, 1.0
    # Energy rescaling moves the ratio by 1/e; land exactly on 1.
    return apply_scaling(prog, 1.0, ratio), 1.0, ratio
