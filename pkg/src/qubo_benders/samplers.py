"""QUBO samplers: chunked exact enumeration and a Metropolis annealer.

Both return energy-sorted sample sets with deterministic tie-breaking
(lexicographically smallest bit vector first), so identical inputs always
produce identical outputs regardless of chunking or chain order.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - accelerator only
    _HAVE_NUMBA = False

from .qubo import Qubo

__all__ = [
    "SamplerConfig",
    "Sample",
    "SampleSet",
    "solve_exact",
    "solve_sa",
    "pick_best",
]

DEFAULT_MAX_BITS = 24
_CHUNK = 1 << 16


@dataclass(frozen=True)
class SamplerConfig:
    reads: int = 100
    sweeps: int = 100
    seed: int = 0
    beta_range: tuple[float, float] | None = None

    def __post_init__(self):
        if self.reads < 1:
            raise ValueError(f"reads must be >= 1, got {self.reads}")
        if self.sweeps < 1:
            raise ValueError(f"sweeps must be >= 1, got {self.sweeps}")
        if self.beta_range is not None:
            lo, hi = self.beta_range
            if not (0 < lo < hi):
                raise ValueError(f"need 0 < beta_start < beta_end, got {self.beta_range}")


@dataclass(frozen=True)
class Sample:
    bits: np.ndarray
    energy: float
    occurrences: int = 1

    def __post_init__(self):
        object.__setattr__(self, "bits", np.atleast_1d(np.asarray(self.bits, dtype=np.int64)))


@dataclass(frozen=True)
class SampleSet:
    """Samples sorted ascending by (energy, bits); occurrences count merges."""

    samples: list[Sample] = field(default_factory=list)
    sampler_time: float = 0.0

    def __len__(self) -> int:
        return len(self.samples)

    def to_json(self) -> str:
        return json.dumps(
            [
                {"bits": s.bits.tolist(), "energy": s.energy, "occurrences": s.occurrences}
                for s in self.samples
            ]
        )

    @classmethod
    def from_json(cls, text: str) -> "SampleSet":
        return cls(
            samples=[
                Sample(np.array(d["bits"]), float(d["energy"]), int(d["occurrences"]))
                for d in json.loads(text)
            ]
        )


def _unpack_codes(codes: np.ndarray, n: int) -> np.ndarray:
    """Big-endian bit matrix: ascending code = ascending lexicographic bits."""
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((codes[:, None] >> shifts) & 1).astype(float)


def solve_exact(
    q: Qubo, max_bits: int = DEFAULT_MAX_BITS, max_samples: int | None = None
) -> SampleSet:
    """Enumerate all states; one sample per distinct energy.

    The representative bit vector of each energy level is the
    lexicographically smallest state attaining it, and occurrences counts
    how many states share that energy.
    """
    n = q.num_variables
    if n > max_bits:
        raise ValueError(f"{n} variables exceed the exact-enumeration limit {max_bits}")
    t0 = time.perf_counter()
    if n == 0:
        return SampleSet(
            [Sample(np.zeros(0, dtype=np.int64), float(q.offset), 1)],
            time.perf_counter() - t0,
        )
    Q = q.to_dense()
    total = 1 << n
    chunk_stats: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        states = _unpack_codes(codes, n)
        energies = np.einsum("si,ij,sj->s", states, Q, states) + q.offset
        uniq, inverse, counts = np.unique(energies, return_inverse=True, return_counts=True)
        min_codes = np.full(uniq.size, np.iinfo(np.int64).max, dtype=np.int64)
        np.minimum.at(min_codes, inverse, codes)
        chunk_stats.append((uniq, counts, min_codes))
    all_e = np.concatenate([s[0] for s in chunk_stats])
    all_c = np.concatenate([s[1] for s in chunk_stats])
    all_m = np.concatenate([s[2] for s in chunk_stats])
    uniq, inverse = np.unique(all_e, return_inverse=True)
    counts = np.zeros(uniq.size, dtype=np.int64)
    np.add.at(counts, inverse, all_c)
    min_codes = np.full(uniq.size, np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(min_codes, inverse, all_m)
    if max_samples is not None:
        uniq, counts, min_codes = uniq[:max_samples], counts[:max_samples], min_codes[:max_samples]
    reps = _unpack_codes(min_codes, n).astype(np.int64)
    elapsed = time.perf_counter() - t0
    samples = [
        Sample(reps[i], float(uniq[i]), int(counts[i])) for i in range(uniq.size)
    ]
    return SampleSet(samples, elapsed)


def _default_beta_range(q: Qubo, reads: int) -> tuple[float, float]:
    """Scale-free schedule from single-flip energy magnitudes at zero state."""
    diag = np.array([v for (i, j), v in q.terms.items() if i == j])
    deltas = np.abs(diag[diag != 0.0])
    if deltas.size == 0:
        allv = np.array([abs(v) for v in q.terms.values() if v != 0.0])
        deltas = allv
    if deltas.size == 0:
        return 1.0, np.log(100.0 * reads) / np.log(2.0)
    de_max, de_min = float(np.max(deltas)), float(np.min(deltas))
    return np.log(2.0) / de_max, np.log(100.0 * reads) / de_min


def _anneal_chains(
    C: np.ndarray,
    diag: np.ndarray,
    betas: np.ndarray,
    states: np.ndarray,
    rands: np.ndarray,
) -> None:
    """Reference sweep loop, vectorized across chains; mutates states."""
    n = diag.size
    for t, beta in enumerate(betas):
        for i in range(n):
            local = diag[i] + states @ C[i]
            delta = (1.0 - 2.0 * states[:, i]) * local
            accept = rands[t, i] < np.exp(np.minimum(-beta * delta, 0.0))
            states[accept, i] = 1.0 - states[accept, i]


if _HAVE_NUMBA:

    @njit(cache=True)
    def _anneal_chains_fast(C, diag, betas, states, rands):  # pragma: no cover
        reads, n = states.shape
        for r in range(reads):
            s = states[r]
            field = diag.copy()
            for j in range(n):
                if s[j] != 0.0:
                    for k in range(n):
                        field[k] += C[j, k]
            for t in range(betas.size):
                beta = betas[t]
                for i in range(n):
                    delta = (1.0 - 2.0 * s[i]) * field[i]
                    if delta <= 0.0 or rands[t, i, r] < np.exp(-beta * delta):
                        step = 1.0 - 2.0 * s[i]
                        s[i] += step
                        for k in range(n):
                            field[k] += step * C[i, k]


def solve_sa(q: Qubo, cfg: SamplerConfig) -> SampleSet:
    """Independent Metropolis chains over a geometric inverse-temperature ramp.

    Each read starts from a uniform random state and performs ``sweeps``
    sequential passes over all variables.  All random numbers are drawn up
    front from the seeded generator, so the result does not depend on which
    backend (compiled kernel or numpy reference loop) executes the chains.
    Deterministic for a fixed (q, cfg).
    """
    n = q.num_variables
    if n == 0:
        raise ValueError("annealer requires at least one variable")
    lo, hi = cfg.beta_range if cfg.beta_range is not None else _default_beta_range(q, cfg.reads)
    betas = np.geomspace(lo, hi, cfg.sweeps)
    Q = q.to_dense()
    diag = np.diag(Q).copy()
    C = Q + Q.T
    np.fill_diagonal(C, 0.0)

    rng = np.random.default_rng(cfg.seed)
    t0 = time.perf_counter()
    states = rng.integers(0, 2, size=(cfg.reads, n)).astype(float)
    rands = rng.random((cfg.sweeps, n, cfg.reads))
    if _HAVE_NUMBA:
        _anneal_chains_fast(np.ascontiguousarray(C), diag, betas, states, rands)
    else:
        _anneal_chains(C, diag, betas, states, rands)
    elapsed = time.perf_counter() - t0

    final = states.astype(np.int64)
    uniq, counts = np.unique(final, axis=0, return_counts=True)
    energies = np.einsum("si,ij,sj->s", uniq.astype(float), Q, uniq.astype(float)) + q.offset
    order = np.argsort(energies, kind="stable")
    samples = [
        Sample(uniq[k], float(energies[k]), int(counts[k])) for k in order
    ]
    return SampleSet(samples, elapsed)


def pick_best(s: SampleSet) -> tuple[np.ndarray, float]:
    """Lowest-energy sample; ties already resolved to the lexicographically
    smallest bit vector by the samplers' canonical sort."""
    if not s.samples:
        raise ValueError("empty sample set")
    best = s.samples[0]
    return best.bits.copy(), best.energy
