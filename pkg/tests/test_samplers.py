"""Exact enumeration and simulated annealing sampler behavior."""

import itertools

import numpy as np
import pytest

from qubo_benders.qubo import Qubo
from qubo_benders.samplers import (
    SampleSet,
    SamplerConfig,
    pick_best,
    solve_exact,
    solve_sa,
)


def _diag_qubo(values, offset=0.0):
    q = Qubo()
    q.add_register("b", len(values))
    for i, v in enumerate(values):
        if v:
            q.add_term(i, i, float(v))
    q.offset = offset
    return q


def test_exact_all_ones_optimum():
    result = solve_exact(_diag_qubo([-1.0, -1.0]))
    bits, energy = pick_best(result)
    assert list(bits) == [1, 1]
    assert energy == pytest.approx(-2.0)


def test_exact_merges_equal_energies():
    # E = b0 + b1 - 2 b0 b1: states (0,0) and (1,1) at 0, the others at 1
    q = _diag_qubo([1.0, 1.0])
    q.add_term(0, 1, -2.0)
    result = solve_exact(q)
    assert [s.energy for s in result.samples] == pytest.approx([0.0, 1.0])
    assert [s.occurrences for s in result.samples] == [2, 2]
    # representative of each level is the lexicographically smallest state
    assert list(result.samples[0].bits) == [0, 0]
    assert list(result.samples[1].bits) == [0, 1]


def test_exact_empty_qubo_returns_offset():
    q = Qubo()
    q.offset = 4.5
    result = solve_exact(q)
    assert len(result) == 1
    assert result.samples[0].bits.size == 0
    assert result.samples[0].energy == pytest.approx(4.5)


def test_exact_respects_bit_budget():
    with pytest.raises(ValueError):
        solve_exact(_diag_qubo([1.0] * 25), max_bits=24)
    solve_exact(_diag_qubo([1.0] * 10), max_bits=10)


def test_exact_max_samples_truncates():
    q = _diag_qubo([1.0, 2.0, 4.0])  # eight distinct energies
    full = solve_exact(q)
    assert len(full) == 8
    top = solve_exact(q, max_samples=3)
    assert [s.energy for s in top.samples] == [s.energy for s in full.samples[:3]]


def test_exact_energies_recompute():
    rng = np.random.default_rng(11)
    q = Qubo()
    q.add_register("b", 8)
    for i in range(8):
        for j in range(i, 8):
            q.add_term(i, j, float(rng.normal()))
    result = solve_exact(q)
    total = 0
    for s in result.samples:
        assert q.energy(s.bits.astype(float)) == pytest.approx(s.energy, abs=1e-9)
        total += s.occurrences
    assert total == 256
    energies = [s.energy for s in result.samples]
    assert energies == sorted(energies)


def test_sa_finds_trivial_optimum():
    q = _diag_qubo([-1.0] * 5)
    result = solve_sa(q, SamplerConfig(reads=10, sweeps=60, seed=1))
    bits, energy = pick_best(result)
    assert list(bits) == [1] * 5
    assert energy == pytest.approx(-5.0)
    # nearly every read should land on the optimum for a separable objective
    assert result.samples[0].occurrences >= 9


def test_sa_deterministic():
    rng = np.random.default_rng(2)
    q = Qubo()
    q.add_register("b", 9)
    for i in range(9):
        for j in range(i, 9):
            q.add_term(i, j, float(rng.normal(0.0, 2.0)))
    cfg = SamplerConfig(reads=25, sweeps=40, seed=7)
    a = solve_sa(q, cfg)
    b = solve_sa(q, cfg)
    assert a.to_json() == b.to_json()
    c = solve_sa(q, SamplerConfig(reads=25, sweeps=40, seed=8))
    assert c.to_json() != a.to_json()


@pytest.mark.parametrize("seed", range(20))
def test_sa_never_beats_exact(seed):
    rng = np.random.default_rng(500 + seed)
    q = Qubo()
    q.add_register("b", 10)
    for i in range(10):
        for j in range(i, 10):
            if rng.random() < 0.6:
                q.add_term(i, j, float(rng.normal(0.0, 3.0)))
    q.offset = float(rng.normal())
    exact_best = solve_exact(q).samples[0].energy
    sa = solve_sa(q, SamplerConfig(reads=20, sweeps=50, seed=seed))
    assert sa.samples[0].energy >= exact_best - 1e-9
    for s in sa.samples:
        assert q.energy(s.bits.astype(float)) == pytest.approx(s.energy, abs=1e-9)


def test_sa_hit_rate_on_random_problems():
    hits = 0
    for seed in range(100):
        rng = np.random.default_rng(8000 + seed)
        q = Qubo()
        q.add_register("b", 12)
        for i in range(12):
            for j in range(i, 12):
                if rng.random() < 0.5:
                    q.add_term(i, j, float(rng.normal(0.0, 2.0)))
        exact_best = solve_exact(q).samples[0].energy
        sa = solve_sa(q, SamplerConfig(reads=20, sweeps=100, seed=seed))
        if sa.samples[0].energy <= exact_best + 1e-9:
            hits += 1
    assert hits >= 95


def test_sa_quality_improves_with_sweeps():
    rng = np.random.default_rng(77)
    q = Qubo()
    q.add_register("b", 16)
    for i in range(16):
        for j in range(i, 16):
            q.add_term(i, j, float(rng.normal(0.0, 2.0)))
    short, long = [], []
    for seed in range(50):
        short.append(solve_sa(q, SamplerConfig(reads=4, sweeps=10, seed=seed)).samples[0].energy)
        long.append(solve_sa(q, SamplerConfig(reads=4, sweeps=1000, seed=seed)).samples[0].energy)
    assert np.mean(long) <= np.mean(short)


def test_sa_groups_identical_states():
    q = _diag_qubo([-2.0, -2.0])
    result = solve_sa(q, SamplerConfig(reads=30, sweeps=50, seed=0))
    seen = set()
    total = 0
    for s in result.samples:
        key = tuple(int(v) for v in s.bits)
        assert key not in seen
        seen.add(key)
        total += s.occurrences
    assert total == 30
    energies = [s.energy for s in result.samples]
    assert energies == sorted(energies)


def test_sampler_config_validation():
    with pytest.raises(ValueError):
        SamplerConfig(reads=0)
    with pytest.raises(ValueError):
        SamplerConfig(sweeps=0)
    with pytest.raises(ValueError):
        SamplerConfig(beta_range=(2.0, 1.0))
    with pytest.raises(ValueError):
        SamplerConfig(beta_range=(0.0, 1.0))
    SamplerConfig(beta_range=(0.5, 5.0))


def test_pick_best_tie_breaks_lex():
    q = _diag_qubo([1.0, 1.0])
    q.add_term(0, 1, -2.0)  # (0,0) and (1,1) tie at zero
    bits, energy = pick_best(solve_exact(q))
    assert list(bits) == [0, 0]
    assert energy == pytest.approx(0.0)


def test_pick_best_rejects_empty():
    with pytest.raises(ValueError):
        pick_best(SampleSet())


def test_sampleset_json_round_trip():
    q = _diag_qubo([-1.0, 2.0], offset=0.25)
    result = solve_exact(q)
    back = SampleSet.from_json(result.to_json())
    assert len(back) == len(result)
    for a, b in zip(back.samples, result.samples):
        assert np.array_equal(a.bits, b.bits)
        assert a.energy == b.energy
        assert a.occurrences == b.occurrences
