"""Binary encodings, penalty assembly, and QUBO bookkeeping."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qubo_benders.qubo import (
    BinaryEncoding,
    LinearExpr,
    PenaltySpec,
    Qubo,
    encode_bounds,
    inequality_to_equality,
    normalize,
    penalize_equality,
)


def _encoded_values(enc: BinaryEncoding) -> set:
    vals = set()
    for bits in itertools.product([0, 1], repeat=enc.bit_count):
        vals.add(round(enc.decode(np.array(bits, dtype=float)), 9))
    return vals


def test_encode_unit_range():
    enc = encode_bounds(0.0, 5.0, 1)
    assert enc.bit_count == 3
    assert list(enc.coefficients) == [1.0, 2.0, 2.0]
    assert enc.offset == 0.0
    assert enc.upper == 5.0
    assert _encoded_values(enc) == {0.0, 1.0, 2.0, 3.0, 4.0, 5.0}


def test_encode_point_interval():
    enc = encode_bounds(2.0, 2.0, 1)
    assert enc.bit_count == 0
    assert enc.offset == 2.0
    assert enc.decode(np.zeros(0)) == 2.0


def test_encode_halves():
    enc = encode_bounds(-3.0, 4.0, 2)
    # K = 14 steps of width 1/2
    assert enc.bit_count == 4
    expected = {-3.0 + k / 2 for k in range(15)}
    assert _encoded_values(enc) == expected


def test_encode_rejects_bad_ranges():
    with pytest.raises(ValueError):
        encode_bounds(3.0, 2.0, 1)
    with pytest.raises(ValueError):
        encode_bounds(0.0, 1.3, 1)  # span not on the p=1 grid
    with pytest.raises(ValueError):
        encode_bounds(0.0, 1.0, 0)


@settings(max_examples=200, deadline=None)
@given(
    p=st.sampled_from([1, 2, 4]),
    lo_steps=st.integers(-80, 80),
    K=st.integers(0, 200),
)
def test_encode_covers_every_grid_point(p, lo_steps, K):
    lo = lo_steps / p
    hi = lo + K / p
    enc = encode_bounds(lo, hi, p)
    assert enc.bit_count == (0 if K == 0 else int(np.floor(np.log2(K))) + 1)
    vals = _encoded_values(enc)
    assert vals == {round(lo + k / p, 9) for k in range(K + 1)}
    assert max(vals) == pytest.approx(hi)
    assert min(vals) == pytest.approx(lo)


def test_linear_expr_algebra():
    e = LinearExpr.variable("a", 2.0) + LinearExpr.variable("b", -1.0)
    e = e + LinearExpr.combination(["a"], [3.0], constant=4.0)
    assert e.coeffs == {"a": 5.0, "b": -1.0}
    assert e.constant == 4.0
    neg = -e
    assert neg.coeffs["a"] == -5.0 and neg.constant == -4.0
    half = e.scaled(0.5)
    assert half.coeffs["b"] == -0.5 and half.constant == 2.0


def test_penalize_single_variable_row():
    # (x0 + x1 - 1)^2: diagonal -1 each, coupler 2, offset 1; minima at one-hot
    q = Qubo()
    q.add_variable("x0")
    q.add_variable("x1")
    row = LinearExpr.combination(["x0", "x1"], [1.0, 1.0])
    penalize_equality(q, row, 1.0, PenaltySpec(weight=1.0))
    dense = q.to_dense()
    assert dense[0, 0] == pytest.approx(-1.0)
    assert dense[1, 1] == pytest.approx(-1.0)
    assert dense[0, 1] == pytest.approx(2.0)
    assert q.offset == pytest.approx(1.0)
    energies = [q.energy(np.array(b, dtype=float)) for b in itertools.product([0, 1], repeat=2)]
    assert energies == pytest.approx([1.0, 0.0, 0.0, 1.0])


def test_penalize_weighted_row():
    # 2*(x0 - 2x1 + 1)^2 checked on its explicit expansion
    q = Qubo()
    q.add_variable("x0")
    q.add_variable("x1")
    row = LinearExpr.combination(["x0", "x1"], [1.0, -2.0], constant=1.0)
    penalize_equality(q, row, 0.0, PenaltySpec(weight=2.0))
    for bits in itertools.product([0, 1], repeat=2):
        b = np.array(bits, dtype=float)
        want = 2.0 * (b[0] - 2.0 * b[1] + 1.0) ** 2
        assert q.energy(b) == pytest.approx(want)


def test_penalize_accumulates():
    q = Qubo()
    q.add_variable("x0")
    row = LinearExpr.variable("x0")
    penalize_equality(q, row, 1.0, PenaltySpec(weight=1.0))
    penalize_equality(q, row, 1.0, PenaltySpec(weight=1.0))
    # twice the single-row penalty
    assert q.to_dense()[0, 0] == pytest.approx(-2.0)
    assert q.offset == pytest.approx(2.0)


def test_penalize_constant_row():
    q = Qubo()
    row = LinearExpr.combination([], [], constant=3.0)
    penalize_equality(q, row, 1.0, PenaltySpec(weight=2.0))
    assert q.offset == pytest.approx(8.0)  # 2 * (3-1)^2


def test_penalize_unregistered_label():
    q = Qubo()
    with pytest.raises(KeyError):
        penalize_equality(q, LinearExpr.variable("ghost"), 0.0, PenaltySpec(weight=1.0))


def test_penalty_spec_validation():
    with pytest.raises(ValueError):
        PenaltySpec(weight=0.0)
    with pytest.raises(ValueError):
        PenaltySpec(weight=-2.0)


def test_inequality_to_equality_box():
    # x <= 1 with slack in [0, 1]: minima everywhere after penalization
    q = Qubo()
    q.add_variable("x")
    row, enc = inequality_to_equality(
        LinearExpr.variable("x"), 1.0, 0.0, 1.0, 1, slack_prefix="s"
    )
    assert enc.bit_count == 1
    q.add_register("s", enc.bit_count)
    penalize_equality(q, row, 1.0, PenaltySpec(weight=5.0))
    energies = {
        bits: q.energy(np.array(bits, dtype=float))
        for bits in itertools.product([0, 1], repeat=2)
    }
    # both feasible combinations (x=0,s=1) and (x=1,s=0) sit at zero energy
    assert energies[(0, 1)] == pytest.approx(0.0)
    assert energies[(1, 0)] == pytest.approx(0.0)
    assert energies[(0, 0)] == pytest.approx(5.0)
    assert energies[(1, 1)] == pytest.approx(5.0)


def test_inequality_to_equality_point_slack():
    # 2a + b <= 0 only holds at the origin; the slack interval collapses
    row, enc = inequality_to_equality(
        LinearExpr.combination(["a", "b"], [2.0, 1.0]), 0.0, 0.0, 0.0, 1, "s"
    )
    assert enc.bit_count == 0
    q = Qubo()
    q.add_variable("a")
    q.add_variable("b")
    penalize_equality(q, row, 0.0, PenaltySpec(weight=1.0))
    best = min(
        q.energy(np.array(bits, dtype=float))
        for bits in itertools.product([0, 1], repeat=2)
    )
    assert best == pytest.approx(0.0)
    assert q.energy(np.array([1.0, 1.0])) == pytest.approx(9.0)


def test_register_and_index():
    q = Qubo()
    labels = q.add_register("alpha", 3)
    assert labels == ["alpha[0]", "alpha[1]", "alpha[2]"]
    assert q.index_of("alpha[1]") == 1
    with pytest.raises(KeyError):
        q.index_of("missing")
    with pytest.raises(ValueError):
        q.add_variable("alpha[0]")


def test_energy_matches_dense():
    rng = np.random.default_rng(0)
    q = Qubo()
    q.add_register("b", 6)
    for i in range(6):
        for j in range(i, 6):
            q.add_term(i, j, float(rng.normal()))
    q.offset = 1.5
    dense = q.to_dense()
    states = rng.integers(0, 2, (20, 6)).astype(float)
    want = np.einsum("si,ij,sj->s", states, dense, states) + q.offset
    assert np.allclose(q.energies(states), want)
    for s in states[:5]:
        assert q.energy(s) == pytest.approx(float(s @ dense @ s) + q.offset)


def test_max_abs_coefficient_and_normalize():
    q = Qubo()
    q.add_register("b", 2)
    q.add_term(0, 0, -4.0)
    q.add_term(1, 1, 8.0)
    q.offset = 3.0
    assert q.max_abs_coefficient() == 8.0
    normed, scale = normalize(q)
    assert scale == 8.0
    assert normed.to_dense()[0, 0] == pytest.approx(-0.5)
    assert normed.offset == pytest.approx(3.0 / 8.0)
    again, scale2 = normalize(normed)
    assert scale2 == pytest.approx(1.0)
    # original untouched
    assert q.to_dense()[1, 1] == 8.0


def test_normalize_preserves_argmin_set():
    rng = np.random.default_rng(3)
    q = Qubo()
    q.add_register("b", 10)
    for i in range(10):
        for j in range(i, 10):
            if rng.random() < 0.5:
                q.add_term(i, j, float(rng.normal(0.0, 4.0)))
    normed, _ = normalize(q)
    states = np.array(list(itertools.product([0, 1], repeat=10)), dtype=float)
    e0 = q.energies(states)
    e1 = normed.energies(states)
    argmin0 = set(np.flatnonzero(e0 <= e0.min() + 1e-9))
    argmin1 = set(np.flatnonzero(e1 <= e1.min() + 1e-12))
    assert argmin0 == argmin1


def test_normalize_rejects_empty():
    q = Qubo()
    q.add_variable("x")
    with pytest.raises(ValueError):
        normalize(q)


def test_json_round_trip():
    q = Qubo()
    q.add_register("z", 3)
    q.add_term(0, 2, -1.25)
    q.add_term(1, 1, 0.5)
    q.offset = -2.0
    back = Qubo.from_json(q.to_json())
    assert back.labels == q.labels
    assert back.offset == q.offset
    assert np.array_equal(back.to_dense(), q.to_dense())
    assert back.to_json() == q.to_json()


def test_add_term_canonicalizes_upper_triangle():
    q = Qubo()
    q.add_register("b", 2)
    q.add_term(1, 0, 3.0)
    q.add_term(0, 1, 1.0)
    assert q.to_dense()[0, 1] == pytest.approx(4.0)
    assert q.to_dense()[1, 0] == 0.0
