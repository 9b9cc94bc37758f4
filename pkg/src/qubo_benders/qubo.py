"""QUBO compilation: binary expansions, slack variables, penalty assembly.

A bounded discretized value s in [lo, hi] with grid step 1/p is represented
by bits t through

    s = offset + coeffs @ t,   coeffs = (1/p) [2^0, ..., 2^(k-1), K - 2^k + 1]

with K = p (hi - lo) and k = floor(log2 K), so every grid point and nothing
outside the interval is reachable.  Linear constraint rows over registered
binary variables are penalized quadratically into an upper-triangular
coefficient map; linear terms live on the diagonal (t^2 = t).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BinaryEncoding",
    "encode_bounds",
    "LinearExpr",
    "Qubo",
    "PenaltySpec",
    "penalize_equality",
    "inequality_to_equality",
    "normalize",
]

_INT_TOL = 1e-9


@dataclass(frozen=True)
class BinaryEncoding:
    """Discretization of a bounded interval [lo, hi] with step 1/p."""

    coefficients: np.ndarray
    offset: float
    precision_p: int

    def __post_init__(self):
        object.__setattr__(
            self, "coefficients", np.atleast_1d(np.asarray(self.coefficients, dtype=float))
        )

    @property
    def bit_count(self) -> int:
        return self.coefficients.size

    @property
    def upper(self) -> float:
        return self.offset + float(np.sum(self.coefficients))

    def decode(self, bits: np.ndarray) -> float:
        bits = np.atleast_1d(np.asarray(bits, dtype=float))
        if bits.size != self.bit_count:
            raise ValueError(f"expected {self.bit_count} bits, got {bits.size}")
        return self.offset + float(self.coefficients @ bits)


def encode_bounds(lo: float, hi: float, p: int) -> BinaryEncoding:
    """Binary expansion of a value in [lo, hi] on the grid of step 1/p.

    ``p * (hi - lo)`` must be integral to within 1e-9 (callers pre-round the
    bounds outward).  A point interval uses zero bits.
    """
    if p < 1 or int(p) != p:
        raise ValueError(f"precision must be a positive integer, got {p}")
    if lo > hi:
        raise ValueError(f"empty interval: lo={lo} > hi={hi}")
    span = p * (hi - lo)
    K = int(round(span))
    if abs(span - K) > _INT_TOL * max(1.0, abs(span)):
        raise ValueError(f"p*(hi-lo) = {span} is not integral")
    if K == 0:
        return BinaryEncoding(np.zeros(0), float(lo), int(p))
    k = K.bit_length() - 1
    coeffs = np.array([float(2**i) for i in range(k)] + [float(K - 2**k + 1)])
    return BinaryEncoding(coeffs / p, float(lo), int(p))


@dataclass(frozen=True)
class LinearExpr:
    """Affine expression over labeled binary variables: sum coeffs + constant."""

    coeffs: dict = field(default_factory=dict)
    constant: float = 0.0

    def __add__(self, other: "LinearExpr") -> "LinearExpr":
        merged = dict(self.coeffs)
        for label, value in other.coeffs.items():
            merged[label] = merged.get(label, 0.0) + value
        return LinearExpr(merged, self.constant + other.constant)

    def __neg__(self) -> "LinearExpr":
        return LinearExpr({k: -v for k, v in self.coeffs.items()}, -self.constant)

    def scaled(self, factor: float) -> "LinearExpr":
        return LinearExpr({k: factor * v for k, v in self.coeffs.items()}, factor * self.constant)

    @staticmethod
    def variable(label: str, coeff: float = 1.0) -> "LinearExpr":
        return LinearExpr({label: float(coeff)}, 0.0)

    @staticmethod
    def combination(labels, coeffs, constant: float = 0.0) -> "LinearExpr":
        coeffs = np.atleast_1d(np.asarray(coeffs, dtype=float))
        if len(labels) != coeffs.size:
            raise ValueError("labels and coeffs must have equal length")
        return LinearExpr(
            {lab: float(c) for lab, c in zip(labels, coeffs) if c != 0.0}, float(constant)
        )


@dataclass(frozen=True)
class PenaltySpec:
    """Positive penalty weight plus a provenance label for the constraint."""

    weight: float
    label: str = ""

    def __post_init__(self):
        if not np.isfinite(self.weight) or self.weight <= 0:
            raise ValueError(f"penalty weight must be positive, got {self.weight}")


class Qubo:
    """Upper-triangular QUBO accumulator over an ordered variable registry.

    energy(t) = sum_{i<=j} Q[i,j] t_i t_j + offset.  Mutating ops return
    self so compilation reads as a chain; finished instances are treated as
    immutable by samplers.
    """

    def __init__(self):
        self.labels: list[str] = []
        self._index: dict[str, int] = {}
        self.terms: dict[tuple[int, int], float] = {}
        self.offset: float = 0.0

    @property
    def num_variables(self) -> int:
        return len(self.labels)

    def add_variable(self, label: str) -> int:
        if label in self._index:
            raise ValueError(f"variable {label!r} already registered")
        self._index[label] = len(self.labels)
        self.labels.append(label)
        return self._index[label]

    def add_register(self, prefix: str, count: int) -> list[str]:
        labels = [f"{prefix}[{i}]" for i in range(count)]
        for lab in labels:
            self.add_variable(lab)
        return labels

    def index_of(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"variable {label!r} not registered") from None

    def add_term(self, i: int, j: int, value: float) -> "Qubo":
        if value == 0.0:
            return self
        if i > j:
            i, j = j, i
        self.terms[(i, j)] = self.terms.get((i, j), 0.0) + float(value)
        return self

    def add_linear(self, label: str, value: float) -> "Qubo":
        i = self.index_of(label)
        return self.add_term(i, i, value)

    def add_expr(self, expr: LinearExpr) -> "Qubo":
        for label, value in expr.coeffs.items():
            self.add_linear(label, value)
        self.offset += expr.constant
        return self

    def to_dense(self) -> np.ndarray:
        Q = np.zeros((self.num_variables, self.num_variables))
        for (i, j), value in self.terms.items():
            Q[i, j] = value
        return Q

    def energy(self, bits: np.ndarray) -> float:
        t = np.atleast_1d(np.asarray(bits, dtype=float))
        if t.size != self.num_variables:
            raise ValueError(f"expected {self.num_variables} bits, got {t.size}")
        total = self.offset
        for (i, j), value in self.terms.items():
            total += value * t[i] * t[j]
        return float(total)

    def energies(self, states: np.ndarray) -> np.ndarray:
        """Vectorized energy of a (num_states, num_variables) 0/1 matrix."""
        states = np.asarray(states, dtype=float)
        Q = self.to_dense()
        return np.einsum("si,ij,sj->s", states, Q, states) + self.offset

    def max_abs_coefficient(self) -> float:
        return max((abs(v) for v in self.terms.values()), default=0.0)

    def copy(self) -> "Qubo":
        dup = Qubo()
        dup.labels = list(self.labels)
        dup._index = dict(self._index)
        dup.terms = dict(self.terms)
        dup.offset = self.offset
        return dup

    def to_json(self) -> str:
        terms = [[i, j, v] for (i, j), v in sorted(self.terms.items())]
        return json.dumps(
            {"offset": self.offset, "variables": list(self.labels), "terms": terms}
        )

    @classmethod
    def from_json(cls, text: str) -> "Qubo":
        d = json.loads(text)
        q = cls()
        for lab in d["variables"]:
            q.add_variable(lab)
        for i, j, v in d["terms"]:
            q.add_term(int(i), int(j), float(v))
        q.offset = float(d["offset"])
        return q


def penalize_equality(q: Qubo, row: LinearExpr, rhs: float, P: PenaltySpec) -> Qubo:
    """Add ``P.weight * (row - rhs)^2`` to the QUBO.

    With d = rhs - row.constant the expansion contributes a_i(a_i - 2d) on
    the diagonal, 2 a_i a_j on couplers, and d^2 to the offset, all times
    the weight.
    """
    idx = {label: q.index_of(label) for label in row.coeffs}
    d = float(rhs) - row.constant
    w = P.weight
    items = sorted(row.coeffs.items(), key=lambda kv: idx[kv[0]])
    for pos, (label, a) in enumerate(items):
        i = idx[label]
        q.add_term(i, i, w * a * (a - 2.0 * d))
        for other, b in items[pos + 1 :]:
            q.add_term(i, idx[other], 2.0 * w * a * b)
    q.offset += w * d * d
    return q


def inequality_to_equality(
    row: LinearExpr,
    rhs: float,
    slack_lo: float,
    slack_hi: float,
    p: int,
    slack_prefix: str,
) -> tuple[LinearExpr, BinaryEncoding]:
    """Rewrite ``row <= rhs`` as ``row + s = rhs`` with a discretized slack.

    The slack s in [slack_lo, slack_hi] is encoded on fresh bit labels
    ``slack_prefix[i]``; callers register those labels before penalizing the
    returned equality row.  Bounds must already cover the attainable range
    of ``rhs - row``.
    """
    enc = encode_bounds(slack_lo, slack_hi, p)
    labels = [f"{slack_prefix}[{i}]" for i in range(enc.bit_count)]
    slack_expr = LinearExpr.combination(labels, enc.coefficients, enc.offset)
    return row + slack_expr, enc


def normalize(q: Qubo) -> tuple[Qubo, float]:
    """Divide all coefficients (and the offset) by the largest magnitude.

    The argmin set is unchanged since energies are scaled uniformly.
    """
    scale = q.max_abs_coefficient()
    if scale == 0.0:
        raise ValueError("cannot normalize an all-zero QUBO")
    out = q.copy()
    out.terms = {ij: v / scale for ij, v in q.terms.items()}
    out.offset = q.offset / scale
    return out, scale
