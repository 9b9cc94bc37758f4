"""Data model for mixed-binary linear programs.

A program minimizes ``c @ x + c_cont @ y`` over binary ``x`` and continuous
``y`` subject to ``G x + G_cont y <= h`` and ``A x + A_cont y = b``.  All
matrices are stored dense; instances in this project are small.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MixedBinaryProgram",
    "Assignment",
    "FeasibilityReport",
    "MasterSkeleton",
    "SubproblemTemplate",
    "DimensionError",
    "evaluate",
    "check_feasibility",
    "split",
]

DEFAULT_FEASIBILITY_TOL = 1e-6


class DimensionError(ValueError):
    """Raised when vector/matrix shapes are mutually inconsistent."""


def _as_matrix(value, rows: int, cols: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.size == 0 and rows * cols == 0:
        arr = arr.reshape(rows, cols)
    if arr.shape != (rows, cols):
        raise DimensionError(f"{name} must have shape ({rows}, {cols}), got {arr.shape}")
    return arr


@dataclass(frozen=True)
class MixedBinaryProgram:
    """Coefficient data of a mixed-binary linear program.

    Shapes: ``c`` (n,), ``c_cont`` (m,), ``G`` (p, n), ``G_cont`` (p, m),
    ``h`` (p,), ``A`` (r, n), ``A_cont`` (r, m), ``b`` (r,).
    """

    c: np.ndarray
    c_cont: np.ndarray
    G: np.ndarray
    G_cont: np.ndarray
    h: np.ndarray
    A: np.ndarray
    A_cont: np.ndarray
    b: np.ndarray
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        c_cont = np.atleast_1d(np.asarray(self.c_cont, dtype=float))
        h = np.atleast_1d(np.asarray(self.h, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        n, m, p, r = c.size, c_cont.size, h.size, b.size
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "c_cont", c_cont)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "G", _as_matrix(self.G, p, n, "G"))
        object.__setattr__(self, "G_cont", _as_matrix(self.G_cont, p, m, "G_cont"))
        object.__setattr__(self, "A", _as_matrix(self.A, r, n, "A"))
        object.__setattr__(self, "A_cont", _as_matrix(self.A_cont, r, m, "A_cont"))
        for name in ("c", "c_cont", "G", "G_cont", "h", "A", "A_cont", "b"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"non-finite coefficients in {name}")
        if self.names is not None:
            names = tuple(self.names)
            if len(names) != n:
                raise DimensionError(f"names must have length {n}, got {len(names)}")
            object.__setattr__(self, "names", names)

    @property
    def num_binary(self) -> int:
        return self.c.size

    @property
    def num_continuous(self) -> int:
        return self.c_cont.size

    @property
    def num_inequalities(self) -> int:
        return self.h.size

    @property
    def num_equalities(self) -> int:
        return self.b.size

    def to_dict(self) -> dict:
        d = {
            "c": self.c.tolist(),
            "c_cont": self.c_cont.tolist(),
            "G": self.G.tolist(),
            "G_cont": self.G_cont.tolist(),
            "h": self.h.tolist(),
            "A": self.A.tolist(),
            "A_cont": self.A_cont.tolist(),
            "b": self.b.tolist(),
            "names": list(self.names) if self.names is not None else None,
        }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MixedBinaryProgram":
        return cls(
            c=np.asarray(d["c"], dtype=float),
            c_cont=np.asarray(d["c_cont"], dtype=float),
            G=np.asarray(d["G"], dtype=float),
            G_cont=np.asarray(d["G_cont"], dtype=float),
            h=np.asarray(d["h"], dtype=float),
            A=np.asarray(d["A"], dtype=float),
            A_cont=np.asarray(d["A_cont"], dtype=float),
            b=np.asarray(d["b"], dtype=float),
            names=d.get("names"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "MixedBinaryProgram":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class Assignment:
    """A candidate solution: binary vector ``x`` and continuous vector ``y``."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        y = np.atleast_1d(np.asarray(self.y, dtype=float)) if np.size(self.y) else np.zeros(0)
        if not np.all((x == 0.0) | (x == 1.0)):
            raise ValueError("x entries must be 0 or 1")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    max_equality_violation: float
    max_inequality_violation: float


@dataclass(frozen=True)
class MasterSkeleton:
    """Binary-side data of the decomposition: objective coefficients only."""

    c: np.ndarray

    @property
    def num_binary(self) -> int:
        return self.c.size


@dataclass(frozen=True)
class SubproblemTemplate:
    """Continuous-side data with ``x`` left as a parameter.

    Fixing ``x`` yields the linear program
    ``min c_cont @ y  s.t.  G_cont y <= h - G x,  A_cont y = b - A x``.
    ``degenerate`` flags an empty continuous block (m = 0).
    """

    c_cont: np.ndarray
    G: np.ndarray
    G_cont: np.ndarray
    h: np.ndarray
    A: np.ndarray
    A_cont: np.ndarray
    b: np.ndarray
    degenerate: bool = field(default=False)

    @property
    def num_binary(self) -> int:
        return self.G.shape[1]

    @property
    def num_continuous(self) -> int:
        return self.c_cont.size


def _check_assignment(prog: MixedBinaryProgram, a: Assignment) -> None:
    if a.x.size != prog.num_binary or a.y.size != prog.num_continuous:
        raise DimensionError(
            f"assignment shape ({a.x.size}, {a.y.size}) does not match "
            f"program ({prog.num_binary}, {prog.num_continuous})"
        )


def evaluate(prog: MixedBinaryProgram, a: Assignment) -> float:
    """Objective value ``c @ x + c_cont @ y``."""
    _check_assignment(prog, a)
    return float(prog.c @ a.x + prog.c_cont @ a.y)


def check_feasibility(
    prog: MixedBinaryProgram, a: Assignment, tol: float = DEFAULT_FEASIBILITY_TOL
) -> FeasibilityReport:
    """Constraint violations of an assignment.

    Equality violation is the max absolute residual of ``A x + A_cont y - b``;
    inequality violation is the max positive part of ``G x + G_cont y - h``.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    _check_assignment(prog, a)
    eq_violation = 0.0
    if prog.num_equalities:
        eq_violation = float(np.max(np.abs(prog.A @ a.x + prog.A_cont @ a.y - prog.b)))
    ineq_violation = 0.0
    if prog.num_inequalities:
        residual = prog.G @ a.x + prog.G_cont @ a.y - prog.h
        ineq_violation = float(max(0.0, np.max(residual)))
    feasible = eq_violation <= tol and ineq_violation <= tol
    return FeasibilityReport(feasible, eq_violation, ineq_violation)


def split(prog: MixedBinaryProgram) -> tuple[MasterSkeleton, SubproblemTemplate]:
    """Split a program into the binary master skeleton and the continuous template."""
    master = MasterSkeleton(c=prog.c.copy())
    template = SubproblemTemplate(
        c_cont=prog.c_cont.copy(),
        G=prog.G.copy(),
        G_cont=prog.G_cont.copy(),
        h=prog.h.copy(),
        A=prog.A.copy(),
        A_cont=prog.A_cont.copy(),
        b=prog.b.copy(),
        degenerate=prog.num_continuous == 0,
    )
    return master, template
