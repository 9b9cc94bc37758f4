"""Hybrid Benders-style decomposition with a QUBO master problem.

The package splits a mixed-binary linear program into a binary master,
compiled to a QUBO and handed to a pluggable sampler, and an exact LP
subproblem whose duals generate optimality cuts.  Includes a transmission
expansion instance generator and a benchmark harness.
"""

from .engine import (
    AlphaBounds,
    Cut,
    IterationRecord,
    RunConfig,
    RunResult,
    StopReason,
    run,
)
from .milp import (
    Assignment,
    MixedBinaryProgram,
    SubproblemTemplate,
    check_feasibility,
    evaluate,
    split,
)
from .qubo import BinaryEncoding, LinearExpr, PenaltySpec, Qubo, encode_bounds
from .samplers import Sample, SampleSet, SamplerConfig, pick_best, solve_exact, solve_sa
from .simplex import LpSolution, LpStatus, compute_sensitivities, solve_lp
from .tnep import TnepInstance, generate, scale_units, to_milp

__version__ = "0.1.0"

__all__ = [
    "AlphaBounds",
    "Assignment",
    "BinaryEncoding",
    "Cut",
    "IterationRecord",
    "LinearExpr",
    "LpSolution",
    "LpStatus",
    "MixedBinaryProgram",
    "PenaltySpec",
    "Qubo",
    "RunConfig",
    "RunResult",
    "Sample",
    "SampleSet",
    "SamplerConfig",
    "StopReason",
    "SubproblemTemplate",
    "TnepInstance",
    "check_feasibility",
    "compute_sensitivities",
    "encode_bounds",
    "evaluate",
    "generate",
    "pick_best",
    "run",
    "scale_units",
    "solve_exact",
    "solve_lp",
    "solve_sa",
    "split",
    "to_milp",
    "__version__",
]
