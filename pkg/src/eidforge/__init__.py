"""eidforge: generate and verify exactly solvable second-order linear ODEs.

The package builds infinite sequences of solvable equations y'' + A(x) y = 0
from standard seeds via first-order (Darboux-type) transformations, emits
closed-form general solutions, and numerically verifies every emitted
identity and solution against an independent oracle.

The usual entry points:

    from eidforge import FamilySpec, GenerateRequest, generate, emit
    problem = generate(GenerateRequest(FamilySpec("hyperbolic", n=1)))
    print(emit(problem, "latex"))
"""

from .eid import GeneratedProblem, NormalODE, chain, eid_step
from .families import FamilySpec, degenerate_solution, potential, seed_solution
from .generate import GenerateRequest, ProblemRecord, emit, generate, record
from .verify import VerificationReport, residual, wronskian_check

__version__ = "0.1.0"

__all__ = [
    "FamilySpec",
    "GenerateRequest",
    "GeneratedProblem",
    "NormalODE",
    "ProblemRecord",
    "VerificationReport",
    "chain",
    "degenerate_solution",
    "eid_step",
    "emit",
    "generate",
    "potential",
    "record",
    "residual",
    "seed_solution",
    "wronskian_check",
]
