"""Refinement type checker for a small first-order functional language.

Subtyping obligations become logical implications over quantifier-free
linear integer arithmetic, emitted as SMT-LIB scripts and discharged by
an external solver; counterexample models come back as diagnostics.
"""

from .logic import (
    BaseType,
    LinearTerm,
    Predicate,
    SmtScript,
    print_predicate,
    translate_vc,
)
from .surface import (
    SurfaceProgram,
    expand_aliases,
    parse,
    print_program,
)
from .typesys import (
    CheckResult,
    TypingContext,
    VerificationCondition,
    check,
    check_program,
    subtype,
    synth,
    well_formed,
)
from .solver import (
    Invalid,
    SolverConfig,
    Unknown,
    Valid,
    brute_force,
    eval_predicate_ground,
    parse_model,
    resolve_solver,
    solve,
)
from .evaluator import erase, erase_program, evaluate

__version__ = "0.1.0"

__all__ = [
    "BaseType",
    "LinearTerm",
    "Predicate",
    "SmtScript",
    "print_predicate",
    "translate_vc",
    "SurfaceProgram",
    "expand_aliases",
    "parse",
    "print_program",
    "CheckResult",
    "TypingContext",
    "VerificationCondition",
    "check",
    "check_program",
    "subtype",
    "synth",
    "well_formed",
    "Invalid",
    "SolverConfig",
    "Unknown",
    "Valid",
    "brute_force",
    "eval_predicate_ground",
    "parse_model",
    "resolve_solver",
    "solve",
    "erase",
    "erase_program",
    "evaluate",
    "__version__",
]
