"""Solver client and independent brute-force validity oracle.

`solve` runs one fresh external SMT solver process per script, in batch
mode: the full script goes to standard input and standard output is
read to EOF. The first output line is sat/unsat/unknown; on sat the
rest is the model. unsat means the negated implication cannot be
satisfied, hence the condition is Valid; sat yields an Invalid verdict
carrying the counterexample model.

`brute_force` enumerates assignments inside a box and is deliberately
independent of the solver path; it backs the oracle-agreement and
counterexample-faithfulness checks.
"""

from __future__ import annotations

import os
import shutil
import subprocess
import sys
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import sexpr
from .logic import (
    And,
    BaseType,
    BoolConst,
    Cmp,
    Implies,
    Not,
    Or,
    Predicate,
    PVar,
    SmtScript,
    evaluate_predicate,
)
from .typesys import VerificationCondition

__all__ = [
    "Valid",
    "Invalid",
    "Unknown",
    "SolverVerdict",
    "SolverConfig",
    "SolverSpawnError",
    "ModelParseError",
    "TooManyVariablesError",
    "MissingVariableError",
    "solve",
    "parse_model",
    "brute_force",
    "eval_predicate_ground",
    "resolve_solver",
    "bundled_solver_config",
]

Model = dict[str, "int | bool"]


@dataclass(frozen=True)
class Valid:
    """The implication holds; `bounded` marks oracle results that only
    swept a finite box."""

    bounded: bool = False


@dataclass(frozen=True)
class Invalid:
    model: Mapping[str, int | bool]


@dataclass(frozen=True)
class Unknown:
    reason: str  # "timeout" | "solver-said-unknown" | "solver-error(...)"


SolverVerdict = Valid | Invalid | Unknown


@dataclass(frozen=True)
class SolverConfig:
    executable: str
    args: tuple[str, ...] = ()
    timeout_ms: int = 5000
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.timeout_ms <= 0:
            raise ValueError("timeout must be positive")

    @property
    def identity(self) -> str:
        return " ".join([self.executable, *self.args])


class SolverSpawnError(Exception):
    def __init__(self, path: str, cause: Exception):
        self.path = path
        super().__init__(f"could not start solver {path!r}: {cause}")


class ModelParseError(Exception):
    def __init__(self, fragment: str):
        self.fragment = fragment
        super().__init__(f"unparseable solver model: {fragment!r}")


class TooManyVariablesError(Exception):
    pass


class MissingVariableError(Exception):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"model does not cover {name!r}")


# ---------------------------------------------------------------------------
# External solver
# ---------------------------------------------------------------------------


def solve(script: SmtScript, cfg: SolverConfig) -> SolverVerdict:
    """Discharge one script with a fresh solver process.

    Raises SolverSpawnError / ModelParseError rather than guessing; the
    caller maps those to Unknown so they are never mistaken for Valid.
    The child is always reaped, including on timeout.
    """
    cmd = [cfg.executable, *cfg.args]
    try:
        proc = subprocess.Popen(
            cmd,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            text=True,
        )
    except OSError as exc:
        raise SolverSpawnError(cfg.executable, exc) from exc
    try:
        out, _ = proc.communicate(script.text, timeout=cfg.timeout_ms / 1000.0)
    except subprocess.TimeoutExpired:
        proc.kill()
        proc.communicate()
        return Unknown("timeout")
    except BaseException:
        proc.kill()
        proc.communicate()
        raise
    lines = out.splitlines()
    status_index = next(
        (i for i, ln in enumerate(lines) if ln.strip()), len(lines)
    )
    status = lines[status_index].strip() if status_index < len(lines) else ""
    if status == "unsat":
        return Valid()
    if status == "unknown":
        return Unknown("solver-said-unknown")
    if status == "sat":
        rest = "\n".join(lines[status_index + 1 :])
        return Invalid(parse_model(rest, script.declarations))
    raise ModelParseError(out if out else "<no output>")


def parse_model(raw: str, declared: Sequence[tuple[str, BaseType]]) -> Model:
    """Extract one value per declared symbol from a get-model response.

    Accepts the `(define-fun name () Sort value)` shape, with negative
    integers written `(- k)`; a `(model ...)` wrapper is tolerated.
    """
    try:
        forms = sexpr.parse_all(raw)
    except sexpr.SExprError as exc:
        raise ModelParseError(raw) from exc

    defs: dict[str, int | bool] = {}

    def parse_value(v) -> int | bool:
        if isinstance(v, str):
            if v == "true":
                return True
            if v == "false":
                return False
            if v.lstrip("-").isdigit():
                return int(v)
        elif isinstance(v, list) and len(v) == 2 and v[0] == "-":
            inner = parse_value(v[1])
            if isinstance(inner, bool) or not isinstance(inner, int):
                raise ModelParseError(str(v))
            return -inner
        raise ModelParseError(str(v))

    def collect(form) -> None:
        if not isinstance(form, list):
            return
        if form and form[0] == "define-fun":
            if len(form) != 5 or form[2] != []:
                raise ModelParseError(str(form))
            _, name, _, sort, value = form
            defs[name] = parse_value(value)
            if sort == "Bool" and not isinstance(defs[name], bool):
                raise ModelParseError(str(form))
            if sort == "Int" and isinstance(defs[name], bool):
                raise ModelParseError(str(form))
            return
        for sub in form:
            collect(sub)

    for form in forms:
        collect(form)

    model: Model = {}
    for name, base in declared:
        if name not in defs:
            raise ModelParseError(f"model is missing {name!r}")
        value = defs[name]
        if base is BaseType.BOOL and not isinstance(value, bool):
            raise ModelParseError(f"{name} should be Bool, got {value!r}")
        if base is not BaseType.BOOL and isinstance(value, bool):
            raise ModelParseError(f"{name} should be Int, got {value!r}")
        model[name] = value
    return model


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------

_ORACLE_MAX_VARS = 6


def _np_linear(t, arrays):
    acc = np.int64(t.const)
    for name, coeff in t.monomials:
        acc = acc + np.int64(coeff) * arrays[name]
    return acc


def _np_pred(p: Predicate, arrays):
    match p:
        case BoolConst(value):
            return np.bool_(value)
        case PVar(name):
            return arrays[name]
        case Cmp(op, lhs, rhs):
            a, b = _np_linear(lhs, arrays), _np_linear(rhs, arrays)
            match op:
                case "==":
                    return a == b
                case "/=":
                    return a != b
                case "<":
                    return a < b
                case "<=":
                    return a <= b
                case ">":
                    return a > b
                case ">=":
                    return a >= b
        case Not(arg):
            return ~_np_pred(arg, arrays)
        case And(args):
            acc = np.bool_(True)
            for a in args:
                acc = acc & _np_pred(a, arrays)
            return acc
        case Or(args):
            acc = np.bool_(False)
            for a in args:
                acc = acc | _np_pred(a, arrays)
            return acc
        case Implies(lhs, rhs):
            return ~_np_pred(lhs, arrays) | _np_pred(rhs, arrays)
    raise TypeError(f"not a predicate: {p!r}")


def _domain(base: BaseType, bound: int) -> np.ndarray:
    if base is BaseType.NAT:
        return np.arange(0, bound + 1, dtype=np.int64)
    if base is BaseType.INT:
        return np.arange(-bound, bound + 1, dtype=np.int64)
    return np.array([False, True])


def brute_force(vc: VerificationCondition, bound: int) -> SolverVerdict:
    """Exhaustively search the box for a counterexample.

    Nat variables range over [0, bound], Int over [-bound, bound], Bool
    over {false, true}; the first counterexample in lexicographic order
    of the declarations wins. No counterexample means Valid within the
    bound, tagged as such.
    """
    if len(vc.decls) > _ORACLE_MAX_VARS:
        raise TooManyVariablesError(
            f"{len(vc.decls)} declared variables exceed the oracle limit of {_ORACLE_MAX_VARS}"
        )
    hypotheses = And(vc.facts) if vc.facts else BoolConst(True)
    violation = And((hypotheses, Not(vc.goal)))
    if not vc.decls:
        if evaluate_predicate(violation, {}):
            return Invalid({})
        return Valid(bounded=True)

    names = [name for name, _ in vc.decls]
    domains = [_domain(base, bound) for _, base in vc.decls]
    inner_doms = domains[1:]
    inner_shape = tuple(len(d) for d in inner_doms)
    inner_arrays = {}
    for i, dom in enumerate(inner_doms):
        shape = [1] * len(inner_doms)
        shape[i] = len(dom)
        inner_arrays[names[i + 1]] = dom.reshape(shape)

    for v0 in domains[0]:
        arrays = {names[0]: v0, **inner_arrays}
        mask = np.broadcast_to(_np_pred(violation, arrays), inner_shape)
        if inner_shape == ():
            if bool(mask):
                return Invalid({names[0]: _pyval(v0)})
            continue
        if mask.any():
            flat = int(np.argmax(mask))
            idx = np.unravel_index(flat, inner_shape)
            model: Model = {names[0]: _pyval(v0)}
            for i, dom in enumerate(inner_doms):
                model[names[i + 1]] = _pyval(dom[idx[i]])
            return Invalid(model)
    return Valid(bounded=True)


def _pyval(x) -> int | bool:
    return bool(x) if isinstance(x, (bool, np.bool_)) else int(x)


def eval_predicate_ground(p: Predicate, model: Mapping[str, int | bool]) -> bool:
    """Ground evaluation shared by the oracle and the counterexample
    faithfulness checks."""
    try:
        return evaluate_predicate(p, model)
    except KeyError as exc:
        raise MissingVariableError(exc.args[0]) from exc


# ---------------------------------------------------------------------------
# Solver discovery
# ---------------------------------------------------------------------------

_KNOWN_SOLVERS: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("z3", ("-in",)),
    ("cvc5", ("--lang", "smt2")),
)


def bundled_solver_config(timeout_ms: int = 5000, jobs: int = 1) -> SolverConfig:
    """The reference solver shipped with this package, run as a child
    process exactly like an external one."""
    from . import liasolver

    return SolverConfig(
        sys.executable, (os.fspath(liasolver.__file__),), timeout_ms, jobs
    )


def resolve_solver(
    explicit: str | None = None,
    timeout_ms: int = 5000,
    jobs: int = 1,
    env: Mapping[str, str] | None = None,
) -> SolverConfig:
    """Pick the solver executable: `--solver` flag, then REFINE_SOLVER,
    then the first known solver on PATH, then the bundled fallback."""
    env = os.environ if env is None else env
    choice = explicit or env.get("REFINE_SOLVER")
    if choice:
        base = os.path.basename(choice)
        args = next((a for n, a in _KNOWN_SOLVERS if n == base), ())
        return SolverConfig(choice, args, timeout_ms, jobs)
    for name, args in _KNOWN_SOLVERS:
        found = shutil.which(name)
        if found:
            return SolverConfig(found, args, timeout_ms, jobs)
    return bundled_solver_config(timeout_ms, jobs)
