"""Predicate language, linear terms, and SMT-LIB script emission.

A verification condition (hypotheses entail goal) is discharged by
asserting its hypotheses together with the negated goal and asking a
solver whether that conjunction is unsatisfiable: the negation is
unsatisfiable exactly when the implication is valid.

The emitted byte format is normative and covered by golden tests:
one command per line, `set-logic` first, `check-sat` / `get-model`
last, and exactly one assertion holding the negated goal, in last
position.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Mapping, TYPE_CHECKING

if TYPE_CHECKING:
    from .typesys import VerificationCondition

__all__ = [
    "BaseType",
    "LinearTerm",
    "Predicate",
    "BoolConst",
    "PVar",
    "Cmp",
    "Not",
    "And",
    "Or",
    "Implies",
    "TRUE",
    "FALSE",
    "SmtScript",
    "UnsupportedPredicateError",
    "translate_vc",
    "print_predicate",
    "print_linear",
    "format_predicate",
    "format_linear",
    "pred_free_vars",
    "rename_pred_var",
    "subst_pred_linear",
    "subst_pred_bool",
    "evaluate_predicate",
    "evaluate_linear",
]

CMP_OPS = ("==", "/=", "<", "<=", ">", ">=")


class BaseType(enum.Enum):
    """Primitive types. Nat is encoded as SMT Int plus a `>= 0` side condition."""

    NAT = "Nat"
    INT = "Int"
    BOOL = "Bool"

    @property
    def smt_sort(self) -> str:
        return "Bool" if self is BaseType.BOOL else "Int"

    def __str__(self) -> str:
        return self.value


# ---------------------------------------------------------------------------
# Linear terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearTerm:
    """Sum of integer-coefficient monomials plus a constant.

    Monomials keep first-occurrence order and never carry a zero
    coefficient, so printing is deterministic and emitted scripts are
    byte-stable.
    """

    monomials: tuple[tuple[str, int], ...] = ()
    const: int = 0

    @staticmethod
    def var(name: str) -> "LinearTerm":
        return LinearTerm(((name, 1),), 0)

    @staticmethod
    def of_const(value: int) -> "LinearTerm":
        return LinearTerm((), value)

    @staticmethod
    def _merge(pairs: Iterable[tuple[str, int]]) -> tuple[tuple[str, int], ...]:
        acc: dict[str, int] = {}
        for name, coeff in pairs:
            acc[name] = acc.get(name, 0) + coeff
        return tuple((n, c) for n, c in acc.items() if c != 0)

    def add(self, other: "LinearTerm") -> "LinearTerm":
        return LinearTerm(
            self._merge(self.monomials + other.monomials), self.const + other.const
        )

    def sub(self, other: "LinearTerm") -> "LinearTerm":
        return self.add(other.scale(-1))

    def scale(self, k: int) -> "LinearTerm":
        if k == 0:
            return LinearTerm((), 0)
        return LinearTerm(tuple((n, c * k) for n, c in self.monomials), self.const * k)

    def shift(self, k: int) -> "LinearTerm":
        return LinearTerm(self.monomials, self.const + k)

    def subst(self, name: str, replacement: "LinearTerm") -> "LinearTerm":
        acc = LinearTerm((), self.const)
        for n, c in self.monomials:
            if n == name:
                acc = acc.add(replacement.scale(c))
            else:
                acc = acc.add(LinearTerm(((n, c),), 0))
        return acc

    def rename(self, old: str, new: str) -> "LinearTerm":
        return self.subst(old, LinearTerm.var(new))

    def free_vars(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.monomials)

    def as_var(self) -> str | None:
        """The variable name if this term is a bare variable, else None."""
        if self.const == 0 and len(self.monomials) == 1 and self.monomials[0][1] == 1:
            return self.monomials[0][0]
        return None

    def evaluate(self, model: Mapping[str, int]) -> int:
        return sum(c * int(model[n]) for n, c in self.monomials) + self.const


# ---------------------------------------------------------------------------
# Predicates
# ---------------------------------------------------------------------------


class Predicate:
    """Quantifier-free formula over linear integer arithmetic and booleans."""

    __slots__ = ()


@dataclass(frozen=True)
class BoolConst(Predicate):
    value: bool


@dataclass(frozen=True)
class PVar(Predicate):
    name: str


@dataclass(frozen=True)
class Cmp(Predicate):
    op: str  # one of CMP_OPS
    lhs: LinearTerm
    rhs: LinearTerm


@dataclass(frozen=True)
class Not(Predicate):
    arg: Predicate


@dataclass(frozen=True)
class And(Predicate):
    args: tuple[Predicate, ...]


@dataclass(frozen=True)
class Or(Predicate):
    args: tuple[Predicate, ...]


@dataclass(frozen=True)
class Implies(Predicate):
    lhs: Predicate
    rhs: Predicate


TRUE = BoolConst(True)
FALSE = BoolConst(False)


def pred_free_vars(p: Predicate) -> tuple[str, ...]:
    """Free variables of a predicate in first-occurrence order."""
    out: dict[str, None] = {}

    def walk(q: Predicate) -> None:
        match q:
            case BoolConst():
                pass
            case PVar(name):
                out.setdefault(name)
            case Cmp(_, lhs, rhs):
                for n in lhs.free_vars() + rhs.free_vars():
                    out.setdefault(n)
            case Not(arg):
                walk(arg)
            case And(args) | Or(args):
                for a in args:
                    walk(a)
            case Implies(lhs, rhs):
                walk(lhs)
                walk(rhs)

    walk(p)
    return tuple(out)


def _map_atoms(p: Predicate, on_var, on_cmp) -> Predicate:
    match p:
        case BoolConst():
            return p
        case PVar():
            return on_var(p)
        case Cmp():
            return on_cmp(p)
        case Not(arg):
            return Not(_map_atoms(arg, on_var, on_cmp))
        case And(args):
            return And(tuple(_map_atoms(a, on_var, on_cmp) for a in args))
        case Or(args):
            return Or(tuple(_map_atoms(a, on_var, on_cmp) for a in args))
        case Implies(lhs, rhs):
            return Implies(
                _map_atoms(lhs, on_var, on_cmp), _map_atoms(rhs, on_var, on_cmp)
            )
    raise TypeError(f"not a predicate: {p!r}")


def rename_pred_var(p: Predicate, old: str, new: str) -> Predicate:
    """Rename a variable, whatever its sort, throughout a predicate."""
    return _map_atoms(
        p,
        lambda v: PVar(new) if v.name == old else v,
        lambda c: Cmp(c.op, c.lhs.rename(old, new), c.rhs.rename(old, new)),
    )


def subst_pred_linear(p: Predicate, name: str, term: LinearTerm) -> Predicate:
    """Substitute an integer-sorted variable by a linear term."""

    def on_var(v: PVar) -> Predicate:
        if v.name == name:
            raise UnsupportedPredicateError(
                f"integer substitution into boolean position of {name}"
            )
        return v

    return _map_atoms(
        p,
        on_var,
        lambda c: Cmp(c.op, c.lhs.subst(name, term), c.rhs.subst(name, term)),
    )


def subst_pred_bool(p: Predicate, name: str, value: bool) -> Predicate:
    """Substitute a boolean-sorted variable by a constant."""

    def on_cmp(c: Cmp) -> Predicate:
        if name in c.lhs.free_vars() or name in c.rhs.free_vars():
            raise UnsupportedPredicateError(
                f"boolean substitution into integer position of {name}"
            )
        return c

    return _map_atoms(
        p, lambda v: BoolConst(value) if v.name == name else v, on_cmp
    )


def bool_eq(a: Predicate, b: Predicate) -> Predicate:
    """Boolean equivalence, spelled with implications (the atom grammar has no iff)."""
    return And((Implies(a, b), Implies(b, a)))


def evaluate_linear(t: LinearTerm, model: Mapping[str, int]) -> int:
    return t.evaluate(model)


def evaluate_predicate(p: Predicate, model: Mapping[str, object]) -> bool:
    """Ground truth-value of a predicate under a total assignment."""
    match p:
        case BoolConst(value):
            return value
        case PVar(name):
            return bool(model[name])
        case Cmp(op, lhs, rhs):
            a = lhs.evaluate(model)  # type: ignore[arg-type]
            b = rhs.evaluate(model)  # type: ignore[arg-type]
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
            raise ValueError(f"bad comparison operator {op!r}")
        case Not(arg):
            return not evaluate_predicate(arg, model)
        case And(args):
            return all(evaluate_predicate(a, model) for a in args)
        case Or(args):
            return any(evaluate_predicate(a, model) for a in args)
        case Implies(lhs, rhs):
            return (not evaluate_predicate(lhs, model)) or evaluate_predicate(rhs, model)
    raise TypeError(f"not a predicate: {p!r}")


# ---------------------------------------------------------------------------
# SMT-LIB printing
# ---------------------------------------------------------------------------


def print_linear(t: LinearTerm) -> str:
    """Render a linear term as a fully parenthesized SMT-LIB s-expression.

    Positive addends join under `+` in stored order with the constant
    last; negative addends subtract from that via n-ary `-`.
    """
    pos: list[str] = []
    neg: list[str] = []
    for name, coeff in t.monomials:
        target = pos if coeff > 0 else neg
        k = abs(coeff)
        target.append(name if k == 1 else f"(* {k} {name})")
    if t.const > 0:
        pos.append(str(t.const))
    elif t.const < 0:
        neg.append(str(-t.const))
    if not pos:
        pos = ["0"]
    base = pos[0] if len(pos) == 1 else "(+ " + " ".join(pos) + ")"
    if not neg:
        return base
    return "(- " + " ".join([base] + neg) + ")"


def print_predicate(p: Predicate) -> str:
    """Render a predicate as SMT-LIB text; `/=` prints as a negated equality."""
    match p:
        case BoolConst(value):
            return "true" if value else "false"
        case PVar(name):
            return name
        case Cmp(op, lhs, rhs):
            a, b = print_linear(lhs), print_linear(rhs)
            if op == "==":
                return f"(= {a} {b})"
            if op == "/=":
                return f"(not (= {a} {b}))"
            return f"({op} {a} {b})"
        case Not(arg):
            return f"(not {print_predicate(arg)})"
        case And(args):
            return "(and " + " ".join(print_predicate(a) for a in args) + ")"
        case Or(args):
            return "(or " + " ".join(print_predicate(a) for a in args) + ")"
        case Implies(lhs, rhs):
            return f"(=> {print_predicate(lhs)} {print_predicate(rhs)})"
    raise TypeError(f"not a predicate: {p!r}")


# ---------------------------------------------------------------------------
# Surface-syntax formatting (for diagnostics and the program printer)
# ---------------------------------------------------------------------------


def format_linear(t: LinearTerm) -> str:
    if not t.monomials:
        return str(t.const)
    parts: list[str] = []
    for i, (name, coeff) in enumerate(t.monomials):
        if i == 0:
            if coeff == 1:
                parts.append(name)
            elif coeff == -1:
                parts.append(f"0 - {name}")
            else:
                parts.append(f"{coeff} * {name}")
            continue
        sign = " + " if coeff > 0 else " - "
        k = abs(coeff)
        parts.append(sign + (name if k == 1 else f"{k} * {name}"))
    if t.const > 0:
        parts.append(f" + {t.const}")
    elif t.const < 0:
        parts.append(f" - {-t.const}")
    return "".join(parts)


def format_predicate(p: Predicate, parent_prec: int = 0) -> str:
    """Infix rendering matching the surface grammar (=> 1, || 2, && 3, ! 4)."""

    def wrap(text: str, prec: int) -> str:
        return f"({text})" if prec < parent_prec else text

    match p:
        case BoolConst(value):
            return "true" if value else "false"
        case PVar(name):
            return name
        case Cmp(op, lhs, rhs):
            return wrap(f"{format_linear(lhs)} {op} {format_linear(rhs)}", 5)
        case Not(arg):
            return wrap(f"!{format_predicate(arg, 5)}", 4)
        case And(args):
            return wrap(" && ".join(format_predicate(a, 4) for a in args), 3)
        case Or(args):
            return wrap(" || ".join(format_predicate(a, 3) for a in args), 2)
        case Implies(lhs, rhs):
            return wrap(
                f"{format_predicate(lhs, 2)} => {format_predicate(rhs, 1)}", 1
            )
    raise TypeError(f"not a predicate: {p!r}")


# ---------------------------------------------------------------------------
# Script emission
# ---------------------------------------------------------------------------


class UnsupportedPredicateError(Exception):
    """A non-linear or ill-sorted atom survived the earlier checks."""


@dataclass(frozen=True)
class SmtScript:
    """A self-contained SMT-LIB v2 script for one verification condition.

    The last assertion is always the negated goal; there is no push/pop
    and no incremental session, so golden tests can compare raw bytes.
    """

    logic_name: str
    declarations: tuple[tuple[str, BaseType], ...]
    assertions: tuple[Predicate, ...]

    @property
    def text(self) -> str:
        lines = [f"(set-logic {self.logic_name})"]
        for name, base in self.declarations:
            lines.append(f"(declare-const {name} {base.smt_sort})")
        for a in self.assertions:
            lines.append(f"(assert {print_predicate(a)})")
        lines.append("(check-sat)")
        lines.append("(get-model)")
        return "\n".join(lines) + "\n"

    @property
    def negated_goal(self) -> Predicate:
        return self.assertions[-1]


def translate_vc(vc: "VerificationCondition") -> SmtScript:
    """Translate one verification condition into its SMT-LIB script.

    Each declaration becomes a `declare-const`; every Nat-sorted name
    additionally asserts `name >= 0`; hypothesis facts follow in order;
    the negated goal is asserted last.
    """
    declared = {name for name, _ in vc.decls}
    for fact in vc.facts + (vc.goal,):
        loose = [v for v in pred_free_vars(fact) if v not in declared]
        if loose:
            raise UnsupportedPredicateError(
                f"undeclared symbol {loose[0]!r} in verification condition"
            )
    zero = LinearTerm.of_const(0)
    side = tuple(
        Cmp(">=", LinearTerm.var(name), zero)
        for name, base in vc.decls
        if base is BaseType.NAT
    )
    assertions = side + tuple(vc.facts) + (Not(vc.goal),)
    return SmtScript("QF_LIA", tuple(vc.decls), assertions)
