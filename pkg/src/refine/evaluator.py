"""Call-by-value interpreter with proof erasure and step counting.

Proof slots are never evaluated or inspected; erasure replaces them by
a unit placeholder before running. The step counter tallies beta
reductions plus match/if discriminations, which makes the cost
difference between constant-time predecessor code and a unary
reconstruction measurable.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from .logic import Predicate, evaluate_predicate, pred_free_vars
from .surface import (
    AliasDef,
    Annot,
    App,
    Arith,
    Auto,
    BoolLit,
    FunDef,
    If,
    IntLit,
    Lam,
    Let,
    Match,
    NatLit,
    Pair,
    ProofUnit,
    SurfaceProgram,
    Term,
    ValDef,
    Var,
)

__all__ = [
    "Value",
    "NatV",
    "IntV",
    "BoolV",
    "Closure",
    "ErasedPairV",
    "OpaquePairV",
    "EvalError",
    "OutOfFuelError",
    "erase",
    "erase_program",
    "evaluate",
]

DEFAULT_FUEL = 10**6


class Value:
    __slots__ = ()


@dataclass(frozen=True)
class NatV(Value):
    value: int

    def __post_init__(self) -> None:
        assert self.value >= 0, "NatV holds non-negative integers"


@dataclass(frozen=True)
class IntV(Value):
    value: int


@dataclass(frozen=True)
class BoolV(Value):
    value: bool


@dataclass(frozen=True)
class Closure(Value):
    param: str
    body: Term
    env: "_Env"


@dataclass(frozen=True)
class ErasedPairV(Value):
    """Refinement value after erasure; the proof slot is absent by
    construction."""

    value: Value


@dataclass(frozen=True)
class OpaquePairV(Value):
    """Reference-mode pair that carries the proof term opaquely, for
    checking that erasure does not change value components."""

    value: Value
    proof: Term


class EvalError(Exception):
    pass


class OutOfFuelError(EvalError):
    def __init__(self, limit: int):
        self.limit = limit
        super().__init__(f"evaluation exceeded {limit} steps")


# ---------------------------------------------------------------------------
# Erasure
# ---------------------------------------------------------------------------


def erase(e: Term) -> Term:
    """Replace every pair's proof component by the unit placeholder;
    nothing else changes."""
    match e:
        case Pair(value, _, span):
            return Pair(erase(value), ProofUnit(span), span)
        case Var() | NatLit() | IntLit() | BoolLit() | Auto() | ProofUnit():
            return e
        case Arith(op, args, sugar, span):
            return Arith(op, tuple(erase(a) for a in args), sugar, span)
        case App(fn, arg, span):
            return App(erase(fn), erase(arg), span)
        case Lam(param, ann, body, span):
            return Lam(param, ann, erase(body), span)
        case Let(name, bound, body, span):
            return Let(name, erase(bound), erase(body), span)
        case If(cond, a, b, span):
            return If(cond, erase(a), erase(b), span)
        case Match(scrutinee, zero_body, binder, suc_body, span):
            return Match(erase(scrutinee), erase(zero_body), binder, erase(suc_body), span)
        case Annot(term, ann, span):
            return Annot(erase(term), ann, span)
    raise TypeError(f"not a term: {e!r}")


def erase_program(p: SurfaceProgram) -> SurfaceProgram:
    items = []
    for item in p.items:
        match item:
            case FunDef(name, params, ret, body, span):
                items.append(FunDef(name, params, ret, erase(body), span))
            case ValDef(name, ty, term, span):
                items.append(ValDef(name, ty, erase(term), span))
            case _:
                items.append(item)
    return SurfaceProgram(tuple(items), source=p.source, path=p.path)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


class _Env:
    __slots__ = ("table", "parent")

    def __init__(self, table: dict, parent: "_Env | None" = None):
        self.table = table
        self.parent = parent

    def get(self, name: str) -> Value:
        env: _Env | None = self
        while env is not None:
            if name in env.table:
                return env.table[name]
            env = env.parent
        raise EvalError(f"unbound name {name!r} at run time")

    def child(self, name: str, value: Value) -> "_Env":
        return _Env({name: value}, self)


class _Machine:
    def __init__(self, fuel: int, carry_proofs: bool):
        self.fuel = fuel
        self.steps = 0
        self.carry_proofs = carry_proofs

    def tick(self) -> None:
        self.steps += 1
        if self.steps > self.fuel:
            raise OutOfFuelError(self.fuel)

    def eval(self, e: Term, env: _Env) -> Value:
        match e:
            case Var(name):
                return env.get(name)
            case NatLit(value):
                return NatV(value)
            case IntLit(value):
                return IntV(value)
            case BoolLit(value):
                return BoolV(value)
            case Arith(op, args):
                vals = [self.eval(a, env) for a in args]
                return self._arith(op, vals)
            case App(fn, arg):
                fval = self._strip(self.eval(fn, env))
                aval = self.eval(arg, env)
                if not isinstance(fval, Closure):
                    raise EvalError("applied a non-function value")
                self.tick()
                return self.eval(fval.body, fval.env.child(fval.param, aval))
            case Lam(param, _, body):
                return Closure(param, body, env)
            case Let(name, bound, body):
                return self.eval(body, env.child(name, self.eval(bound, env)))
            case If(cond, a, b):
                self.tick()
                branch = a if self._eval_pred(cond, env) else b
                return self.eval(branch, env)
            case Match(scrutinee, zero_body, binder, suc_body):
                k = self._as_int(self.eval(scrutinee, env))
                if k < 0:
                    raise EvalError("match on a negative number")
                self.tick()
                if k == 0:
                    return self.eval(zero_body, env)
                return self.eval(suc_body, env.child(binder, NatV(k - 1)))
            case Pair(value, proof):
                val = self.eval(value, env)
                if self.carry_proofs:
                    return OpaquePairV(val, proof)
                return ErasedPairV(val)
            case Annot(term, _):
                return self.eval(term, env)
            case Auto() | ProofUnit():
                raise EvalError("a proof slot reached evaluation")
        raise TypeError(f"not a term: {e!r}")

    def _arith(self, op: str, vals: list[Value]) -> Value:
        a, b = (self._as_int(v) for v in vals)
        if op == "+":
            result = a + b
        elif op == "-":
            result = a - b
        elif op == "*":
            result = a * b
        else:
            raise EvalError(f"bad arithmetic operator {op!r}")
        # subtraction is integer subtraction; it never claims Nat
        if op != "-" and result >= 0 and all(
            isinstance(self._strip(v), NatV) for v in vals
        ):
            return NatV(result)
        return IntV(result)

    @staticmethod
    def _strip(v: Value) -> Value:
        while isinstance(v, (ErasedPairV, OpaquePairV)):
            v = v.value
        return v

    def _as_int(self, v: Value) -> int:
        v = self._strip(v)
        if isinstance(v, (NatV, IntV)):
            return v.value
        raise EvalError(f"expected a number, got {type(v).__name__}")

    def _eval_pred(self, cond: Predicate, env: _Env) -> bool:
        model = {}
        for name in pred_free_vars(cond):
            v = self._strip(env.get(name))
            if isinstance(v, (NatV, IntV)):
                model[name] = v.value
            elif isinstance(v, BoolV):
                model[name] = v.value
            else:
                raise EvalError(f"{name!r} is not a base value in a condition")
        return evaluate_predicate(cond, model)


def _build_env(machine: _Machine, p: SurfaceProgram) -> _Env:
    env = _Env({})
    for item in p.items:
        match item:
            case AliasDef():
                continue
            case FunDef(name, params, _, body, _):
                fn: Term = body
                for pname, _ in reversed(params[1:]):
                    fn = Lam(pname, None, fn)
                env.table[name] = Closure(params[0][0], fn, env)
            case ValDef(name, _, term, _):
                env.table[name] = machine.eval(term, env)
    return env


def _unwrap(v: Value) -> Value:
    while isinstance(v, (ErasedPairV, OpaquePairV)):
        v = v.value
    return v


def evaluate(
    p: SurfaceProgram,
    entry: str,
    args: list[Value] | tuple[Value, ...] = (),
    fuel: int = DEFAULT_FUEL,
    carry_proofs: bool = False,
) -> tuple[Value, int]:
    """Evaluate `entry` applied to `args` and return (value, step count).

    The program should be type-checked (and normally erased) first.
    Runs in a dedicated thread with a large stack so that deep unary
    recursion does not hit the interpreter's C stack limit.
    """
    result: list = []

    def work() -> None:
        import sys

        old_limit = sys.getrecursionlimit()
        sys.setrecursionlimit(1_000_000)
        try:
            machine = _Machine(fuel, carry_proofs)
            env = _build_env(machine, p)
            machine.steps = 0  # count the entry evaluation only
            value = env.get(entry)
            for arg in args:
                value_s = _Machine._strip(value)
                if not isinstance(value_s, Closure):
                    raise EvalError(f"{entry!r} takes fewer arguments")
                machine.tick()
                value = machine.eval(
                    value_s.body, value_s.env.child(value_s.param, arg)
                )
            result.append((_unwrap(value), machine.steps))
        except BaseException as exc:  # propagated to the caller below
            result.append(exc)
        finally:
            sys.setrecursionlimit(old_limit)

    old_stack = threading.stack_size()
    threading.stack_size(256 * 1024 * 1024)
    try:
        t = threading.Thread(target=work, name="refine-eval")
        t.start()
        t.join()
    finally:
        threading.stack_size(old_stack)
    out = result[0]
    if isinstance(out, BaseException):
        raise out
    return out
