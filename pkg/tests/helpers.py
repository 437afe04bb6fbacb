"""Shared test utilities: VC construction shorthands, a seeded random VC
generator, and a tiny s-expression re-printer."""

from __future__ import annotations

import random

from refine.logic import (
    BaseType,
    Cmp,
    LinearTerm,
    Not,
    Predicate,
    PVar,
)
from refine.surface import Span, parse_predicate
from refine.typesys import VerificationCondition

NAT, INT, BOOL = BaseType.NAT, BaseType.INT, BaseType.BOOL


def vc(decls, facts, goal, reason="test") -> VerificationCondition:
    return VerificationCondition(tuple(decls), tuple(facts), goal, Span(0, 0), reason)


def pred(text: str) -> Predicate:
    return parse_predicate(text)


def sexp_text(form) -> str:
    if isinstance(form, str):
        return form
    return "(" + " ".join(sexp_text(x) for x in form) + ")"


_CMP_OPS = ("==", "/=", "<", "<=", ">", ">=")


class VcGenerator:
    """Random verification conditions: linear atoms over at most four
    variables with coefficients in [-5, 5]."""

    def __init__(self, seed: int, max_vars: int = 4):
        self.rng = random.Random(seed)
        self.max_vars = max_vars

    def _decls(self):
        n = self.rng.randint(1, self.max_vars)
        names = ["a", "b", "c", "d"][:n]
        sorts = []
        for name in names:
            roll = self.rng.random()
            if roll < 0.42:
                sorts.append((name, NAT))
            elif roll < 0.84:
                sorts.append((name, INT))
            else:
                sorts.append((name, BOOL))
        return tuple(sorts)

    def _linterm(self, int_vars):
        monos = []
        for name in int_vars:
            if self.rng.random() < 0.55:
                coeff = self.rng.choice([c for c in range(-5, 6) if c != 0])
                monos.append((name, coeff))
        const = self.rng.randint(-8, 8)
        return LinearTerm(tuple(monos), const)

    def _atom(self, decls):
        int_vars = [n for n, b in decls if b is not BOOL]
        bool_vars = [n for n, b in decls if b is BOOL]
        if bool_vars and (not int_vars or self.rng.random() < 0.25):
            v = PVar(self.rng.choice(bool_vars))
            return Not(v) if self.rng.random() < 0.5 else v
        op = self.rng.choice(_CMP_OPS)
        return Cmp(op, self._linterm(int_vars), self._linterm(int_vars))

    def next_vc(self) -> VerificationCondition:
        decls = self._decls()
        facts = tuple(self._atom(decls) for _ in range(self.rng.randint(0, 3)))
        goal = self._atom(decls)
        return vc(decls, facts, goal, reason="generated")
