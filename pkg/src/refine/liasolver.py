#!/usr/bin/env python3
"""Reference SMT-LIB v2 solver for quantifier-free linear integer
arithmetic with free Bool constants.

Reads one script on standard input and answers on standard output:
first line sat/unsat/unknown, then a `(define-fun ...)` model block for
sat when the script asks for one. Satisfiability is decided exactly by
Cooper's quantifier elimination (boolean constants are case-split
first); models are found by fixing variables one at a time to the
smallest-magnitude value that keeps the formula satisfiable, so output
is deterministic.

Deliberately standalone: standard library only, no package imports, so
a client can exec this file directly as a child process.
"""

from __future__ import annotations

import itertools
import math
import sys

NODE_BUDGET = 400_000


class Unsupported(Exception):
    pass


class BudgetExceeded(Exception):
    pass


# ---------------------------------------------------------------------------
# S-expressions
# ---------------------------------------------------------------------------


def tokenize(text):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            tokens.append(c)
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "();":
                j += 1
            tokens.append(text[i:j])
            i = j
    return tokens


def parse_sexprs(text):
    tokens = tokenize(text)
    forms, stack = [], []
    for tok in tokens:
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if not stack:
                raise Unsupported("unbalanced parentheses")
            done = stack.pop()
            (stack[-1] if stack else forms).append(done)
        else:
            (stack[-1] if stack else forms).append(tok)
    if stack:
        raise Unsupported("unbalanced parentheses")
    return forms


# ---------------------------------------------------------------------------
# Linear terms: (coeffs: dict name->int, const: int)
# ---------------------------------------------------------------------------


def t_const(k):
    return ({}, k)


def t_var(name):
    return ({name: 1}, 0)


def t_add(a, b):
    coeffs = dict(a[0])
    for n, c in b[0].items():
        c2 = coeffs.get(n, 0) + c
        if c2:
            coeffs[n] = c2
        else:
            coeffs.pop(n, None)
    return (coeffs, a[1] + b[1])


def t_scale(a, k):
    if k == 0:
        return ({}, 0)
    return ({n: c * k for n, c in a[0].items()}, a[1] * k)


def t_sub(a, b):
    return t_add(a, t_scale(b, -1))


def t_shift(a, k):
    return (a[0], a[1] + k)


def t_drop(a, name):
    coeffs = {n: c for n, c in a[0].items() if n != name}
    return (coeffs, a[1])


def t_subst(a, name, rep):
    c = a[0].get(name, 0)
    if not c:
        return a
    return t_add(t_drop(a, name), t_scale(rep, c))


def t_key(a):
    return (tuple(sorted(a[0].items())), a[1])


# ---------------------------------------------------------------------------
# Formulas: True | False | ("lt", t) [t < 0] | ("eq", t) [t = 0]
#           | ("dvd", d, t) | ("ndvd", d, t) | ("and", fs) | ("or", fs)
# ---------------------------------------------------------------------------


def f_lt(t):
    coeffs = t[0]
    if not coeffs:
        return t[1] < 0
    g = math.gcd(*[abs(c) for c in coeffs.values()])
    if g > 1:
        # integer tightening: g*S + c < 0  <=>  S - floor((-c-1)/g) - 1 < 0
        q = (-t[1] - 1) // g
        t = ({n: c // g for n, c in coeffs.items()}, -q - 1)
    return ("lt", t)


def f_eq(t):
    coeffs = t[0]
    if not coeffs:
        return t[1] == 0
    g = math.gcd(*[abs(c) for c in coeffs.values()])
    if g > 1:
        if t[1] % g:
            return False
        t = ({n: c // g for n, c in coeffs.items()}, t[1] // g)
    if next(iter(t[0].values())) < 0:  # canonical sign for deduplication
        t = t_scale(t, -1)
    return ("eq", t)


def f_dvd(d, t, positive=True):
    d = abs(d)
    if d == 0:
        raise Unsupported("divisibility by zero")
    if d == 1:
        return positive
    coeffs = {n: c % d for n, c in t[0].items()}
    coeffs = {n: c for n, c in coeffs.items() if c}
    const = t[1] % d
    if not coeffs:
        hit = const == 0
        return hit if positive else not hit
    g = math.gcd(d, *coeffs.values())
    if g > 1:
        if const % g:
            # the congruence g*S + c = 0 (mod d) has no solution
            return not positive
        d //= g
        coeffs = {n: c // g for n, c in coeffs.items()}
        const //= g
        if d == 1:
            return positive
    return ("dvd" if positive else "ndvd", d, (coeffs, const))


def f_key(f):
    if f is True or f is False:
        return f
    if f[0] in ("and", "or"):
        return (f[0],) + tuple(f_key(x) for x in f[1])
    if f[0] in ("lt", "eq"):
        return (f[0], t_key(f[1]))
    return (f[0], f[1], t_key(f[2]))


def f_and(parts):
    out = []
    seen = set()
    for p in parts:
        if p is False:
            return False
        if p is True:
            continue
        subs = p[1] if isinstance(p, tuple) and p[0] == "and" else (p,)
        for q in subs:
            key = f_key(q)
            if key not in seen:
                seen.add(key)
                out.append(q)
    if not out:
        return True
    if len(out) == 1:
        return out[0]
    return ("and", tuple(out))


def f_or(parts):
    out = []
    seen = set()
    for p in parts:
        if p is True:
            return True
        if p is False:
            continue
        subs = p[1] if isinstance(p, tuple) and p[0] == "or" else (p,)
        for q in subs:
            key = f_key(q)
            if key not in seen:
                seen.add(key)
                out.append(q)
    if not out:
        return False
    if len(out) == 1:
        return out[0]
    return ("or", tuple(out))


def f_map_atoms(f, fn):
    if f is True or f is False:
        return f
    tag = f[0]
    if tag == "and":
        return f_and([f_map_atoms(x, fn) for x in f[1]])
    if tag == "or":
        return f_or([f_map_atoms(x, fn) for x in f[1]])
    return fn(f)


def f_atoms(f, acc):
    if f is True or f is False:
        return
    tag = f[0]
    if tag in ("and", "or"):
        for x in f[1]:
            f_atoms(x, acc)
    else:
        acc.append(f)


def _atom_term(a):
    return a[1] if a[0] in ("lt", "eq") else a[2]


def f_vars(f):
    atoms = []
    f_atoms(f, atoms)
    seen = {}
    for a in atoms:
        for n in _atom_term(a)[0]:
            seen.setdefault(n)
    return list(seen)


def f_subst(f, name, rep):
    def on_atom(a):
        if a[0] == "lt":
            return f_lt(t_subst(a[1], name, rep))
        if a[0] == "eq":
            return f_eq(t_subst(a[1], name, rep))
        return f_dvd(a[1], t_subst(a[2], name, rep), positive=a[0] == "dvd")

    return f_map_atoms(f, on_atom)


def t_eval(t, model):
    return sum(c * model.get(n, 0) for n, c in t[0].items()) + t[1]


def _interval_prune(f, rounds=8):
    """Bounds propagation over top-level conjunct atoms.

    Derives per-variable intervals from the linear atoms, reports False
    on an interval conflict, and substitutes variables whose interval is
    pinned to a single value. Sound; purely an accelerator for the
    elimination underneath. Returns (formula, substitutions)."""
    if not isinstance(f, tuple) or f[0] == "or":
        return f, []
    parts = f[1] if f[0] == "and" else (f,)
    constraints = []  # terms t with meaning t <= 0
    for p in parts:
        if not isinstance(p, tuple):
            continue
        if p[0] == "lt":
            constraints.append(t_shift(p[1], 1))
        elif p[0] == "eq":
            constraints.append(p[1])
            constraints.append(t_scale(p[1], -1))
    if not constraints:
        return f, []
    lo: dict = {}
    hi: dict = {}
    for _ in range(rounds):
        changed = False
        for coeffs, const in constraints:
            for name, a in coeffs.items():
                rest_min = const
                bounded = True
                for n2, a2 in coeffs.items():
                    if n2 == name:
                        continue
                    b = lo.get(n2) if a2 > 0 else hi.get(n2)
                    if b is None:
                        bounded = False
                        break
                    rest_min += a2 * b
                if not bounded:
                    continue
                # a*x + rest_min <= 0
                if a > 0:
                    bound = (-rest_min) // a
                    if hi.get(name) is None or bound < hi[name]:
                        hi[name] = bound
                        changed = True
                else:
                    bound = -((-rest_min) // (-a))  # ceil(rest_min / -a)
                    if lo.get(name) is None or bound > lo[name]:
                        lo[name] = bound
                        changed = True
                if (
                    lo.get(name) is not None
                    and hi.get(name) is not None
                    and lo[name] > hi[name]
                ):
                    return False, []
            if not coeffs and const > 0:
                return False, []
        if not changed:
            break
    pinned = [(n, t_const(lo[n])) for n in lo if n in hi and lo[n] == hi[n]]
    for name, value in pinned:
        f = f_subst(f, name, value)
    return f, pinned


def propagate_equalities(f):
    """Substitute away top-level unit-coefficient equalities; exact and
    branch-free, so it runs before each elimination step. Returns
    (formula, substitutions made)."""
    subs = []
    while isinstance(f, tuple) and f[0] in ("and", "eq"):
        parts = f[1] if f[0] == "and" else (f,)
        found = None
        for p in parts:
            if isinstance(p, tuple) and p[0] == "eq":
                for n, c in p[1][0].items():
                    if c in (1, -1):
                        found = (n, c, p[1])
                        break
            if found:
                break
        if found is None:
            break
        name, coeff, t = found
        rep = t_drop(t, name) if coeff == -1 else t_scale(t_drop(t, name), -1)
        subs.append((name, rep))
        f = f_subst(f, name, rep)
    return f, subs


# ---------------------------------------------------------------------------
# Cooper elimination
# ---------------------------------------------------------------------------


def _bound_sets(atoms, x):
    """Lower-bound terms (b < y) and upper-bound terms (y < a) for a
    unit-coefficient variable, equalities contributing to both sides."""
    lowers, uppers = [], []
    seen_lo, seen_hi = set(), set()

    def add(target, seen, term):
        key = t_key(term)
        if key not in seen:
            seen.add(key)
            target.append(term)

    for a in atoms:
        t = _atom_term(a)
        c = t[0].get(x, 0)
        if not c:
            continue
        r = t_drop(t, x)
        if a[0] == "lt":
            if c == -1:  # r - y < 0  i.e.  r < y
                add(lowers, seen_lo, r)
            else:  # y + r < 0  i.e.  y < -r
                add(uppers, seen_hi, t_scale(r, -1))
        elif a[0] == "eq":
            solution = t_scale(r, -1) if c == 1 else r  # y = solution
            add(lowers, seen_lo, t_shift(solution, -1))
            add(uppers, seen_hi, t_shift(solution, 1))
    return lowers, uppers


def _eliminate_var(f, x, budget):
    """Eliminate one variable and search the disjuncts; on success return
    a model for the remaining variables extended with a value for `x`.

    The x-coefficients are first unified to ±1 by scaling, so the search
    actually finds y = l*x and divides back at the end."""
    atoms = []
    f_atoms(f, atoms)
    coeffs = [abs(_atom_term(a)[0].get(x, 0)) for a in atoms]
    coeffs = [c for c in coeffs if c]
    l = math.lcm(*coeffs)

    def adjust(a):
        t = _atom_term(a)
        c = t[0].get(x, 0)
        if not c:
            return a
        m = l // abs(c)
        scaled = t_scale(t, m)
        unit = dict(scaled[0])
        unit[x] = 1 if c > 0 else -1
        t2 = (unit, scaled[1])
        if a[0] in ("lt", "eq"):
            return (a[0], t2)
        return (a[0], a[1] * m, t2)

    g = f_map_atoms(f, adjust)
    if l > 1:
        g = f_and([g, ("dvd", l, t_var(x))])
    if g is True or g is False:
        return model_search(g, budget)

    atoms = []
    f_atoms(g, atoms)
    divisors = [
        a[1] for a in atoms if a[0] in ("dvd", "ndvd") and x in _atom_term(a)[0]
    ]
    big_d = math.lcm(*divisors) if divisors else 1
    lowers, uppers = _bound_sets(atoms, x)
    from_below = len(lowers) <= len(uppers)
    bounds = lowers if from_below else uppers

    def to_infinity(a):
        c = _atom_term(a)[0].get(x, 0)
        if not c or a[0] in ("dvd", "ndvd"):
            return a
        if a[0] == "eq":
            return False
        upper = c == 1  # atom reads  y < -r
        if from_below:
            return upper  # y -> -inf satisfies uppers, breaks lowers
        return not upper  # y -> +inf satisfies lowers, breaks uppers

    g_inf = f_map_atoms(g, to_infinity)

    for j in range(1, big_d + 1):
        point = j if from_below else -j
        model = model_search(f_subst(g_inf, x, t_const(point)), budget)
        if model is not None:
            values = [t_eval(t, model) for t in lowers + uppers]
            if not values:
                y = point
            elif from_below:
                margin = min(values) - 1
                y = margin - ((margin - point) % big_d)
            else:
                margin = max(values) + 1
                y = margin + ((point - margin) % big_d)
            assert y % l == 0, "scaled witness must be divisible"
            model[x] = y // l
            return model
    for bound in bounds:
        for j in range(1, big_d + 1):
            point = t_shift(bound, j) if from_below else t_shift(bound, -j)
            model = model_search(f_subst(g, x, point), budget)
            if model is not None:
                y = t_eval(point, model)
                assert y % l == 0, "scaled witness must be divisible"
                model[x] = y // l
                return model
    return None


def f_eval(f, env):
    if f is True or f is False:
        return f
    tag = f[0]
    if tag == "and":
        return all(f_eval(x, env) for x in f[1])
    if tag == "or":
        return any(f_eval(x, env) for x in f[1])
    if tag == "lt":
        return t_eval(f[1], env) < 0
    if tag == "eq":
        return t_eval(f[1], env) == 0
    hit = t_eval(f[2], env) % f[1] == 0
    return hit if tag == "dvd" else not hit


_PROBE_RADII = {1: (0, 2, 6, 12), 2: (0, 2, 6, 12), 3: (0, 2, 4, 8), 4: (0, 2, 4, 6)}


def grid_probe(f):
    """Deterministic expanding box scan for a nearby witness; satisfiable
    random instances usually have one, which saves the elimination the
    expensive satisfiable subtrees."""
    if f is True:
        return {}
    if f is False or not isinstance(f, tuple):
        return None
    names = f_vars(f)
    k = len(names)
    if not names or k > 4:
        return None
    inner = -1
    for r in _PROBE_RADII[k]:
        for vals in itertools.product(range(-r, r + 1), repeat=k):
            if max(abs(v) for v in vals) <= inner:
                continue  # already scanned inside the smaller box
            env = dict(zip(names, vals))
            if f_eval(f, env):
                return env
        inner = r
    return None


def model_search(f, budget):
    """Decide satisfiability of an arithmetic formula and produce a model:
    a dict covering the formula's variables (missing ones are free)."""
    budget[0] -= 1
    if budget[0] < 0:
        raise BudgetExceeded
    if f is True:
        return {}
    if f is False:
        return None
    if f[0] == "or":
        for part in f[1]:
            model = model_search(part, budget)
            if model is not None:
                return model
        return None
    f, subs = propagate_equalities(f)
    pruned, pins = _interval_prune(f)
    subs.extend(pins)
    if subs:
        model = model_search(pruned, budget)
        if model is None:
            return None
        for name, rep in reversed(subs):
            model[name] = t_eval(rep, model)
        return model
    if pruned is not f:
        return model_search(pruned, budget)
    names = f_vars(f)
    if not names:
        raise AssertionError("ground formula not folded")
    atoms = []
    f_atoms(f, atoms)

    def cost(name):
        cs = []
        lower_count = upper_count = 0
        for a in atoms:
            c = _atom_term(a)[0].get(name, 0)
            if not c:
                continue
            cs.append(abs(c))
            if a[0] == "eq":
                lower_count += 1
                upper_count += 1
            elif a[0] == "lt":
                if c < 0:
                    lower_count += 1
                else:
                    upper_count += 1
        return (
            math.lcm(*cs) * (min(lower_count, upper_count) + 1),
            names.index(name),
        )

    x = min(names, key=cost)
    return _eliminate_var(f, x, budget)


# ---------------------------------------------------------------------------
# SMT-LIB front end
# ---------------------------------------------------------------------------

_ARITH_OPS = ("+", "-", "*")


def _is_numeral(s):
    return isinstance(s, str) and (s.isdigit() or (s[:1] == "-" and s[1:].isdigit()))


class Problem:
    def __init__(self):
        self.sorts = {}  # name -> "Int" | "Bool"
        self.order = []
        self.asserts = []

    # -- parsing ------------------------------------------------------------

    def declare(self, name, sort):
        if sort not in ("Int", "Bool"):
            raise Unsupported(f"unsupported sort {sort}")
        self.sorts[name] = sort
        self.order.append(name)

    def term(self, sx):
        if isinstance(sx, str):
            if _is_numeral(sx):
                return t_const(int(sx))
            if self.sorts.get(sx) == "Int":
                return t_var(sx)
            raise Unsupported(f"unknown integer term {sx!r}")
        op, args = sx[0], sx[1:]
        if op == "+":
            out = t_const(0)
            for a in args:
                out = t_add(out, self.term(a))
            return out
        if op == "-":
            if len(args) == 1:
                return t_scale(self.term(args[0]), -1)
            out = self.term(args[0])
            for a in args[1:]:
                out = t_sub(out, self.term(a))
            return out
        if op == "*":
            factors = [self.term(a) for a in args]
            out = t_const(1)
            for fac in factors:
                if out[0] and fac[0]:
                    raise Unsupported("non-linear multiplication")
                out = t_scale(fac, out[1]) if not out[0] else t_scale(out, fac[1])
            return out
        raise Unsupported(f"unsupported integer operator {op!r}")

    def sort_of(self, sx):
        if isinstance(sx, str):
            if _is_numeral(sx):
                return "Int"
            if sx in ("true", "false"):
                return "Bool"
            return self.sorts.get(sx, "Bool")
        return "Int" if sx[0] in _ARITH_OPS else "Bool"

    def formula(self, sx):
        """Parse a Bool-sorted expression into ("bexpr" ...) form."""
        if isinstance(sx, str):
            if sx == "true":
                return ("bconst", True)
            if sx == "false":
                return ("bconst", False)
            if self.sorts.get(sx) == "Bool":
                return ("bvar", sx)
            raise Unsupported(f"unknown boolean term {sx!r}")
        op, args = sx[0], sx[1:]
        if op == "not":
            return ("not", self.formula(args[0]))
        if op in ("and", "or"):
            return (op, tuple(self.formula(a) for a in args))
        if op == "=>":
            out = self.formula(args[-1])
            for a in reversed(args[:-1]):
                out = ("imp", self.formula(a), out)
            return out
        if op in ("<", "<=", ">", ">=", "=", "distinct"):
            if op == "=" and self.sort_of(args[0]) == "Bool":
                parts = [self.formula(a) for a in args]
                return ("and", tuple(("iff", a, b) for a, b in zip(parts, parts[1:])))
            terms = [self.term(a) for a in args]
            cmp_op = {"=": "=", "distinct": "!=", "<": "<", "<=": "<="}.get(op)
            if op in (">", ">="):
                terms = terms[::-1]
                cmp_op = "<" if op == ">" else "<="
            pairs = list(zip(terms, terms[1:]))
            atoms = tuple(("cmp", cmp_op, a, b) for a, b in pairs)
            return atoms[0] if len(atoms) == 1 else ("and", atoms)
        raise Unsupported(f"unsupported boolean operator {op!r}")

    # -- normalization --------------------------------------------------------

    def bool_vars(self):
        seen = {}

        def walk(e):
            tag = e[0]
            if tag == "bvar":
                seen.setdefault(e[1])
            elif tag == "not":
                walk(e[1])
            elif tag in ("and", "or"):
                for x in e[1]:
                    walk(x)
            elif tag in ("imp", "iff"):
                walk(e[1])
                walk(e[2])

        for a in self.asserts:
            walk(a)
        return list(seen)

    def normalize(self, e, pos, assignment):
        tag = e[0]
        if tag == "bconst":
            return e[1] if pos else not e[1]
        if tag == "bvar":
            v = assignment[e[1]]
            return v if pos else not v
        if tag == "not":
            return self.normalize(e[1], not pos, assignment)
        if tag == "and":
            parts = [self.normalize(x, pos, assignment) for x in e[1]]
            return f_and(parts) if pos else f_or(parts)
        if tag == "or":
            parts = [self.normalize(x, pos, assignment) for x in e[1]]
            return f_or(parts) if pos else f_and(parts)
        if tag == "imp":
            if pos:
                return f_or(
                    [
                        self.normalize(e[1], False, assignment),
                        self.normalize(e[2], True, assignment),
                    ]
                )
            return f_and(
                [
                    self.normalize(e[1], True, assignment),
                    self.normalize(e[2], False, assignment),
                ]
            )
        if tag == "iff":
            fwd = ("imp", e[1], e[2])
            bwd = ("imp", e[2], e[1])
            if pos:
                return f_and(
                    [
                        self.normalize(fwd, True, assignment),
                        self.normalize(bwd, True, assignment),
                    ]
                )
            return f_or(
                [
                    self.normalize(fwd, False, assignment),
                    self.normalize(bwd, False, assignment),
                ]
            )
        if tag == "cmp":
            _, op, a, b = e
            if not pos:
                op, a, b = {"<": ("<=",), "<=": ("<",), "=": ("!=",), "!=": ("=",)}[op][0], b, a
                if op in ("=", "!="):
                    a, b = b, a  # symmetric anyway
            if op == "<":
                return f_lt(t_sub(a, b))
            if op == "<=":
                return f_lt(t_shift(t_sub(a, b), -1))
            if op == "=":
                return f_eq(t_sub(a, b))
            if op == "!=":
                return f_or([f_lt(t_sub(a, b)), f_lt(t_sub(b, a))])
        raise Unsupported(f"cannot normalize {e!r}")

    # -- solving ----------------------------------------------------------------

    def decide(self):
        """Return (status, model | None)."""
        bvars = self.bool_vars()
        budget = [NODE_BUDGET]
        for bits in itertools.product((False, True), repeat=len(bvars)):
            assignment = dict(zip(bvars, bits))
            f = f_and([self.normalize(a, True, assignment) for a in self.asserts])
            found = grid_probe(f)
            if found is None:
                found = model_search(f, budget)
            if found is not None:
                model = {
                    name: assignment.get(name, False)
                    for name in self.order
                    if self.sorts[name] == "Bool"
                }
                for name in self.order:
                    if self.sorts[name] == "Int":
                        model[name] = found.get(name, 0)
                return "sat", model
        return "unsat", None


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------


def _format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v) if v >= 0 else f"(- {-v})"


def run_script(text: str) -> str:
    out = []
    problem = Problem()
    status, model = None, None
    try:
        forms = parse_sexprs(text)
        for form in forms:
            if not isinstance(form, list) or not form:
                continue
            head = form[0]
            if head in ("set-logic", "set-option", "set-info", "echo"):
                continue
            if head == "declare-const":
                problem.declare(form[1], form[2])
            elif head == "declare-fun" and form[2] == []:
                problem.declare(form[1], form[3])
            elif head == "assert":
                problem.asserts.append(problem.formula(form[1]))
            elif head == "check-sat":
                status, model = problem.decide()
                out.append(status)
            elif head == "get-model":
                if status == "sat" and model is not None:
                    lines = ["("]
                    for name in problem.order:
                        sort = problem.sorts[name]
                        lines.append(
                            f"  (define-fun {name} () {sort} {_format_value(model[name])})"
                        )
                    lines.append(")")
                    out.append("\n".join(lines))
                else:
                    out.append('(error "no model available")')
            elif head == "exit":
                break
    except (Unsupported, BudgetExceeded, RecursionError) as exc:
        detail = str(exc) or type(exc).__name__
        print(f"liasolver: {detail}", file=sys.stderr)
        if not out:
            out.append("unknown")
    return "\n".join(out) + "\n" if out else ""


def main() -> int:
    sys.stdout.write(run_script(sys.stdin.read()))
    sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
