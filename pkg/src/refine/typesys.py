"""Bidirectional type checking with subtyping.

Instead of requiring proofs, every subsumption emits a
VerificationCondition: an implication whose hypotheses are harvested
from the typing context (base-typed bindings with their refinement
facts, plus path conditions from `if`/`match`) and whose goal is the
target refinement. Base-to-base subtyping produces exactly one such
implication; function subtyping is contravariant in domains and
covariant in codomains under the extended context.

Literals and variables synthesize singleton ("selfified") refinements,
e.g. `2` gets `{v: Nat | v == 2}`, so exact information survives into
later conditions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .logic import (
    And,
    BaseType,
    BoolConst,
    Cmp,
    Implies,
    LinearTerm,
    Not,
    Or,
    Predicate,
    PVar,
    TRUE,
    bool_eq,
    pred_free_vars,
    rename_pred_var,
    subst_pred_bool,
    subst_pred_linear,
)
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
    NO_SPAN,
    Pair,
    ProofUnit,
    RAlias,
    RBase,
    RefinedType,
    RFun,
    Span,
    SurfaceProgram,
    Term,
    ValDef,
    Var,
    _fresh_against,
    print_term,
    print_type,
    rename_term,
    rename_type_var,
    subst_type_linear,
    type_free_vars,
)

__all__ = [
    "CheckError",
    "SortError",
    "NonLinearPredicateError",
    "CannotSynthesizeError",
    "UnboundVariableError",
    "TypeMismatchError",
    "DuplicateDefinitionError",
    "TypingContext",
    "VerificationCondition",
    "CheckResult",
    "well_formed",
    "synth",
    "check",
    "subtype",
    "check_program",
    "vc_well_sorted",
    "BaseType",
    "RefinedType",
    "RBase",
    "RFun",
]


class CheckError(Exception):
    def __init__(self, message: str, span: Span = NO_SPAN):
        self.span = span
        super().__init__(message)


class SortError(CheckError):
    def __init__(self, message: str, span: Span = NO_SPAN, expected: str = "", found: str = ""):
        self.expected = expected
        self.found = found
        super().__init__(message, span)


class NonLinearPredicateError(CheckError):
    """Defensive: the parser restricts multiplication to literal
    coefficients, so this fires only on hand-built ASTs."""


class CannotSynthesizeError(CheckError):
    pass


class UnboundVariableError(CheckError):
    def __init__(self, name: str, span: Span = NO_SPAN):
        self.name = name
        super().__init__(f"unbound variable {name!r}", span)


class TypeMismatchError(CheckError):
    pass


class DuplicateDefinitionError(CheckError):
    pass


# ---------------------------------------------------------------------------
# Contexts and verification conditions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TypingContext:
    """Ordered bindings plus path conditions accumulated from branches."""

    bindings: tuple[tuple[str, RefinedType], ...] = ()
    path_conditions: tuple[Predicate, ...] = ()

    def bind(self, name: str, t: RefinedType) -> "TypingContext":
        assert name not in self.names(), f"shadowed binding {name!r} not freshened"
        return TypingContext(self.bindings + ((name, t),), self.path_conditions)

    def with_path(self, cond: Predicate) -> "TypingContext":
        return TypingContext(self.bindings, self.path_conditions + (cond,))

    def lookup(self, name: str) -> RefinedType | None:
        for n, t in reversed(self.bindings):
            if n == name:
                return t
        return None

    def names(self) -> set[str]:
        return {n for n, _ in self.bindings}


@dataclass(frozen=True)
class VerificationCondition:
    """hypotheses |- goal, recorded with its origin for diagnostics.

    Declarations hold only base-typed bindings; function-typed bindings
    are dropped (sound: it only weakens the hypotheses)."""

    decls: tuple[tuple[str, BaseType], ...]
    facts: tuple[Predicate, ...]
    goal: Predicate
    span: Span = Span(0, 0)
    reason: str = ""


def _binding_fact(name: str, t: RBase) -> Predicate | None:
    if t.pred == TRUE:
        return None
    if t.base is BaseType.BOOL:
        return rename_pred_var(t.pred, t.binder, name)
    return subst_pred_linear(t.pred, t.binder, LinearTerm.var(name))


def _make_vc(
    ctx: TypingContext,
    goal: Predicate,
    span: Span,
    reason: str,
    extra_decls: tuple[tuple[str, BaseType], ...] = (),
    extra_facts: tuple[Predicate, ...] = (),
) -> VerificationCondition:
    decls: list[tuple[str, BaseType]] = []
    facts: list[Predicate] = []
    for name, t in ctx.bindings:
        if isinstance(t, RBase):
            decls.append((name, t.base))
            fact = _binding_fact(name, t)
            if fact is not None:
                facts.append(fact)
    facts.extend(ctx.path_conditions)
    decls.extend(extra_decls)
    facts.extend(extra_facts)
    return VerificationCondition(tuple(decls), tuple(facts), goal, span, reason)


# ---------------------------------------------------------------------------
# Sort checking
# ---------------------------------------------------------------------------

_FUN_SORT = None  # sentinel for function-typed names in sort environments


def _sort_env(ctx: TypingContext) -> dict[str, BaseType | None]:
    env: dict[str, BaseType | None] = {}
    for name, t in ctx.bindings:
        env[name] = t.base if isinstance(t, RBase) else _FUN_SORT
    return env


def _check_pred_sorts(env: dict[str, BaseType | None], p: Predicate, span: Span) -> None:
    match p:
        case BoolConst():
            pass
        case PVar(name):
            if name not in env:
                raise SortError(f"unbound variable {name!r} in predicate", span)
            sort = env[name]
            if sort is _FUN_SORT:
                raise SortError(
                    f"function-typed {name!r} cannot appear in a predicate", span
                )
            if sort is not BaseType.BOOL:
                raise SortError(
                    f"{name!r} is {sort}, not Bool", span, expected="Bool", found=str(sort)
                )
        case Cmp(_, lhs, rhs):
            for name in lhs.free_vars() + rhs.free_vars():
                if name not in env:
                    raise SortError(f"unbound variable {name!r} in predicate", span)
                sort = env[name]
                if sort is _FUN_SORT:
                    raise SortError(
                        f"function-typed {name!r} cannot appear in a predicate", span
                    )
                if sort is BaseType.BOOL:
                    raise SortError(
                        f"{name!r} is Bool, not numeric", span,
                        expected="Nat or Int", found="Bool",
                    )
        case Not(arg):
            _check_pred_sorts(env, arg, span)
        case And(args) | Or(args):
            for a in args:
                _check_pred_sorts(env, a, span)
        case Implies(lhs, rhs):
            _check_pred_sorts(env, lhs, span)
            _check_pred_sorts(env, rhs, span)
        case _:
            raise TypeError(f"not a predicate: {p!r}")


def well_formed(ctx: TypingContext, t: RefinedType) -> None:
    """Succeeds iff every predicate in `t` is boolean-sorted, linear, and
    closed under the context plus the type's own binders."""
    _well_formed_env(_sort_env(ctx), t)


def _well_formed_env(env: dict[str, BaseType | None], t: RefinedType) -> None:
    match t:
        case RBase(base, binder, pred, span):
            _check_pred_sorts({**env, binder: base}, pred, span)
        case RFun(param, domain, codomain, _):
            _well_formed_env(env, domain)
            dom_sort = domain.base if isinstance(domain, RBase) else _FUN_SORT
            _well_formed_env({**env, param: dom_sort}, codomain)
        case RAlias(name, _, span):
            raise CheckError(f"unexpanded alias {name!r} reached the checker", span)
        case _:
            raise TypeError(f"not a type: {t!r}")


# ---------------------------------------------------------------------------
# Linear conversion of terms (for substitution into predicates)
# ---------------------------------------------------------------------------


def _convert_linear(ctx: TypingContext, e: Term) -> LinearTerm | None:
    """View a term as a linear integer expression when possible."""
    match e:
        case Var(name):
            t = ctx.lookup(name)
            if isinstance(t, RBase) and t.base in (BaseType.NAT, BaseType.INT):
                return LinearTerm.var(name)
            return None
        case NatLit(value) | IntLit(value):
            return LinearTerm.of_const(value)
        case Arith(op, args):
            parts = [_convert_linear(ctx, a) for a in args]
            if any(p is None for p in parts):
                return None
            a, b = parts
            if op == "+":
                return a.add(b)
            if op == "-":
                return a.sub(b)
            if op == "*":
                if a.monomials and b.monomials:
                    raise NonLinearPredicateError(
                        "product of two non-constant terms", e.span
                    )
                return b.scale(a.const) if not a.monomials else a.scale(b.const)
            return None
        case _:
            return None


def _arith_base(ctx: TypingContext, e: Term) -> BaseType:
    """Static base of a numeric term: `-` always widens to Int."""
    match e:
        case Var(name):
            t = ctx.lookup(name)
            assert isinstance(t, RBase)
            return t.base
        case NatLit():
            return BaseType.NAT
        case IntLit():
            return BaseType.INT
        case Arith(op, args):
            bases = [_arith_base(ctx, a) for a in args]
            if op == "-":
                return BaseType.INT
            if all(b is BaseType.NAT for b in bases):
                return BaseType.NAT
            return BaseType.INT
    raise AssertionError(f"not a numeric term: {e!r}")


# ---------------------------------------------------------------------------
# Synthesis
# ---------------------------------------------------------------------------


def _selfify(base: BaseType, expr: Predicate | LinearTerm) -> RBase:
    if base is BaseType.BOOL:
        assert isinstance(expr, Predicate)
        return RBase(BaseType.BOOL, "v", bool_eq(PVar("v"), expr))
    assert isinstance(expr, LinearTerm)
    return RBase(base, "v", Cmp("==", LinearTerm.var("v"), expr))


def synth(ctx: TypingContext, e: Term) -> tuple[RefinedType, list[VerificationCondition]]:
    """Synthesize the most specific type of `e` plus the conditions its
    subterms generated."""
    match e:
        case Var(name, span):
            t = ctx.lookup(name)
            if t is None:
                raise UnboundVariableError(name, span)
            if isinstance(t, RFun):
                return t, []
            assert isinstance(t, RBase)
            if t.base is BaseType.BOOL:
                return _selfify(BaseType.BOOL, PVar(name)), []
            return _selfify(t.base, LinearTerm.var(name)), []
        case NatLit(value):
            return _selfify(BaseType.NAT, LinearTerm.of_const(value)), []
        case IntLit(value):
            return _selfify(BaseType.INT, LinearTerm.of_const(value)), []
        case BoolLit(value):
            return RBase(BaseType.BOOL, "v", PVar("v") if value else Not(PVar("v"))), []
        case Arith(op, args, _, span):
            vcs: list[VerificationCondition] = []
            bases: list[BaseType] = []
            for a in args:
                at, avcs = synth(ctx, a)
                vcs.extend(avcs)
                if not isinstance(at, RBase) or at.base is BaseType.BOOL:
                    raise TypeMismatchError(
                        f"arithmetic on a non-numeric operand `{print_term(a)}`", span
                    )
                bases.append(at.base)
            if op == "-" or any(b is BaseType.INT for b in bases):
                base = BaseType.INT
            else:
                base = BaseType.NAT
            lt = _convert_linear(ctx, e)
            if lt is None:
                return RBase(base, "v", TRUE), vcs
            return _selfify(base, lt), vcs
        case App(fn, arg, span):
            ft, vcs = synth(ctx, fn)
            if not isinstance(ft, RFun):
                raise TypeMismatchError(
                    f"`{print_term(fn, 4)}` is not a function", span
                )
            vcs.extend(check(ctx, arg, ft.domain))
            cod = ft.codomain
            if ft.param in type_free_vars(cod):
                lt = _convert_linear(ctx, arg)
                if lt is None:
                    raise CannotSynthesizeError(
                        "dependent application needs a variable or numeric argument",
                        span,
                    )
                cod = subst_type_linear(cod, ft.param, lt)
            return cod, vcs
        case Lam(param, ann, body, span):
            if ann is None:
                raise CannotSynthesizeError(
                    "cannot synthesize an unannotated lambda", span
                )
            well_formed(ctx, ann)
            param2 = _fresh_against(param, ctx.names())
            body2 = rename_term(body, param, param2) if param2 != param else body
            bt, vcs = synth(ctx.bind(param2, ann), body2)
            return RFun(param2, ann, bt, span), vcs
        case Let(name, bound, body, span):
            bt, vcs = synth(ctx, bound)
            name2 = _fresh_against(name, ctx.names())
            body2 = rename_term(body, name, name2) if name2 != name else body
            rt, bvcs = synth(ctx.bind(name2, bt), body2)
            vcs.extend(bvcs)
            if name2 in type_free_vars(rt):
                lt = _convert_linear(ctx, bound)
                if lt is None:
                    raise CannotSynthesizeError(
                        f"let-bound {name!r} escapes into the result type", span
                    )
                rt = subst_type_linear(rt, name2, lt)
            return rt, vcs
        case Annot(term, ann, _):
            well_formed(ctx, ann)
            return ann, check(ctx, term, ann)
        case Pair(_, _, span):
            raise CannotSynthesizeError(
                "a refinement pair needs an expected type", span
            )
        case If(_, _, _, span) | Match(_, _, _, _, span):
            raise CannotSynthesizeError(
                "branching terms are checked against an expected type", span
            )
        case Auto(span) | ProofUnit(span):
            raise CannotSynthesizeError("`auto` outside a proof position", span)
    raise TypeError(f"not a term: {e!r}")


# ---------------------------------------------------------------------------
# Checking
# ---------------------------------------------------------------------------


def _direct_goal(ctx: TypingContext, value: Term, target: RBase) -> Predicate | None:
    """Goal predicate for values that substitute directly into the target
    refinement: variables, constructor-built naturals, and linear
    arithmetic over them. Bare numerals do not substitute; they bind a
    selfified singleton instead, so counterexamples can name the value."""
    match value:
        case Var(name, span):
            t = ctx.lookup(name)
            if t is None:
                raise UnboundVariableError(name, span)
            if not isinstance(t, RBase):
                raise TypeMismatchError(f"{name!r} is a function, not a value", span)
            if t.base is not target.base:
                raise TypeMismatchError(
                    f"{name!r} is {t.base}, expected {target.base}", span
                )
            if target.base is BaseType.BOOL:
                return rename_pred_var(target.pred, target.binder, name)
            return subst_pred_linear(target.pred, target.binder, LinearTerm.var(name))
        case BoolLit(v, span):
            if target.base is not BaseType.BOOL:
                raise TypeMismatchError(
                    f"boolean literal against {target.base}", span
                )
            return subst_pred_bool(target.pred, target.binder, v)
        case NatLit(value=k, lexeme="zero", span=span):
            if target.base is not BaseType.NAT:
                raise TypeMismatchError(
                    f"Nat constructor against {target.base}", span
                )
            return subst_pred_linear(
                target.pred, target.binder, LinearTerm.of_const(k)
            )
        case Arith(span=span):
            lt = _convert_linear(ctx, value)
            if lt is None:
                return None
            base = _arith_base(ctx, value)
            if base is not target.base:
                raise TypeMismatchError(
                    f"numeric expression is {base}, expected {target.base}", span
                )
            return subst_pred_linear(target.pred, target.binder, lt)
        case _:
            return None


def _check_value(
    ctx: TypingContext, e: Term, target: RBase, span: Span, reason: str
) -> list[VerificationCondition]:
    goal = _direct_goal(ctx, e, target)
    if goal is not None:
        if goal == TRUE:
            return []
        return [_make_vc(ctx, goal, span, reason)]
    s, vcs = synth(ctx, e)
    if (
        isinstance(e, (NatLit, IntLit))
        and isinstance(s, RBase)
        and s.base is BaseType.NAT
        and target.base is BaseType.INT
    ):
        # numerals are Nat by default but inhabit Int refinements as well
        s = RBase(BaseType.INT, s.binder, s.pred, s.span)
    vcs.extend(subtype(ctx, s, target, span=span, reason=reason))
    return vcs


def check(
    ctx: TypingContext,
    e: Term,
    t: RefinedType,
    reason: str = "value against declared refinement",
) -> list[VerificationCondition]:
    """Check `e` against `t`, returning every condition whose joint
    validity implies the judgment."""
    match e:
        case Pair(value, proof, span):
            if not isinstance(proof, (Auto, ProofUnit)):
                raise TypeMismatchError(
                    "the proof component of a pair must be `auto`", span
                )
            if not isinstance(t, RBase):
                raise TypeMismatchError(
                    "a refinement pair cannot have a function type", span
                )
            return _check_value(ctx, value, t, span, reason)
        case Lam(param, ann, body, span):
            if not isinstance(t, RFun):
                raise TypeMismatchError("a lambda needs a function type", span)
            vcs: list[VerificationCondition] = []
            bind_ty = t.domain
            if ann is not None:
                well_formed(ctx, ann)
                vcs.extend(
                    subtype(
                        ctx, t.domain, ann, span=span,
                        reason="parameter annotation against expected domain",
                    )
                )
                bind_ty = ann
            param2 = _fresh_against(param, ctx.names())
            body2 = rename_term(body, param, param2) if param2 != param else body
            cod = t.codomain
            if t.param != param2:
                cod = rename_type_var(cod, t.param, param2)
            vcs.extend(check(ctx.bind(param2, bind_ty), body2, cod, reason))
            return vcs
        case If(cond, then_branch, else_branch, span):
            _check_pred_sorts(_sort_env(ctx), cond, span)
            vcs = check(ctx.with_path(cond), then_branch, t, reason)
            vcs.extend(check(ctx.with_path(Not(cond)), else_branch, t, reason))
            return vcs
        case Match(scrutinee, zero_body, binder, suc_body, span):
            st, vcs = synth(ctx, scrutinee)
            if not (isinstance(st, RBase) and st.base is BaseType.NAT):
                raise TypeMismatchError(
                    "match scrutinee must be Nat-typed", span
                )
            s_lt = _convert_linear(ctx, scrutinee)
            if s_lt is None:
                raise TypeMismatchError(
                    "match scrutinee must be a variable or numeric expression", span
                )
            zero_ctx = ctx.with_path(Cmp("==", s_lt, LinearTerm.of_const(0)))
            vcs.extend(check(zero_ctx, zero_body, t, reason))
            binder2 = _fresh_against(binder, ctx.names())
            suc_body2 = (
                rename_term(suc_body, binder, binder2) if binder2 != binder else suc_body
            )
            suc_ctx = ctx.bind(binder2, RBase(BaseType.NAT, "v", TRUE)).with_path(
                Cmp("==", s_lt, LinearTerm.var(binder2).shift(1))
            )
            vcs.extend(check(suc_ctx, suc_body2, t, reason))
            return vcs
        case Let(name, bound, body, _):
            bt, vcs = synth(ctx, bound)
            name2 = _fresh_against(name, ctx.names())
            body2 = rename_term(body, name, name2) if name2 != name else body
            vcs.extend(check(ctx.bind(name2, bt), body2, t, reason))
            return vcs
        case Annot(term, ann, span):
            well_formed(ctx, ann)
            vcs = check(ctx, term, ann, reason)
            vcs.extend(
                subtype(ctx, ann, t, span=span, reason="annotation subsumption")
            )
            return vcs
        case _:
            if isinstance(t, RBase):
                return _check_value(ctx, e, t, e.span, reason)
            s, vcs = synth(ctx, e)
            vcs.extend(
                subtype(ctx, s, t, span=e.span, reason="subsumption at use site")
            )
            return vcs


def subtype(
    ctx: TypingContext,
    s: RefinedType,
    t: RefinedType,
    span: Span = NO_SPAN,
    reason: str = "subtyping",
) -> list[VerificationCondition]:
    """Conditions under which `s` may be used where `t` is expected.

    Equal-base refinements produce one implication under a shared fresh
    binder; function types go contravariant in the domain and covariant
    in the codomain under the extended context. Goals that are literally
    `true` are dropped: unrefined targets are vacuous.
    """
    match (s, t):
        case (RBase(b1, x1, p1), RBase(b2, x2, p2)):
            if b1 is not b2:
                raise TypeMismatchError(
                    f"base type mismatch: {b1} is not {b2}", span
                )
            avoid = ctx.names()
            avoid |= set(pred_free_vars(p1)) - {x1}
            avoid |= set(pred_free_vars(p2)) - {x2}
            binder = _fresh_against(x1, avoid)
            fact = rename_pred_var(p1, x1, binder)
            goal = rename_pred_var(p2, x2, binder)
            if goal == TRUE:
                return []
            extra_facts = () if fact == TRUE else (fact,)
            return [
                _make_vc(
                    ctx, goal, span, reason,
                    extra_decls=((binder, b1),),
                    extra_facts=extra_facts,
                )
            ]
        case (RFun(p1, d1, c1), RFun(p2, d2, c2)):
            vcs = subtype(
                ctx, d2, d1, span=span,
                reason="function subtyping (domain, contravariant)",
            )
            param = _fresh_against(p2, ctx.names() | set(type_free_vars(c1)) | set(type_free_vars(c2)))
            c1r = rename_type_var(c1, p1, param) if p1 != param else c1
            c2r = rename_type_var(c2, p2, param) if p2 != param else c2
            vcs.extend(
                subtype(
                    ctx.bind(param, d2), c1r, c2r, span=span,
                    reason="function subtyping (codomain)",
                )
            )
            return vcs
        case _:
            raise TypeMismatchError(
                f"shape mismatch: {print_type(s)} against {print_type(t)}", span
            )


# ---------------------------------------------------------------------------
# Whole programs
# ---------------------------------------------------------------------------


@dataclass
class CheckResult:
    vcs: list[VerificationCondition]
    errors: list[CheckError]


def check_program(program: SurfaceProgram) -> CheckResult:
    """Check every item in source order, collecting conditions and errors;
    checking continues past failing items. The program must already be
    alias-expanded."""
    ctx = TypingContext()
    vcs: list[VerificationCondition] = []
    errors: list[CheckError] = []

    def bind_top(name: str, t: RefinedType, span: Span) -> None:
        nonlocal ctx
        if name in ctx.names():
            errors.append(
                DuplicateDefinitionError(f"{name!r} is defined twice", span)
            )
            return
        ctx = ctx.bind(name, t)

    for item in program.items:
        match item:
            case AliasDef():
                continue
            case ValDef(name, ty, term, span):
                try:
                    well_formed(ctx, ty)
                    vcs.extend(check(ctx, term, ty))
                except CheckError as err:
                    errors.append(err)
                bind_top(name, ty, span)
            case FunDef(name, params, ret, body, span):
                ftype: RefinedType = ret
                for pname, pty in reversed(params):
                    ftype = RFun(pname, pty, ftype, span)
                try:
                    well_formed(ctx, ftype)
                except CheckError as err:
                    errors.append(err)
                    bind_top(name, ftype, span)
                    continue
                # recursion is checked against the function's own signature
                body_ctx = ctx if name in ctx.names() else ctx.bind(name, ftype)
                body_term = body
                ret2 = ret
                pending = [(p, t) for p, t in params]
                renames: list[tuple[str, str]] = []
                try:
                    for i, (pname, pty) in enumerate(pending):
                        for old, new in renames:
                            pty = rename_type_var(pty, old, new)
                        pname2 = _fresh_against(pname, body_ctx.names())
                        if pname2 != pname:
                            body_term = rename_term(body_term, pname, pname2)
                            ret2 = rename_type_var(ret2, pname, pname2)
                            renames.append((pname, pname2))
                        body_ctx = body_ctx.bind(pname2, pty)
                    vcs.extend(check(body_ctx, body_term, ret2, reason="function result"))
                except CheckError as err:
                    errors.append(err)
                bind_top(name, ftype, span)
            case _:
                raise TypeError(f"not an item: {item!r}")
    return CheckResult(vcs, errors)


def vc_well_sorted(vc: VerificationCondition) -> bool:
    """Re-run sort checking over a condition's own contents."""
    env: dict[str, BaseType | None] = dict(vc.decls)
    try:
        for fact in vc.facts:
            _check_pred_sorts(env, fact, vc.span)
        _check_pred_sorts(env, vc.goal, vc.span)
    except SortError:
        return False
    return True
