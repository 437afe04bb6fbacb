from __future__ import annotations

import dataclasses

import pytest
from hypothesis import given, strategies as st

from refine.logic import (
    And,
    BoolConst,
    Cmp,
    CMP_OPS,
    Implies,
    LinearTerm,
    Not,
    Or,
    PVar,
    TRUE,
    format_predicate,
)
from refine.surface import (
    BaseType,
    CyclicAliasError,
    NatLit,
    Pair,
    ParseError,
    RBase,
    Span,
    UnknownAliasError,
    ValDef,
    expand_aliases,
    parse,
    parse_predicate,
    print_program,
)
from conftest import corpus_files


def test_parse_singleton_binding():
    program = parse("val two : {x: Nat | x == 2} = (2, auto)")
    assert len(program.items) == 1
    item = program.items[0]
    assert isinstance(item, ValDef)
    assert item.ty == RBase(
        BaseType.NAT, "x", Cmp("==", LinearTerm.var("x"), LinearTerm.of_const(2))
    )
    assert isinstance(item.term, Pair)
    assert item.term.value == NatLit(2, "2")


def test_parse_empty_source():
    assert parse("").items == ()


def test_parse_unclosed_pair_fails_at_end_of_input():
    with pytest.raises(ParseError) as exc:
        parse("val bad : Nat = (1,")
    assert "end of input" in str(exc.value)


def test_parse_error_carries_position_and_expected():
    with pytest.raises(ParseError) as exc:
        parse("val bad = (1,")
    assert exc.value.line == 1
    assert exc.value.expected == (":",)


def test_auto_outside_pair_rejected_at_parse_time():
    with pytest.raises(ParseError) as exc:
        parse("val a : Nat = auto")
    assert "proof" in str(exc.value)


def test_zero_and_numeral_lexemes_are_distinguished():
    p = parse("val a : Nat = (zero, auto)\nval b : Nat = (0, auto)")
    a, b = p.items
    assert a.term.value.lexeme == "zero" and a.term.value.is_constructor
    assert b.term.value.lexeme == "0" and not b.term.value.is_constructor


# -- aliases -----------------------------------------------------------------


def test_alias_expansion_substitutes_argument():
    p = parse("type Fin(n) = {x: Nat | x < n}\nval a : Fin(5) = (2, auto)")
    expanded = expand_aliases(p)
    assert expanded.items[1].ty == RBase(
        BaseType.NAT, "x", Cmp("<", LinearTerm.var("x"), LinearTerm.of_const(5))
    )


def test_alias_expansion_without_aliases_is_identity():
    p = parse("val a : {x: Nat | x < 3} = (2, auto)")
    assert expand_aliases(p) == p


def test_cyclic_aliases_are_rejected():
    with pytest.raises(CyclicAliasError):
        expand_aliases(parse("type A = B\ntype B = A"))


def test_unknown_alias_is_rejected():
    with pytest.raises(UnknownAliasError):
        expand_aliases(parse("val a : Mystery = (1, auto)"))


def test_alias_expansion_is_idempotent():
    for path in corpus_files():
        p = expand_aliases(parse(path.read_text(), str(path)))
        assert expand_aliases(p) == p


def test_alias_argument_capture_is_avoided():
    # the alias body binds x; an x at the use site must not be captured
    p = parse(
        "type Fin(n) = {x: Nat | x < n}\n"
        "fun f (x : Nat) : Fin(x + 1) = (x, auto)"
    )
    ty = expand_aliases(p).items[1].ret
    assert isinstance(ty, RBase)
    assert ty.binder != "x"
    assert format_predicate(ty.pred) == f"{ty.binder} < x + 1"


# -- round trips ---------------------------------------------------------------


@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: p.name)
def test_corpus_round_trips_through_printer(path):
    original = parse(path.read_text(), str(path))
    reprinted = parse(print_program(original))
    assert reprinted == original


_int_names = st.sampled_from(["x", "y", "z", "n"])
_bool_names = st.sampled_from(["p", "q"])
_linterms = st.builds(
    LinearTerm,
    st.lists(
        st.tuples(_int_names, st.integers(-5, 5).filter(bool)),
        max_size=3,
        unique_by=lambda t: t[0],
    ).map(tuple),
    st.integers(-9, 9),
)
_atoms = st.one_of(
    st.builds(Cmp, st.sampled_from(CMP_OPS), _linterms, _linterms),
    st.builds(PVar, _bool_names),
    st.builds(BoolConst, st.booleans()),
)
_predicates = st.recursive(
    _atoms,
    lambda kids: st.one_of(
        st.builds(Not, kids),
        st.builds(lambda a, b: And((a, b)), kids, kids),
        st.builds(lambda a, b: Or((a, b)), kids, kids),
        st.builds(Implies, kids, kids),
    ),
    max_leaves=10,
)


@given(_predicates)
def test_predicate_formatting_round_trips(p):
    assert parse_predicate(format_predicate(p)) == p


# -- spans ---------------------------------------------------------------------


def _walk_spans(node, parent: Span | None, out: list):
    if dataclasses.is_dataclass(node) and not isinstance(node, type):
        span = getattr(node, "span", None)
        if isinstance(span, Span):
            out.append((parent, span))
            parent = span
        for f in dataclasses.fields(node):
            _walk_spans(getattr(node, f.name), parent, out)
    elif isinstance(node, tuple):
        for sub in node:
            _walk_spans(sub, parent, out)


@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: p.name)
def test_span_fidelity(path):
    source = path.read_text()
    program = parse(source, str(path))
    pairs: list[tuple[Span | None, Span]] = []
    for item in program.items:
        _walk_spans(item, None, pairs)
    assert pairs, "no spans collected"
    for parent, span in pairs:
        assert 0 <= span.start <= span.end <= len(source)
        if parent is not None:
            assert parent.start <= span.start and span.end <= parent.end


def test_parenthesized_arithmetic_in_predicates_backtracks():
    assert parse_predicate("(x + 1) < y") == Cmp(
        "<", LinearTerm.var("x").shift(1), LinearTerm.var("y")
    )
    assert parse_predicate("(x) < y") == Cmp(
        "<", LinearTerm.var("x"), LinearTerm.var("y")
    )
    assert parse_predicate("((x < y))") == Cmp(
        "<", LinearTerm.var("x"), LinearTerm.var("y")
    )


def test_if_requires_both_branches():
    with pytest.raises(ParseError):
        parse("fun f (a : Nat) : Nat = if a < 1 then a")


def test_alias_arity_mismatches_are_rejected():
    from refine.surface import AliasArityError

    with pytest.raises(AliasArityError):
        expand_aliases(parse("type Fin(n) = {x: Nat | x < n}\nval a : Fin = (0, auto)"))
    with pytest.raises(AliasArityError):
        expand_aliases(parse("type T = Nat\nval a : T(3) = (0, auto)"))


def test_nested_alias_chains_expand():
    p = parse(
        "type A(n) = {x: Nat | x < n}\n"
        "type B(m) = (y : A(m)) -> A(m + 1)\n"
        "fun f (k : Nat) (g : B(k)) : B(k) = g"
    )
    expanded = expand_aliases(p)
    fun_item = expanded.items[2]
    dom = fun_item.params[1][1]
    assert format_predicate(dom.domain.pred) == "x < k"
    assert format_predicate(dom.codomain.pred) == "x < k + 1"


def test_suc_desugars_to_plus_one_in_predicates():
    p = parse_predicate("x < suc n")
    assert p == Cmp("<", LinearTerm.var("x"), LinearTerm.var("n").shift(1))


def test_unrefined_base_is_true_refinement():
    item = parse("val a : Nat = (zero, auto)").items[0]
    assert item.ty == RBase(BaseType.NAT, "v", TRUE)
