from __future__ import annotations

import pytest

from refine import sexpr
from refine.logic import (
    LinearTerm,
    TRUE,
    print_linear,
    print_predicate,
    translate_vc,
    UnsupportedPredicateError,
)
from refine.surface import expand_aliases, parse
from refine.typesys import check_program
from conftest import corpus_path
from helpers import NAT, VcGenerator, pred, sexp_text, vc

GOLDEN_WIDENING_SCRIPT = (
    "(set-logic QF_LIA)\n"
    "(declare-const n Int)\n"
    "(declare-const x Int)\n"
    "(assert (>= n 0))\n"
    "(assert (>= x 0))\n"
    "(assert (< x n))\n"
    "(assert (not (< x (+ n 1))))\n"
    "(check-sat)\n"
    "(get-model)\n"
)


def test_translate_vc_matches_golden_bytes():
    condition = vc(
        [("n", NAT), ("x", NAT)],
        [pred("x < n")],
        pred("x < n + 1"),
    )
    assert translate_vc(condition).text == GOLDEN_WIDENING_SCRIPT


def test_fin_widen_program_emits_golden_bytes():
    program = expand_aliases(parse(corpus_path("fin_widen.rfn").read_text()))
    (condition,) = check_program(program).vcs
    assert translate_vc(condition).text == GOLDEN_WIDENING_SCRIPT


def test_translate_empty_vc_asserts_negated_true():
    script = translate_vc(vc([], [], TRUE))
    assert script.text == (
        "(set-logic QF_LIA)\n(assert (not true))\n(check-sat)\n(get-model)\n"
    )


def test_translate_undeclared_symbol_is_rejected():
    with pytest.raises(UnsupportedPredicateError):
        translate_vc(vc([], [], pred("x < 1")))


def test_singleton_vc_script_structure():
    script = translate_vc(vc([("v", NAT)], [pred("v == 2")], pred("v == 3")))
    assert script.text == (
        "(set-logic QF_LIA)\n"
        "(declare-const v Int)\n"
        "(assert (>= v 0))\n"
        "(assert (= v 2))\n"
        "(assert (not (= v 3)))\n"
        "(check-sat)\n"
        "(get-model)\n"
    )


# -- predicate printing ---------------------------------------------------------


def test_print_predicate_examples():
    assert print_predicate(pred("x < n + 1")) == "(< x (+ n 1))"
    assert print_predicate(TRUE) == "true"
    assert print_predicate(pred("2 * x + 3 <= y")) == "(<= (+ (* 2 x) 3) y)"


def test_print_predicate_negated_equality():
    assert print_predicate(pred("x /= y")) == "(not (= x y))"


def test_print_linear_subtraction_and_negatives():
    assert print_linear(LinearTerm.var("n").sub(LinearTerm.var("m"))) == "(- n m)"
    assert print_linear(LinearTerm.of_const(-1)) == "(- 0 1)"
    assert print_linear(LinearTerm((("x", -2),), 0)) == "(- 0 (* 2 x))"
    assert print_linear(LinearTerm((("n", 1),), -1)) == "(- n 1)"


def test_print_boolean_structure():
    assert print_predicate(pred("p && q || !r")) == "(or (and p q) (not r))"
    assert print_predicate(pred("p => q")) == "(=> p q)"


# -- properties over random conditions -------------------------------------------


def _random_vcs(count: int, seed: int):
    gen = VcGenerator(seed)
    return [gen.next_vc() for _ in range(count)]


def test_emission_is_deterministic():
    for condition in _random_vcs(60, seed=7):
        assert translate_vc(condition).text == translate_vc(condition).text


_SMT_OPERATORS = {
    "assert", "not", "and", "or", "=>", "=", "<", "<=", ">", ">=", "+", "-", "*",
    "true", "false",
}


def _free_symbols(form, out):
    if isinstance(form, str):
        if form not in _SMT_OPERATORS and not form.lstrip("-").isdigit():
            out.add(form)
    else:
        for sub in form:
            _free_symbols(sub, out)


def test_declaration_completeness():
    for condition in _random_vcs(120, seed=11):
        script = translate_vc(condition)
        declared = {name for name, _ in script.declarations}
        forms = sexpr.parse_all(script.text)
        symbols: set[str] = set()
        for form in forms:
            if isinstance(form, list) and form and form[0] == "assert":
                _free_symbols(form[1], symbols)
        assert symbols <= declared


def test_negated_goal_is_last_and_recoverable():
    for condition in _random_vcs(120, seed=13):
        script = translate_vc(condition)
        forms = [
            f for f in sexpr.parse_all(script.text)
            if isinstance(f, list) and f and f[0] == "assert"
        ]
        last = forms[-1][1]
        assert isinstance(last, list) and last[0] == "not"
        recovered = sexp_text(last[1])
        assert recovered == print_predicate(condition.goal)
        # earlier assertions never carry the negated goal
        for form in forms[:-1]:
            assert sexp_text(form[1]) != sexp_text(last)


def test_nat_side_conditions_match_nat_declarations():
    # one leading `(>= v 0)` per Nat-sorted declaration, in order
    for condition in _random_vcs(120, seed=17):
        script = translate_vc(condition)
        nat_names = [n for n, b in script.declarations if b is NAT]
        side = script.assertions[: len(nat_names)]
        assert [print_predicate(a) for a in side] == [
            f"(>= {n} 0)" for n in nat_names
        ]
