from __future__ import annotations

import pytest

from refine.evaluator import (
    IntV,
    NatV,
    OutOfFuelError,
    erase,
    erase_program,
    evaluate,
)
from refine.surface import (
    Arith,
    Auto,
    NatLit,
    Pair,
    ProofUnit,
    Var,
    expand_aliases,
    parse,
)
from conftest import corpus_path


def load(name: str):
    return erase_program(expand_aliases(parse(corpus_path(name).read_text(), name)))


def test_erase_replaces_proof_with_unit():
    term = Pair(NatLit(2, "2"), Auto())
    erased = erase(term)
    assert erased == Pair(NatLit(2, "2"), ProofUnit())


def test_erase_leaves_pair_free_terms_alone():
    term = Arith("+", (Var("a"), NatLit(1, "1")), "suc")
    assert erase(term) == term


def test_pred_eval_suc_case():
    value, _ = evaluate(load("pred.rfn"), "pred", [NatV(5), NatV(3)])
    assert value == NatV(2)


def test_pred_eval_zero_case():
    value, _ = evaluate(load("pred.rfn"), "pred", [NatV(1), NatV(0)])
    assert value == NatV(0)


def test_pred_step_count_is_constant_in_magnitude():
    program = load("pred.rfn")
    _, small = evaluate(program, "pred", [NatV(4), NatV(3)])
    _, large = evaluate(program, "pred", [NatV(300001), NatV(300000)])
    assert small == large


def test_inject_step_count_grows_linearly():
    program = load("bench_inject.rfn")
    counts = {}
    for m in (10, 100, 1000):
        value, steps = evaluate(program, "inject", [NatV(m)])
        assert value == NatV(m)
        counts[m] = steps
    assert counts[100] / counts[10] == pytest.approx(10, rel=0.2)
    assert counts[1000] / counts[100] == pytest.approx(10, rel=0.2)


def test_erasure_soundness_against_opaque_proof_reference():
    for name, entry, args in (
        ("pred.rfn", "pred", [NatV(7), NatV(6)]),
        ("arith.rfn", "min", [NatV(4), NatV(9)]),
        ("arith.rfn", "double", [NatV(5)]),
        ("let_apply.rfn", "shift", [NatV(9), NatV(2)]),
    ):
        program = expand_aliases(parse(corpus_path(name).read_text(), name))
        erased_value, _ = evaluate(erase_program(program), entry, args)
        opaque_value, _ = evaluate(program, entry, args, carry_proofs=True)
        assert erased_value == opaque_value


def test_proof_slots_are_never_evaluated():
    # a program whose proof slot would diverge if executed cannot exist
    # syntactically; instead check the erased pair stores no proof
    program = load("pairs.rfn")
    value, _ = evaluate(program, "two_eq_two")
    assert value == NatV(2)  # unwrap at the boundary
    erased = erase(Pair(NatLit(2, "2"), Auto()))
    assert isinstance(erased, Pair) and erased.proof == ProofUnit()


def test_out_of_fuel_on_unbounded_recursion():
    program = erase_program(parse("fun loop (n : Nat) : Nat = loop n"))
    with pytest.raises(OutOfFuelError):
        evaluate(program, "loop", [NatV(0)], fuel=10_000)


def test_fuel_limit_is_reported():
    program = erase_program(parse("fun loop (n : Nat) : Nat = loop n"))
    with pytest.raises(OutOfFuelError) as exc:
        evaluate(program, "loop", [NatV(0)], fuel=123)
    assert exc.value.limit == 123


def test_if_branches_on_predicate():
    program = load("arith.rfn")
    assert evaluate(program, "min", [NatV(3), NatV(8)])[0] == NatV(3)
    assert evaluate(program, "min", [NatV(8), NatV(3)])[0] == NatV(3)


def test_subtraction_is_integer_subtraction():
    program = erase_program(parse("fun down (a : Nat) (b : Nat) : Int = a - b"))
    assert evaluate(program, "down", [NatV(2), NatV(5)])[0] == IntV(-3)


def test_step_counter_tallies_beta_and_discriminations():
    program = load("pred.rfn")
    _, steps = evaluate(program, "pred", [NatV(5), NatV(3)])
    # two argument applications plus one match discrimination
    assert steps == 3


def test_deep_unary_recursion_does_not_overflow():
    program = load("bench_inject.rfn")
    value, steps = evaluate(program, "inject", [NatV(20000)], fuel=10**6)
    assert value == NatV(20000)
    assert steps == 2 * 20000 + 2
