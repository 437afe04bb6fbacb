from __future__ import annotations

import os
import time

import pytest

from refine.logic import TRUE, translate_vc
from refine.solver import (
    Invalid,
    ModelParseError,
    MissingVariableError,
    SolverSpawnError,
    TooManyVariablesError,
    Unknown,
    Valid,
    brute_force,
    eval_predicate_ground,
    parse_model,
    solve,
)
from helpers import BOOL, INT, NAT, VcGenerator, pred, vc


def widen_vc():
    return vc([("n", NAT), ("x", NAT)], [pred("x < n")], pred("x < n + 1"))


def singleton_vc():
    return vc([("v", NAT)], [pred("v == 2")], pred("v == 3"))


# -- solve ------------------------------------------------------------------------


def test_solve_widening_is_valid(each_solver_cfg):
    assert solve(translate_vc(widen_vc()), each_solver_cfg) == Valid()


def test_solve_negated_true_is_valid(each_solver_cfg):
    assert solve(translate_vc(vc([], [], TRUE)), each_solver_cfg) == Valid()


def test_solve_singleton_counterexample(each_solver_cfg):
    verdict = solve(translate_vc(singleton_vc()), each_solver_cfg)
    assert isinstance(verdict, Invalid)
    assert verdict.model == {"v": 2}


def test_solve_missing_executable_raises_spawn_error():
    from refine.solver import SolverConfig

    with pytest.raises(SolverSpawnError):
        solve(translate_vc(singleton_vc()), SolverConfig("/nonexistent/solver-binary"))


def test_solve_timeout_returns_unknown_within_grace(fake_solver):
    cfg = fake_solver("slow.py", timeout_ms=300)
    started = time.perf_counter()
    verdict = solve(translate_vc(widen_vc()), cfg)
    elapsed = time.perf_counter() - started
    assert verdict == Unknown("timeout")
    assert elapsed < 5.0


def test_solve_garbage_output_raises_model_parse_error(fake_solver):
    with pytest.raises(ModelParseError):
        solve(translate_vc(widen_vc()), fake_solver("garbage.py"))


def test_solve_sat_without_model_raises_model_parse_error(fake_solver):
    with pytest.raises(ModelParseError):
        solve(translate_vc(singleton_vc()), fake_solver("satnomodel.py"))


def test_no_child_processes_survive(solver_cfg, fake_solver):
    solve(translate_vc(widen_vc()), solver_cfg)
    solve(translate_vc(singleton_vc()), solver_cfg)
    solve(translate_vc(widen_vc()), fake_solver("slow.py", timeout_ms=200))
    with pytest.raises(ChildProcessError):
        os.waitpid(-1, os.WNOHANG)


# -- parse_model --------------------------------------------------------------------


def test_parse_model_int():
    assert parse_model("((define-fun x () Int 2))", [("x", INT)]) == {"x": 2}


def test_parse_model_bool():
    assert parse_model("((define-fun b () Bool true))", [("b", BOOL)]) == {"b": True}


def test_parse_model_negative_integer_shape():
    assert parse_model("((define-fun x () Int (- 1)))", [("x", INT)]) == {"x": -1}


def test_parse_model_accepts_model_wrapper():
    raw = "(model\n  (define-fun x () Int 4)\n)"
    assert parse_model(raw, [("x", NAT)]) == {"x": 4}


def test_parse_model_missing_symbol_fails():
    with pytest.raises(ModelParseError):
        parse_model("((define-fun x () Int 2))", [("x", INT), ("y", INT)])


def test_parse_model_sort_mismatch_fails():
    with pytest.raises(ModelParseError):
        parse_model("((define-fun x () Int true))", [("x", INT)])


# -- brute force ----------------------------------------------------------------------


def test_brute_force_singleton_counterexample():
    assert brute_force(singleton_vc(), 10) == Invalid({"v": 2})


def test_brute_force_trivial_goal():
    assert brute_force(vc([], [], TRUE), 0) == Valid(bounded=True)


def test_brute_force_widening_sweeps_whole_box():
    verdict = brute_force(widen_vc(), 25)
    assert verdict == Valid(bounded=True)


def test_brute_force_lexicographic_first_counterexample():
    condition = vc(
        [("n", NAT), ("x", NAT)], [pred("x < n + 1")], pred("x < n")
    )
    assert brute_force(condition, 10) == Invalid({"n": 0, "x": 0})


def test_brute_force_int_domain_is_signed():
    condition = vc([("a", INT)], [], pred("a >= 0"))
    assert brute_force(condition, 5) == Invalid({"a": -5})


def test_brute_force_bool_domain():
    condition = vc([("p", BOOL)], [], pred("p"))
    assert brute_force(condition, 3) == Invalid({"p": False})


def test_brute_force_too_many_variables():
    decls = [(f"v{i}", NAT) for i in range(7)]
    with pytest.raises(TooManyVariablesError):
        brute_force(vc(decls, [], TRUE), 2)


# -- ground evaluation ------------------------------------------------------------------


def test_eval_predicate_ground_examples():
    assert eval_predicate_ground(pred("x < n + 1"), {"x": 0, "n": 0}) is True
    assert eval_predicate_ground(TRUE, {}) is True
    assert eval_predicate_ground(pred("v == 3"), {"v": 2}) is False


def test_eval_predicate_ground_missing_variable():
    with pytest.raises(MissingVariableError):
        eval_predicate_ground(pred("x < 1"), {})


# -- oracle/solver invariants (small samples; acceptance runs the big ones) -----------


def test_counterexample_faithfulness_sample(solver_cfg):
    gen = VcGenerator(seed=101)
    seen = 0
    while seen < 25:
        condition = gen.next_vc()
        verdict = solve(translate_vc(condition), solver_cfg)
        if not isinstance(verdict, Invalid):
            continue
        seen += 1
        for fact in condition.facts:
            assert eval_predicate_ground(fact, verdict.model)
        assert not eval_predicate_ground(condition.goal, verdict.model)


def test_oracle_agreement_sample(solver_cfg):
    gen = VcGenerator(seed=202)
    for _ in range(40):
        condition = gen.next_vc()
        oracle = brute_force(condition, 25)
        verdict = solve(translate_vc(condition), solver_cfg)
        if isinstance(oracle, Invalid):
            assert not isinstance(verdict, Valid)
        if isinstance(verdict, Invalid) and all(
            isinstance(v, bool) or abs(v) <= 25 for v in verdict.model.values()
        ):
            assert isinstance(oracle, Invalid)
