from __future__ import annotations

import subprocess
import sys

from refine.cli import Diagnostic, main, render_diagnostic
from refine.solver import Invalid, Unknown
from conftest import FAKES, corpus_path

PRED = str(corpus_path("pred.rfn"))
BAD = str(corpus_path("bad_widen.rfn"))


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_check_pred_reports_all_valid(capsys):
    code, out, _ = run_cli(["check", PRED], capsys)
    assert code == 0
    assert "2 VCs, 2 valid" in out


def test_check_bad_widen_shows_counterexample(capsys):
    code, out, _ = run_cli(["check", BAD], capsys)
    assert code == 1
    assert "refinement not provable: x < n" in out
    assert "counterexample: n = 0, x = 0" in out


def test_check_without_files_prints_usage(capsys):
    code, _, err = run_cli(["check"], capsys)
    assert code == 2
    assert "usage" in err.lower()


def test_valid_conditions_emit_no_diagnostics(capsys):
    _, out, _ = run_cli(["check", PRED], capsys)
    assert "refinement not provable" not in out


def test_exit_code_two_on_unknown(capsys):
    code, out, _ = run_cli(
        ["check", PRED, "--solver", str(FAKES / "slow.py"), "--timeout", "200"],
        capsys,
    )
    assert code == 2
    assert "verdict: unknown (timeout)" in out


def test_solver_errors_become_unknown_not_valid(capsys):
    code, out, _ = run_cli(
        ["check", PRED, "--solver", str(FAKES / "garbage.py")], capsys
    )
    assert code == 2
    assert "unknown (solver-error" in out


def test_invalid_takes_precedence_over_infrastructure_errors(capsys, tmp_path):
    broken = tmp_path / "broken.rfn"
    broken.write_text("val x : = (1, auto)\n")
    code, out, _ = run_cli(["check", str(broken), BAD, "--no-solver"], capsys)
    assert code == 1
    assert "error:" in out and "counterexample" in out


def test_no_solver_mode_never_spawns_processes(capsys, monkeypatch):
    def forbidden(*args, **kwargs):
        raise AssertionError("a process was spawned in --no-solver mode")

    monkeypatch.setattr("refine.solver.subprocess.Popen", forbidden)
    code, out, _ = run_cli(["check", PRED, BAD, "--no-solver", "--oracle-bound", "12"], capsys)
    assert code == 1
    assert "counterexample: n = 0, x = 0" in out


def test_static_errors_render_positions_and_exit_two(capsys, tmp_path):
    bad = tmp_path / "broken.rfn"
    bad.write_text("val x : {y: Nat | y < } = (1, auto)\n")
    code, out, _ = run_cli(["check", str(bad)], capsys)
    assert code == 2
    assert f"{bad}:1:" in out and "error:" in out


def test_unbound_name_is_a_static_error(capsys, tmp_path):
    bad = tmp_path / "unbound.rfn"
    bad.write_text("val x : {y: Nat | y < ghost} = (1, auto)\n")
    code, out, _ = run_cli(["check", str(bad)], capsys)
    assert code == 2
    assert "ghost" in out


def test_dump_smt_writes_one_file_per_condition(capsys, tmp_path):
    dump = tmp_path / "dumps"
    code, _, _ = run_cli(["check", PRED, "--dump-smt", str(dump)], capsys)
    assert code == 0
    names = sorted(p.name for p in dump.iterdir())
    assert names == ["pred.rfn.vc1.smt2", "pred.rfn.vc2.smt2"]
    text = (dump / "pred.rfn.vc1.smt2").read_text()
    assert text.startswith("(set-logic QF_LIA)\n")
    assert text.endswith("(check-sat)\n(get-model)\n")


def test_dump_smt_bytes_match_the_emitter(capsys, tmp_path):
    from refine.logic import translate_vc
    from refine.surface import expand_aliases, parse
    from refine.typesys import check_program

    widen = str(corpus_path("fin_widen.rfn"))
    code, _, _ = run_cli(["check", widen, "--dump-smt", str(tmp_path)], capsys)
    assert code == 0
    dumped = (tmp_path / "fin_widen.rfn.vc1.smt2").read_text()
    program = expand_aliases(parse(corpus_path("fin_widen.rfn").read_text()))
    (vc,) = check_program(program).vcs
    assert dumped == translate_vc(vc).text


def test_run_entry_after_clean_check(capsys):
    code, out, _ = run_cli(["check", PRED, "--run", "pred", "6", "3"], capsys)
    assert code == 0
    assert "pred => 2" in out
    assert "steps: 3" in out


def test_run_refused_when_check_fails(capsys):
    code, _, err = run_cli(["check", BAD, "--run", "narrow", "1"], capsys)
    assert code == 1
    assert "not running" in err


def test_jobs_flag_preserves_source_order(capsys):
    code1, out1, _ = run_cli(["check", PRED, str(corpus_path("arith.rfn")), "--jobs", "4"], capsys)
    code2, out2, _ = run_cli(["check", PRED, str(corpus_path("arith.rfn"))], capsys)
    assert code1 == code2 == 0
    assert out1 == out2


def test_output_bytes_stable_across_runs(capsys):
    _, first, _ = run_cli(["check", BAD, PRED], capsys)
    _, second, _ = run_cli(["check", BAD, PRED], capsys)
    assert first == second


# -- render_diagnostic ------------------------------------------------------------


def test_render_invalid_diagnostic():
    d = Diagnostic(
        severity="refinement", path="f.rfn", line=3, col=7,
        reason="subtyping", verdict=Invalid({"v": 2}),
        goal_text="v == 3", counterexample=(("v", "2"),),
    )
    text = render_diagnostic(d)
    assert text == "f.rfn:3:7: refinement not provable: v == 3\n  counterexample: v = 2"


def test_render_unknown_diagnostic():
    d = Diagnostic(
        severity="refinement", path="f.rfn", line=1, col=1,
        reason="subtyping", verdict=Unknown("timeout"),
        goal_text="x < n",
    )
    assert render_diagnostic(d).endswith("  verdict: unknown (timeout)")


def test_fresh_names_map_back_when_unambiguous():
    d = Diagnostic(
        severity="refinement", path="f.rfn", line=1, col=1,
        reason="subtyping", verdict=Invalid({"x!1": 0, "n": 0}),
        goal_text="x < n", counterexample=(("n", "0"), ("x", "0")),
    )
    assert "x = 0" in render_diagnostic(d)


# -- bench -------------------------------------------------------------------------


def test_bench_writes_csv_and_figure(capsys, tmp_path):
    code, out, _ = run_cli(
        ["bench", "--out", str(tmp_path), "--pred-sizes", "1,10,1000",
         "--inject-sizes", "10,100"],
        capsys,
    )
    assert code == 0
    csv_text = (tmp_path / "bench.csv").read_text()
    lines = csv_text.strip().splitlines()
    assert lines[0] == "kind,m,steps"
    pred_steps = {int(r.split(",")[1]): int(r.split(",")[2])
                  for r in lines[1:] if r.startswith("pred,")}
    assert len(set(pred_steps.values())) == 1  # constant work
    assert (tmp_path / "bench.png").stat().st_size > 0


def test_refine_solver_env_var_is_honored(capsys, monkeypatch):
    monkeypatch.setenv("REFINE_SOLVER", str(FAKES / "garbage.py"))
    code, out, err = run_cli(["check", PRED], capsys)
    assert code == 2
    assert "garbage.py" in err  # identity line names the env-selected solver
    assert "unknown (solver-error" in out


def test_solver_flag_overrides_env(capsys, monkeypatch, solver_cfg):
    monkeypatch.setenv("REFINE_SOLVER", str(FAKES / "garbage.py"))
    code, _, err = run_cli(["check", PRED, "--solver", solver_cfg.executable], capsys)
    assert "garbage.py" not in err


def test_invalid_timeout_is_a_graceful_error(capsys):
    code, _, err = run_cli(["check", PRED, "--timeout", "0"], capsys)
    assert code == 2
    assert "timeout" in err


def test_report_counts_sum_to_vc_total():
    from refine.cli import process_file
    from refine.solver import resolve_solver

    outcome = process_file(PRED, resolve_solver())
    report = outcome.report
    assert report.valid + report.invalid + report.unknown == report.vcs


def test_end_to_end_singleton_counterexample_names_the_value(capsys, tmp_path):
    source = tmp_path / "wrong.rfn"
    source.write_text("val w : {x: Nat | x == 3} = (2, auto)\n")
    code, out, _ = run_cli(["check", str(source)], capsys)
    assert code == 1
    assert "refinement not provable: v == 3" in out
    assert "counterexample: v = 2" in out


def test_module_entrypoint_runs_as_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "refine.cli", "check", PRED],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "2 VCs, 2 valid" in proc.stdout
