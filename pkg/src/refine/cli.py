"""Command-line driver: parse, check, translate, solve, report.

Exit codes: 0 when every condition is Valid, 1 when any is Invalid,
2 when any is Unknown or an infrastructure/static error occurred and
nothing was Invalid. Diagnostics and per-file reports go to stdout and
are byte-stable across runs; wall-clock timing goes to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .evaluator import BoolV, IntV, NatV, Value, erase_program, evaluate
from .logic import format_predicate, translate_vc, UnsupportedPredicateError
from .solver import (
    Invalid,
    ModelParseError,
    SolverConfig,
    SolverSpawnError,
    SolverVerdict,
    Unknown,
    Valid,
    brute_force,
    resolve_solver,
    solve,
)
from .surface import AliasError, ParseError, SurfaceProgram, expand_aliases, parse
from .typesys import VerificationCondition, check_program

__all__ = ["Diagnostic", "RunReport", "render_diagnostic", "run_check", "main"]


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" for static failures, "refinement" for VC verdicts
    path: str
    line: int
    col: int
    reason: str
    verdict: SolverVerdict | None
    goal_text: str
    counterexample: tuple[tuple[str, str], ...] = ()
    message: str = ""


@dataclass(frozen=True)
class RunReport:
    path: str
    vcs: int
    valid: int
    invalid: int
    unknown: int
    wall_ms: float
    solver_identity: str

    @property
    def summary(self) -> str:
        return (
            f"{self.path}: {self.vcs} VCs, {self.valid} valid, "
            f"{self.invalid} invalid, {self.unknown} unknown"
        )


def render_diagnostic(d: Diagnostic) -> str:
    """Stable line-oriented rendering; Valid conditions produce nothing."""
    if d.severity == "error":
        return f"{d.path}:{d.line}:{d.col}: error: {d.message}"
    head = f"{d.path}:{d.line}:{d.col}: refinement not provable: {d.goal_text}"
    match d.verdict:
        case Invalid():
            model = ", ".join(f"{n} = {v}" for n, v in d.counterexample)
            return head + f"\n  counterexample: {model}"
        case Unknown(reason):
            return head + f"\n  verdict: unknown ({reason})"
    return head


def _display_names(decls) -> dict[str, str]:
    # fresh names like x!1 map back to x when that stays unambiguous
    base = {name: name.split("!", 1)[0] for name, _ in decls}
    counts: dict[str, int] = {}
    for b in base.values():
        counts[b] = counts.get(b, 0) + 1
    return {n: (b if counts[b] == 1 else n) for n, b in base.items()}


def _render_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _vc_diagnostic(
    path: str, program: SurfaceProgram, vc: VerificationCondition, verdict: SolverVerdict
) -> Diagnostic:
    line, col = program.line_col(vc.span.start)
    counterexample: tuple[tuple[str, str], ...] = ()
    if isinstance(verdict, Invalid):
        names = _display_names(vc.decls)
        counterexample = tuple(
            (names[name], _render_value(verdict.model[name]))
            for name, _ in vc.decls
            if name in verdict.model
        )
    return Diagnostic(
        severity="refinement",
        path=path,
        line=line,
        col=col,
        reason=vc.reason,
        verdict=verdict,
        goal_text=format_predicate(vc.goal),
        counterexample=counterexample,
    )


@dataclass
class _FileOutcome:
    diagnostics: list[Diagnostic] = field(default_factory=list)
    report: RunReport | None = None
    static_errors: int = 0
    vcs: list[VerificationCondition] = field(default_factory=list)
    verdicts: list[SolverVerdict] = field(default_factory=list)
    program: SurfaceProgram | None = None


def _static_diagnostic(path: str, line: int, col: int, message: str) -> Diagnostic:
    return Diagnostic(
        severity="error", path=path, line=line, col=col,
        reason="static error", verdict=None, goal_text="", message=message,
    )


def _discharge(
    vcs: list[VerificationCondition],
    cfg: SolverConfig | None,
    oracle_bound: int,
    jobs: int,
) -> list[SolverVerdict]:
    if cfg is None:
        return [brute_force(vc, oracle_bound) for vc in vcs]
    scripts = [translate_vc(vc) for vc in vcs]

    def one(script) -> SolverVerdict:
        try:
            return solve(script, cfg)
        except (SolverSpawnError, ModelParseError) as exc:
            return Unknown(f"solver-error({exc})")

    if jobs > 1 and len(scripts) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, scripts))
    return [one(s) for s in scripts]


def process_file(
    path: str,
    cfg: SolverConfig | None,
    oracle_bound: int = 25,
    jobs: int = 1,
    dump_dir: str | None = None,
) -> _FileOutcome:
    out = _FileOutcome()
    started = time.perf_counter()
    identity = cfg.identity if cfg is not None else f"oracle (bound {oracle_bound})"
    try:
        source = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        out.diagnostics.append(_static_diagnostic(path, 1, 1, str(exc)))
        out.static_errors += 1
        out.report = RunReport(path, 0, 0, 0, 0, 0.0, identity)
        return out
    try:
        program = expand_aliases(parse(source, path))
    except ParseError as exc:
        out.diagnostics.append(_static_diagnostic(path, exc.line, exc.col, str(exc)))
        out.static_errors += 1
        out.report = RunReport(path, 0, 0, 0, 0, 0.0, identity)
        return out
    except AliasError as exc:
        out.diagnostics.append(_static_diagnostic(path, 1, 1, str(exc)))
        out.static_errors += 1
        out.report = RunReport(path, 0, 0, 0, 0, 0.0, identity)
        return out
    out.program = program

    result = check_program(program)
    for err in result.errors:
        line, col = program.line_col(err.span.start)
        out.diagnostics.append(_static_diagnostic(path, line, col, str(err)))
        out.static_errors += 1
    out.vcs = result.vcs

    if dump_dir is not None:
        os.makedirs(dump_dir, exist_ok=True)
        stem = Path(path).name
        for k, vc in enumerate(result.vcs, start=1):
            script = translate_vc(vc)
            target = Path(dump_dir) / f"{stem}.vc{k}.smt2"
            target.write_text(script.text, encoding="utf-8")

    try:
        out.verdicts = _discharge(result.vcs, cfg, oracle_bound, jobs)
    except UnsupportedPredicateError as exc:
        out.diagnostics.append(_static_diagnostic(path, 1, 1, str(exc)))
        out.static_errors += 1
        out.verdicts = []

    valid = invalid = unknown = 0
    for vc, verdict in zip(result.vcs, out.verdicts):
        match verdict:
            case Valid():
                valid += 1
            case Invalid():
                invalid += 1
                out.diagnostics.append(_vc_diagnostic(path, program, vc, verdict))
            case Unknown():
                unknown += 1
                out.diagnostics.append(_vc_diagnostic(path, program, vc, verdict))
    wall_ms = (time.perf_counter() - started) * 1000.0
    out.report = RunReport(
        path, len(result.vcs), valid, invalid, unknown, wall_ms, identity
    )
    return out


def _parse_run_arg(text: str) -> Value:
    if text == "true":
        return BoolV(True)
    if text == "false":
        return BoolV(False)
    try:
        n = int(text)
    except ValueError:
        raise SystemExit(f"refine: cannot parse run argument {text!r}")
    return NatV(n) if n >= 0 else IntV(n)


def run_check(args: argparse.Namespace) -> int:
    if not args.paths:
        print("usage: refine check FILE.rfn [FILE.rfn ...]", file=sys.stderr)
        return 2
    cfg: SolverConfig | None = None
    if not args.no_solver:
        try:
            cfg = resolve_solver(args.solver, timeout_ms=args.timeout, jobs=args.jobs)
        except ValueError as exc:
            print(f"refine: {exc}", file=sys.stderr)
            return 2
        print(f"solver: {cfg.identity}", file=sys.stderr)
    else:
        print(f"solver: oracle (bound {args.oracle_bound})", file=sys.stderr)

    started = time.perf_counter()
    any_invalid = any_unknown = any_static = False
    outcomes = []
    for path in args.paths:
        outcome = process_file(
            path, cfg, oracle_bound=args.oracle_bound, jobs=args.jobs,
            dump_dir=args.dump_smt,
        )
        outcomes.append(outcome)
        for d in outcome.diagnostics:
            print(render_diagnostic(d))
        assert outcome.report is not None
        print(outcome.report.summary)
        any_invalid |= outcome.report.invalid > 0
        any_unknown |= outcome.report.unknown > 0
        any_static |= outcome.static_errors > 0
    if len(args.paths) > 1:
        total = sum(o.report.vcs for o in outcomes)
        valid = sum(o.report.valid for o in outcomes)
        invalid = sum(o.report.invalid for o in outcomes)
        unknown = sum(o.report.unknown for o in outcomes)
        print(f"total: {total} VCs, {valid} valid, {invalid} invalid, {unknown} unknown")
    print(f"time: {time.perf_counter() - started:.3f}s", file=sys.stderr)

    code = 1 if any_invalid else (2 if any_unknown or any_static else 0)

    if args.run:
        if code != 0:
            print("refine: not running; checking did not pass", file=sys.stderr)
            return code or 2
        if len(args.paths) != 1:
            print("refine: --run needs exactly one input file", file=sys.stderr)
            return 2
        entry, *raw_args = args.run
        program = outcomes[0].program
        assert program is not None
        values = [_parse_run_arg(a) for a in raw_args]
        try:
            result, steps = evaluate(erase_program(program), entry, values)
        except Exception as exc:
            print(f"refine: evaluation failed: {exc}", file=sys.stderr)
            return 2
        print(f"{entry} => {_render_eval_value(result)}")
        print(f"steps: {steps}")
    return code


def _render_eval_value(v) -> str:
    match v:
        case NatV(value) | IntV(value):
            return str(value)
        case BoolV(value):
            return "true" if value else "false"
    return f"<{type(v).__name__}>"


# ---------------------------------------------------------------------------
# Benchmark report: step counts as CSV plus a rendered figure
# ---------------------------------------------------------------------------

PRED_BENCH_SRC = """\
type Fin(n) = {x: Nat | x < n}
fun pred (n : Nat) (m : Fin(n)) : Fin(n) =
  match m { zero -> (zero, auto) | suc x -> (x, auto) }
"""

INJECT_BENCH_SRC = """\
fun inject (m : Nat) : Nat =
  match m { zero -> zero | suc k -> suc (inject k) }
"""


def bench_rows(
    pred_sizes: tuple[int, ...] = (1, 10, 100000),
    inject_sizes: tuple[int, ...] = (10, 100, 1000),
    fuel: int = 10**7,
) -> list[tuple[str, int, int]]:
    """Step counts for the constant-work predecessor against the unary
    reconstruction whose cost grows with its argument."""
    rows: list[tuple[str, int, int]] = []
    pred_prog = erase_program(expand_aliases(parse(PRED_BENCH_SRC)))
    for m in pred_sizes:
        _, steps = evaluate(pred_prog, "pred", [NatV(m + 1), NatV(m)], fuel=fuel)
        rows.append(("pred", m, steps))
    inject_prog = erase_program(expand_aliases(parse(INJECT_BENCH_SRC)))
    for m in inject_sizes:
        _, steps = evaluate(inject_prog, "inject", [NatV(m)], fuel=fuel)
        rows.append(("inject", m, steps))
    return rows


def run_bench(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    pred_sizes = tuple(int(s) for s in args.pred_sizes.split(","))
    inject_sizes = tuple(int(s) for s in args.inject_sizes.split(","))
    rows = bench_rows(pred_sizes, inject_sizes)

    csv_path = out_dir / "bench.csv"
    lines = ["kind,m,steps"] + [f"{kind},{m},{steps}" for kind, m, steps in rows]
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {csv_path}")

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for kind, marker in (("pred", "o"), ("inject", "s")):
        xs = [m for k, m, _ in rows if k == kind]
        ys = [s for k, _, s in rows if k == kind]
        ax.loglog(xs, ys, marker=marker, label=kind)
    ax.set_xlabel("argument m")
    ax.set_ylabel("evaluation steps")
    ax.set_title("constant-work pred vs unary reconstruction")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    png_path = out_dir / "bench.png"
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    print(f"wrote {png_path}")
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="refine",
        description="Refinement type checker discharging obligations via an SMT solver",
    )
    sub = parser.add_subparsers(dest="command")

    check_p = sub.add_parser("check", help="type-check .rfn files")
    check_p.add_argument("paths", nargs="*", metavar="FILE")
    check_p.add_argument("--solver", metavar="PATH", default=None,
                         help="SMT solver executable (default: $REFINE_SOLVER, then z3/cvc5 on PATH, then the bundled solver)")
    check_p.add_argument("--timeout", type=int, default=5000, metavar="MS")
    check_p.add_argument("--dump-smt", metavar="DIR", default=None,
                         help="write one FILE.vcK.smt2 per condition into DIR")
    check_p.add_argument("--oracle-bound", type=int, default=25, metavar="N")
    check_p.add_argument("--no-solver", action="store_true",
                         help="discharge with the brute-force oracle; never spawns a process")
    check_p.add_argument("--jobs", type=int, default=1, metavar="N")
    check_p.add_argument("--run", nargs="+", metavar="ENTRY",
                         help="after a clean check, evaluate ENTRY applied to the remaining arguments")
    check_p.set_defaults(func=run_check)

    bench_p = sub.add_parser("bench", help="write step-count report (CSV + figure)")
    bench_p.add_argument("--out", default=".", metavar="DIR")
    bench_p.add_argument("--pred-sizes", default="1,10,100000", metavar="CSV")
    bench_p.add_argument("--inject-sizes", default="10,100,1000", metavar="CSV")
    bench_p.set_defaults(func=run_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
