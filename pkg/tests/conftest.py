from __future__ import annotations

import shutil
import sys
from pathlib import Path

import pytest

from refine.solver import SolverConfig, bundled_solver_config, resolve_solver

REPO = Path(__file__).resolve().parent.parent
CORPUS = REPO / "corpus"
FAKES = Path(__file__).resolve().parent / "fakes"


def available_solver_configs() -> list[SolverConfig]:
    configs = [bundled_solver_config()]
    for name, args in (("z3", ("-in",)), ("cvc5", ("--lang", "smt2"))):
        found = shutil.which(name)
        if found:
            configs.append(SolverConfig(found, args))
    return configs


@pytest.fixture(scope="session")
def solver_cfg() -> SolverConfig:
    """The solver the CLI would pick on this machine."""
    return resolve_solver()


@pytest.fixture(
    scope="session",
    params=available_solver_configs(),
    ids=lambda cfg: Path(cfg.executable).name + ("" if not cfg.args else "+" + Path(cfg.args[0]).name),
)
def each_solver_cfg(request) -> SolverConfig:
    """Every SMT-LIB solver reachable in this environment."""
    return request.param


@pytest.fixture()
def fake_solver():
    def make(name: str, timeout_ms: int = 5000) -> SolverConfig:
        return SolverConfig(sys.executable, (str(FAKES / name),), timeout_ms)

    return make


def corpus_path(name: str) -> Path:
    return CORPUS / name


def corpus_files() -> list[Path]:
    return sorted(CORPUS.glob("*.rfn"))
