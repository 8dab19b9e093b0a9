import io
from pathlib import Path

import pytest
from rich.console import Console

import orchestrator
from killing import AnalysisOptions, builtin, full_analysis

PROJECT_ROOT = Path(__file__).parent.parent


@pytest.fixture
def flat():
    return builtin("flat_cyl")


@pytest.fixture
def kerr():
    return builtin("kerr_extreme")


@pytest.fixture
def results_dir(tmp_path, monkeypatch):
    """Experiment directories go to a temporary results/ instead of the project's."""
    target = tmp_path / "results"
    target.mkdir()
    monkeypatch.setattr(orchestrator, "RESULTS_DIR", target)
    return target


@pytest.fixture
def quiet_console():
    return Console(file=io.StringIO(), width=160)


@pytest.fixture(scope="session")
def flat_report():
    """Valence-1 analysis of flat space: p_t, p_phi and the translation p_z."""
    return full_analysis(builtin("flat_cyl"), 1, options=AnalysisOptions(show_kernel=True))
