from pathlib import Path
from typing import List, Tuple

import pytest

from app.analysis.frontend import ProgramModel, load_program, parse_program
from app.main import main
from app.services.datadog_service import DatadogService
from app.utils.testkit import CORPUS_DIR, golden_files


@pytest.fixture(autouse=True)
def _datadog_off():
    DatadogService.reset()
    yield
    DatadogService.reset()


@pytest.fixture
def corpus_dir() -> Path:
    return CORPUS_DIR


@pytest.fixture
def self_copy() -> ProgramModel:
    return load_program(CORPUS_DIR / "examples" / "self_copy.tasm")


@pytest.fixture
def self_copy_exit() -> ProgramModel:
    return load_program(CORPUS_DIR / "examples" / "self_copy_exit.tasm")


@pytest.fixture
def training_files() -> List[str]:
    return [str(p) for p in golden_files("malicious", "train_")]


@pytest.fixture
def heldout_files() -> List[str]:
    return [str(p) for p in golden_files("malicious", "heldout_")]


@pytest.fixture
def benign_files() -> List[str]:
    return [str(p) for p in golden_files("benign")]


@pytest.fixture
def program():
    """Compila un programa .tasm desde texto."""
    def build(text: str, register_count: int = 4) -> ProgramModel:
        return parse_program(text, "<test>", register_count)
    return build


@pytest.fixture
def cli(capsys):
    """Ejecuta la CLI en proceso; devuelve (código, stdout, stderr)."""
    def run(*argv: str) -> Tuple[int, str, str]:
        code = main([str(a) for a in argv])
        captured = capsys.readouterr()
        return code, captured.out, captured.err
    return run


@pytest.fixture
def learned_db(cli, tmp_path, training_files) -> Path:
    db = tmp_path / "signatures.json"
    code, _, err = cli("learn", *training_files, "--out", db)
    assert code == 0, err
    return db
