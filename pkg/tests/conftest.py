from __future__ import annotations

import json
from pathlib import Path

import pytest

import synth

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def reference_summary():
    """Manifest + assignment reproducing the published split summary table."""
    return synth.reference_summary_fixture()


@pytest.fixture(scope="session")
def golden_scores() -> dict:
    return json.loads((DATA_DIR / "golden_scores.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def golden_paths() -> tuple[Path, Path]:
    return DATA_DIR / "golden_hyp.txt", DATA_DIR / "golden_ref.txt"
