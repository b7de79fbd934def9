import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
FIXTURES = TESTS_DIR / "fixtures"
SCORERS = TESTS_DIR / "scorers"
REPO_ROOT = TESTS_DIR.parent
DATA_DIR = REPO_ROOT / "data"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


def stub_command(*args: str) -> list[str]:
    """Launch command for the test stub scorer."""
    return [sys.executable, str(SCORERS / "stub_scorer.py"), *args]
