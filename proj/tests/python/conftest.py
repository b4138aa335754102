import os
import shutil
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[2]


@pytest.fixture(scope="session")
def two_rule_dir():
    return ROOT / "data" / "two_rule"


@pytest.fixture(scope="session")
def cli():
    path = os.environ.get("ARGSEEK_CLI") or shutil.which("argseek")
    if not path:
        pytest.skip("argseek executable not available")
    return path
