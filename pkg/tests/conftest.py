import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # makes `oracles` importable

from grt.core import default_grammar

BENCH_ROOT = Path(__file__).parent.parent / "benchmarks"


@pytest.fixture(scope="session")
def full_grammar():
    return default_grammar()


@pytest.fixture(scope="session")
def handwritten_paths():
    paths = sorted((BENCH_ROOT / "handwritten").glob("*.sl"))
    assert paths, "handwritten benchmarks missing; run scripts/make_benchmarks.py"
    return paths


@pytest.fixture(scope="session")
def generated_paths():
    paths = sorted((BENCH_ROOT / "generated").glob("*.sl"))
    assert paths, "generated benchmarks missing; run scripts/make_benchmarks.py"
    return paths
