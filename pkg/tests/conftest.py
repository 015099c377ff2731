import sys
from pathlib import Path

import pytest
from hypothesis import settings

from tastamp import corpus
from tastamp.model import linearize_path

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def path_model():
    return linearize_path(corpus.path_example(), corpus.PATH)


@pytest.fixture(scope="session")
def x2():
    return corpus.x2_loop()


@pytest.fixture(scope="session")
def unit():
    return corpus.unit_intervals()


@pytest.fixture(scope="session")
def rand_corpus():
    return corpus.random_corpus()


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
