import json
from pathlib import Path

import pytest
from hypothesis import settings

from twistlab.curves import CurveSpec

DATA = Path(__file__).parent / "data"
ACCEPTANCE_LINES = pytest.StashKey[list]()

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


def load_fixture(name: str) -> CurveSpec:
    rec = json.loads((DATA / f"{name}.json").read_text())
    return CurveSpec(
        tuple(rec["a_invariants"]),
        rec["conductor"],
        rec.get("label"),
        rec.get("atkin_lehner"),
        rec.get("tamagawa"),
        rec.get("rank"),
    )


@pytest.fixture(scope="session")
def e11():
    return load_fixture("11a1")


@pytest.fixture(scope="session")
def e37():
    # 37a1: y^2 + y = x^3 - x, w_37 = +1
    return CurveSpec((0, 0, 1, -1, 0), 37, "37a1", {37: 1}, {37: 1}, 1)


@pytest.fixture(scope="session")
def e32():
    # y^2 = x^3 - x, conductor 32 (CM by Z[i])
    return CurveSpec((0, 0, 0, -1, 0), 32, "32a2")


@pytest.fixture(scope="session")
def e36():
    # y^2 = x^3 + 1, conductor 36 (CM by Z[zeta_3])
    return CurveSpec((0, 0, 0, 0, 1), 36, "36a1")


def pytest_configure(config):
    config.stash[ACCEPTANCE_LINES] = []


def pytest_collection_modifyitems(items):
    for item in items:
        if getattr(getattr(item, "obj", None), "is_hypothesis_test", False):
            item.add_marker(pytest.mark.property)


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def criterion(request):
    """Record and print one pass/fail line, then assert."""

    def check(n: int, ok: bool, detail: str):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
        print(line)
        request.config.stash[ACCEPTANCE_LINES].append(line)
        assert ok, line

    return check
