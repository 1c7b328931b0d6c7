import numpy as np
import pytest

from corrsel.model import CorrespondenceSet


def make_set(p, q, **kw):
    kw.setdefault("margin", None)
    return CorrespondenceSet(np.asarray(p, float), np.asarray(q, float), **kw)


def random_homography(rng, size=(640.0, 480.0), strength=0.2):
    from corrsel.synthgen import random_perspective
    return random_perspective(rng, size, strength)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# One line per acceptance criterion, filled by test_acceptance and echoed in
# the terminal summary so the verdicts are visible without ``-s``.
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
