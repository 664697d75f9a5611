import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from quest.imageio import GrayImage  # noqa: E402

RAMP = [[10, 20, 30], [40, 50, 60], [70, 80, 90]]


@pytest.fixture
def ramp_patch():
    return np.array(RAMP)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_image(rng, w=32, h=32, hi=256):
    return GrayImage(rng.integers(0, hi, size=(h, w)))


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num:2d}. {name}: {detail}")
