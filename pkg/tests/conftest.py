from pathlib import Path

import numpy as np
import pytest

from discspace.panel import records_to_panel
from discspace.synthetic import synthetic_panel

FIXTURE_CSV = Path(__file__).resolve().parents[1] / "src" / "discspace" / "data" / "synthetic_panel.csv"


@pytest.fixture
def two_country_panel():
    # c1: 20 of 100 docs in i; c2: 30 of 100; world: 50 of 200 in i
    return records_to_panel(
        [
            ("c1", "i", 2019, 20, 5),
            ("c1", "j", 2019, 80, 40),
            ("c2", "i", 2019, 30, 15),
            ("c2", "j", 2019, 70, 40),
        ]
    )


@pytest.fixture(scope="session")
def synth():
    return synthetic_panel(seed=7)


@pytest.fixture(scope="session")
def fixture_csv():
    return FIXTURE_CSV


def random_counts(rng, n_countries, n_disciplines, zero_frac=0.2):
    x = rng.integers(0, 500, size=(n_countries, n_disciplines)).astype(float)
    x[rng.random(x.shape) < zero_frac] = 0
    return x


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def record_skip(number, reason):
    line = f"criterion {number:>2}: SKIP  {reason}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
