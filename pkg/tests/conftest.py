import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

# criterion id -> list of (passed, detail); filled by test_acceptance
ACCEPTANCE = {}


def record(criterion, passed, detail=""):
    ACCEPTANCE.setdefault(criterion, []).append((bool(passed), detail))


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE, key=int):
        parts = ACCEPTANCE[cid]
        ok = all(p for p, _ in parts)
        details = "; ".join(d for _, d in parts if d)
        terminalreporter.write_line(f"criterion {cid:>2}: {'PASS' if ok else 'FAIL'}  {details}")
