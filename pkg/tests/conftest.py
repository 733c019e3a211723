import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

# criterion number -> list of (ok, detail), filled by test_acceptance.py
ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE.setdefault(criterion, []).append((bool(ok), detail))
    print(f"AC{criterion}: {'PASS' if ok else 'FAIL'} - {detail}")


@pytest.fixture
def acceptance():
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        results = ACCEPTANCE[k]
        ok = all(r for r, _ in results)
        detail = "; ".join(d for _, d in results)
        terminalreporter.write_line(f"AC{k:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
