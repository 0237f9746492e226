from __future__ import annotations

from pathlib import Path

import pytest

from docforge.py_extract import FunctionRecord, extract_functions
from docforge.repo_filter import SourceFile

FIXTURES = Path(__file__).parent / "fixtures"
CORPUS = FIXTURES / "corpus"
GOLDEN = Path(__file__).parent / "golden"


def record_of(source: str, name: str | None = None) -> FunctionRecord:
    """The first (or the named) function record extracted from ``source``."""
    records = extract_functions(SourceFile("snippet.py", source))
    if name is None:
        return records[0]
    return next(r for r in records if r.qualified_name == name)


@pytest.fixture
def corpus_dir() -> Path:
    return CORPUS


_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance verdict, then assert it."""

    def check(name: str, ok: bool, detail: str = "") -> None:
        _ACCEPTANCE.append((name, bool(ok), detail))
        assert ok, f"{name}: {detail}"

    return check


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))
