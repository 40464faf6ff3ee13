from pathlib import Path

import pytest

from multivariant.wat import parse_module

CORPUS = Path(__file__).resolve().parents[1] / "src" / "multivariant" / "corpus"

DOUBLE_ADD = """(module
  (type (;0;) (func (param i32) (result i32)))
  (func (;0;) (type 0) (param i32) (result i32)
    local.get 0
    local.get 0
    i32.const 2
    i32.mul
    i32.add)
    (export "f" (func 0)))
"""


@pytest.fixture
def double_add():
    return parse_module(DOUBLE_ADD)


def corpus_module(name: str):
    return parse_module((CORPUS / name).read_text())


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
