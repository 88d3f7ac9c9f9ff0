"""Acceptance suite: one test per criterion at its stated tolerance.

Each test prints a single ``[PASS]``/``[FAIL]`` line with the measured
values, visible even when pytest captures output. Run alone with

    pytest tests/test_acceptance.py -v
"""
import pytest

from qhjlab.verification import CRITERIA, DEFAULT_SEED, run_criterion


@pytest.mark.parametrize("key", list(CRITERIA))
def test_criterion(key, capsys):
    result = run_criterion(key, DEFAULT_SEED)
    with capsys.disabled():
        print("\n" + result.line())
    failed = [c.line() for c in result.checks if not c.passed]
    assert result.passed, "; ".join(failed)
