"""Acceptance criteria; prints one PASS/FAIL line per criterion."""
import pytest

from contactred.acceptance import CRITERIA, SuiteContext, run_criterion

CTX = SuiteContext(seed=0, workers=1, catalog=None)


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    res = run_criterion(number, CTX)
    with capsys.disabled():
        print(f"\n[{'PASS' if res.passed else 'FAIL'}] criterion {number:2d}: {res.title}: "
              f"{res.detail}")
    assert res.passed, res.detail
