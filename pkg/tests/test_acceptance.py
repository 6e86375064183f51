"""Acceptance criteria at their stated tolerances, one pass/fail line each."""

import pytest

from potpot.bench.acceptance import CHECKS

RESULTS = []


@pytest.mark.parametrize("number", sorted(CHECKS))
def test_criterion(number):
    result = CHECKS[number]()
    RESULTS.append(result)
    print(result.line())
    assert result.passed, result.line()
