"""The 13 acceptance criteria at their stated tolerances.

Each criterion prints one PASS/FAIL line (collected in the terminal summary by
conftest.py).  Run this file directly to see the lines without pytest.
"""
import sys

import pytest

from motion_spherical.verification import CRITERIA, run_criterion

RESULTS = {}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    res = run_criterion(number)
    RESULTS[number] = res
    print(res.line())
    assert res.passed, res.line()


if __name__ == "__main__":
    failed = 0
    for k in sorted(CRITERIA):
        res = run_criterion(k)
        print(res.line(), flush=True)
        failed += not res.passed
    sys.exit(1 if failed else 0)
