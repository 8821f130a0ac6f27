"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every criterion prints a ``[PASS]``/``[FAIL]`` line; the lines are also
repeated in the terminal summary (see ``conftest.py``).
"""

import pytest

from probwave.acceptance import CRITERIA, run_criterion

ACCEPTANCE_LINES = []


@pytest.mark.parametrize("number", [num for num, _, _ in CRITERIA], ids=[name.replace(" ", "-") for _, name, _ in CRITERIA])
def test_criterion(number):
    res = run_criterion(number, jobs=2)
    line = res.line()
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert res.passed, line
