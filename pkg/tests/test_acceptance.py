"""Full acceptance suite at the stated tolerances, one PASS/FAIL line per criterion."""

import pytest

from lane_emden_lab.acceptance import CRITERIA, format_line, run_criterion


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, acceptance_log):
    res = run_criterion(number)
    line = format_line(res)
    print(line)
    acceptance_log.append(line)
    assert res.passed, line
