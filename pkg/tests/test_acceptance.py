"""The ten acceptance criteria, each at its stated tolerance and time budget.

Every test prints one line ``[PASS]`` or ``[FAIL]`` with the runtime.
"""

import pytest

from singular2d.acceptance import CHECKS, run_check


@pytest.mark.parametrize("number", sorted(CHECKS))
def test_criterion(number, capsys):
    res = run_check(number)
    with capsys.disabled():
        print("\n" + res.line)
    assert res.passed, res.details
