"""Every acceptance criterion at its stated tolerance, one pass/fail line each."""
import pytest

from augclust.acceptance import CRITERIA


@pytest.mark.parametrize("cid", list(CRITERIA))
def test_criterion(cid, acceptance_log):
    res = CRITERIA[cid]()
    print(res.line())
    acceptance_log.append(res.line())
    assert res.passed, res.line()
