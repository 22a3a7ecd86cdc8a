"""Every acceptance criterion at full scale; one pass/fail line each.

The lines are echoed in the terminal summary under "acceptance criteria".
"""
import pytest

from ranet import acceptance


@pytest.mark.parametrize(
    "criterion", acceptance.CRITERIA, ids=[f"{i}-{c.__name__}" for i, c in enumerate(acceptance.CRITERIA, 1)]
)
def test_criterion(criterion, record_criterion):
    result = record_criterion(criterion())
    assert result.passed, result.line()
