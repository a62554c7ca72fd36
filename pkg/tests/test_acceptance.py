"""End-to-end acceptance criteria A1-A10, one test each at the stated tolerances."""

import pytest

from rotowave import acceptance

from .conftest import ACCEPTANCE_LINES

pytestmark = pytest.mark.slow


@pytest.mark.parametrize("name", list(acceptance.RUNNERS))
def test_criterion(name):
    result = acceptance.RUNNERS[name]()
    line = result.line()
    ACCEPTANCE_LINES[name] = line
    print(line)
    assert result.passed, line
