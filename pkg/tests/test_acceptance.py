"""The acceptance gate: every exit criterion at its pinned tolerance.

Each test prints the criterion's one-line verdict; run with ``-s`` (or use
``normlab verify``) to see the lines for passing criteria too.
"""

import pytest

from normlab.acceptance import CRITERIA


@pytest.mark.parametrize("key", list(CRITERIA.keys()))
def test_criterion(key):
    result = CRITERIA[key]()
    print(result.line())
    assert result.passed, result.line()
