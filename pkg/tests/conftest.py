import mpmath
import pytest

from eseries.precision_eval import PrecisionContext


@pytest.fixture(autouse=True)
def working_precision():
    """Comparisons in the tests run at the default 256-bit context."""
    with mpmath.workprec(256):
        yield


@pytest.fixture
def ctx():
    return PrecisionContext()
