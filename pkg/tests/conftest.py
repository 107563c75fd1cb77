import pytest

from powersched import make_instance


@pytest.fixture
def tri():
    """Three jobs whose frontier has breakpoints at energies 17 and 8."""
    return make_instance(releases=[0.0, 5.0, 6.0], works=[5.0, 2.0, 1.0], alpha=3.0)


@pytest.fixture
def flow3():
    """Two jobs at time 0 plus one at time 1, unit works, cubic power."""
    return make_instance(releases=[0.0, 0.0, 1.0], works=[1.0, 1.0, 1.0], alpha=3.0)
