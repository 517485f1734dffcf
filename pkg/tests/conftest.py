import pytest

from schottky_lab import critical
from schottky_lab.profiles import CuspMetric, UProfile
from schottky_lab.schottky import SchottkyModel


def _calibrated(alpha):
    model = SchottkyModel(CuspMetric(0.0, UProfile.lemma22(alpha)))
    k, model = critical.calibrate_h(model)
    return k, model, critical.find_a_star(model)


@pytest.fixture(scope="session")
def calibrated15():
    """``(k, model, a_star)`` for the alpha = 1.5 ramp profile."""
    return _calibrated(1.5)


@pytest.fixture(scope="session")
def calibrated25():
    return _calibrated(2.5)


@pytest.fixture(scope="session")
def ramp15():
    return UProfile.lemma22(1.5)
