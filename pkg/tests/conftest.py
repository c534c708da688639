import math
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from extcalc.measure import (DensityPiece, Measure, RationalDensity, atomic_measure,
                             lebesgue_measure)
from extcalc.triple import DissipativeTriple

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("stress", deadline=None, max_examples=1000,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

SQRT3 = math.sqrt(3.0)


@pytest.fixture
def mu2():
    """Unit atoms at -1 and +1; M(z) = 2z/(1 - z^2)."""
    return atomic_measure([-1.0, 1.0], [1.0, 1.0])


@pytest.fixture
def leb():
    return lebesgue_measure()


@pytest.fixture
def t13(mu2):
    return DissipativeTriple(mu2, 1 / 3)


def rational_measure(a):
    """Density (a/pi)(x^2 + 1)/(x^2 + a^2); M(z) = ia - (1 - a^2)/(z + ia)."""
    return Measure(pieces=(DensityPiece(-math.inf, math.inf,
                                        RationalDensity((a / math.pi, 0.0, a / math.pi), (1.0, 0.0, a * a))),))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
