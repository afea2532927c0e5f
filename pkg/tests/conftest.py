import numpy as np
import pytest

from fourdac import (AmplitudeSpec, Constellation4D, build_6b4dac,
                     build_7b4dac, build_pm8qam, build_sp128_16qam, normalize)


@pytest.fixture(scope="session")
def amps():
    return AmplitudeSpec(1.0, 3.0, 0.6)


@pytest.fixture(scope="session")
def c6(amps):
    return build_6b4dac(amps)


@pytest.fixture(scope="session")
def c7(amps):
    return build_7b4dac(amps)


@pytest.fixture(scope="session")
def c6n(c6):
    return normalize(c6)


@pytest.fixture(scope="session")
def c7n(c7):
    return normalize(c7)


@pytest.fixture(scope="session")
def pm8n():
    return normalize(build_pm8qam())


@pytest.fixture(scope="session")
def sp128n():
    return normalize(build_sp128_16qam())


@pytest.fixture(scope="session")
def bpsk():
    """Two-point 1-bit toy set on the first axis, unnormalized (amplitude 1)."""
    points = np.array([[1.0, 0.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0]])
    labels = np.array([[0], [1]], dtype=np.uint8)
    return Constellation4D("bpsk", points, labels)


def all_words(k):
    ints = np.arange(1 << k)
    return ((ints[:, None] >> np.arange(k - 1, -1, -1)) & 1).astype(np.uint8)
