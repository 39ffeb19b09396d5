import math

import numpy as np
import pytest
from hypothesis import settings

from strutt import CoefficientSource, ExpSumKernel, MemoryKernel, zero_kernel
from strutt.kernels import Envelope

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES = []


def modulated_kernel(b=0.6, mu=1.2):
    """K(t, t - xi) = exp(-mu xi) (1 + b cos(theta t)); a kernel with off-diagonal coefficients."""

    def f(t, xi, T):
        return np.exp(-mu * xi) * (1 + b * np.cos(2 * math.pi * t / T))

    return MemoryKernel(f, 2 * math.pi, Envelope(1 + abs(b), mu), name="modulated")


def oscillating_kernel():
    """K(t, t - xi) = exp(-xi) cos(2 pi xi / T): K_00(theta, gamma) = (1+gamma)/((1+gamma)^2 + theta^2)."""

    def f(t, xi, T):
        return np.exp(-xi) * np.cos(2 * math.pi * xi / T) + 0 * t

    return MemoryKernel(f, 2 * math.pi, Envelope(1.0, 1.0), name="oscillating")


@pytest.fixture
def zero():
    return zero_kernel()


@pytest.fixture
def k11():
    return ExpSumKernel([(1.0, 1.0)])


@pytest.fixture
def closed11(k11):
    return CoefficientSource(k11, "closed")


@pytest.fixture
def zero_src(zero):
    return CoefficientSource(zero, "closed")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
