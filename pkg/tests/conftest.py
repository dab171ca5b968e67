import sys

import numpy as np
import pytest

from risbeam.channel_model import SystemDims


def crand(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def rand_orthonormal(rng, rows, cols):
    q, _ = np.linalg.qr(crand(rng, rows, cols))
    return q


def rand_phases(rng, n):
    return np.exp(2j * np.pi * rng.random(n))


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    scale = max(np.linalg.norm(b), 1e-300)
    return np.linalg.norm(a - b) / scale


@pytest.fixture
def rng():
    return np.random.default_rng(20260416)


@pytest.fixture
def ref_dims():
    return SystemDims.uniform(m_r=16, k=2, m_tk=4, r_ue=2, n=64)


@pytest.fixture
def small_dims():
    return SystemDims(m_r=5, m_tk=(2, 3), r_k=(1, 2), n=7)


def pytest_terminal_summary(terminalreporter):
    lines = getattr(sys.modules.get("test_acceptance"), "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
