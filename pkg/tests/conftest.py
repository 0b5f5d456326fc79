import math

import numpy as np
import pytest

from nonlocal_bounds import core, extremal

_ACCEPTANCE_LINES = []


@pytest.fixture
def record_criterion():
    """Collect one pass/fail line per acceptance criterion for the terminal summary."""

    def record(number, description, passed, detail=""):
        status = "PASS" if passed else "FAIL"
        _ACCEPTANCE_LINES.append(f"[{status}] criterion {number}: {description} {detail}".rstrip())
        return passed

    return record


def _criterion_key(line):
    label = line.split("criterion ")[1].split(":")[0]
    digits = "".join(ch for ch in label if ch.isdigit())
    return int(digits), label


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=_criterion_key):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def biased_boundary():
    return extremal.biased_boundary_realization()


@pytest.fixture
def chsh_opt():
    return extremal.chsh_optimal_realization()


def random_pair(rng, dim, rank=None):
    """Random subnormalized pair with tr(rho + sigma) = 1."""
    rank = dim if rank is None else rank
    mats = []
    for _ in range(2):
        g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
        mats.append(g @ g.conj().T)
    t = np.trace(mats[0] + mats[1]).real
    return mats[0] / t, mats[1] / t


def random_pure_pair(rng, dim):
    """Two weighted pure states with total weight one."""
    vecs = []
    for _ in range(2):
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        vecs.append(v / np.linalg.norm(v))
    w = rng.uniform(0.05, 0.95)
    return w * np.outer(vecs[0], vecs[0].conj()), (1 - w) * np.outer(vecs[1], vecs[1].conj())


SQRT17 = math.sqrt(17)
