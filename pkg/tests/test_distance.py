import math

import numpy as np
import pytest
from conftest import random_pair, random_pure_pair

from nonlocal_bounds import distance
from nonlocal_bounds.errors import DimensionMismatch, DomainError, NormalizationError, SupportViolation


def test_known_pair_values():
    rho, sigma = np.eye(2) / 4, np.diag([0.5, 0.0])
    assert distance.dbar(rho, sigma) == pytest.approx(0.5, abs=1e-12)
    assert distance.dtilde_closed_form(rho, sigma) == pytest.approx(1 / math.sqrt(3), abs=1e-12)
    value, _ = distance.dtilde_maximize(rho, sigma, restarts=8)
    assert value == pytest.approx(1 / math.sqrt(3), abs=1e-10)


def test_identical_states_give_zero():
    rho = np.eye(3) / 6
    assert distance.dbar(rho, rho) == 0.0
    assert distance.dtilde_closed_form(rho, rho) == 0.0
    assert distance.dtilde_maximize(rho, rho, restarts=4)[0] == 0.0


def test_orthogonal_pure_states_give_one():
    rho, sigma = np.diag([0.3, 0.0]), np.diag([0.0, 0.7])
    assert distance.dbar(rho, sigma) == pytest.approx(1.0)
    assert distance.dtilde_closed_form(rho, sigma) == pytest.approx(1.0)


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_sandwich_and_oracle(rng, dim):
    for _ in range(10):
        rho, sigma = random_pair(rng, dim, rank=int(rng.integers(1, dim + 1)))
        db, dt = distance.dbar(rho, sigma), distance.dtilde_closed_form(rho, sigma)
        assert db - 1e-12 <= dt <= math.sqrt(db) + 1e-12
        oracle, diag = distance.dtilde_maximize(rho, sigma, restarts=16)
        assert abs(oracle - dt) <= 1e-8
        X = diag["X"]
        ratio = np.trace(X @ (rho - sigma)).real / math.sqrt(np.trace(X @ X @ (rho + sigma)).real)
        assert ratio == pytest.approx(oracle, abs=1e-8)


def test_pure_pairs_have_dtilde_equal_dbar(rng):
    for dim in (2, 3, 5):
        for _ in range(20):
            rho, sigma = random_pure_pair(rng, dim)
            assert distance.dtilde_closed_form(rho, sigma) == pytest.approx(distance.dbar(rho, sigma), abs=1e-9)


def test_tilted_quantity_two_routes(rng):
    for _ in range(20):
        rho, sigma = random_pair(rng, 3)
        eps = rng.uniform(-1, 1)
        via_identity = distance.dtilde_eps(rho, sigma, eps)
        via_numerator = distance.dtilde_general((1 + eps) * rho - (1 - eps) * sigma, rho + sigma)
        assert via_identity == pytest.approx(via_numerator, abs=1e-12)
    assert distance.dtilde_eps(rho, sigma, 0.0) == pytest.approx(distance.dtilde_closed_form(rho, sigma))
    with pytest.raises(DomainError):
        distance.dtilde_eps(rho, sigma, float("inf"))


def test_block_additivity(rng):
    a = random_pair(rng, 2)
    b = random_pair(rng, 3)
    lam = 0.3
    rho = np.block([[lam * a[0], np.zeros((2, 3))], [np.zeros((3, 2)), (1 - lam) * b[0]]])
    sigma = np.block([[lam * a[1], np.zeros((2, 3))], [np.zeros((3, 2)), (1 - lam) * b[1]]])
    expected = lam * distance.dtilde_closed_form(*a) ** 2 + (1 - lam) * distance.dtilde_closed_form(*b) ** 2
    assert distance.dtilde_closed_form(rho, sigma) ** 2 == pytest.approx(expected, abs=1e-12)


def test_input_errors():
    with pytest.raises(NormalizationError):
        distance.dbar(np.eye(2), np.eye(2))
    with pytest.raises(DimensionMismatch):
        distance.dbar(np.eye(2) / 4, np.eye(3) / 6)
    with pytest.raises(SupportViolation):
        distance.dtilde_general(np.diag([0.0, 0.1]), np.diag([1.0, 0.0]))
    r, s = distance.renormalize(np.eye(2), np.diag([1.0, 0.0]))
    assert np.trace(r + s).real == pytest.approx(1.0)


def test_distance_profile_biased_boundary(biased_boundary):
    p = distance.distance_profile(biased_boundary, "bob")
    assert p.dtilde == pytest.approx((1.0, math.sqrt(8) / 3), abs=1e-12)
    assert p.dbar == pytest.approx((1.0, math.sqrt(8) / 3), abs=1e-12)
    q = distance.distance_profile(biased_boundary, "bob", eps=(1 / 3, 0.0))
    assert q.dtilde_eps[0] ** 2 == pytest.approx(4 / 3, abs=1e-12)
    with pytest.raises(ValueError):
        distance.DistanceProfile("bob", (0.9, 0.5), (0.8, 0.5))
    with pytest.raises(ValueError):
        distance.distance_profile(biased_boundary, "carol")
