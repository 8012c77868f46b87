import math

import numpy as np
import pytest

from cosmicorbit.errors import DimensionMismatch, DomainError, NonUnitDirection, ZeroVector
from cosmicorbit.vecgeo import CosmicPoint, as_vector, direction_of, poincare_distance


def test_direction_of_scaling():
    d = direction_of([3.0, 0.0], 1e-14)
    assert d.is_direction
    np.testing.assert_allclose(d.coords, [1.0, 0.0], atol=1e-15)


def test_direction_of_diagonal():
    d = direction_of([1.0, 1.0], 1e-14)
    np.testing.assert_allclose(d.coords, [1 / math.sqrt(2)] * 2, atol=1e-15)


def test_direction_of_zero_raises():
    with pytest.raises(ZeroVector):
        direction_of([0.0, 0.0], 1e-14)


@pytest.mark.parametrize("lam", [1e-6, 1.0, 1e6])
def test_direction_positively_homogeneous(lam):
    rng = np.random.default_rng(7)
    for _ in range(50):
        x = rng.normal(size=4)
        np.testing.assert_allclose(direction_of(lam * x).coords, direction_of(x).coords, atol=1e-14, rtol=0)


def test_vector_rejects_nonfinite():
    with pytest.raises(DomainError):
        as_vector([1.0, math.nan])
    with pytest.raises(DomainError):
        as_vector([math.inf])


def test_vector_dimension_check():
    with pytest.raises(DimensionMismatch):
        as_vector([1.0, 2.0], dim=3)


def test_direction_requires_unit_norm():
    with pytest.raises(NonUnitDirection):
        CosmicPoint.direction([2.0, 0.0])


def test_direction_equality_uses_representers():
    u = CosmicPoint.direction([1.0, 0.0])
    w = CosmicPoint.direction([1.0, 1e-13] / np.linalg.norm([1.0, 1e-13]))
    assert u == w
    assert u != CosmicPoint.finite([1.0, 0.0])
    assert u != CosmicPoint.direction([0.0, 1.0])


@pytest.mark.parametrize(
    "p, q, expected",
    [
        (CosmicPoint.finite([0.0, 0.0]), CosmicPoint.direction([1.0, 0.0]), 1.0),
        (CosmicPoint.direction([1.0, 0.0]), CosmicPoint.direction([0.0, 1.0]), math.sqrt(2.0)),
        (CosmicPoint.finite([1.0, 0.0]), CosmicPoint.finite([0.0, 0.0]), 0.5),
    ],
)
def test_poincare_examples(p, q, expected):
    assert poincare_distance(p, q) == pytest.approx(expected, abs=1e-15)


def test_poincare_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        poincare_distance(CosmicPoint.finite([0.0]), CosmicPoint.finite([0.0, 0.0]))


def _random_point(rng, d):
    if rng.random() < 0.3:
        u = rng.normal(size=d)
        return CosmicPoint.direction(u / np.linalg.norm(u))
    scale = 10.0 ** rng.uniform(-3, 6)
    return CosmicPoint.finite(scale * rng.normal(size=d))


@pytest.mark.parametrize("d", [1, 2, 5])
def test_poincare_metric_axioms(d):
    rng = np.random.default_rng(1000 + d)
    for _ in range(1000):
        p, q, r = (_random_point(rng, d) for _ in range(3))
        pq, qp = poincare_distance(p, q), poincare_distance(q, p)
        assert pq == qp
        assert 0.0 <= pq <= 2.0 + 1e-12
        assert poincare_distance(p, r) <= pq + poincare_distance(q, r) + 1e-12


def test_poincare_convergence_to_direction():
    rng = np.random.default_rng(3)
    u = np.array([3.0, -4.0, 12.0]) / 13.0
    U = CosmicPoint.direction(u)
    dists = []
    for n in (10, 100, 1_000, 10_000, 100_000):
        noise = rng.uniform(-1, 1, size=3)
        dists.append(poincare_distance(CosmicPoint.finite(n * u + noise), U))
    assert all(b < a for a, b in zip(dists, dists[1:]))
    assert dists[-1] < 1e-4
