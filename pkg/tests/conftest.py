import numpy as np
import pytest

from gibbsgap.measure import ProductSpace, TargetDistribution, equicorrelated_binary, random_target


@pytest.fixture
def uniform_2x2() -> TargetDistribution:
    return TargetDistribution(ProductSpace((2, 2)), np.full(4, 0.25))


@pytest.fixture
def eps_pair() -> TargetDistribution:
    # pi(0,0) = pi(1,1) = 0.375, pi(0,1) = pi(1,0) = 0.125
    return equicorrelated_binary(2, 0.25)


def make_suite(count: int = 100, seed: int = 12345):
    """The seeded random-target suite: d in {2,3,4}, |X_i| in {2,3}."""
    rng = np.random.default_rng(seed)
    targets = []
    for k in range(count):
        d = int(rng.integers(2, 5))
        dims = tuple(int(x) for x in rng.integers(2, 4, size=d))
        targets.append(random_target(seed=1000 + k, dims=dims))
    return targets


@pytest.fixture(scope="session")
def target_suite():
    return make_suite()
