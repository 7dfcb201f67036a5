import numpy as np
import pytest

from morsesturm import generators as gen

K9 = 9 * np.pi ** 2


@pytest.fixture(scope="session")
def osc9():
    return gen.oscillator(2, (K9,))


@pytest.fixture(scope="session")
def flat2():
    return gen.flat(2)


@pytest.fixture(scope="session")
def flat4rot():
    return gen.flat(4, (0.7,))


@pytest.fixture(scope="session")
def tilted3():
    return gen.tilted(3, extra_k=(30.0,))


@pytest.fixture(scope="session")
def boosted2():
    return gen.boosted(2, 0.5)


@pytest.fixture(scope="session")
def boosted_hill():
    return gen.boosted(3, 0.4, hill=True)


@pytest.fixture(scope="session")
def seeded_tilted_suite():
    # five reproducible non-singular systems, n in {2, 3}
    return [gen.seeded_tilted(seed=s, n=n)
            for s, n in ((1, 2), (2, 2), (3, 2), (4, 3), (5, 3))]


@pytest.fixture(scope="session")
def suite(osc9, flat2, tilted3, boosted2, boosted_hill):
    return [osc9, flat2, tilted3, boosted2, boosted_hill]
