import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from morsesturm import generators as gen


def test_all_generators_validate(suite, seeded_tilted_suite, flat4rot):
    for s in suite + seeded_tilted_suite + [flat4rot]:
        assert s.validated


def test_registry_dispatch():
    s = gen.generate("oscillator", n=2, k=(np.pi ** 2,))
    assert s.n == 2
    with pytest.raises(KeyError):
        gen.generate("nope")


@given(st.floats(0.0, 1.0), st.floats(1.0, 400.0))
@settings(max_examples=60, deadline=None)
def test_oracle_conjugation_symmetry(theta, k):
    a = gen.oracle_lambda_oscillator([k], theta)
    b = gen.oracle_lambda_oscillator([k], (1.0 - theta) % 1.0)
    assert a == b


@given(st.floats(0.0, 1.0))
@settings(max_examples=40, deadline=None)
def test_oracle_additive_over_blocks(theta):
    ks = [5.0, 47.0, 201.0]
    total = gen.oracle_lambda_oscillator(ks, theta)
    assert total == sum(gen.oracle_lambda_oscillator([k], theta) for k in ks)


def test_oracle_known_values():
    K9 = 9 * np.pi ** 2
    assert gen.oracle_lambda_oscillator([K9], 0.0) == 3
    assert gen.oracle_lambda_oscillator([K9], 0.5) == 2
    assert gen.oracle_lambda_oscillator([np.pi ** 2], 0.0) == 1
    assert gen.oracle_lambda_oscillator([np.pi ** 2], 0.5) == 0
    assert gen.oracle_lambda_oscillator([25 * np.pi ** 2], 0.0) == 5
    assert gen.oracle_lambda_oscillator([25 * np.pi ** 2], 0.5) == 4


def test_tilted_Y_is_unit_timelike(tilted3):
    t = np.linspace(0, 1, 33)
    Y = tilted3.Y_base(t)
    G = tilted3.g.matrix
    gYY = np.einsum("xa,ab,xb->x", Y, G, Y)
    assert np.allclose(gYY, -1.0, atol=1e-8)


def test_static_product_is_oscillator_alias():
    a = gen.static_product(2, (np.pi ** 2,))
    assert a.singular
    assert np.allclose(a.R(0.3), np.diag([0.0, -np.pi ** 2]))


def test_seeded_tilted_reproducible():
    a = gen.seeded_tilted(seed=7, n=3)
    b = gen.seeded_tilted(seed=7, n=3)
    assert np.allclose(a.R(0.37), b.R(0.37))
    assert not a.singular


def test_boosted_monodromy_preserves_metric(boosted2, boosted_hill):
    for s in (boosted2, boosted_hill):
        T, G = s.T.matrix, s.g.matrix
        assert np.linalg.norm(T.T @ G @ T - G) < 1e-12
