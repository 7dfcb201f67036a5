import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from morsesturm.paths import (CallablePath, ConstantPath, SampledPath,
                              TrigPath, path_from_json)


def test_constant_path():
    p = ConstantPath(np.diag([1.0, 2.0]))
    assert np.allclose(p(0.3), np.diag([1.0, 2.0]))
    assert np.allclose(p.deriv(0.3), 0.0)
    t = np.linspace(0, 1, 5)
    assert p(t).shape == (5, 2, 2)


@given(st.floats(0.0, 1.0), st.integers(1, 3),
       st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
@settings(max_examples=30, deadline=None)
def test_trig_path_matches_closed_form(t, j, c, s):
    const = np.array([[0.5]])
    zeros = [np.zeros((1, 1))] * (j - 1)
    p = TrigPath(const, zeros + [np.array([[c]])], zeros + [np.array([[s]])])
    w = 2 * np.pi * j
    expect = 0.5 + c * np.cos(w * t) + s * np.sin(w * t)
    assert np.allclose(p(t), [[expect]], atol=1e-12)
    dexpect = -c * w * np.sin(w * t) + s * w * np.cos(w * t)
    assert np.allclose(p.deriv(t), [[dexpect]], atol=1e-9)


def test_sampled_path_cubic_accuracy():
    grid = np.linspace(0, 1, 201)
    vals = np.sin(2 * np.pi * grid)[:, None]
    p = SampledPath(vals)
    t = np.linspace(0, 1, 57)
    assert np.allclose(p(t)[:, 0], np.sin(2 * np.pi * t), atol=1e-7)
    assert np.allclose(p.deriv(t)[:, 0], 2 * np.pi * np.cos(2 * np.pi * t),
                       atol=1e-4)


def test_callable_path_finite_difference_derivative():
    p = CallablePath(lambda t: np.stack([np.cos(2 * np.pi * np.asarray(t))],
                                        axis=-1), shape=(1,))
    t = np.linspace(0.1, 0.9, 9)
    assert np.allclose(p.deriv(t)[:, 0], -2 * np.pi * np.sin(2 * np.pi * t),
                       atol=1e-6)


def test_json_roundtrip_all_kinds():
    paths = [
        ConstantPath(np.diag([1.0, -2.0])),
        TrigPath(np.zeros((2, 2)), [np.eye(2)], [0.5 * np.eye(2)]),
        SampledPath(np.linspace(0, 1, 101)[:, None] ** 2),
        CallablePath(lambda t: np.stack([np.sin(2 * np.pi * np.asarray(t))],
                                        axis=-1), shape=(1,)),
    ]
    for p in paths:
        obj = p.to_json()
        ndim = np.ndim(p(0.0))
        q = path_from_json(obj, expect_ndim=ndim)
        t = np.linspace(0, 1, 23)
        assert np.allclose(q(t), p(t), atol=1e-8)
