import numpy as np
import pytest

import morsesturm
from morsesturm import generators as gen
from morsesturm.paths import ConstantPath
from morsesturm.system import (CirclePoint, MetricForm, MonodromyMap,
                               MorseSturmSystem, NotValidatedError,
                               is_singular, iterated_data, operator_A,
                               positive_metric, positive_metric_matrix,
                               system_from_json, validate)


def test_metric_index(flat2):
    assert flat2.g.index() == 1


def test_circle_point_reduction():
    assert CirclePoint(1.25).theta == pytest.approx(0.25)
    assert CirclePoint(-0.25).theta == pytest.approx(0.75)
    p = CirclePoint(0.3)
    assert p.conjugate().theta == pytest.approx(0.7)
    assert abs(p.rho) == pytest.approx(1.0)


def test_validation_rejects_positive_metric():
    n = 2
    sys_bad = MorseSturmSystem(
        MetricForm(np.eye(n)), MonodromyMap(np.eye(n)),
        ConstantPath(np.zeros((n, n))), ConstantPath(np.array([1.0, 0.0])))
    report = validate(sys_bad)
    assert not report.passed
    assert any(c.name == "g index" for c in report.failures())


def test_validation_rejects_non_solution():
    g = np.diag([-1.0, 1.0])
    sys_bad = MorseSturmSystem(
        MetricForm(g), MonodromyMap(np.eye(2)),
        ConstantPath(np.diag([1.0, 0.0])),   # Y'' = R Y fails for constant Y
        ConstantPath(np.array([1.0, 0.0])))
    report = validate(sys_bad)
    assert not report.passed


def test_operations_require_validation():
    g = np.diag([-1.0, 1.0])
    s = MorseSturmSystem(MetricForm(g), MonodromyMap(np.eye(2)),
                         ConstantPath(np.zeros((2, 2))),
                         ConstantPath(np.array([1.0, 0.0])))
    with pytest.raises(NotValidatedError):
        iterated_data(s, 1, 0.0)


def test_extension_rules(boosted2):
    t = 0.37
    Ti = np.linalg.inv(boosted2.T.matrix)
    lhs = boosted2.Y_ext(t + 1.0)[0]
    rhs = Ti @ boosted2.Y_ext(t)[0]
    assert np.linalg.norm(lhs - rhs) < 1e-10
    lhsR = boosted2.R_ext(t + 2.0)[0]
    rhsR = Ti @ Ti @ boosted2.R_ext(t)[0] @ boosted2.T.matrix @ boosted2.T.matrix
    assert np.linalg.norm(lhsR - rhsR) < 1e-10


def test_singularity_detection(osc9, flat2, tilted3, boosted2):
    assert is_singular(osc9)[0]
    assert is_singular(flat2)[0]
    flag, witness = is_singular(tilted3)
    assert not flag and witness is not None
    assert not is_singular(boosted2)[0]


def test_positive_metric_example():
    # g = diag(-1, 1), Y = e1 at any t: flipped metric is the identity
    s = gen.flat(2)
    Gp = positive_metric_matrix(s, 1, 0.3)
    assert np.allclose(Gp, np.eye(2), atol=1e-12)
    A = operator_A(s, 1, 0.3)
    assert np.allclose(A, np.diag([-1.0, 1.0]), atol=1e-12)


def test_operator_A_is_involution(tilted3, boosted2):
    for s in (tilted3, boosted2):
        for t in (0.0, 0.3, 0.8):
            A = operator_A(s, 1, t)
            assert np.linalg.norm(A @ A - np.eye(s.n)) < 1e-12


def test_positive_metric_is_positive(tilted3):
    rng = np.random.default_rng(0)
    for t in (0.1, 0.6):
        Gp = positive_metric_matrix(tilted3, 1, t)
        v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        val = positive_metric(tilted3, 1, t, v, v)
        assert val.real > 0 and abs(val.imag) < 1e-12 * abs(val)
        assert np.min(np.linalg.eigvalsh(0.5 * (Gp + Gp.T))) > 0


def test_iterated_data_matches_extension(tilted3):
    R, Y, Yp = iterated_data(tilted3, 3, 0.4)
    assert np.allclose(R, tilted3.R_ext(1.2)[0])
    assert np.allclose(Y, tilted3.Y_ext(1.2)[0])
    assert np.allclose(Yp, tilted3.Yp_ext(1.2)[0])


def test_json_roundtrip(tmp_path, osc9):
    obj = osc9.to_json()
    s2 = system_from_json(obj)
    report = validate(s2)
    assert report.passed
    assert np.allclose(s2.Y_base(0.5), osc9.Y_base(0.5), atol=1e-9)
    assert np.allclose(s2.R(0.5), osc9.R(0.5), atol=1e-9)


def test_reduced_accuracy_flag():
    import morsesturm.paths as paths
    n = 2
    tgrid = np.linspace(0, 1, 201)
    Rvals = np.zeros((201, n, n))
    R = paths.SampledPath(Rvals, interpolation="linear")
    s = MorseSturmSystem(MetricForm(np.diag([-1.0, 1.0])),
                         MonodromyMap(np.eye(2)), R,
                         ConstantPath(np.array([1.0, 0.0])))
    report = validate(s)
    assert report.passed
    assert any("reduced accuracy" in f for f in report.flags)
