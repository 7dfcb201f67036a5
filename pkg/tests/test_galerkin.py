import numpy as np
import pytest

from morsesturm import galerkin as gk
from morsesturm import generators as gen
from morsesturm.system import CirclePoint

K9 = 9 * np.pi ** 2


def test_form_is_hermitian(tilted3):
    H = gk.assemble_form(tilted3, 2, CirclePoint(0.3), gk.Mesh(16))
    assert np.linalg.norm(H - np.conj(H.T)) <= 1e-12 * np.linalg.norm(H)


def test_form_value_converges_quadratically(osc9):
    # V = (sin(2 pi t), 0) in the rho = 1 space; I_1(V,V) = 2 pi^2 g_00 = -2 pi^2
    exact = -2 * np.pi ** 2
    errs = []
    for m in (16, 32, 64):
        t = np.arange(m) / m
        V = np.zeros((m, 2), dtype=complex)
        V[:, 0] = np.sin(2 * np.pi * t)
        val = gk.form_value(osc9, 1, CirclePoint(0.0), gk.Mesh(m), V, V)
        errs.append(abs(val - exact))
    assert errs[0] / errs[1] > 3.0
    assert errs[1] / errs[2] > 3.0


def test_flat_full_space_inertia(flat2):
    m = 16
    res = gk.restricted_index(flat2, 1, CirclePoint(0.0), gk.Mesh(m), "full")
    # one negative direction per timelike nodal mode except the constant one,
    # plus a two-dimensional kernel of constant fields
    assert res.nullity == 2
    assert res.lam == m - 1


def test_constant_Y_zero_constraint_is_pointwise(flat2):
    # for constant Y the integral term vanishes and the rows collocate
    # g(V(t_i), Y) - g(V(0), Y); at rho != 1 the wrap row then forces the
    # timelike component to vanish, and spatial fields are unconstrained
    m = 12
    from scipy.linalg import null_space
    C = gk.assemble_constraints(flat2, 1, CirclePoint(0.3), gk.Mesh(m), "zero")
    rng = np.random.default_rng(0)
    V = rng.standard_normal((m, 2)) + 1j * rng.standard_normal((m, 2))
    V[:, 0] = 0.0  # vanishing timelike component
    assert np.linalg.norm(C @ V.ravel()) < 1e-10
    assert null_space(C).shape[1] == m  # (n - 1) * m complex dimensions
    # at rho = 1 a constant timelike component is allowed as well
    C1 = gk.assemble_constraints(flat2, 1, CirclePoint(0.0), gk.Mesh(m), "zero")
    V[:, 0] = 1.0
    assert np.linalg.norm(C1 @ V.ravel()) < 1e-10


def test_codimension_star_vs_zero(tilted3, osc9):
    from scipy.linalg import null_space
    for s in (tilted3, osc9):
        m = 16
        Cs = gk.assemble_constraints(s, 1, CirclePoint(0.2), gk.Mesh(m), "star")
        Cz = gk.assemble_constraints(s, 1, CirclePoint(0.2), gk.Mesh(m), "zero")
        ds = null_space(Cs).shape[1]
        dz = null_space(Cz).shape[1]
        assert ds - dz in (0, 1)


def test_oscillator_quarter_angle(osc9):
    res = gk.lambda_with_refinement(osc9, 1, 0.25, "zero", mesh0=64)
    assert res.lam == 3


def test_flat_index_vanishes(flat2):
    # the vanishing-pairing form is positive semidefinite for every rho;
    # the constant-pairing space at rho != 1 picks up one negative direction
    # from the forced affine timelike pairing
    for th in (0.0, 0.3):
        assert gk.lambda_with_refinement(flat2, 1, th, "zero").lam == 0
    assert gk.lambda_with_refinement(flat2, 1, 0.0, "star").lam == 0
    assert gk.lambda_with_refinement(flat2, 1, 0.3, "star").lam == 1


def test_lambda_star_bounds(tilted3, osc9, seeded_tilted_suite):
    for s in [tilted3, osc9] + seeded_tilted_suite[:2]:
        for th in (0.0, 0.2):
            l0 = gk.lambda_with_refinement(s, 1, th, "zero").lam
            ls = gk.lambda_with_refinement(s, 1, th, "star").lam
            assert l0 <= ls <= l0 + 1


def test_conjugation_symmetry(tilted3):
    for th in (0.15, 0.4):
        for kind in ("zero", "star"):
            a = gk.lambda_with_refinement(tilted3, 1, th, kind).lam
            b = gk.lambda_with_refinement(tilted3, 1, 1.0 - th, kind).lam
            assert a == b


def test_epsilon_in_range(suite):
    for s in suite:
        e = gk.epsilon(s)
        assert e in (0, 1)
        if s.singular:
            assert e == 0


def test_singular_star_equals_zero_at_roots_of_unity(osc9):
    # for singular systems the two constrained spaces coincide at 1
    l0 = gk.lambda_with_refinement(osc9, 1, 0.0, "zero").lam
    ls = gk.lambda_with_refinement(osc9, 1, 0.0, "star").lam
    assert l0 == ls


def test_inertia_invariant_under_basis_rotation(osc9):
    from scipy.linalg import null_space
    m = 32
    rho = CirclePoint(0.25)
    H = gk.assemble_form(osc9, 1, rho, gk.Mesh(m))
    C = gk.assemble_constraints(osc9, 1, rho, gk.Mesh(m), "zero")
    Z = null_space(C)
    rng = np.random.default_rng(3)
    Q, _ = np.linalg.qr(rng.standard_normal((Z.shape[1], Z.shape[1]))
                        + 1j * rng.standard_normal((Z.shape[1], Z.shape[1])))
    for basis in (Z, Z @ Q):
        Hr = np.conj(basis.T) @ H @ basis
        eigs = np.linalg.eigvalsh(0.5 * (Hr + np.conj(Hr.T)))
        assert int(np.sum(eigs < -1e-8 * np.max(np.abs(eigs)))) == 3


def test_monotone_refinement(osc9, tilted3):
    for s, th, kind in ((osc9, 0.25, "zero"), (tilted3, 0.2, "zero"),
                        (tilted3, 0.2, "star")):
        res = gk.lambda_with_refinement(s, 1, th, kind, mesh0=32)
        vals = res.values
        assert all(a <= b for a, b in zip(vals, vals[1:]))
        assert vals[-1] == vals[-2] if len(vals) > 1 else True


def test_kernel_residual_flat(flat2):
    m = 16
    V = np.zeros((m, 2), dtype=complex)
    V[:, 0] = 1.0  # constant kernel field at rho = 1
    rep = gk.kernel_residual_check(flat2, 1, CirclePoint(0.0), gk.Mesh(m), V)
    assert rep["weak_residual"] < 1e-12
    assert rep["boundary_value_defect"] == 0.0
    assert rep["boundary_derivative_defect"] < 1e-12


def test_kernel_residual_oscillator(osc9):
    # at theta = 0 the field (0, cos(3 pi t) ... ) is not periodic; instead use
    # the exact kernel at theta = 0.5: spatial cos(3 pi t) satisfies
    # V(1) = -V(0), matching rho = -1
    residuals = []
    for m in (32, 64):
        t = np.arange(m) / m
        V = np.zeros((m, 2), dtype=complex)
        V[:, 1] = np.cos(3 * np.pi * t)
        rep = gk.kernel_residual_check(osc9, 1, CirclePoint(0.5), gk.Mesh(m), V)
        residuals.append(rep["weak_residual"])
    # the element-averaged residual of an exact solution decays like h^3
    assert residuals[0] < 1000.0 / 32 ** 3
    assert residuals[1] < residuals[0] / 6.0


def test_nonconvergence_raises():
    s = gen.oscillator(2, (K9,))
    with pytest.raises(gk.NonconvergenceError):
        gk.lambda_with_refinement(s, 1, 0.125, "zero", mesh0=8,
                                  max_refinements=0)
