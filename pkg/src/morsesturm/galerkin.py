"""Finite element discretization of the index form and inertia counting.

Piecewise-linear complex fields on a uniform mesh of [0, 1] discretize the
quasi-periodic space { V : T^N V(1) = rho^N V(0) }; the boundary node is
eliminated exactly via V(1) = rho^N T^-N V(0).  The index form

    I_N(V, W) = int g(V', W') + N^2 g(R_N V, W) dt

is assembled with the derivative term integrated exactly and 3-point Gauss
quadrature on the R-term.  The subspaces with constant / vanishing conserved
pairing against Y_N are imposed by collocating the integrated pairing

    G(t) = g(V(t), Y_N(t)) - 2 int_0^t g(V, Y_N') ds

at mesh nodes: G constant selects the vanishing-pairing space, G affine
selects the constant-pairing one.  Morse indices are negative-eigenvalue
counts of the form restricted to the constraint null space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh, null_space

from .ode import nullity_star, nullity_zero, poincare
from .system import CirclePoint

# 3-point Gauss-Legendre on the reference element [0, 1]
_GAUSS_X = np.array([0.5 - 0.5 * np.sqrt(0.6), 0.5, 0.5 + 0.5 * np.sqrt(0.6)])
_GAUSS_W = np.array([5.0, 8.0, 5.0]) / 18.0

TAU_EIG_SCALE = 1e-8
REFERENCE_MESH = 32


class NonconvergenceError(RuntimeError):
    """Index count failed to stabilize under dyadic mesh refinement."""


@dataclass
class Mesh:
    m: int

    def __post_init__(self):
        if self.m < 8:
            raise ValueError("mesh must have at least 8 elements")

    @property
    def h(self):
        return 1.0 / self.m

    @property
    def nodes(self):
        return np.linspace(0.0, 1.0, self.m + 1)


def boundary_factor(system, N, rho_point):
    """The elimination matrix C with V(1) = C V(0), C = rho^N T^-N."""
    return (rho_point.rho ** N) * system.T_power(-N).astype(complex)


def assemble_form(system, N, rho_point, mesh: Mesh):
    """Hermitian matrix of I_N on the nodal unknowns V_0 .. V_{m-1}."""
    system._require_validated()
    n, m, h = system.n, mesh.m, mesh.h
    G = system.g.matrix
    C = boundary_factor(system, N, rho_point)
    H = np.zeros((m * n, m * n), dtype=complex)

    # R_N at all Gauss points of all elements, one vectorized evaluation
    tq = (np.arange(m)[:, None] + _GAUSS_X[None, :]) / m       # (m, 3)
    Rq = system.R_ext(tq.ravel() * N).reshape(m, 3, n, n)
    Mq = (N * N) * np.einsum("ab,eqbc->eqac", G, Rq)           # g(R_N ., .)

    K = G / h  # exact derivative-derivative block
    phi = np.stack([1.0 - _GAUSS_X, _GAUSS_X])                  # (2, 3)

    for e in range(m):
        E = np.zeros((2, 2, n, n), dtype=complex)
        E[0, 0] += K
        E[1, 1] += K
        E[0, 1] -= K
        E[1, 0] -= K
        for q in range(3):
            wq = _GAUSS_W[q] * h
            for a in range(2):
                for b in range(2):
                    E[a, b] += wq * phi[a, q] * phi[b, q] * Mq[e, q]
        dofs = [e, e + 1]
        for a in range(2):
            for b in range(2):
                blk = E[a, b]
                ia, ib = dofs[a], dofs[b]
                if ia == m:
                    blk = np.conj(C.T) @ blk
                    ia = 0
                if ib == m:
                    blk = blk @ C
                    ib = 0
                H[ia * n:(ia + 1) * n, ib * n:(ib + 1) * n] += blk
    return 0.5 * (H + np.conj(H.T))


def _pairing_rows(system, N, rho_point, mesh: Mesh):
    """Rows of u -> G(t_i) for i = 0..m on the nodal unknowns.

    All quantities are real except the eliminated boundary factor, so the
    rows are complex row vectors acting linearly on the stacked unknowns.
    """
    n, m, h = system.n, mesh.m, mesh.h
    G = system.g.matrix
    C = boundary_factor(system, N, rho_point)

    nodes = mesh.nodes
    GY = (G @ system.Y_ext(nodes * N).T).T                      # (m+1, n)
    point_rows = np.zeros((m + 1, m * n), dtype=complex)
    for i in range(m):
        point_rows[i, i * n:(i + 1) * n] = GY[i]
    point_rows[m, :n] = GY[m] @ C

    # element contributions of int g(V, Y_N') ds, (Y_N)'(s) = N Y'(sN)
    tq = (np.arange(m)[:, None] + _GAUSS_X[None, :]) / m
    GYp = (G @ system.Yp_ext(tq.ravel() * N).T).T.reshape(m, 3, n) * N
    phi = np.stack([1.0 - _GAUSS_X, _GAUSS_X])
    elem_rows = np.zeros((m, m * n), dtype=complex)
    for e in range(m):
        for a, node in enumerate((e, e + 1)):
            row = np.zeros(n)
            for q in range(3):
                row = row + _GAUSS_W[q] * h * phi[a, q] * GYp[e, q]
            if node == m:
                elem_rows[e, :n] += row @ C
            else:
                elem_rows[e, node * n:(node + 1) * n] += row

    rows = point_rows.copy()
    rows[1:] -= 2.0 * np.cumsum(elem_rows, axis=0)
    return rows


def assemble_constraints(system, N, rho_point, mesh: Mesh, kind):
    """Constraint matrix whose null space is the discrete index-form domain.

    kind = "zero": the pairing G(t) is constant (and the form sees only its
    increments, so constancy is the vanishing-pairing condition in the
    quotient); collocated as G(t_i) = G(0) for i = 1..m.
    kind = "star": G(t) is affine; collocated as
    G(t_i) = (1 - t_i) G(0) + t_i G(1) for i = 1..m-1.
    kind = "full": no constraint.
    """
    m, n = mesh.m, system.n
    if kind == "full":
        return np.zeros((0, m * n), dtype=complex)
    rows = _pairing_rows(system, N, rho_point, mesh)
    t = mesh.nodes
    if kind == "zero":
        out = rows[1:] - rows[0]
    elif kind == "star":
        out = rows[1:m] - np.outer(1.0 - t[1:m], rows[0]) - np.outer(t[1:m], rows[m])
    else:
        raise ValueError(f"unknown constraint kind '{kind}'")
    return out


@dataclass
class RestrictedIndex:
    lam: int
    nullity: int
    eigenvalues: np.ndarray
    tau_eig: float
    kernel_resolved: bool
    flags: list = field(default_factory=list)


def _count_inertia(eigs, tau_eig, nu_exact):
    """Negative count with kernel designation deferred to the exact nullity.

    The nu_exact smallest-magnitude eigenvalues are designated as kernel;
    the designation is accepted when they sit below tau_eig or are separated
    from the rest by a factor-2 gap.  Surplus eigenvalues inside the tau_eig
    band are counted by their sign and flagged.
    """
    flags = []
    order = np.argsort(np.abs(eigs))
    if nu_exact is None:
        nullity = int(np.sum(np.abs(eigs) <= tau_eig))
        lam = int(np.sum(eigs < -tau_eig))
        return lam, nullity, True, flags
    nu = int(nu_exact)
    if nu > len(eigs):
        return 0, len(eigs), False, ["fewer discrete eigenvalues than exact nullity"]
    rest = order[nu:]
    resolved = True
    if nu > 0:
        largest_kernel = np.abs(eigs[order[nu - 1]])
        smallest_rest = np.abs(eigs[rest]).min() if len(rest) else np.inf
        if largest_kernel > tau_eig and largest_kernel > 0.5 * smallest_rest:
            resolved = False
            flags.append("kernel not separated from bulk spectrum")
    surplus = int(np.sum(np.abs(eigs[rest]) <= tau_eig))
    if surplus:
        flags.append(f"{surplus} surplus eigenvalues inside the kernel band")
    lam = int(np.sum(eigs[rest] < 0))
    return lam, nu, resolved, flags


def restricted_index(system, N, rho_point, mesh: Mesh, kind,
                     nu_exact=None, tau_eig_scale=None) -> RestrictedIndex:
    """Inertia of I_N restricted to the discrete constraint null space."""
    if tau_eig_scale is None:
        tau_eig_scale = TAU_EIG_SCALE
    H = assemble_form(system, N, rho_point, mesh)
    Cmat = assemble_constraints(system, N, rho_point, mesh, kind)
    if Cmat.shape[0]:
        Z = null_space(Cmat)
    else:
        Z = np.eye(H.shape[0], dtype=complex)
    Hred = np.conj(Z.T) @ H @ Z
    Hred = 0.5 * (Hred + np.conj(Hred.T))
    eigs = eigh(Hred, eigvals_only=True)
    scale = max(np.max(np.abs(eigs)), 1.0) if len(eigs) else 1.0
    tau = tau_eig_scale * scale * (REFERENCE_MESH / mesh.m)
    lam, nullity, resolved, flags = _count_inertia(eigs, tau, nu_exact)
    return RestrictedIndex(lam, nullity, eigs, tau, resolved, flags)


def exact_nullity(system, rho_point, N, kind):
    """ODE nullity matching the constraint kind, from cached Poincare data."""
    pdata = system._cache.get("poincare")
    if pdata is None:
        pdata = poincare(system)
        system._cache["poincare"] = pdata
    if kind == "zero":
        return nullity_zero(pdata, rho_point, N)
    if kind == "star":
        return nullity_star(pdata, rho_point, N)
    return None


@dataclass
class RefinementResult:
    lam: int
    nullity: int
    meshes: list
    values: list


def lambda_with_refinement(system, N, theta, kind, mesh0=REFERENCE_MESH,
                           max_refinements=4) -> RefinementResult:
    """Stabilized index: refine dyadically until two successive counts agree
    and the discrete kernel is resolved at the exact ODE nullity.
    """
    key = ("lam", int(N), round(float(theta) % 1.0, 12), kind, int(mesh0))
    hit = system._cache.get(key)
    if hit is not None:
        return hit
    rho = CirclePoint(theta)
    nu = exact_nullity(system, rho, N, kind)
    meshes, values = [], []
    m = int(mesh0)
    last = None
    for _ in range(max_refinements + 1):
        res = restricted_index(system, N, rho, Mesh(m), kind, nu_exact=nu)
        meshes.append(m)
        values.append(res.lam)
        if last is not None and res.lam < last:
            raise NonconvergenceError(
                f"index decreased under refinement ({last} -> {res.lam}) "
                f"at theta={theta}, N={N}, kind={kind}")
        if last is not None and res.lam == last and res.kernel_resolved \
                and res.nullity == nu:
            out = RefinementResult(res.lam, res.nullity, meshes, values)
            system._cache[key] = out
            return out
        last = res.lam
        m *= 2
    raise NonconvergenceError(
        f"no stabilization after {max_refinements} refinements "
        f"at theta={theta}, N={N}, kind={kind} (values {values})")


def epsilon(system, mesh0=REFERENCE_MESH):
    """lambda_*(1,1) - lambda_0(1,1); always 0 or 1."""
    ls = lambda_with_refinement(system, 1, 0.0, "star", mesh0).lam
    l0 = lambda_with_refinement(system, 1, 0.0, "zero", mesh0).lam
    eps = ls - l0
    if eps not in (0, 1):
        raise NonconvergenceError(f"epsilon = {eps} outside {{0,1}}; mesh too coarse")
    return eps


def kernel_residual_check(system, N, rho_point, mesh: Mesh, nodal_values):
    """Diagnostic residuals for a numerical kernel field.

    Measures the element-averaged strong residual of V'' = N^2 R_N V via
    second differences and the boundary defects of the quasi-periodic
    extension after one-sided derivative reconstruction.
    """
    m, h, n = mesh.m, mesh.h, system.n
    V = np.asarray(nodal_values, dtype=complex).reshape(m, n)
    C = boundary_factor(system, N, rho_point)
    ext = np.vstack([V, (C @ V[0])[None, :], (C @ V[1])[None, :]])
    scale = max(np.max(np.abs(V)), 1e-30)
    t_nodes = np.arange(1, m + 1) / m
    R_nodes = system.R_ext(t_nodes * N)
    res = 0.0
    for i in range(1, m + 1):
        d2 = (ext[i + 1] - 2 * ext[i] + ext[i - 1]) / h
        rhs = h * (N * N) * (R_nodes[i - 1] @ ext[i])
        res = max(res, float(np.linalg.norm(d2 - rhs)))
    dp_left = (ext[m] - ext[m - 1]) / h
    dp_right = (ext[m + 1] - ext[m]) / h
    first_right = (V[1] - V[0]) / h
    boundary_value = 0.0  # elimination makes T^N V(1) = rho^N V(0) exact
    boundary_deriv = float(np.linalg.norm(dp_right - first_right) * h)
    return {
        "weak_residual": res / scale,
        "boundary_value_defect": boundary_value,
        "boundary_derivative_defect": boundary_deriv / scale,
    }


def form_value(system, N, rho_point, mesh: Mesh, V_nodes, W_nodes):
    """I_N(V, W) for two discrete fields given by their nodal unknowns."""
    H = assemble_form(system, N, rho_point, mesh)
    v = np.asarray(V_nodes, dtype=complex).ravel()
    w = np.asarray(W_nodes, dtype=complex).ravel()
    return complex(np.conj(w) @ (H @ v))
