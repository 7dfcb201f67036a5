"""Initial value problems and Poincare data for iterated systems.

Jacobi fields of the N-th iterate solve V'' = N^2 R_N(t) V on [0, 1] with
R_N(t) = R(tN).  Everything here uses classical RK4 with a fixed step and a
table of R_N sampled at step midpoints, so repeated solves share no
re-evaluation cost and runs are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import null_space

TAU_RANK = 1e-6
TAU_SPEC = 1e-4
DEFAULT_STEPS_PER_PERIOD = 1000


def _rk4_table(system, N, steps):
    """R_N sampled at the 2*steps + 1 half-step points of [0, 1]."""
    half_grid = np.linspace(0.0, 1.0, 2 * steps + 1)
    return system.R_ext(half_grid * N)


def _rk4_run(R_tab, N, steps, y0, keep_path=False):
    """Integrate u' = f(t, u) for u = (V, V'), f = (V', N^2 R_N V).

    y0 has shape (2n, m): m initial conditions advanced together.
    """
    h = 1.0 / steps
    n = R_tab.shape[1]
    fac = float(N) ** 2
    y = np.array(y0, dtype=complex)
    path = [y.copy()] if keep_path else None

    def f(Rm, u):
        out = np.empty_like(u)
        out[:n] = u[n:]
        out[n:] = fac * (Rm @ u[:n])
        return out

    for i in range(steps):
        R0, Rh, R1 = R_tab[2 * i], R_tab[2 * i + 1], R_tab[2 * i + 2]
        k1 = f(R0, y)
        k2 = f(Rh, y + 0.5 * h * k1)
        k3 = f(Rh, y + 0.5 * h * k2)
        k4 = f(R1, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if keep_path:
            path.append(y.copy())
    if keep_path:
        return y, np.array(path)
    return y, None


@dataclass
class SolutionPath:
    """A Jacobi field of the N-th iterate with spline access to (V, V')."""

    N: int
    grid: np.ndarray
    values: np.ndarray      # (steps + 1, n)
    derivatives: np.ndarray  # (steps + 1, n)

    def __post_init__(self):
        self._v = CubicSpline(self.grid, self.values, axis=0)
        self._d = CubicSpline(self.grid, self.derivatives, axis=0)

    def value(self, t):
        return self._v(t)

    def derivative(self, t):
        return self._d(t)


def solve_jacobi(system, N, v0, w0, steps=None):
    """Solve V'' = N^2 R_N V with V(0) = v0, V'(0) = w0."""
    system._require_validated()
    steps = steps or DEFAULT_STEPS_PER_PERIOD * N
    R_tab = _rk4_table(system, N, steps)
    n = system.n
    y0 = np.concatenate([np.asarray(v0, dtype=complex),
                         np.asarray(w0, dtype=complex)])[:, None]
    _, path = _rk4_run(R_tab, N, steps, y0, keep_path=True)
    path = path[:, :, 0]
    grid = np.linspace(0.0, 1.0, steps + 1)
    return SolutionPath(N, grid, path[:, :n], path[:, n:])


def fundamental_matrix(system, N, steps=None):
    """Flow matrix Phi(1) of the first order system on C^{2n}."""
    system._require_validated()
    steps = steps or DEFAULT_STEPS_PER_PERIOD * N
    R_tab = _rk4_table(system, N, steps)
    n = system.n
    y1, _ = _rk4_run(R_tab, N, steps, np.eye(2 * n, dtype=complex))
    return y1


def pairing_drift(system, N, steps=None, seed=0):
    """Max drift of the conserved pairing g(J1', J2) - g(J1, J2') along a run.

    Returns the worst absolute deviation from the initial value over a pair
    of random Jacobi fields, normalized by the field magnitudes.
    """
    system._require_validated()
    steps = steps or DEFAULT_STEPS_PER_PERIOD * N
    rng = np.random.default_rng(seed)
    n = system.n
    y0 = rng.standard_normal((2 * n, 2)) + 1j * rng.standard_normal((2 * n, 2))
    R_tab = _rk4_table(system, N, steps)
    _, path = _rk4_run(R_tab, N, steps, y0, keep_path=True)
    G = system.g.matrix
    V1, W1 = path[:, :n, 0], path[:, n:, 0]
    V2, W2 = path[:, :n, 1], path[:, n:, 1]
    pair = (np.einsum("xa,ab,xb->x", np.conj(V2), G.astype(complex).T, W1)
            - np.einsum("xa,ab,xb->x", np.conj(W2), G.astype(complex).T, V1))
    scale = max(np.max(np.abs(path)), 1.0) ** 2
    return float(np.max(np.abs(pair - pair[0])) / scale)


@dataclass
class PoincareData:
    """Poincare map and derived spectral data of a system.

    P acts on C^{2n} by (v, w) -> (T J(1), T J'(1)) for the Jacobi field J
    with initial data (v, w).  J0_basis spans the g-orthogonal slice
    {(v, w): g(w, Y(0)) = g(v, Y'(0))}; P0 is P compressed to that slice.
    """

    P: np.ndarray
    J0_basis: np.ndarray
    P0: np.ndarray
    unit_angles: np.ndarray       # theta values in [0, 1) of unit eigenvalues
    unit_angles_reduced: np.ndarray

    def to_json(self):
        return {
            "unit_spectrum_angles": self.unit_angles.tolist(),
            "unit_spectrum_angles_reduced": self.unit_angles_reduced.tolist(),
        }


def _unit_angles(eigvals, tau=None, cluster=1e-4):
    """Cluster the angles of the approximately-unimodular eigenvalues.

    A numerically split Jordan pair at a unit eigenvalue scatters copies
    within ~sqrt(integration error) of the true angle, so clusters are
    merged at a width well above that and represented by their circular
    mean, snapped to 0 when they straddle the branch point.
    """
    if tau is None:
        tau = TAU_SPEC
    on_circle = eigvals[np.abs(np.abs(eigvals) - 1.0) <= tau]
    if len(on_circle) == 0:
        return np.zeros(0)
    theta = np.sort((np.angle(on_circle) / (2.0 * np.pi)) % 1.0)

    def circ_dist(a, b):
        d = abs(a - b) % 1.0
        return min(d, 1.0 - d)

    groups = [[theta[0]]]
    for t in theta[1:]:
        last = groups[-1][-1]
        if circ_dist(t, last) <= cluster:
            # unwrap so the in-group mean is a circular mean
            if t - last > 0.5:
                t -= 1.0
            elif last - t > 0.5:
                t += 1.0
            groups[-1].append(t)
        else:
            groups.append([t])
    if len(groups) > 1 and circ_dist(groups[0][0], groups[-1][-1]) <= cluster:
        groups[0] = [t - 1.0 for t in groups[-1]] + groups[0]
        groups.pop()
    reps = []
    for g in groups:
        r = float(np.mean(g)) % 1.0
        if min(r, 1.0 - r) <= cluster:
            r = 0.0
        reps.append(r)
    return np.sort(np.array(reps))


def poincare(system, steps=None) -> PoincareData:
    """Build the Poincare map P = diag(T, T) Phi(1) and its unit spectrum."""
    system._require_validated()
    n = system.n
    Phi = fundamental_matrix(system, 1, steps=steps)
    Tm = system.T.matrix
    D = np.zeros((2 * n, 2 * n))
    D[:n, :n] = Tm
    D[n:, n:] = Tm
    P = D @ Phi

    G = system.g.matrix
    Y0 = np.asarray(system.Y_base(0.0))
    Yp0 = np.asarray(system.Yp_base(0.0))
    # g(w, Y(0)) - g(v, Y'(0)) = 0  <=>  (GY0)^H w - (GYp0)^H v = 0
    row = np.concatenate([-(G @ Yp0), G @ Y0]).astype(complex)[None, :]
    J0 = null_space(row)
    P0 = np.conj(J0.T) @ P @ J0

    ev = np.linalg.eigvals(P)
    ev0 = np.linalg.eigvals(P0)
    return PoincareData(P, J0, P0, _unit_angles(ev), _unit_angles(ev0))


def _kernel_dim(M, tau_rank=None):
    if tau_rank is None:
        tau_rank = TAU_RANK
    s = np.linalg.svd(M, compute_uv=False)
    if len(s) == 0:
        return 0
    scale = max(s[0], 1.0)
    return int(np.sum(s <= tau_rank * scale))


def _root_shifts(rho_point, N):
    """The N points eta with eta^N = rho^N."""
    rho = rho_point.rho
    return [rho * np.exp(2j * np.pi * k / N) for k in range(int(N))]


def nullity_star(pdata: PoincareData, rho_point, N, tau_rank=None):
    """nu_*(rho, N) = dim Ker(P^N - rho^N Id).

    Computed as the sum of geometric multiplicities of the root shifts
    eta = rho omega^k as eigenvalues of P itself: the kernel of P^N - rho^N
    splits over them, and P - eta Id stays well-conditioned where powers of
    a hyperbolic P do not.
    """
    P = pdata.P
    I = np.eye(P.shape[0])
    return sum(_kernel_dim(P - eta * I, tau_rank)
               for eta in _root_shifts(rho_point, N))


def nullity_zero(pdata: PoincareData, rho_point, N, tau_rank=None):
    """nu_0(rho, N): as nu_* unless rho^N = 1, then intersect with the slice.

    When rho^N = 1 the periodic fields counted by nu_* include the direction
    of Y itself; nu_0 keeps only those in the g-orthogonal slice, computed
    per root shift as the kernel of (P - eta Id) stacked over the
    slice-defining row (the slice is P-invariant, so the intersection also
    splits over the eigenvalues).
    """
    P = pdata.P
    m = P.shape[0]
    I = np.eye(m)
    rhoN = rho_point.rho ** N
    if abs(rhoN - 1.0) > 1e-9:
        return nullity_star(pdata, rho_point, N, tau_rank)
    # row orthogonal to J0_basis: recover it as the left null of the basis
    row = null_space(np.conj(pdata.J0_basis.T)).T
    scale = max(np.linalg.norm(P), 1.0)
    total = 0
    for eta in _root_shifts(rho_point, N):
        stacked = np.vstack([P - eta * I, scale * row])
        total += _kernel_dim(stacked, tau_rank)
    return total


def iteration_consistency(system, N, steps=None, tol=1e-6):
    """Residual of Phi_N(1) = (diag(T,T)^-1 P)^N up to derivative scaling.

    The Jacobi flow of the N-th iterate over [0, 1] equals the base flow
    over [0, N] after rescaling derivatives by N.  Returns the relative
    residual between the two computations of the endpoint matrix.
    """
    system._require_validated()
    n = system.n
    PhiN = fundamental_matrix(system, N, steps=steps)
    Phi1 = fundamental_matrix(system, 1,
                              steps=(steps // N if steps else None))
    Tm = system.T.matrix
    D = np.zeros((2 * n, 2 * n))
    D[:n, :n] = Tm
    D[n:, n:] = Tm
    P = D @ Phi1
    # flow over [0, N] composes T-conjugated period flows into D^-N P^N
    TmN = system.T_power(-N)
    DinvN = np.zeros((2 * n, 2 * n))
    DinvN[:n, :n] = TmN
    DinvN[n:, n:] = TmN
    flow = DinvN @ np.linalg.matrix_power(P, N)
    S = np.eye(2 * n)
    S[n:, n:] *= N
    lhs = PhiN
    rhs = S @ flow @ np.linalg.inv(S)
    return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(rhs), 1.0))
