"""Index function on the circle, iteration formulas, and growth analysis.

The index function Lambda(rho) = lambda_0(rho, 1) is integer-valued and
constant on the open arcs cut by the unit-circle spectrum of the Poincare
map, so the circle is scanned arc-wise: one stabilized evaluation per arc
(confirmed at a second interior sample) plus point evaluations at each
spectral angle.  Indices of iterates are then sums of Lambda over roots of
unity, with the correction term epsilon constant along the iteration tower.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import galerkin as gk
from .ode import nullity_star, nullity_zero, poincare
from .system import CirclePoint

ANGLE_MATCH_TOL = 1e-9


class IdentityViolation(RuntimeError):
    """A theorem-level integer identity failed numerically."""


@dataclass
class IndexProfile:
    """Lambda and the nullity function on the unit circle.

    spectral_angles are the angles (in [0, 1)) of the unit-circle spectrum
    of the Poincare map; plateau_values[j] is Lambda on the open arc from
    spectral_angles[j] to the next angle (wrapping); point_lambda /
    point_nullity are the values at the angles themselves.
    """

    spectral_angles: np.ndarray
    plateau_values: list
    point_lambda: list
    point_nullity: list
    singular: bool
    epsilon: int

    def arc_of(self, theta):
        """Index j of the open arc containing theta (must not hit an angle)."""
        th = float(theta) % 1.0
        a = self.spectral_angles
        j = int(np.searchsorted(a, th)) - 1
        return j % len(a)

    def _angle_index(self, theta):
        th = float(theta) % 1.0
        for j, t in enumerate(self.spectral_angles):
            if min(abs(th - t), 1.0 - abs(th - t)) <= ANGLE_MATCH_TOL:
                return j
        return None

    def lam(self, theta):
        """Lambda at a point of the circle, read from the profile."""
        j = self._angle_index(theta)
        if j is not None:
            return self.point_lambda[j]
        return self.plateau_values[self.arc_of(theta)]

    def nullity(self, theta):
        j = self._angle_index(theta)
        if j is not None:
            return self.point_nullity[j]
        return 0

    @property
    def max_lambda(self):
        return max(list(self.plateau_values) + list(self.point_lambda))

    def is_constant(self):
        """Whether Lambda takes a single value on the whole circle."""
        vals = set(self.plateau_values) | set(self.point_lambda)
        return len(vals) == 1

    def to_json(self):
        return {
            "spectral_angles": [float(t) for t in self.spectral_angles],
            "plateau_values": [int(v) for v in self.plateau_values],
            "point_lambda": [int(v) for v in self.point_lambda],
            "point_nullity": [int(v) for v in self.point_nullity],
            "singular": self.singular,
            "epsilon": self.epsilon,
        }


def _pdata(system):
    pd = system._cache.get("poincare")
    if pd is None:
        pd = poincare(system)
        system._cache["poincare"] = pd
    return pd


def scan_circle(system, mesh0=gk.REFERENCE_MESH, jobs=1) -> IndexProfile:
    """Arc-wise evaluation of Lambda and the point values at spectral angles."""
    system._require_validated()
    pdata = _pdata(system)
    angles = np.asarray(pdata.unit_angles, dtype=float)
    if len(angles) == 0:
        # cannot happen for valid systems ((Y(0), Y'(0)) is fixed by P),
        # but keep the scan well-defined
        angles = np.array([0.0])
    angles = np.sort(angles % 1.0)

    K = len(angles)
    widths = np.diff(np.concatenate([angles, [angles[0] + 1.0]]))
    tasks = []
    for j in range(K):
        tasks.append(("mid", j, angles[j] + 0.5 * widths[j]))
        tasks.append(("quarter", j, angles[j] + 0.25 * widths[j]))
        tasks.append(("point", j, angles[j]))

    def run(task):
        _, _, theta = task
        return gk.lambda_with_refinement(system, 1, theta, "zero", mesh0).lam

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            values = list(pool.map(run, tasks))
    else:
        values = [run(t) for t in tasks]

    plateau = [None] * K
    point = [None] * K
    for (kind, j, theta), v in zip(tasks, values):
        if kind == "mid":
            plateau[j] = v
        elif kind == "quarter":
            if plateau[j] is not None and v != plateau[j]:
                raise IdentityViolation(
                    f"arc constancy violated on arc {j}: {plateau[j]} vs {v}")
            if plateau[j] is None:
                plateau[j] = v
        else:
            point[j] = v
    for (kind, j, theta), v in zip(tasks, values):
        if kind == "mid" and v != plateau[j]:
            raise IdentityViolation(
                f"arc constancy violated on arc {j}: {plateau[j]} vs {v}")

    nullities = [nullity_zero(pdata, CirclePoint(t), 1) for t in angles]
    eps = gk.epsilon(system, mesh0)
    singular = bool(system.singular)
    return IndexProfile(angles, plateau, point, nullities, singular, eps)


@dataclass
class IterationRow:
    N: int
    mu: int
    mu0: int
    nu_star: int
    nu0: int
    epsilon: int


@dataclass
class GrowthStats:
    mean_index: float
    a_coefficients: list
    alpha: float
    beta: float
    is_constant: bool

    def to_json(self):
        return {
            "mean_index": self.mean_index,
            "a_coefficients": self.a_coefficients,
            "alpha": self.alpha,
            "beta": self.beta,
            "is_constant": self.is_constant,
        }


@dataclass
class IterationReport:
    rows: list
    growth: GrowthStats
    classification: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "table": [{"N": r.N, "mu": r.mu, "mu0": r.mu0,
                       "nu_star": r.nu_star, "nu0": r.nu0,
                       "epsilon": r.epsilon} for r in self.rows],
            "growth": self.growth.to_json(),
            "classification": self.classification,
        }


def mu0_of_iterate(profile: IndexProfile, N: int):
    """mu_0(gamma^N) = sum of Lambda over the N-th roots of unity."""
    return int(sum(profile.lam(k / N) for k in range(1, N + 1)))


def iterate_indices(system, profile: IndexProfile, N_max: int,
                    direct_epsilon_up_to=0, mesh0=gk.REFERENCE_MESH) -> list:
    """Table of N -> (mu, mu0, nu_*, nu_0, epsilon_N).

    mu_0(gamma^N) is read from the profile via the root-of-unity sum and
    mu = epsilon + mu_0.  For N up to direct_epsilon_up_to, epsilon_N is
    recomputed directly on the iterated system and must equal epsilon.
    """
    pdata = _pdata(system)
    rows = []
    one = CirclePoint(0.0)
    for N in range(1, N_max + 1):
        mu0 = mu0_of_iterate(profile, N)
        mu = profile.epsilon + mu0
        ns = nullity_star(pdata, one, N)
        n0 = nullity_zero(pdata, one, N)
        if N <= direct_epsilon_up_to:
            ls = gk.lambda_with_refinement(system, N, 0.0, "star", mesh0 * N).lam
            l0 = gk.lambda_with_refinement(system, N, 0.0, "zero", mesh0 * N).lam
            epsN = ls - l0
            if epsN != profile.epsilon:
                raise IdentityViolation(
                    f"epsilon not invariant: epsilon_{N} = {epsN} "
                    f"!= {profile.epsilon}")
        else:
            epsN = profile.epsilon
        rows.append(IterationRow(N, mu, mu0, ns, n0, epsN))
    return rows


def fourier_check(system, N: int, profile: IndexProfile = None,
                  mesh=None) -> dict:
    """Verify the two Fourier identities for the N-th iterate.

    Left sides lambda_0(1, N) and lambda_*(1, N) are computed directly on
    the iterated system; right sides are root-of-unity sums of base values.
    Both must agree as exact integers.
    """
    if mesh is None:
        mesh = 64 * N
    if mesh % N != 0:
        raise ValueError("mesh must be divisible by N")
    l0_N = gk.lambda_with_refinement(system, N, 0.0, "zero", mesh).lam
    ls_N = gk.lambda_with_refinement(system, N, 0.0, "star", mesh).lam
    base = [gk.lambda_with_refinement(system, 1, k / N, "zero", mesh // N).lam
            for k in range(1, N + 1)]
    ls_1 = gk.lambda_with_refinement(system, 1, 0.0, "star", mesh // N).lam
    rhs_zero = sum(base)
    rhs_star = ls_1 + sum(base[:N - 1])
    report = {
        "N": N,
        "lambda0_iterate": l0_N,
        "lambda0_sum": rhs_zero,
        "lambda_star_iterate": ls_N,
        "lambda_star_sum": rhs_star,
        "base_terms": base,
        "ok": l0_N == rhs_zero and ls_N == rhs_star,
    }
    if not report["ok"]:
        raise IdentityViolation(
            f"Fourier identity failed at N={N}: "
            f"lambda_0 {l0_N} vs {rhs_zero}, lambda_* {ls_N} vs {rhs_star}")
    return report


# -- discrete Fourier splitting of fields ------------------------------


@dataclass
class DiscreteField:
    """Nodal values of a piecewise-linear field in the discrete space
    { V : T^N V(1) = rho^N V(0) } on a uniform mesh."""

    values: np.ndarray      # (m, n) complex nodal unknowns
    rho: CirclePoint
    N: int

    @property
    def m(self):
        return self.values.shape[0]


def psi_transform(system, V: DiscreteField) -> list:
    """Split a field of the N-th iterate into its N Fourier components.

    V_k(t) = (1/N) sum_j omega^{-kj} T^j V((t+j)/N) with omega = e^{2 pi i/N};
    nodes of the coarse mesh map to nodes of the fine mesh, so the transform
    is exact on nodal values.  Component k lives at rho_k = omega^k rho.
    """
    N = V.N
    mN, n = V.values.shape
    if mN % N != 0:
        raise ValueError("fine mesh size must be divisible by N")
    m = mN // N
    omega = np.exp(2j * np.pi / N)
    out = []
    for k in range(1, N + 1):
        vals = np.zeros((m, n), dtype=complex)
        for j in range(N):
            Tj = system.T_power(j).astype(complex)
            vals += omega ** (-k * j) * (V.values[j * m:(j + 1) * m] @ Tj.T)
        vals /= N
        out.append(DiscreteField(vals, CirclePoint(V.rho.theta + k / N), 1))
    return out


def upsilon_transform(system, components: list, rho: CirclePoint) -> DiscreteField:
    """Reassemble a fine field from its Fourier components (inverse map).

    V(t) = sum_k V_k(tN), extending each component by its quasi-periodicity
    V_k(s + 1) = omega^k rho T^-1 V_k(s).
    """
    N = len(components)
    m, n = components[0].values.shape
    omega = np.exp(2j * np.pi / N)
    vals = np.zeros((N * m, n), dtype=complex)
    for j in range(N):
        Tmj = system.T_power(-j).astype(complex)
        block = np.zeros((m, n), dtype=complex)
        for k, comp in enumerate(components, start=1):
            block += (omega ** k * rho.rho) ** j * comp.values
        vals[j * m:(j + 1) * m] = block @ Tmj.T
    return DiscreteField(vals, rho, N)


def form_splitting_residual(system, V: DiscreteField, W: DiscreteField):
    """|I_N(V, W) - sum_k I_1(N V_k, N W_k)| over the natural scale.

    With the normalized components V_k = (1/N) sum_j ... the split form
    carries a factor N^2 (irrelevant for inertia, exact for values):
    I_N(V, W) = N^2 sum_k I_1(V_k, W_k).
    """
    N, mN = V.N, V.m
    m = mN // N
    lhs = gk.form_value(system, N, V.rho, gk.Mesh(mN), V.values, W.values)
    Vk = psi_transform(system, V)
    Wk = psi_transform(system, W)
    rhs = 0.0 + 0.0j
    for vk, wk in zip(Vk, Wk):
        rhs += gk.form_value(system, 1, vk.rho, gk.Mesh(m), vk.values, wk.values)
    rhs *= N * N
    scale = max(np.linalg.norm(V.values) * np.linalg.norm(W.values), 1e-30)
    # the form scale grows like m from the derivative term
    scale *= mN
    return abs(lhs - rhs) / scale, lhs, rhs


# -- jumps, growth, classification -------------------------------------


@dataclass
class JumpRecord:
    theta: float
    left: int
    right: int
    point: int
    nullity: int
    bound_checked: bool


def jump_table(profile: IndexProfile) -> list:
    """Jump records at spectral angles, with the nullity bound asserted.

    |left - right| <= nullity always; point <= min(left, right) except at
    theta = 0 on singular systems, where semicontinuity is not guaranteed.
    """
    out = []
    K = len(profile.spectral_angles)
    for j, theta in enumerate(profile.spectral_angles):
        right = profile.plateau_values[j]
        left = profile.plateau_values[(j - 1) % K]
        point = profile.point_lambda[j]
        nu = profile.point_nullity[j]
        if left == right and point == right:
            continue
        exempt = profile.singular and min(theta, 1.0 - theta) <= ANGLE_MATCH_TOL
        if abs(left - right) > nu:
            raise IdentityViolation(
                f"jump {abs(left - right)} exceeds nullity {nu} at theta={theta}")
        if not exempt and point > min(left, right):
            raise IdentityViolation(
                f"semicontinuity violated at theta={theta}: "
                f"point {point} > min({left}, {right})")
        out.append(JumpRecord(float(theta), left, right, point, nu, not exempt))
    return out


def growth_stats(profile: IndexProfile) -> GrowthStats:
    """Mean index, jump coefficients, and the superlinear-growth constants.

    With right-limit plateau values beta_j on the arcs starting at the
    spectral angles theta_j, mu_0(gamma^N) = a_0 N + bounded terms where
    a_0 = beta_K; the remaining a_j are the plateau decrements.  alpha and
    beta are the certificate constants of the superlinear growth bound.
    """
    th = np.asarray(profile.spectral_angles, dtype=float)
    beta_arcs = list(profile.plateau_values)
    K = len(th)
    widths = np.diff(np.concatenate([th, [th[0] + 1.0]]))
    mean = float(np.dot(widths, beta_arcs))
    a = [beta_arcs[K - 1], beta_arcs[K - 1] - beta_arcs[0]]
    for j in range(2, K + 1):
        a.append(beta_arcs[j - 2] - beta_arcs[j - 1])
    max_lam = profile.max_lambda
    is_const = all(v == 0 for v in beta_arcs) and all(
        v == 0 for v in profile.point_lambda)
    pos = [(widths[j] * beta_arcs[j], j) for j in range(K) if beta_arcs[j] > 0]
    if pos:
        _, j0 = max(pos)
        alpha = float(widths[j0] * beta_arcs[j0])
        beta = float(-beta_arcs[j0] - 3 * (K + 1) * max_lam)
    else:
        alpha, beta = 0.0, 0.0
    return GrowthStats(mean, [int(x) for x in a], alpha, beta, is_const)


def classify(system, profile: IndexProfile, verify_N=6,
             mesh0=gk.REFERENCE_MESH) -> dict:
    """Spectral classification and the constant-profile iteration identity.

    "hyperbolic_modulo_Y" means the unit-circle spectrum of the Poincare
    map is exactly the forced eigenvalue 1, with one-dimensional eigenspace
    spanned by (Y(0), Y'(0)).  When the profile is constant the identity
    mu(gamma^N) = epsilon + N mu_0(gamma) is verified directly for N <= verify_N.
    """
    pdata = _pdata(system)
    P = pdata.P
    angles = pdata.unit_angles
    trivial = len(angles) == 1 and min(angles[0], 1.0 - angles[0]) <= 1e-6
    if trivial:
        n2 = P.shape[0]
        sv = np.linalg.svd(P - np.eye(n2), compute_uv=False)
        geo = int(np.sum(sv <= 1e-6 * max(sv[0], 1.0)))
        trivial = geo == 1
        if trivial:
            v = np.concatenate([np.asarray(system.Y_base(0.0)),
                                np.asarray(system.Yp_base(0.0))]).astype(complex)
            res = np.linalg.norm(P @ v - v) / np.linalg.norm(v)
            trivial = res <= 1e-6
    record = {
        "hyperbolic_modulo_Y": bool(trivial),
        "strongly_hyperbolic_modulo_Y": bool(trivial and profile.epsilon == 0),
        "constant_profile": bool(profile.is_constant()),
        "singular": profile.singular,
    }
    if record["constant_profile"]:
        mu0_1 = profile.lam(0.0)
        checked = []
        for N in range(1, verify_N + 1):
            l0 = gk.lambda_with_refinement(system, N, 0.0, "zero", mesh0 * N).lam
            mu = profile.epsilon + l0
            expect = profile.epsilon + N * mu0_1
            if mu != expect:
                raise IdentityViolation(
                    f"constant-profile identity failed at N={N}: "
                    f"mu={mu} vs epsilon + N mu_0 = {expect}")
            checked.append(N)
        record["iteration_identity_checked_N"] = checked
    return record


def build_report(system, N_max=6, mesh0=gk.REFERENCE_MESH, jobs=1,
                 direct_epsilon_up_to=0) -> IterationReport:
    """Full pipeline: scan, iterate, growth, classification."""
    profile = scan_circle(system, mesh0, jobs=jobs)
    rows = iterate_indices(system, profile, N_max,
                           direct_epsilon_up_to=direct_epsilon_up_to,
                           mesh0=mesh0)
    growth = growth_stats(profile)
    cls = classify(system, profile, verify_N=0)
    report = IterationReport(rows, growth, cls)
    report.profile = profile
    return report
