"""Problem data for complex Morse-Sturm systems of metric index 1.

A system is the tuple (n, g, T, R(t), Y(t)): an indefinite metric with
exactly one negative direction, a g-preserving monodromy, a g-symmetric
curvature path, and a timelike solution of V'' = R V compatible with the
monodromy.  All real inputs are complexified downstream; the stored data
stays real.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .paths import ConstantPath, Path, SampledPath, path_from_json

TAU_STRUCT = 1e-10
TAU_ODE = 1e-7
TAU_SING = 1e-8
VALIDATION_STEPS = 1000


class NotValidatedError(RuntimeError):
    """Operation called on a system that has not passed validate()."""


@dataclass(frozen=True)
class MetricForm:
    """Real symmetric bilinear form of index exactly 1 on R^n."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=float))
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise ValueError("metric must be a square matrix")

    @property
    def n(self):
        return self.matrix.shape[0]

    def index(self):
        """Number of negative eigenvalues."""
        return int(np.sum(np.linalg.eigvalsh(self.matrix) < 0.0))

    def pairing(self, v, w):
        """g(v, w), sesquilinear: linear in v, conjugate-linear in w."""
        return np.conj(w) @ (self.matrix @ v)


@dataclass(frozen=True)
class MonodromyMap:
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=float))


@dataclass(frozen=True)
class CirclePoint:
    """Point exp(2 pi i theta) of the unit circle, theta reduced mod 1."""

    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", float(self.theta) % 1.0)

    @property
    def rho(self):
        return np.exp(2j * np.pi * self.theta)

    def conjugate(self):
        return CirclePoint((-self.theta) % 1.0)


@dataclass
class Check:
    name: str
    passed: bool
    residual: float
    tolerance: float
    detail: str = ""

    def to_json(self):
        return {
            "name": self.name,
            "passed": self.passed,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "detail": self.detail,
        }


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    def add(self, name, residual, tolerance, detail=""):
        ok = bool(residual <= tolerance)
        self.checks.append(Check(name, ok, float(residual), float(tolerance), detail))
        return ok

    def fail(self, name, detail, residual=np.inf, tolerance=0.0):
        self.checks.append(Check(name, False, float(residual), float(tolerance), detail))

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def to_json(self):
        return {
            "passed": self.passed,
            "checks": [c.to_json() for c in self.checks],
            "flags": list(self.flags),
        }


class MorseSturmSystem:
    """The validated tuple (g, T, R, Y).  Immutable after validation.

    R and Y are Path objects on [0, 1]; their extensions to the real line
    follow Y(t+N) = T^-N Y(t) and R(t+N) = T^-N R(t) T^N.
    """

    def __init__(self, g: MetricForm, T: MonodromyMap, R: Path, Y: Path, label=""):
        self.g = g
        self.T = T
        self.R = R
        self.Y = Y
        self.label = label
        self.validated = False
        self.singular = None
        self._Tpow = {0: np.eye(g.n)}
        self._Y_spline = None
        self._Yp_spline = None
        self._cache = {}

    # -- basic helpers -------------------------------------------------

    @property
    def n(self):
        return self.g.n

    def T_power(self, k: int):
        k = int(k)
        if k not in self._Tpow:
            if k > 0:
                self._Tpow[k] = self.T.matrix @ self.T_power(k - 1)
            else:
                self._Tpow[k] = np.linalg.solve(self.T.matrix, self.T_power(k + 1))
        return self._Tpow[k]

    def _require_validated(self):
        if not self.validated:
            raise NotValidatedError("system must pass validate() first")

    def Y_base(self, t):
        """Canonical Y on [0,1] (re-integrated samples once validated)."""
        if self._Y_spline is not None:
            return self._Y_spline(t)
        return self.Y(t)

    def Yp_base(self, t):
        if self._Yp_spline is not None:
            return self._Yp_spline(t)
        return self.Y.deriv(t)

    def _split_time(self, s):
        s = np.asarray(s, dtype=float)
        k = np.floor(s).astype(int)
        # keep s == exact integers on the left endpoint of the next period
        tau = s - k
        return k, tau

    def _apply_Tpow(self, k, values, conjugate=False):
        """values[i] -> T^-k[i] values[i] (or T^-k . T^k conjugation)."""
        out = np.empty_like(values)
        for kk in np.unique(k):
            mask = k == kk
            Tm = self.T_power(-int(kk))
            if conjugate:
                Tk = self.T_power(int(kk))
                out[mask] = np.einsum("ab,xbc,cd->xad", Tm, values[mask], Tk)
            else:
                out[mask] = values[mask] @ Tm.T
        return out

    def R_ext(self, s):
        """Extension of R to the real line, vectorized over s."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        k, tau = self._split_time(s)
        return self._apply_Tpow(k, self.R(tau), conjugate=True)

    def Y_ext(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        k, tau = self._split_time(s)
        return self._apply_Tpow(k, self.Y_base(tau))

    def Yp_ext(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        k, tau = self._split_time(s)
        return self._apply_Tpow(k, self.Yp_base(tau))

    # -- serialization -------------------------------------------------

    def to_json(self):
        return {
            "n": self.n,
            "g": self.g.matrix.tolist(),
            "T": self.T.matrix.tolist(),
            "R": self.R.to_json(),
            "Y": self.Y.to_json(),
            "label": self.label,
        }


def system_from_json(obj) -> MorseSturmSystem:
    n = int(obj["n"])
    g = MetricForm(np.asarray(obj["g"], dtype=float).reshape(n, n))
    T = MonodromyMap(np.asarray(obj["T"], dtype=float).reshape(n, n))
    R = path_from_json(obj["R"], expect_ndim=2)
    Y = path_from_json(obj["Y"], expect_ndim=1)
    return MorseSturmSystem(g, T, R, Y, label=obj.get("label", ""))


def load_system(path) -> MorseSturmSystem:
    with open(path) as fh:
        return system_from_json(json.load(fh))


# -- validation --------------------------------------------------------


def _reintegrate_Y(system, steps):
    """RK4 re-integration of V'' = R V from (Y(0), Y'(0)) over [0, 1]."""
    n = system.n
    h = 1.0 / steps
    half_grid = np.linspace(0.0, 1.0, 2 * steps + 1)
    R_tab = system.R(half_grid)
    y = np.concatenate([np.asarray(system.Y(0.0)), np.asarray(system.Y.deriv(0.0))])
    out = np.empty((steps + 1, 2 * n))
    out[0] = y

    def f(Rm, u):
        return np.concatenate([u[n:], Rm @ u[:n]])

    for i in range(steps):
        R0, Rh, R1 = R_tab[2 * i], R_tab[2 * i + 1], R_tab[2 * i + 2]
        k1 = f(R0, y)
        k2 = f(Rh, y + 0.5 * h * k1)
        k3 = f(Rh, y + 0.5 * h * k2)
        k4 = f(R1, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i + 1] = y
    return np.linspace(0.0, 1.0, steps + 1), out[:, :n], out[:, n:]


def singularity_defect(system, grid_size=512):
    """Max over the grid of |g(Y,Y) Y' - g(Y',Y) Y| / (|Y| |g(Y,Y)|)."""
    t = np.linspace(0.0, 1.0, grid_size + 1)
    Y = system.Y_base(t)
    Yp = system.Yp_base(t)
    G = system.g.matrix
    gYY = np.einsum("xa,ab,xb->x", Y, G, Y)
    gYpY = np.einsum("xa,ab,xb->x", Yp, G, Y)
    defect = gYY[:, None] * Yp - gYpY[:, None] * Y
    scale = np.linalg.norm(Y, axis=1) * np.abs(gYY)
    vals = np.linalg.norm(defect, axis=1) / scale
    i = int(np.argmax(vals))
    return float(vals[i]), float(t[i])


def is_singular(system, tau_sing=TAU_SING):
    """Whether Y'(t) is pointwise a multiple of Y(t).

    Returns (flag, witness): witness is a t attaining the defect maximum
    when the system is not singular, None otherwise.
    """
    system._require_validated()
    defect, t_max = singularity_defect(system)
    if defect <= tau_sing:
        return True, None
    return False, t_max


def validate(system, tau_struct=TAU_STRUCT, tau_ode=TAU_ODE) -> ValidationReport:
    """Check invariants (a)-(e) and make the re-integrated Y canonical."""
    report = ValidationReport()
    G = system.g.matrix
    n = system.n
    if n < 1:
        report.fail("dimension", "n must be >= 1")
        return report

    scale_g = np.linalg.norm(G)
    report.add("g symmetric", np.linalg.norm(G - G.T) / scale_g, 0.0,
               "metric stored non-symmetric" if np.any(G != G.T) else "")
    eigs = np.linalg.eigvalsh(G)
    if np.min(np.abs(eigs)) <= tau_struct * scale_g:
        report.fail("g nondegenerate", "metric numerically degenerate")
    idx = int(np.sum(eigs < 0.0))
    if idx != 1:
        report.fail("g index", f"metric index != 1 (got {idx})")
    else:
        report.add("g index", 0.0, 0.0, "index 1")

    Tm = system.T.matrix
    if abs(np.linalg.det(Tm)) <= tau_struct:
        report.fail("T invertible", "T not invertible")
    else:
        report.add("T invertible", 0.0, 0.0, "")
    res_T = np.linalg.norm(Tm.T @ G @ Tm - G) / scale_g
    report.add("T g-preserving", res_T, tau_struct,
               "" if res_T <= tau_struct else "T not g-preserving")

    tgrid = np.linspace(0.0, 1.0, 101)
    Rt = system.R(tgrid)
    scale_R = max(np.max(np.abs(Rt)), 1.0) * scale_g
    res_sym = np.max(np.abs(np.einsum("ab,xbc->xac", G, Rt)
                            - np.einsum("xba,bc->xac", Rt, G))) / scale_R
    report.add("R g-symmetric", res_sym, tau_struct)
    res_comp = np.linalg.norm(system.R(0.0) @ Tm - Tm @ system.R(1.0)) / scale_R
    report.add("R(0)T = TR(1)", res_comp, tau_struct)

    # Y invariants
    Y0, Y1 = np.asarray(system.Y(0.0)), np.asarray(system.Y(1.0))
    Yp0, Yp1 = np.asarray(system.Y.deriv(0.0)), np.asarray(system.Y.deriv(1.0))
    scale_Y = max(np.linalg.norm(Y0), 1.0)
    report.add("T Y(1) = Y(0)", np.linalg.norm(Tm @ Y1 - Y0) / scale_Y, 1e3 * tau_struct)
    report.add("T Y'(1) = Y'(0)",
               np.linalg.norm(Tm @ Yp1 - Yp0) / max(np.linalg.norm(Yp0), scale_Y),
               1e3 * tau_struct)

    grid, Yint, Ypint = _reintegrate_Y(system, VALIDATION_STEPS)
    res_ode = np.max(np.linalg.norm(system.Y(grid) - Yint, axis=1)) / scale_Y
    report.add("Y solves V''=RV", res_ode, tau_ode,
               "re-integration from (Y(0), Y'(0))")

    gYY = np.einsum("xa,ab,xb->x", Yint, G, Yint)
    worst = float(np.max(gYY))
    report.add("Y timelike", worst, -0.0,
               "g(Y,Y) must stay negative" if worst >= 0 else "")

    if isinstance(system.R, SampledPath) and system.R.interpolation == "linear":
        report.flags.append("reduced accuracy: R given as linearly interpolated samples")

    if report.passed:
        system._Y_spline = CubicSpline(grid, Yint, axis=0)
        system._Yp_spline = CubicSpline(grid, Ypint, axis=0)
        system.validated = True
        defect, _ = singularity_defect(system)
        system.singular = defect <= TAU_SING
        report.flags.append("singular" if system.singular else "non-singular")
    return report


# -- iterated data and the auxiliary positive metric -------------------


def iterated_data(system, N: int, t):
    """(R_N(t), Y_N(t), Y'(tN)) for the N-th iterated system.

    R_N(t) = R(tN) and Y_N(t) = Y(tN) with the T-conjugated extensions;
    the third slot is the derivative of the base Y at tN (so the derivative
    of Y_N is N times it).
    """
    system._require_validated()
    if N < 1:
        raise ValueError("N must be >= 1")
    s = np.atleast_1d(np.asarray(t, dtype=float)) * N
    R = system.R_ext(s)
    Y = system.Y_ext(s)
    Yp = system.Yp_ext(s)
    if np.ndim(t) == 0:
        return R[0], Y[0], Yp[0]
    return R, Y, Yp


def positive_metric_matrix(system, N: int, t):
    """Matrix of the positive Hermitian form g_t^N in the standard basis."""
    system._require_validated()
    G = system.g.matrix
    _, Y, _ = iterated_data(system, N, t)
    u = G @ Y
    s = float(Y @ u)
    return G - 2.0 * np.outer(u, u) / s


def positive_metric(system, N: int, t, V, W):
    """g_t^N(V, W) = g(V,W) - 2 g(V,Y_N) g(W,Y_N)* / g(Y_N,Y_N)."""
    Gp = positive_metric_matrix(system, N, t)
    return np.conj(np.asarray(W)) @ (Gp @ np.asarray(V))


def operator_A(system, N: int, t):
    """The symmetric isomorphism A(t,N) with g(V,W) = g_t^N(A V, W)."""
    Gp = positive_metric_matrix(system, N, t)
    return np.linalg.solve(Gp, system.g.matrix)
