"""Built-in families of Morse-Sturm systems with known structure.

Each generator returns a validated MorseSturmSystem.  They cover the
degenerate flat case, decoupled oscillators (singular systems with a
closed-form index function), non-singular tilted systems, and boosted
systems whose linearized flow is hyperbolic off the direction of Y.
"""

from __future__ import annotations

import numpy as np

from .paths import CallablePath, ConstantPath
from .system import MetricForm, MonodromyMap, MorseSturmSystem, validate

TWO_PI = 2.0 * np.pi


def _minkowski(n):
    g = np.eye(n)
    g[0, 0] = -1.0
    return g


def _finalize(g, T, R, Y, label):
    sys = MorseSturmSystem(MetricForm(g), MonodromyMap(T), R, Y, label=label)
    report = validate(sys)
    if not report.passed:
        bad = ", ".join(c.name for c in report.failures())
        raise RuntimeError(f"generator produced invalid system ({label}): {bad}")
    return sys


def _spatial_rotation(n, angles):
    """Block rotation acting on spatial coordinates 1..n-1 only."""
    T = np.eye(n)
    for j, a in enumerate(angles):
        i = 1 + 2 * j
        if i + 1 >= n:
            raise ValueError("too many rotation angles for dimension")
        c, s = np.cos(a), np.sin(a)
        T[i:i + 2, i:i + 2] = [[c, -s], [s, c]]
    return T


def flat(n=2, spatial_rotation_angles=()):
    """R = 0, Y = e_0 constant; optional spatial rotation as monodromy."""
    g = _minkowski(n)
    T = _spatial_rotation(n, spatial_rotation_angles)
    R = ConstantPath(np.zeros((n, n)))
    e0 = np.zeros(n)
    e0[0] = 1.0
    Y = ConstantPath(e0)
    return _finalize(g, T, R, Y, f"flat(n={n})")


def oscillator(n=2, k=(TWO_PI ** 2,)):
    """Decoupled oscillators: R = diag(0, -k_1, ..., -k_{n-1}), T = I.

    Y = e_0 is constant, so the system is singular.  The index function
    has the closed form of `oracle_lambda_oscillator`.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if len(k) != n - 1:
        raise ValueError("need one stiffness per spatial coordinate")
    g = _minkowski(n)
    R = ConstantPath(np.diag(np.concatenate([[0.0], -k])))
    e0 = np.zeros(n)
    e0[0] = 1.0
    return _finalize(g, np.eye(n), R, ConstantPath(e0),
                     f"oscillator(k={k.tolist()})")


def static_product(n=2, k=(TWO_PI ** 2,)):
    """Alias of `oscillator`: product of a static direction and oscillators."""
    return oscillator(n, k)


def oracle_lambda_oscillator(k, theta):
    """Closed-form lambda_0(exp(2 pi i theta), 1) for `oscillator`.

    Counts, over the stiffnesses k_j, the integers m with
    (2 pi)^2 (m + theta)^2 < k_j.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    theta = float(theta) % 1.0
    total = 0
    for kj in k:
        if kj <= 0:
            continue
        bound = np.sqrt(kj) / TWO_PI
        m_lo = int(np.ceil(-bound - theta))
        m_hi = int(np.floor(bound - theta))
        for m in range(m_lo, m_hi + 1):
            if TWO_PI ** 2 * (m + theta) ** 2 < kj:
                total += 1
    return total


def tilted(n=3, a_cos=(0.3,), a_sin=(0.2,), a_const=0.0, extra_k=()):
    """Non-singular system with Y a hyperbolic rotation of varying rapidity.

    Y(t) = (cosh a(t), sinh a(t), 0, ...) with a a trigonometric polynomial,
    so g(Y, Y) = -1 identically and Y' is nowhere proportional to Y (as long
    as a is non-constant).  R is the rank-2 recipe making Y a solution:

        R V = c1(V) Y'' + c2(V) Y - c3(V) Y,

    with coefficients built from g-pairings against Y and Y''; spare spatial
    coordinates get decoupled oscillator blocks -k_j.
    """
    a_cos = np.atleast_1d(np.asarray(a_cos, dtype=float))
    a_sin = np.atleast_1d(np.asarray(a_sin, dtype=float))
    extra_k = np.atleast_1d(np.asarray(extra_k, dtype=float)) if len(extra_k) else np.zeros(0)
    if n < 2 or len(extra_k) != n - 2:
        raise ValueError("need n >= 2 and one extra stiffness per coordinate >= 2")
    g = _minkowski(n)

    def a_val(t):
        t = np.asarray(t, dtype=float)
        out = np.full(np.shape(t), float(a_const))
        for j, c in enumerate(a_cos, start=1):
            out = out + c * np.cos(TWO_PI * j * t)
        for j, s in enumerate(a_sin, start=1):
            out = out + s * np.sin(TWO_PI * j * t)
        return out

    def a_d1(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(np.shape(t))
        for j, c in enumerate(a_cos, start=1):
            out = out - c * TWO_PI * j * np.sin(TWO_PI * j * t)
        for j, s in enumerate(a_sin, start=1):
            out = out + s * TWO_PI * j * np.cos(TWO_PI * j * t)
        return out

    def a_d2(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(np.shape(t))
        for j, c in enumerate(a_cos, start=1):
            out = out - c * (TWO_PI * j) ** 2 * np.cos(TWO_PI * j * t)
        for j, s in enumerate(a_sin, start=1):
            out = out - s * (TWO_PI * j) ** 2 * np.sin(TWO_PI * j * t)
        return out

    def Y_val(t):
        a = a_val(t)
        out = np.zeros(np.shape(a) + (n,))
        out[..., 0] = np.cosh(a)
        out[..., 1] = np.sinh(a)
        return out

    def Y_deriv(t):
        a, ap = a_val(t), a_d1(t)
        out = np.zeros(np.shape(a) + (n,))
        out[..., 0] = ap * np.sinh(a)
        out[..., 1] = ap * np.cosh(a)
        return out

    def Y_d2(t):
        a, ap, app = a_val(t), a_d1(t), a_d2(t)
        out = np.zeros(np.shape(a) + (n,))
        out[..., 0] = app * np.sinh(a) + ap ** 2 * np.cosh(a)
        out[..., 1] = app * np.cosh(a) + ap ** 2 * np.sinh(a)
        return out

    def R_val(t):
        t = np.asarray(t, dtype=float)
        Y = Y_val(t)
        Ypp = Y_d2(t)
        gY = Y @ g            # rows g(., Y)
        gYpp = Ypp @ g
        # g(Y, Y) = -1 and g is real here, so the recipe simplifies:
        # R V = -g(V,Y) Y'' - g(V,Y'') Y - g(Y'',Y) g(V,Y) Y
        c = np.einsum("...a,...a->...", Ypp @ g, Y)  # g(Y'', Y)
        out = (-np.einsum("...a,...b->...ab", Ypp, gY)
               - np.einsum("...a,...b->...ab", Y, gYpp)
               - c[..., None, None] * np.einsum("...a,...b->...ab", Y, gY))
        for j, kj in enumerate(extra_k):
            out[..., 2 + j, 2 + j] = -kj
        return out

    R = CallablePath(R_val, shape=(n, n))
    Y = CallablePath(Y_val, dfn=Y_deriv, shape=(n,))
    return _finalize(g, np.eye(n), R, Y,
                     f"tilted(n={n}, a_cos={a_cos.tolist()}, a_sin={a_sin.tolist()})")


def boosted(n=2, rate=0.5, hill=False):
    """Hyperbolic-modulo-Y system: T a g-boost, Y of constant drifting rapidity.

    Y(t) = (cosh(b t), sinh(b t)) with b = -rate, T the boost by rate, and
    R V = rate^2 g(V,Y)/g(Y,Y) Y.  The flow restricted transversally to
    (Y, Y') has exponents exp(+-sqrt(3) rate); the remaining unit eigenvalue
    1 sits on a single Jordan block through (Y(0), Y'(0)).

    With hill=True on n >= 3 the spare coordinates carry a Hill block
    q(t) = pi^2 (1 + 2 cos(2 pi t)) inside an instability tongue, giving a
    hyperbolic-modulo-Y system with positive index.
    """
    b = -float(rate)
    g = _minkowski(n)
    T = np.eye(n)
    c, s = np.cosh(rate), np.sinh(rate)
    T[0:2, 0:2] = [[c, s], [s, c]]

    def Y_val(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(np.shape(t) + (n,))
        out[..., 0] = np.cosh(b * t)
        out[..., 1] = np.sinh(b * t)
        return out

    def Y_deriv(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(np.shape(t) + (n,))
        out[..., 0] = b * np.sinh(b * t)
        out[..., 1] = b * np.cosh(b * t)
        return out

    def R_val(t):
        t = np.asarray(t, dtype=float)
        Y = Y_val(t)
        gY = Y @ g
        # g(Y, Y) = -1, so R V = -b^2 g(V, Y) Y
        out = -b * b * np.einsum("...a,...b->...ab", Y, gY)
        if hill:
            q = np.pi ** 2 * (1.0 + 2.0 * np.cos(TWO_PI * t))
            for j in range(2, n):
                out[..., j, j] = -q
        return out

    label = f"boosted(n={n}, rate={rate}" + (", hill)" if hill else ")")
    return _finalize(g, T, CallablePath(R_val, shape=(n, n)),
                     CallablePath(Y_val, dfn=Y_deriv, shape=(n,)), label)


def seeded_tilted(seed=0, n=2):
    """A reproducible tilted instance with coefficients drawn from a seed."""
    rng = np.random.default_rng(seed)
    a_cos = rng.uniform(-0.45, 0.45, size=int(rng.integers(1, 3)))
    a_sin = rng.uniform(-0.45, 0.45, size=int(rng.integers(1, 3)))
    extra_k = tuple(rng.uniform(15.0, 60.0, size=n - 2))
    return tilted(n, a_cos, a_sin, extra_k=extra_k)


_REGISTRY = {
    "flat": flat,
    "oscillator": oscillator,
    "static_product": static_product,
    "tilted": tilted,
    "seeded_tilted": seeded_tilted,
    "boosted": boosted,
}


def generate(name, **kwargs):
    """Build a named generator; used by the command line interface."""
    if name not in _REGISTRY:
        raise KeyError(f"unknown generator '{name}' (have {sorted(_REGISTRY)})")
    return _REGISTRY[name](**kwargs)
