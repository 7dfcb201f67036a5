"""Time-dependent matrix and vector paths on [0, 1].

Three interchangeable representations (constant, trigonometric polynomial,
uniform samples with spline interpolation) plus an internal callable form
used by the generators.  All paths evaluate vectorized over arrays of t.
"""

from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicSpline


def _expand(t, ndim):
    """Append ndim trailing singleton axes to t."""
    return np.reshape(t, np.shape(t) + (1,) * ndim)


class Path:
    """Base class: a map t in [0,1] -> real array of fixed shape."""

    shape: tuple

    def __call__(self, t):
        raise NotImplementedError

    def deriv(self, t):
        raise NotImplementedError

    def to_json(self):
        raise NotImplementedError


class ConstantPath(Path):
    def __init__(self, value):
        self.value = np.asarray(value, dtype=float)
        self.shape = self.value.shape

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(self.value, t.shape + self.shape).copy()

    def deriv(self, t):
        t = np.asarray(t, dtype=float)
        return np.zeros(t.shape + self.shape)

    def to_json(self):
        return {"type": "constant", "value": self.value.tolist()}


class TrigPath(Path):
    """const + sum_j cos(2 pi j t) C_j + sin(2 pi j t) S_j, j = 1..J."""

    def __init__(self, const, cos_coeffs=(), sin_coeffs=()):
        self.const = np.asarray(const, dtype=float)
        self.cos_coeffs = [np.asarray(c, dtype=float) for c in cos_coeffs]
        self.sin_coeffs = [np.asarray(s, dtype=float) for s in sin_coeffs]
        self.shape = self.const.shape
        if len(self.cos_coeffs) != len(self.sin_coeffs):
            raise ValueError("cos and sin coefficient lists must have equal length")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.broadcast_to(self.const, t.shape + self.shape).copy()
        for j, (c, s) in enumerate(zip(self.cos_coeffs, self.sin_coeffs), start=1):
            w = 2.0 * np.pi * j
            out += _expand(np.cos(w * t), len(self.shape)) * c
            out += _expand(np.sin(w * t), len(self.shape)) * s
        return out

    def deriv(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape + self.shape)
        for j, (c, s) in enumerate(zip(self.cos_coeffs, self.sin_coeffs), start=1):
            w = 2.0 * np.pi * j
            out += _expand(-w * np.sin(w * t), len(self.shape)) * c
            out += _expand(w * np.cos(w * t), len(self.shape)) * s
        return out

    def to_json(self):
        return {
            "type": "trig",
            "const": self.const.tolist(),
            "cos": [c.tolist() for c in self.cos_coeffs],
            "sin": [s.tolist() for s in self.sin_coeffs],
        }


class SampledPath(Path):
    """Uniform samples on [0, 1] with cubic (default) or linear interpolation.

    Linear interpolation is accepted for merely-continuous data; callers may
    flag it as reduced accuracy.
    """

    def __init__(self, values, interpolation="cubic", deriv_values=None):
        self.values = np.asarray(values, dtype=float)
        if self.values.shape[0] < 2:
            raise ValueError("need at least 2 samples")
        self.grid = np.linspace(0.0, 1.0, self.values.shape[0])
        self.shape = self.values.shape[1:]
        self.interpolation = interpolation
        self.deriv_values = None
        if interpolation == "cubic":
            self._spline = CubicSpline(self.grid, self.values, axis=0)
            self._dspline = self._spline.derivative()
        elif interpolation == "linear":
            self._spline = None
        else:
            raise ValueError(f"unknown interpolation rule {interpolation!r}")
        if deriv_values is not None:
            self.deriv_values = np.asarray(deriv_values, dtype=float)
            if self.deriv_values.shape != self.values.shape:
                raise ValueError("derivative samples must match value samples")
            if interpolation == "cubic":
                self._dspline = CubicSpline(self.grid, self.deriv_values, axis=0)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self._spline is not None:
            return self._spline(t)
        return self._linear(self.values, t)

    def deriv(self, t):
        t = np.asarray(t, dtype=float)
        if self.interpolation == "cubic":
            return self._dspline(t)
        if self.deriv_values is not None:
            return self._linear(self.deriv_values, t)
        # piecewise-constant slope of the linear interpolant
        h = self.grid[1] - self.grid[0]
        idx = np.clip((t / h).astype(int), 0, len(self.grid) - 2)
        return (self.values[idx + 1] - self.values[idx]) / h

    def _linear(self, vals, t):
        h = self.grid[1] - self.grid[0]
        idx = np.clip((t / h).astype(int), 0, len(self.grid) - 2)
        w = _expand((t - self.grid[idx]) / h, len(self.shape))
        return (1.0 - w) * vals[idx] + w * vals[idx + 1]

    def to_json(self):
        out = {
            "type": "samples",
            "values": self.values.tolist(),
            "interpolation": self.interpolation,
        }
        if self.deriv_values is not None:
            out["deriv_values"] = self.deriv_values.tolist()
        return out


class CallablePath(Path):
    """Closed-form path given by python callables (generator internal).

    Serializes by dense sampling; not part of the external problem schema.
    """

    def __init__(self, fn, dfn=None, shape=None, samples=2048):
        self.fn = fn
        self.dfn = dfn
        self.samples = samples
        probe = np.asarray(fn(0.0), dtype=float)
        self.shape = probe.shape if shape is None else shape

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if t.ndim == 0:
            return np.asarray(self.fn(float(t)), dtype=float)
        flat = [np.asarray(self.fn(float(x)), dtype=float) for x in t.ravel()]
        return np.asarray(flat).reshape(t.shape + self.shape)

    def deriv(self, t):
        if self.dfn is None:
            # 5-point central difference fallback
            t = np.asarray(t, dtype=float)
            h = 1e-5
            return (
                8.0 * (self(t + h) - self(t - h)) - (self(t + 2 * h) - self(t - 2 * h))
            ) / (12.0 * h)
        t = np.asarray(t, dtype=float)
        if t.ndim == 0:
            return np.asarray(self.dfn(float(t)), dtype=float)
        flat = [np.asarray(self.dfn(float(x)), dtype=float) for x in t.ravel()]
        return np.asarray(flat).reshape(t.shape + self.shape)

    def to_json(self):
        grid = np.linspace(0.0, 1.0, self.samples + 1)
        out = {
            "type": "samples",
            "values": self(grid).tolist(),
            "interpolation": "cubic",
        }
        if self.dfn is not None:
            out["deriv_values"] = self.deriv(grid).tolist()
        return out


def path_from_json(obj, expect_ndim):
    """Build a path from its JSON description.

    expect_ndim: 1 for vector paths (Y), 2 for matrix paths (R).
    """
    kind = obj.get("type")
    if kind == "constant":
        value = np.asarray(obj["value"], dtype=float)
        if value.ndim != expect_ndim:
            raise ValueError(f"constant path has ndim {value.ndim}, expected {expect_ndim}")
        return ConstantPath(value)
    if kind == "trig":
        return TrigPath(obj["const"], obj.get("cos", ()), obj.get("sin", ()))
    if kind == "samples":
        return SampledPath(
            obj["values"],
            interpolation=obj.get("interpolation", "cubic"),
            deriv_values=obj.get("deriv_values"),
        )
    raise ValueError(f"unknown path type {kind!r}")
