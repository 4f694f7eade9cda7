"""Intraday volatility shapes and their time-change integrals.

A shape is a positive function sigma(u) on [0, 1]. Its cumulative squared
integral G(t) = int_0^t sigma^2(u) du is the Brownian clock used to
simulate Ito integrals exactly: non-overlapping increments of the
integral process are independent Gaussians with variances G(t_k) -
G(t_{k-1}).

The named shapes carry closed-form G; arbitrary shapes fall back to
adaptive quadrature. All shapes are small frozen dataclasses so scenario
configurations can cross process boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import ConfigError

__all__ = [
    "VolatilityShape",
    "FlatShape",
    "SlopeShape",
    "SineShape",
    "UShape",
    "CustomShape",
    "named_shape",
    "time_change_integral",
    "NAMED_SHAPES",
]

_VALIDATION_GRID = np.linspace(0.0, 1.0, 1000)


class VolatilityShape:
    """Base class; subclasses provide ``sigma`` and optionally ``cumulative``."""

    name: str = "shape"

    def sigma(self, u):
        raise NotImplementedError

    def cumulative(self, t):
        """G(t) = int_0^t sigma^2; adaptive quadrature fallback."""
        scalar = np.isscalar(t)
        ts = np.atleast_1d(np.asarray(t, dtype=np.float64))
        out = np.empty_like(ts)
        for i, ti in enumerate(ts):
            val, _ = quad(lambda u: self.sigma(u) ** 2, 0.0, ti, epsabs=1e-12, epsrel=1e-12, limit=200)
            out[i] = val
        return float(out[0]) if scalar else out

    def total_variance(self) -> float:
        """G(1), the total squared volatility of the day."""
        return float(self.cumulative(1.0))

    def validate(self) -> None:
        vals = np.asarray(self.sigma(_VALIDATION_GRID), dtype=np.float64)
        if vals.shape != _VALIDATION_GRID.shape:
            raise ConfigError(f"shape {self.name!r}: sigma must be vectorized over u")
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0.0):
            bad = _VALIDATION_GRID[~(np.isfinite(vals) & (vals > 0.0))][0]
            raise ConfigError(f"shape {self.name!r}: sigma(u) must be positive, fails near u={bad:.4f}")


@dataclass(frozen=True)
class FlatShape(VolatilityShape):
    """Constant volatility sigma(u) = level."""

    level: float = 0.2
    name = "flat"

    def sigma(self, u):
        return np.full_like(np.asarray(u, dtype=np.float64), self.level)

    def cumulative(self, t):
        return self.level**2 * np.asarray(t, dtype=np.float64)


@dataclass(frozen=True)
class SlopeShape(VolatilityShape):
    """Linearly increasing volatility sigma(u) = intercept + slope * u."""

    intercept: float = 0.1
    slope: float = 0.2
    name = "slope"

    def sigma(self, u):
        return self.intercept + self.slope * np.asarray(u, dtype=np.float64)

    def cumulative(self, t):
        t = np.asarray(t, dtype=np.float64)
        a, b = self.intercept, self.slope
        if b == 0.0:
            return a**2 * t
        return ((a + b * t) ** 3 - a**3) / (3.0 * b)


@dataclass(frozen=True)
class SineShape(VolatilityShape):
    """One-period sine profile sigma(u) = amplitude * sin(2 pi u) + level."""

    amplitude: float = 0.1
    level: float = 0.2
    name = "sine"

    def sigma(self, u):
        return self.amplitude * np.sin(2.0 * math.pi * np.asarray(u, dtype=np.float64)) + self.level

    def cumulative(self, t):
        t = np.asarray(t, dtype=np.float64)
        a, c = self.amplitude, self.level
        return (
            a**2 * (t / 2.0 - np.sin(4.0 * math.pi * t) / (8.0 * math.pi))
            + a * c * (1.0 - np.cos(2.0 * math.pi * t)) / math.pi
            + c**2 * t
        )


@dataclass(frozen=True)
class UShape(VolatilityShape):
    """Smile profile sigma(u) = (u - 1/2)^2 + offset, high at open and close."""

    offset: float = 0.1145299
    name = "ushape"

    def sigma(self, u):
        return (np.asarray(u, dtype=np.float64) - 0.5) ** 2 + self.offset

    def cumulative(self, t):
        t = np.asarray(t, dtype=np.float64)
        c = self.offset
        return (
            ((t - 0.5) ** 5 + 0.5**5) / 5.0
            + 2.0 * c * ((t - 0.5) ** 3 + 0.5**3) / 3.0
            + c**2 * t
        )


@dataclass(frozen=True)
class CustomShape(VolatilityShape):
    """User-supplied positive volatility function; G(t) by quadrature.

    ``sigma_fn`` must be a top-level callable if the shape is to be used
    with multiprocessing.
    """

    sigma_fn: object
    label: str = "custom"

    @property
    def name(self):  # type: ignore[override]
        return self.label

    def sigma(self, u):
        u = np.asarray(u, dtype=np.float64)
        return np.asarray(self.sigma_fn(u), dtype=np.float64)


NAMED_SHAPES: dict[str, VolatilityShape] = {
    "flat": FlatShape(),
    "slope": SlopeShape(),
    "sine": SineShape(),
    "ushape": UShape(),
}


def named_shape(tag: str) -> VolatilityShape:
    """Look up one of the four catalog shapes by tag."""
    try:
        return NAMED_SHAPES[tag.lower()]
    except KeyError:
        raise ConfigError(
            f"unknown shape {tag!r}; available: {', '.join(sorted(NAMED_SHAPES))}"
        ) from None


def time_change_integral(shape: VolatilityShape):
    """Validated cumulative clock G for a shape: G(0) = 0, strictly increasing.

    Returns a vectorized callable evaluating G at arbitrary points of [0, 1].
    """
    shape.validate()
    return shape.cumulative
