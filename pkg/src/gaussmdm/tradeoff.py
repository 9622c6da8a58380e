"""Optimal noise trade-off, uncertainty bounds and optimality windows.

Everything here lives in the plane of the mean classical noise ``nu_cl`` and
the mean output noise ``nu_out`` (shot-noise units) at a fixed gain ``g``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

#: absolute tolerance on the trade-off residual and bound checks
CLASSIFY_TOL = 1e-9
#: default right edge for sampling the unbounded unity-gain curve
DEFAULT_NU_CL_CAP = 10.0


class Unbounded(enum.Enum):
    """Tag for an infinite quantity (unbounded window edge, infinite gain)."""

    UNBOUNDED = "inf"

    def __repr__(self) -> str:
        return "UNBOUNDED"


UNBOUNDED = Unbounded.UNBOUNDED

Extent = Union[float, Unbounded]


def _check_gain(g: float) -> float:
    g = float(g)
    if not (math.isfinite(g) and g > 0):
        raise ValueError(f"gain must be finite and positive, got {g}")
    return g


def _check_nu_cl(nu_cl: float) -> float:
    nu_cl = float(nu_cl)
    if not math.isfinite(nu_cl) or nu_cl < 1.0:
        raise ValueError(f"nu_cl must be >= 1, got {nu_cl}")
    return nu_cl


def tradeoff_nu_out(nu_cl: float, g: float) -> float:
    """Least output noise compatible with classical noise ``nu_cl`` at gain ``g``."""
    nu_cl = _check_nu_cl(nu_cl)
    g = _check_gain(g)
    return ((1 + g * g) * nu_cl - 2 * g * math.sqrt(nu_cl * nu_cl - 1)) / (g * g)


class UncertaintyBounds(NamedTuple):
    nu_cl_min: float
    nu_out_min: float
    product_min: float


def uncertainty_bounds(g: float) -> UncertaintyBounds:
    g = _check_gain(g)
    return UncertaintyBounds(1.0, abs(1 - g * g) / (g * g), 1.0)


@dataclass(frozen=True)
class OptimalityWindow:
    gain_squared: float
    nu_cl_min: float
    nu_cl_max: Extent
    nu_out_min: float
    nu_out_max: float

    @property
    def bounded(self) -> bool:
        return self.nu_cl_max is not UNBOUNDED

    def contains(self, nu_cl: float, nu_out: float, tol: float = CLASSIFY_TOL) -> bool:
        if nu_cl < self.nu_cl_min - tol:
            return False
        if self.bounded and nu_cl > self.nu_cl_max + tol:
            return False
        return self.nu_out_min - tol <= nu_out <= self.nu_out_max + tol


def window_for_gain_squared(g2: float) -> OptimalityWindow:
    """Optimality rectangle for gain ``sqrt(g2)``; computed from ``g2`` directly."""
    g2 = float(g2)
    if not (math.isfinite(g2) and g2 > 0):
        raise ValueError(f"gain squared must be finite and positive, got {g2}")
    nu_cl_max: Extent = UNBOUNDED if g2 == 1.0 else abs(1 + g2) / abs(1 - g2)
    return OptimalityWindow(
        gain_squared=g2,
        nu_cl_min=1.0,
        nu_cl_max=nu_cl_max,
        nu_out_min=abs(1 - g2) / g2,
        nu_out_max=(1 + g2) / g2,
    )


def optimality_window(g: float) -> OptimalityWindow:
    g = _check_gain(g)
    return window_for_gain_squared(g * g)


@dataclass(frozen=True)
class TradeoffPoint:
    nu_cl: float
    nu_out: float
    g: float


class PointClass(enum.Enum):
    FORBIDDEN = "forbidden"
    ON_OPTIMAL_CURVE = "on-optimal-curve"
    INSIDE_WINDOW_SUBOPTIMAL = "inside-window-suboptimal"
    OUTSIDE_WINDOW_SUBOPTIMAL = "outside-window-suboptimal"


def _frontier(nu_cl: float, win: OptimalityWindow, g: float) -> float:
    # Past the window edge the best achievable output noise stays at the
    # corner value (extra classical noise costs nothing on the output).
    if win.bounded and nu_cl > win.nu_cl_max:
        return win.nu_out_min
    return tradeoff_nu_out(max(nu_cl, 1.0), g)


def classify_point(pt: TradeoffPoint, tol: float = CLASSIFY_TOL) -> PointClass:
    """Place a point relative to the uncertainty bounds, curve and window.

    Points violating the uncertainty bounds, or lying strictly below the
    achievable frontier, are forbidden.  Boundaries are inclusive.
    """
    g = _check_gain(pt.g)
    nu_cl, nu_out = float(pt.nu_cl), float(pt.nu_out)
    lo = uncertainty_bounds(g)
    if (
        nu_cl < lo.nu_cl_min - tol
        or nu_out < lo.nu_out_min - tol
        or nu_cl * nu_out < lo.product_min - tol
    ):
        return PointClass.FORBIDDEN
    win = optimality_window(g)
    if nu_out < _frontier(nu_cl, win, g) - tol:
        return PointClass.FORBIDDEN
    in_range = not win.bounded or nu_cl <= win.nu_cl_max + tol
    if in_range and abs(nu_out - tradeoff_nu_out(max(nu_cl, 1.0), g)) <= tol:
        return PointClass.ON_OPTIMAL_CURVE
    if win.contains(nu_cl, nu_out, tol):
        return PointClass.INSIDE_WINDOW_SUBOPTIMAL
    return PointClass.OUTSIDE_WINDOW_SUBOPTIMAL


def curve_sample(g: float, n: int, nu_cl_cap: float = DEFAULT_NU_CL_CAP) -> list[TradeoffPoint]:
    """``n`` points of the optimal curve, uniform in ``nu_cl`` across the window.

    For ``g = 1`` the window has no right edge and ``nu_cl_cap`` is used.
    """
    g = _check_gain(g)
    if n < 2:
        raise ValueError("need at least two points")
    win = optimality_window(g)
    hi = win.nu_cl_max if win.bounded else float(nu_cl_cap)
    if hi < 1.0:
        raise ValueError("nu_cl_cap must be >= 1")
    return [TradeoffPoint(float(v), tradeoff_nu_out(v, g), g) for v in np.linspace(1.0, hi, n)]


def optimal_curve_sample(n: int, nu_cl_cap: float = DEFAULT_NU_CL_CAP) -> list[tuple[float, float]]:
    """Gain-optimized envelope ``nu_out = 1/nu_cl`` on ``[1, nu_cl_cap]``."""
    if n < 2:
        raise ValueError("need at least two points")
    return [(float(v), 1.0 / float(v)) for v in np.linspace(1.0, nu_cl_cap, n)]
