"""Wirsing-type bracket for the contraction rate of V.

Trial family, for coefficients e > 0 and t in [0, 1]:

    h(x)   = 1 / (e x + t + 1)                      (so that U g = h)
    g(x)   = N/(eNx + (t+1)(1-x)) - (N-1+x)/(e(Nx+1-x) + (t+1)(1-x))
    phi    = g' < 0,        V phi(x) = e / (e x + t + 1)^2 > 0.

t is fixed by asking the ratio phi / V phi to take equal values at both
ends, which is the quartic H(t) = 0.  e is chosen so that t = 1/2 solves
the quartic.  The interior maximum m of the ratio then gives

    v = e^2 N / (2 (e + t + 1)^2) <= V phi / (-phi) <= -1/m = w.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import brentq

from ._numerics import scan_then_golden_max
from .exceptions import (
    CertificationError,
    ConditionViolationError,
    NoRootError,
    NoSignChangeError,
)

__all__ = [
    "WirsingCertificate",
    "h_func",
    "g_func",
    "phi_func",
    "v_phi_closed",
    "quartic_H",
    "quartic_dH",
    "solve_e",
    "solve_t",
    "ratio",
    "maximize_ratio",
    "certify",
    "round_bound",
]

E_MAX = 4.0

_ENDPOINT_RTOL = 1e-9
_SANDWICH_SLACK = 1e-12


def h_func(N, e, t, x):
    return 1.0 / (e * np.asarray(x, dtype=float) + t + 1.0)


def g_func(N, e, t, x):
    """Solution of U g = h, written in the rational form that is finite at x = 0."""
    x = np.asarray(x, dtype=float)
    s = t + 1.0
    return N / (e * N * x + s * (1.0 - x)) - (N - 1.0 + x) / (e * (N * x + 1.0 - x) + s * (1.0 - x))


def phi_func(N, e, t, x):
    """Derivative of :func:`g_func` in closed form."""
    x = np.asarray(x, dtype=float)
    s = t + 1.0
    k = e * N - s
    d1 = e * N * x + s * (1.0 - x)
    d2 = e * (N * x + 1.0 - x) + s * (1.0 - x)
    return -N * k / d1**2 - N * (2.0 * e - k) / d2**2


def _phi_prime(N, e, t, x):
    s = t + 1.0
    k = e * N - s
    d1 = e * N * x + s * (1.0 - x)
    d2 = e * (N * x + 1.0 - x) + s * (1.0 - x)
    return 2.0 * N * k * (e * N - s) / d1**3 + 2.0 * N * (2.0 * e - k) * (e * (N - 1.0) - s) / d2**3


def _ratio_prime(N, e, t, x):
    q = e * x + t + 1.0
    return (_phi_prime(N, e, t, x) * q**2 + 2.0 * e * phi_func(N, e, t, x) * q) / e


def v_phi_closed(N, e, t, x):
    """V applied to :func:`phi_func`, i.e. -h'."""
    x = np.asarray(x, dtype=float)
    return e / (e * x + t + 1.0) ** 2


def ratio(N, e, t, x):
    """phi / V phi; negative on [0, 1]."""
    return phi_func(N, e, t, x) / v_phi_closed(N, e, t, x)


def quartic_H(N, e, t):
    return 2.0 * (t + e + 1.0) ** 4 + e**3 * N**2 * (1.0 - 2.0 * N) * (t + 1.0) - e**4 * N**3


def quartic_dH(N, e, t):
    """dH/dt."""
    return 8.0 * (t + e + 1.0) ** 3 + e**3 * N**2 * (1.0 - 2.0 * N)


def _H_scale(N, e, t):
    return (2.0 * (t + e + 1.0) ** 4 + abs(e**3 * N**2 * (1.0 - 2.0 * N) * (t + 1.0))
            + e**4 * N**3)


def _check_conditions(N, e):
    failed = []
    if not quartic_H(N, e, 0.0) < 0:
        failed.append("H(0) < 0")
    if not quartic_H(N, e, 1.0) > 0:
        failed.append("H(1) > 0")
    ts = np.linspace(0.0, 1.0, 101)
    if not np.all(quartic_dH(N, e, ts) > 0):
        failed.append("dH/dt > 0 on [0, 1]")
    return failed


def solve_e(N: int, e_max: float = E_MAX) -> float:
    """Coefficient e for which t = 1/2 is the root of the quartic."""
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    f = lambda e: quartic_H(N, e, 0.5)  # noqa: E731
    if not f(0.0) > 0 > f(e_max):
        raise NoRootError(f"no sign change of H_{N}(1/2) in e on (0, {e_max}]")
    e = brentq(f, 0.0, e_max, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    failed = _check_conditions(N, e)
    if failed:
        raise ConditionViolationError(f"N={N}, e={e!r}: violated {', '.join(failed)}")
    return float(e)


def solve_t(N: int, e: float) -> float:
    """The unique root of H(t) = 0 in [0, 1]."""
    h0, h1 = quartic_H(N, e, 0.0), quartic_H(N, e, 1.0)
    if not (h0 < 0 < h1):
        raise NoSignChangeError(f"H_{N}(0)={h0:g}, H_{N}(1)={h1:g} with e={e!r}")
    t = brentq(lambda t: quartic_H(N, e, t), 0.0, 1.0,
               xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    if abs(quartic_H(N, e, t)) > 1e-13 * _H_scale(N, e, t):
        raise NoRootError(f"root residual too large at t={t!r}")
    return float(t)


def maximize_ratio(N, e, t, points: int = 1024, xtol: float = 1e-12):
    """Interior maximiser of :func:`ratio` on (0, 1); returns (x_max, m).

    Golden-section search locates the peak only to about sqrt(machine eps)
    because the ratio is flat there; the abscissa is then polished by a
    root search on the analytic derivative of the ratio.
    """
    eps = 1.0 / (points + 1)
    x, m = scan_then_golden_max(lambda x: ratio(N, e, t, x), eps, 1.0 - eps,
                                points=points, xtol=xtol)
    width = 2.0 * (1.0 - 2.0 * eps) / (points - 1)
    lo, hi = max(x - width, eps), min(x + width, 1.0 - eps)
    dlo, dhi = _ratio_prime(N, e, t, lo), _ratio_prime(N, e, t, hi)
    if dlo > 0 > dhi:
        xr = brentq(lambda z: _ratio_prime(N, e, t, z), lo, hi, xtol=1e-15)
        mr = float(ratio(N, e, t, xr))
        if mr >= m:
            return float(xr), mr
    return x, m


@dataclass(frozen=True)
class WirsingCertificate:
    N: int
    e: float
    t: float
    min_ratio: float
    m: float
    x_max: float
    v: float
    w: float

    def to_dict(self):
        return asdict(self)

    def phi(self, x):
        return phi_func(self.N, self.e, self.t, x)

    def v_phi(self, x):
        return v_phi_closed(self.N, self.e, self.t, x)


def certify(N: int, e: float | None = None, grid_points: int = 1001) -> WirsingCertificate:
    """Build and validate the rate bracket [v, w] for parameter N.

    With ``e`` omitted it comes from :func:`solve_e`.  Raises
    :class:`CertificationError` naming the first failed validation.
    """
    if e is None:
        e = solve_e(N)
    t = solve_t(N, e)
    min_ratio = -2.0 * (e + t + 1.0) ** 2 / (e**2 * N)
    r0, r1 = float(ratio(N, e, t, 0.0)), float(ratio(N, e, t, 1.0))
    if abs(r0 - r1) >= _ENDPOINT_RTOL * abs(r1):
        raise CertificationError(f"endpoint ratios differ: {r0!r} vs {r1!r}")
    if abs(r1 - min_ratio) >= _ENDPOINT_RTOL * abs(min_ratio):
        raise CertificationError(f"ratio(1)={r1!r} differs from closed form {min_ratio!r}")
    x_max, m = maximize_ratio(N, e, t)
    if not (min_ratio <= m < 0):
        raise CertificationError(f"interior maximum m={m!r} outside [{min_ratio!r}, 0)")
    v = e**2 * N / (2.0 * (e + t + 1.0) ** 2)
    w = -1.0 / m
    if not (0 < v < w < 1):
        raise CertificationError(f"bounds out of order: v={v!r}, w={w!r}")
    xs = np.linspace(0.0, 1.0, grid_points)
    phi = phi_func(N, e, t, xs)
    vphi = v_phi_closed(N, e, t, xs)
    if np.any(phi >= 0):
        raise CertificationError("phi is not strictly negative on the grid")
    lower = vphi - v * (-phi)
    upper = w * (-phi) - vphi
    if lower.min() < -_SANDWICH_SLACK or upper.min() < -_SANDWICH_SLACK:
        raise CertificationError(
            f"sandwich fails: lower slack {lower.min():.3g}, upper slack {upper.min():.3g}")
    return WirsingCertificate(N=int(N), e=float(e), t=t, min_ratio=float(min_ratio),
                              m=float(m), x_max=float(x_max), v=float(v), w=float(w))


def round_bound(value: float, digits: int, direction: str) -> float:
    """Round to ``digits`` decimals, down for lower bounds, up for upper ones."""
    scale = 10.0**digits
    if direction == "down":
        return math.floor(value * scale) / scale
    if direction == "up":
        return math.ceil(value * scale) / scale
    raise ValueError(f"direction must be 'down' or 'up', got {direction!r}")
