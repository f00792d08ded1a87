"""Small numerical kernels: branch-series summation, quadrature, 1-D search."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .exceptions import ToleranceNotReachedError

HARD_CAP = 10**7

# number of terms summed directly before the first tail estimate
_FIRST_BLOCK = 64
_TAIL_NODES = 32
_BLOCK = 1 << 16

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@lru_cache(maxsize=None)
def gauss_legendre(q: int):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    t, w = np.polynomial.legendre.leggauss(q)
    nodes, weights = 0.5 * (t + 1.0), 0.5 * w
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def vectorized(f):
    """Wrap a scalar or array callable so it maps float arrays to float arrays."""

    def call(x):
        x = np.asarray(x, dtype=float)
        try:
            out = np.asarray(f(x), dtype=float)
        except (TypeError, ValueError):
            out = None
        if out is None or out.shape not in (x.shape, ()):
            out = np.array([float(f(v)) for v in x.ravel()]).reshape(x.shape)
        return np.broadcast_to(out, x.shape)

    return call


def _sum_desc(block):
    # block is ordered by increasing index; add the small (late) terms first
    if block.ndim == 1:
        return math.fsum(block[::-1])
    return np.sum(block[::-1], axis=0)


def _tail(psi, x, start):
    """Euler-Maclaurin estimate of sum_{i > start} psi(i).

    Midpoint form: integral from start + 1/2 to infinity plus psi'(start+1/2)/24.
    The integral is taken in s = 1/(x+y), which turns the algebraic decay of
    psi into a smooth integrand on a short interval.
    """
    a = start + 0.5
    s0 = 1.0 / (x + a)
    nodes, weights = gauss_legendre(_TAIL_NODES)
    s = s0 * nodes
    vals = psi(1.0 / s - x)
    w = (s0 * weights / s**2).reshape((-1,) + (1,) * (vals.ndim - 1))
    integral = np.sum(w * vals, axis=0)
    ends = psi(np.array([float(start), float(start + 1)]))
    return integral + (ends[1] - ends[0]) / 24.0


def branch_series(psi, first: int, x: float, tol: float, cap: int = HARD_CAP):
    """Sum psi(i) over integers i >= first, to absolute accuracy ``tol``.

    ``psi`` takes a float array of (possibly non-integer) indices and returns
    an array whose leading axis matches; trailing axes are summed
    independently.  The direct sum is extended in doubling blocks until two
    successive tail-corrected totals agree within ``tol``.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    last = first + _FIRST_BLOCK - 1
    sums = [_sum_desc(psi(np.arange(first, last + 1, dtype=float)))]
    prev = _sum_desc(np.asarray(sums)) + _tail(psi, x, last)
    while True:
        new_last = first + 2 * (last - first + 1) - 1
        if new_last - first + 1 > cap:
            raise ToleranceNotReachedError(
                f"branch series did not reach tol={tol:g} within {cap} terms")
        for lo in range(last + 1, new_last + 1, _BLOCK):
            hi = min(lo + _BLOCK - 1, new_last)
            sums.append(_sum_desc(psi(np.arange(lo, hi + 1, dtype=float))))
        last = new_last
        cur = _sum_desc(np.asarray(sums)) + _tail(psi, x, last)
        if np.max(np.abs(cur - prev)) < tol:
            return cur
        prev = cur


def golden_section_max(f, a: float, b: float, xtol: float = 1e-12, max_iter: int = 200):
    """Maximise a unimodal ``f`` on [a, b]; returns (x, f(x))."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while b - a > xtol and it < max_iter:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        it += 1
    x = 0.5 * (a + b)
    return x, f(x)


def scan_then_golden_max(f, a: float, b: float, points: int = 1024, xtol: float = 1e-12):
    """Global-ish maximiser: a uniform scan followed by golden-section refinement.

    ``f`` must accept arrays for the scan.  The refinement runs on the
    bracket formed by the best scan point and its two neighbours.
    """
    xs = np.linspace(a, b, points)
    vals = np.asarray(f(xs), dtype=float)
    k = int(np.argmax(vals))
    lo, hi = xs[max(k - 1, 0)], xs[min(k + 1, points - 1)]
    x, fx = golden_section_max(lambda z: float(f(z)), lo, hi, xtol=xtol)
    if vals[k] > fx:
        return float(xs[k]), float(vals[k])
    return x, fx
