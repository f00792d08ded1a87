"""Functions on [0, 1] stored by their values at Chebyshev points.

Nodes are Chebyshev points of the second kind mapped to [0, 1] in increasing
order, so node 0 is 0 and the last node is 1.  Between nodes the function is
the polynomial interpolant, evaluated in barycentric form.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial import Chebyshev
from scipy.fft import dct

from .cf_core import as_params

__all__ = ["GridFunction", "chebyshev_nodes", "cardinal_matrix"]

DEFAULT_DEGREE = 64

_CHUNK = 1 << 14


@lru_cache(maxsize=None)
def _nodes_and_weights(degree):
    j = np.arange(degree + 1)
    nodes = 0.5 * (1.0 - np.cos(np.pi * j / degree))
    nodes[0], nodes[-1] = 0.0, 1.0
    w = np.where(j % 2 == 0, 1.0, -1.0)
    w[0] *= 0.5
    w[-1] *= 0.5
    nodes.setflags(write=False)
    w.setflags(write=False)
    return nodes, w


def chebyshev_nodes(degree: int) -> np.ndarray:
    """The ``degree + 1`` increasing Chebyshev-Lobatto points on [0, 1]."""
    if degree < 1:
        raise ValueError(f"degree must be >= 1, got {degree}")
    return _nodes_and_weights(degree)[0]


def cardinal_matrix(degree: int, x) -> np.ndarray:
    """Matrix ``L`` with ``L @ values`` equal to the interpolant at ``x``.

    Row ``r`` holds the Lagrange cardinal functions evaluated at ``x[r]``.
    A point that coincides with a node gets the corresponding unit row.
    """
    nodes, w = _nodes_and_weights(degree)
    x = np.asarray(x, dtype=float).ravel()
    out = np.empty((x.size, nodes.size))
    for lo in range(0, x.size, _CHUNK):
        xs = x[lo:lo + _CHUNK]
        diff = xs[:, None] - nodes[None, :]
        exact = diff == 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            k = w / diff
            block = k / k.sum(axis=1, keepdims=True)
        hit = exact.any(axis=1)
        if hit.any():
            block[hit] = exact[hit].astype(float)
        out[lo:lo + _CHUNK] = block
    return out


class GridFunction:
    """Immutable samples of a function at the Chebyshev nodes of [0, 1]."""

    __slots__ = ("params", "values", "_cheb")

    def __init__(self, params, values):
        values = np.array(values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("values must be a 1-D array with at least 2 entries")
        values.setflags(write=False)
        object.__setattr__(self, "params", as_params(params))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_cheb", None)

    def __setattr__(self, name, value):
        raise AttributeError("GridFunction is immutable")

    @classmethod
    def from_function(cls, params, f, degree: int = DEFAULT_DEGREE) -> "GridFunction":
        nodes = chebyshev_nodes(degree)
        vals = np.asarray(f(nodes), dtype=float)
        if vals.shape != nodes.shape:
            vals = np.array([float(f(x)) for x in nodes])
        return cls(params, vals)

    @classmethod
    def constant(cls, params, c: float = 1.0, degree: int = DEFAULT_DEGREE) -> "GridFunction":
        return cls(params, np.full(degree + 1, float(c)))

    @property
    def degree(self) -> int:
        return self.values.size - 1

    @property
    def nodes(self) -> np.ndarray:
        return chebyshev_nodes(self.degree)

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        out = cardinal_matrix(self.degree, arr) @ self.values
        if arr.ndim == 0:
            return float(out[0])
        return out.reshape(arr.shape)

    def __repr__(self):
        return f"GridFunction(N={self.params.N}, degree={self.degree})"

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.params, values)

    def chebyshev(self) -> Chebyshev:
        """Same interpolant as a Chebyshev series on the domain [0, 1]."""
        if self._cheb is None:
            n = self.degree
            # reversed values sit at cos(pi k / n), k = 0..n
            c = dct(self.values[::-1], type=1) / n
            c[0] *= 0.5
            c[-1] *= 0.5
            object.__setattr__(self, "_cheb", Chebyshev(c, domain=[0.0, 1.0]))
        return self._cheb

    def integral(self, a: float = 0.0, b=1.0):
        """Integral of the interpolant from ``a`` to ``b`` (``b`` may be an array)."""
        anti = self.chebyshev().integ(lbnd=a)
        out = anti(np.asarray(b, dtype=float))
        return float(out) if np.ndim(out) == 0 else out

    def derivative(self) -> "GridFunction":
        d = self.chebyshev().deriv()
        return GridFunction(self.params, d(self.nodes))
