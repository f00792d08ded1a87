"""Perron-Frobenius operator of R_N under its invariant measure.

    U f(x) = sum_{i >= N} P_i(x) f(u_i(x)),
    P_i(x) = (x + N - 1) / ((x + i)(x + i - 1)),   u_i(x) = 1 - N / (x + i),

and the operator V with (U f)' = -V f'.  Pointwise versions accept any
callable; grid versions act on :class:`~renyi_gkl.grid.GridFunction` through
a cached matrix built from the cardinal functions of the grid.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from ._numerics import HARD_CAP, branch_series, gauss_legendre, vectorized
from .cf_core import ParamsLike, as_params
from .grid import GridFunction, cardinal_matrix, chebyshev_nodes

__all__ = [
    "branch_weight",
    "inverse_branch",
    "pf_apply_point",
    "pf_apply_grid",
    "pf_lebesgue_apply_point",
    "pf_iterate",
    "v_apply_point",
    "v_apply_grid",
    "derivative_identity_check",
    "derivative_identity_residual",
    "transported_measure",
    "transfer_matrix",
    "v_matrix",
]

DEFAULT_TOL = 1e-12

# smallest Gauss-Legendre rule used per branch interval inside V
_V_QUAD = 16
_V_QUAD_MAX = 256


def branch_weight(params: ParamsLike, i, x):
    """P_i(x) = (x+N-1) / ((x+i)(x+i-1))."""
    N = as_params(params).N
    x = np.asarray(x, dtype=float)
    return (x + N - 1) / ((x + i) * (x + i - 1))


def inverse_branch(params: ParamsLike, i, x):
    """u_i(x) = 1 - N/(x+i), the preimage of x lying in the i-th branch."""
    N = as_params(params).N
    x = np.asarray(x, dtype=float)
    return 1.0 - N / (x + i)


def _u_terms(N, f, x):
    c = x + N - 1

    def psi(y):
        z = x + y
        vals = f(1.0 - N / z)
        w = c / (z * (z - 1.0))
        return w.reshape((-1,) + (1,) * (vals.ndim - 1)) * vals

    return psi


def pf_lebesgue_apply_point(params: ParamsLike, f, x: float, tol: float = DEFAULT_TOL,
                            cap: int = HARD_CAP) -> float:
    """Perron-Frobenius operator of R_N under Lebesgue measure.

    sum_{i>=N} N/(x+i)^2 f(u_i(x)).  It fixes the invariant density, and
    U f = L(f nu) / nu relates it to the operator under the invariant measure.
    """
    p = as_params(params)
    x = float(x)
    if not np.isfinite(x) or x <= 1.0 - p.N:
        raise ValueError(f"x must be finite and > 1 - N, got {x}")
    fv = vectorized(f)
    N = p.N

    def psi(y):
        z = x + y
        return (N / z**2) * fv(1.0 - N / z)

    return float(branch_series(psi, N, x, tol, cap))


def pf_apply_point(params: ParamsLike, f, x: float, tol: float = DEFAULT_TOL,
                   cap: int = HARD_CAP) -> float:
    """Evaluate (U f)(x) for a callable ``f`` smooth near 1.

    The series is summed directly over i = N..I and the remainder replaced by
    its Euler-Maclaurin estimate; I doubles until consecutive totals agree
    within ``tol``.
    """
    p = as_params(params)
    x = float(x)
    if not np.isfinite(x) or x <= 1.0 - p.N:
        raise ValueError(f"x must be finite and > 1 - N, got {x}")
    psi = _u_terms(p.N, vectorized(f), x)
    return float(branch_series(psi, p.N, x, tol, cap))


@lru_cache(maxsize=32)
def transfer_matrix(N: int, degree: int, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Matrix of U on the degree-``degree`` grid: row j gives (U l_k)(node_j)."""
    nodes = chebyshev_nodes(degree)
    basis = lambda u: cardinal_matrix(degree, u)  # noqa: E731
    rows = [branch_series(_u_terms(N, basis, float(x)), N, float(x), tol)
            for x in nodes]
    M = np.array(rows)
    M.setflags(write=False)
    return M


def pf_apply_grid(f: GridFunction, tol: float = DEFAULT_TOL) -> GridFunction:
    """Apply U nodewise; interpolation carries the result between nodes."""
    M = transfer_matrix(f.params.N, f.degree, tol)
    return f.with_values(M @ f.values)


def pf_iterate(f: GridFunction, n: int, tol: float = DEFAULT_TOL):
    """List ``[f, U f, ..., U^n f]``."""
    M = transfer_matrix(f.params.N, f.degree, tol)
    out = [f]
    for _ in range(n):
        out.append(out[-1].with_values(M @ out[-1].values))
    return out


def _interval_integrals(g, a, b, q):
    nodes, weights = gauss_legendre(q)
    h = b - a
    pts = a[:, None] + h[:, None] * nodes[None, :]
    vals = g(pts.ravel())
    vals = vals.reshape(pts.shape + vals.shape[1:])
    wts = (h[:, None] * weights[None, :]).reshape(pts.shape + (1,) * (vals.ndim - 2))
    return np.sum(wts * vals, axis=1)


def _v_terms(N, g, x, tol, quad=None):
    c = x + N - 1

    def psi(y):
        z = x + y
        a = 1.0 - N / z
        b = 1.0 - N / (z + 1.0)
        coef = (y + 1.0 - N) / z**2
        if quad is not None:
            integ = _interval_integrals(g, a, b, quad)
        else:
            # raise the rule until doubling it stops mattering
            q = _V_QUAD
            integ = _interval_integrals(g, a, b, q)
            while q < _V_QUAD_MAX:
                finer = _interval_integrals(g, a, b, 2 * q)
                err = np.abs(finer - integ)
                err = err.reshape(err.shape[0], -1).max(axis=1)
                q *= 2
                integ = finer
                if np.sum(coef * err) < tol / 10:
                    break
        gu = g(a)
        w2 = N * c / ((z - 1.0) * z**3)
        shape = (-1,) + (1,) * (integ.ndim - 1)
        return -(coef.reshape(shape) * integ + w2.reshape(shape) * gu)

    return psi


def v_apply_point(params: ParamsLike, g, x: float, tol: float = DEFAULT_TOL,
                  cap: int = HARD_CAP) -> float:
    """Evaluate (V g)(x).

    V g(x) = -sum_{i>=N} [ (i+1-N)/(x+i)^2 * int_{u_i(x)}^{u_{i+1}(x)} g
                           + N(x+N-1)/((x+i-1)(x+i)^3) * g(u_i(x)) ]

    Branch integrals use Gauss-Legendre rules from 16 points upward.
    """
    p = as_params(params)
    x = float(x)
    if not np.isfinite(x) or x <= 1.0 - p.N:
        raise ValueError(f"x must be finite and > 1 - N, got {x}")
    psi = _v_terms(p.N, vectorized(g), x, tol)
    return float(branch_series(psi, p.N, x, tol, cap))


@lru_cache(maxsize=32)
def v_matrix(N: int, degree: int, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Matrix of V on the grid.

    Cardinal functions are polynomials of degree ``degree``, so a
    Gauss-Legendre rule with degree//2 + 1 points integrates them exactly.
    """
    nodes = chebyshev_nodes(degree)
    basis = lambda u: cardinal_matrix(degree, u)  # noqa: E731
    q = degree // 2 + 1
    rows = [branch_series(_v_terms(N, basis, float(x), tol, quad=q), N, float(x), tol)
            for x in nodes]
    M = np.array(rows)
    M.setflags(write=False)
    return M


def v_apply_grid(g: GridFunction, tol: float = DEFAULT_TOL) -> GridFunction:
    M = v_matrix(g.params.N, g.degree, tol)
    return g.with_values(M @ g.values)


def derivative_identity_residual(params: ParamsLike, f, f_prime, x: float,
                                 h: float = 1e-5, series_tol: float = 1e-13) -> float:
    """|central difference of U f at x  +  V f'(x)|."""
    lhs = (pf_apply_point(params, f, x + h, series_tol)
           - pf_apply_point(params, f, x - h, series_tol)) / (2.0 * h)
    rhs = -v_apply_point(params, f_prime, x, series_tol)
    return abs(lhs - rhs)


def derivative_identity_check(params: ParamsLike, f, f_prime, x: float,
                              h: float = 1e-5, tol: float = 1e-6) -> bool:
    """Whether (U f)'(x) = -(V f')(x) holds within ``tol``."""
    return derivative_identity_residual(params, f, f_prime, x, h) < tol


def transported_measure(params: ParamsLike, f0: GridFunction, n: int, A=(0.0, 1.0),
                        tol: float = DEFAULT_TOL) -> float:
    """mu(R_N^{-n}(A)) for A = [a, b], given f0 = log(N/(N-1)) (x+N-1) h.

    Integrates U^n f0 against the invariant density over A.
    """
    p = as_params(params)
    a, b = float(A[0]), float(A[1])
    if not (0.0 <= a <= b <= 1.0):
        raise ValueError(f"A must be a subinterval of [0, 1], got {A}")
    fn = pf_iterate(f0, n, tol)[-1] if n else f0
    weighted = fn.with_values(fn.values / (p.logK * (fn.nodes + p.N - 1)))
    return weighted.integral(a, b)
