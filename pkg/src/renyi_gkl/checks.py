"""Battery of operator identities, reported as residuals against thresholds."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .cf_core import as_params, invariant_density
from .grid import DEFAULT_DEGREE, GridFunction, chebyshev_nodes
from .transfer_op import (
    derivative_identity_residual,
    pf_apply_point,
    pf_lebesgue_apply_point,
    v_apply_point,
    v_matrix,
)
from .wirsing import certify, g_func, h_func, phi_func, v_phi_closed

__all__ = ["CheckResult", "DERIVATIVE_BATTERY", "run_identity_suite", "power_sandwich_slack"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    threshold: float
    passed: bool

    def to_dict(self):
        return asdict(self)


# (name, f, f') pairs for the derivative identity
DERIVATIVE_BATTERY = (
    ("x", lambda x: x, lambda x: np.ones_like(x)),
    ("x^2", lambda x: x**2, lambda x: 2.0 * x),
    ("sin x", np.sin, np.cos),
    ("1/(x+1)", lambda x: 1.0 / (x + 1.0), lambda x: -1.0 / (x + 1.0) ** 2),
)


def power_sandwich_slack(cert, powers=(1, 2, 3), points: int = 51,
                         degree: int = DEFAULT_DEGREE, tol: float = 1e-12):
    """Smallest slack of v^n (-phi) <= (-1)^(n+1) V^n phi <= w^n (-phi).

    V^n phi is obtained by repeated application of V on the Chebyshev grid.
    Returns a dict power -> (lower slack, upper slack).
    """
    N = cert.N
    phi = GridFunction.from_function(N, cert.phi, degree)
    M = v_matrix(N, degree, tol)
    xs = np.linspace(0.0, 1.0, points)
    neg_phi = -cert.phi(xs)
    out = {}
    vals = phi.values
    for n in range(1, max(powers) + 1):
        vals = M @ vals
        if n in powers:
            mid = (-1) ** (n + 1) * phi.with_values(vals)(xs)
            out[n] = (float(np.min(mid - cert.v**n * neg_phi)),
                      float(np.min(cert.w**n * neg_phi - mid)))
    return out


def run_identity_suite(N: int, tolerance: float = 1e-12, degree: int = DEFAULT_DEGREE):
    """Run every identity check for parameter N.

    ``tolerance`` is the series tolerance of the pointwise operators; no
    threshold is allowed to drop below it.
    """
    p = as_params(N)
    floor = tolerance
    results = []

    def add(name, residual, threshold, slack=False):
        threshold = max(threshold, floor)
        passed = residual >= -threshold if slack else residual < threshold
        results.append(CheckResult(name, float(residual), float(threshold), bool(passed)))

    nodes = chebyshev_nodes(degree)
    res = max(abs(pf_apply_point(p, lambda x: 1.0, x, tolerance) - 1.0) for x in nodes)
    add("U1 = 1 at grid nodes", res, 1e-12)

    xs = np.linspace(0.0, 1.0, 100)
    nu = lambda x: invariant_density(p, x)  # noqa: E731
    res = max(abs(pf_lebesgue_apply_point(p, nu, x, tolerance) - nu(x)) for x in xs)
    add("U nu = nu (Lebesgue transfer operator)", res, 1e-10)

    cert = certify(p.N)
    e, t = cert.e, cert.t
    xs = np.linspace(0.0, 1.0, 10)
    g = lambda u: g_func(p.N, e, t, u)  # noqa: E731
    res = max(abs(pf_apply_point(p, g, x, tolerance) - h_func(p.N, e, t, x)) for x in xs)
    add("U g = h", res, 1e-9)

    xs = np.linspace(0.0, 1.0, 22)[1:-1]
    res = max(derivative_identity_residual(p, f, fp, x)
              for _, f, fp in DERIVATIVE_BATTERY for x in xs)
    add("(U f)' = -V f'", res, 1e-6)

    xs = np.linspace(0.0, 1.0, 10)
    phi = lambda u: phi_func(p.N, e, t, u)  # noqa: E731
    res = max(abs(v_apply_point(p, phi, x, min(tolerance, 1e-10)) - v_phi_closed(p.N, e, t, x))
              for x in xs)
    add("V phi closed form = series", res, 1e-8)

    xs = np.linspace(0.0, 1.0, 1001)
    neg_phi = -cert.phi(xs)
    vphi = cert.v_phi(xs)
    slack = min(np.min(vphi - cert.v * neg_phi), np.min(cert.w * neg_phi - vphi))
    add("sandwich v(-phi) <= V phi <= w(-phi)", slack, 1e-12, slack=True)

    slacks = power_sandwich_slack(cert, degree=degree)
    add("power sandwich, n <= 3", min(min(s) for s in slacks.values()), 1e-6, slack=True)
    return results
