"""Gauss-Kuzmin-Levy experiments.

For an initial probability measure mu with density h, the distribution
function of R_N^n under mu is

    F_n(x) = mu(R_N^n < x) = int_0^x U^n f0(u) / (log(N/(N-1)) (u + N - 1)) du,
    f0(u)  = log(N/(N-1)) (u + N - 1) h(u),

and d_n(x) = F_n(x) - G_N(x) decays geometrically.  This module iterates U on
a Chebyshev grid, measures the decay, compares it with the certified bracket
and with a two-sided bound on |d_n|, and cross-checks against Monte Carlo.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from ._numerics import scan_then_golden_max
from .cf_core import ParamsLike, RenyiParams, as_params, invariant_cdf
from .exceptions import (
    DegenerateCurveError,
    InsufficientDataError,
    NonPositiveError,
    PositivityError,
)
from .grid import DEFAULT_DEGREE, GridFunction
from .transfer_op import pf_iterate
from .wirsing import WirsingCertificate, certify, phi_func

__all__ = [
    "InitialMeasure",
    "TheoremBound",
    "ExperimentReport",
    "cdf_after_n",
    "cdf_iterates",
    "error_curve",
    "decay_rate",
    "theorem_bound",
    "theorem_bound_check",
    "monte_carlo_cdf",
    "run_experiment",
    "ERROR_FLOOR",
    "DEFAULT_GRID",
]

# operator tolerance for experiments; must sit below ERROR_FLOOR
EXPERIMENT_TOL = 1e-15
ERROR_FLOOR = 1e-14
BURN_IN = 5
DEFAULT_GRID = np.linspace(0.0, 1.0, 257)

# Allowance added to the 1e-9 bound-check tolerance for the grid
# representation of U^n f0 (interpolation plus quadrature, ~1e-13 observed).
DISCRETIZATION_ALLOWANCE = 1e-12
BOUND_TOL = 1e-9


@dataclass(frozen=True)
class InitialMeasure:
    """An absolutely continuous starting measure, given by its density ``h``."""

    params: RenyiParams
    kind: str
    h: Callable
    h_prime: Optional[Callable] = None

    def f0(self, x):
        x = np.asarray(x, dtype=float)
        p = self.params
        return p.logK * (x + p.N - 1) * self.h(x)

    def f0_prime(self, x):
        if self.h_prime is None:
            raise ValueError("h_prime is required for the derivative of f0")
        x = np.asarray(x, dtype=float)
        p = self.params
        return p.logK * (self.h(x) + (x + p.N - 1) * self.h_prime(x))

    def grid(self, degree: int = DEFAULT_DEGREE) -> GridFunction:
        return GridFunction.from_function(self.params, self.f0, degree)

    @classmethod
    def uniform(cls, params: ParamsLike) -> "InitialMeasure":
        return cls(as_params(params), "uniform",
                   lambda x: np.ones_like(np.asarray(x, dtype=float)),
                   lambda x: np.zeros_like(np.asarray(x, dtype=float)))

    @classmethod
    def stationary(cls, params: ParamsLike) -> "InitialMeasure":
        p = as_params(params)
        return cls(p, "stationary",
                   lambda x: 1.0 / (p.logK * (np.asarray(x, dtype=float) + p.N - 1)),
                   lambda x: -1.0 / (p.logK * (np.asarray(x, dtype=float) + p.N - 1) ** 2))

    @classmethod
    def from_density(cls, params: ParamsLike, h, h_prime=None) -> "InitialMeasure":
        """Custom density; checked to be nonnegative with unit mass."""
        p = as_params(params)
        xs = np.linspace(0.0, 1.0, 1001)
        if np.any(np.asarray(h(xs)) < 0):
            raise ValueError("density must be nonnegative on [0, 1]")
        mass = quad(lambda u: float(h(u)), 0.0, 1.0, epsabs=1e-13, epsrel=1e-13)[0]
        if abs(mass - 1.0) > 1e-8:
            raise ValueError(f"density must integrate to 1, got {mass!r}")
        return cls(p, "custom-density", h, h_prime)


@dataclass(frozen=True)
class TheoremBound:
    """Two-sided envelope for |F_n(x) - G_N(x)|.

    alpha and beta are the min and max over [0, 1] of (-phi) / (f0)', with f0
    normalised as (x + N - 1) h so that the envelope constants apply as stated.
    """

    params: RenyiParams
    certificate: WirsingCertificate
    alpha: float
    beta: float
    f0p_min: float
    f0p_max: float

    def _scale(self, x):
        p = self.params
        G = invariant_cdf(p, x)
        return p.logK**2 * (p.N / 2.0) * G * (1.0 - G)

    def lower(self, x, n):
        return (self._scale(x) * (self.alpha / self.beta) * self.f0p_min
                * self.certificate.v**n)

    def upper(self, x, n):
        return (self._scale(x) * (self.beta / self.alpha) * self.f0p_max
                * self.certificate.w**n)


@dataclass(frozen=True)
class ExperimentReport:
    N: int
    n_max: int
    degree: int
    sup_errors: list
    rate_estimate: Optional[float]
    rate_note: str
    certificate: WirsingCertificate
    bound_violations: Optional[int]
    seed: Optional[int] = None
    mc_summary: Optional[dict] = None
    bracket: dict = field(default_factory=dict)

    @property
    def rate_in_bracket(self) -> Optional[bool]:
        if self.rate_estimate is None:
            return None
        return self.bracket["low"] <= self.rate_estimate <= self.bracket["high"]

    def to_dict(self):
        return {
            "N": self.N,
            "n_max": self.n_max,
            "degree": self.degree,
            "seed": self.seed,
            "certificate": self.certificate.to_dict(),
            "sup_errors": [float(e) for e in self.sup_errors],
            "rate_estimate": self.rate_estimate,
            "rate_note": self.rate_note,
            "bracket": dict(self.bracket),
            "rate_in_bracket": self.rate_in_bracket,
            "bound_violations": self.bound_violations,
            "mc_summary": self.mc_summary,
        }


def cdf_iterates(params: ParamsLike, m0: InitialMeasure, n_max: int,
                 degree: int = DEFAULT_DEGREE, tol: float = EXPERIMENT_TOL):
    """Grid functions whose integrals give F_0, ..., F_{n_max}.

    Element n samples U^n f0 / (log(N/(N-1)) (x + N - 1)), the density of
    R_N^n under mu.
    """
    p = as_params(params)
    iterates = pf_iterate(m0.grid(degree), n_max, tol)
    weight = p.logK * (iterates[0].nodes + p.N - 1)
    return [f.with_values(f.values / weight) for f in iterates]


def cdf_after_n(params: ParamsLike, m0: InitialMeasure, n: int, x,
                degree: int = DEFAULT_DEGREE, tol: float = EXPERIMENT_TOL):
    """mu(R_N^n < x), by n grid applications of U and Chebyshev quadrature."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    dens = cdf_iterates(params, m0, n, degree, tol)[-1]
    return dens.integral(0.0, np.clip(np.asarray(x, dtype=float), 0.0, 1.0))


def error_curve(params: ParamsLike, m0: InitialMeasure, n_max: int, grid=None,
                degree: int = DEFAULT_DEGREE, tol: float = EXPERIMENT_TOL) -> np.ndarray:
    """sup over ``grid`` of |F_n - G_N| for n = 0, ..., n_max."""
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    p = as_params(params)
    xs = DEFAULT_GRID if grid is None else np.asarray(grid, dtype=float)
    G = invariant_cdf(p, xs)
    return np.array([np.max(np.abs(d.integral(0.0, xs) - G))
                     for d in cdf_iterates(p, m0, n_max, degree, tol)])


def decay_rate(sup_errors, burn_in: int = BURN_IN, floor: float = ERROR_FLOOR,
               min_points: int = 5) -> float:
    """Per-step contraction factor from a log-linear fit of the error curve.

    Uses indices burn_in, burn_in + 1, ... up to the first value at or below
    ``floor``.
    """
    errs = np.asarray(sup_errors, dtype=float)
    if np.any(errs[burn_in:] < 0):
        raise NonPositiveError("sup errors must be nonnegative")
    used = []
    for n in range(burn_in, errs.size):
        if errs[n] <= floor:
            break
        used.append(n)
    if not used and errs.size > burn_in:
        raise DegenerateCurveError(
            f"error curve at the floor {floor:g} from n={burn_in} on")
    if len(used) < min_points:
        raise InsufficientDataError(
            f"only {len(used)} points above {floor:g} after burn-in {burn_in}")
    ns = np.array(used, dtype=float)
    slope = np.polyfit(ns, np.log(errs[used]), 1)[0]
    return float(np.exp(slope))


def theorem_bound(params: ParamsLike, cert: WirsingCertificate,
                  m0: InitialMeasure) -> TheoremBound:
    """alpha, beta and the extremes of (f0)' for the envelope of |d_n|."""
    p = as_params(params)
    # envelope constants use f0 = (x + N - 1) h, i.e. without log(N/(N-1))
    f0p = lambda x: np.asarray(m0.f0_prime(x), dtype=float) / p.logK  # noqa: E731
    xs = np.linspace(0.0, 1.0, 2049)
    vals = f0p(xs)
    if np.any(vals <= 0):
        raise PositivityError("(f0)' must be positive on [0, 1]")
    q = lambda x: -phi_func(p.N, cert.e, cert.t, x) / f0p(x)  # noqa: E731
    qs = q(xs)
    # extremes of q and (f0)' may sit at an endpoint or inside
    _, beta = scan_then_golden_max(q, 0.0, 1.0, points=2049)
    _, neg_alpha = scan_then_golden_max(lambda x: -q(x), 0.0, 1.0, points=2049)
    _, f_max = scan_then_golden_max(f0p, 0.0, 1.0, points=2049)
    _, neg_f_min = scan_then_golden_max(lambda x: -f0p(x), 0.0, 1.0, points=2049)
    return TheoremBound(p, cert,
                        alpha=float(min(-neg_alpha, qs.min())),
                        beta=float(max(beta, qs.max())),
                        f0p_min=float(min(-neg_f_min, vals.min())),
                        f0p_max=float(max(f_max, vals.max())))


def theorem_bound_check(params: ParamsLike, cert: WirsingCertificate, m0: InitialMeasure,
                        n, grid=None, degree: int = DEFAULT_DEGREE,
                        tol: float = EXPERIMENT_TOL, return_details: bool = False):
    """Count grid points where |d_n| leaves [lower, upper] by more than
    ``BOUND_TOL + DISCRETIZATION_ALLOWANCE``.

    ``n`` may be a single step count or an iterable of them; violations are
    summed.
    """
    p = as_params(params)
    bound = theorem_bound(p, cert, m0)
    ns = [int(n)] if np.ndim(n) == 0 else [int(k) for k in n]
    if min(ns) < 1:
        raise ValueError("n must be >= 1")
    xs = np.linspace(0.0, 1.0, 101) if grid is None else np.asarray(grid, dtype=float)
    dens = cdf_iterates(p, m0, max(ns), degree, tol)
    G = invariant_cdf(p, xs)
    allow = BOUND_TOL + DISCRETIZATION_ALLOWANCE
    violations = 0
    details = []
    for k in ns:
        d = np.abs(dens[k].integral(0.0, xs) - G)
        lo, hi = bound.lower(xs, k), bound.upper(xs, k)
        bad = int(np.sum(d < lo - allow) + np.sum(d > hi + allow))
        violations += bad
        details.append({"n": k, "violations": bad,
                        "min_lower_slack": float(np.min(d - lo)),
                        "min_upper_slack": float(np.min(hi - d))})
    if return_details:
        return violations, details
    return violations


def _uniform_sampler(rng, size):
    return rng.random(size)


def _iterate_map(N, x, n):
    for _ in range(n):
        with np.errstate(divide="ignore", invalid="ignore"):
            q = N / (1.0 - x)
            x = np.where(x < 1.0, q - np.floor(q), 0.0)
    return x


def monte_carlo_cdf(params: ParamsLike, n: int, xs, m: int = 10**6, seed: int = 0,
                    sampler=None, streams: int = 8):
    """Empirical mu(R_N^n < x) with binomial standard errors.

    ``sampler(rng, size)`` draws from mu (uniform by default).  Samples are
    split across ``streams`` generators spawned from ``seed`` so the result
    does not depend on how the work is scheduled.

    Returns an array of shape (len(xs), 2): estimate, standard error.
    """
    if m < 10**4:
        raise ValueError(f"m must be >= 10^4, got {m}")
    p = as_params(params)
    sampler = sampler or _uniform_sampler
    xs = np.asarray(xs, dtype=float)
    counts = np.zeros(xs.size, dtype=np.int64)
    children = np.random.SeedSequence(seed).spawn(streams)
    sizes = [m // streams + (1 if k < m % streams else 0) for k in range(streams)]
    for child, size in zip(children, sizes):
        rng = np.random.default_rng(child)
        pts = _iterate_map(p.N, np.asarray(sampler(rng, size), dtype=float), n)
        pts.sort()
        counts += np.searchsorted(pts, xs, side="left")
    est = counts / m
    stderr = np.sqrt(est * (1.0 - est) / m)
    return np.column_stack([est, stderr])


def run_experiment(params: ParamsLike, m0: Optional[InitialMeasure] = None,
                   n_max: int = 25, burn_in: int = BURN_IN, degree: int = DEFAULT_DEGREE,
                   tol: float = EXPERIMENT_TOL, grid=None, bound_steps: int = 10,
                   mc: bool = False, mc_samples: int = 10**6, mc_steps: int = 3,
                   seed: int = 0, bracket_margin: float = 0.005) -> ExperimentReport:
    """Error curve, fitted rate, envelope check and optional Monte Carlo."""
    p = as_params(params)
    m0 = m0 or InitialMeasure.uniform(p)
    cert = certify(p.N)
    errs = error_curve(p, m0, n_max, grid, degree, tol)
    try:
        rate, note = decay_rate(errs, burn_in), "fitted"
    except DegenerateCurveError as exc:
        rate, note = None, f"error floor: {exc}"
    except InsufficientDataError as exc:
        rate, note = None, f"insufficient data: {exc}"
    try:
        violations = theorem_bound_check(p, cert, m0, range(1, min(bound_steps, n_max) + 1),
                                         degree=degree, tol=tol)
    except (PositivityError, ValueError):
        violations = None
    mc_summary = None
    if mc:
        xs = np.round(np.linspace(0.1, 0.9, 9), 10)
        mc_vals = monte_carlo_cdf(p, mc_steps, xs, mc_samples, seed)
        dens = cdf_iterates(p, m0, mc_steps, degree, tol)[-1]
        exact = dens.integral(0.0, xs)
        z = np.abs(mc_vals[:, 0] - exact) / np.maximum(mc_vals[:, 1], 1e-300)
        mc_summary = {
            "steps": mc_steps,
            "samples": mc_samples,
            "x": xs.tolist(),
            "monte_carlo": mc_vals[:, 0].tolist(),
            "stderr": mc_vals[:, 1].tolist(),
            "density_iteration": [float(v) for v in exact],
            "max_z": float(z.max()),
            "agree": bool(z.max() < 4.0),
        }
    bracket = {"low": cert.v - bracket_margin, "high": cert.w + bracket_margin}
    return ExperimentReport(N=p.N, n_max=n_max, degree=degree, sup_errors=list(errs),
                            rate_estimate=rate, rate_note=note, certificate=cert,
                            bound_violations=violations, seed=seed if mc else None,
                            mc_summary=mc_summary, bracket=bracket)
