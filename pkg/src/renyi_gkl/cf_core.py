"""Renyi-type continued fractions with parameter N >= 2.

Every x in [0, 1] has an expansion

    x = 1 - N / (1 + a_1 - N / (1 + a_2 - N / (1 + a_3 - ...)))

with integer digits a_k >= N, generated by the map
R_N(x) = N/(1-x) - floor(N/(1-x)) (and R_N(1) = 0).  The map preserves the
probability measure with density 1 / (log(N/(N-1)) (x + N - 1)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .exceptions import DomainError, InvalidDigitError

__all__ = [
    "RenyiParams",
    "DigitSequence",
    "DomainError",
    "InvalidDigitError",
    "INFINITE_DIGIT",
    "as_params",
    "apply_map",
    "digit",
    "expand",
    "evaluate",
    "invariant_density",
    "invariant_cdf",
]

#: Marker returned by :func:`digit` at x = 1.
INFINITE_DIGIT = math.inf

# digits beyond this are clipped before evaluation to keep 1 + a_k finite
_DIGIT_CAP = 10**15


@dataclass(frozen=True)
class RenyiParams:
    """The integer parameter N together with the normaliser log(N/(N-1))."""

    N: int
    logK: float = field(init=False, repr=False)

    def __post_init__(self):
        if isinstance(self.N, bool) or not isinstance(self.N, (int, np.integer)):
            raise TypeError(f"N must be an integer, got {self.N!r}")
        if self.N < 2:
            raise ValueError(f"N must be >= 2, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        # log1p form is accurate for large N where N/(N-1) is close to 1
        object.__setattr__(self, "logK", math.log1p(1.0 / (self.N - 1)))


ParamsLike = Union[RenyiParams, int]


def as_params(params: ParamsLike) -> RenyiParams:
    """Accept either a :class:`RenyiParams` or a bare integer N."""
    if isinstance(params, RenyiParams):
        return params
    return RenyiParams(params)


@dataclass(frozen=True)
class DigitSequence:
    """Finite prefix of a Renyi-type expansion.

    ``hits_one`` is set when the orbit reached exactly 1, whose digit is
    infinite; no digits follow that position.
    """

    params: RenyiParams
    digits: tuple[int, ...]
    hits_one: bool = False

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple(int(a) for a in self.digits))
        bad = [a for a in self.digits if a < self.params.N]
        if bad:
            raise InvalidDigitError(
                f"digits must be >= N={self.params.N}, got {bad[:5]}")

    def __len__(self):
        return len(self.digits)

    def __str__(self):
        body = " ".join(str(a) for a in self.digits)
        if self.hits_one:
            body = (body + " inf").strip()
        return body


def _check_unit(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {x!r}")
    return arr


def apply_map(params: ParamsLike, x):
    """Apply R_N to a scalar or an array of points in [0, 1].

    Points where N/(1-x) is an exact integer map to 0, as does x = 1.
    """
    p = as_params(params)
    arr = _check_unit(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = p.N / (1.0 - arr)
        out = np.where(arr < 1.0, q - np.floor(q), 0.0)
    if out.ndim == 0:
        return float(out)
    return out


def digit(params: ParamsLike, x: float):
    """First digit floor(N/(1-x)); :data:`INFINITE_DIGIT` at x = 1."""
    p = as_params(params)
    x = float(_check_unit(x))
    if x == 1.0:
        return INFINITE_DIGIT
    return int(math.floor(p.N / (1.0 - x)))


def expand(params: ParamsLike, x: float, n: int) -> DigitSequence:
    """First ``n`` digits of x.

    Digits come from iterating R_N in double precision, so only roughly the
    first 40 (small N) are digits of x itself; later ones belong to a nearby
    point.  Expansion stops early if an iterate equals 1 exactly.
    """
    p = as_params(params)
    x = float(_check_unit(x))
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    digits = []
    for _ in range(n):
        if x == 1.0:
            return DigitSequence(p, tuple(digits), hits_one=True)
        # same floating-point steps as digit() and apply_map(), minus numpy overhead
        q = p.N / (1.0 - x)
        a = math.floor(q)
        digits.append(a)
        x = q - a
    return DigitSequence(p, tuple(digits), hits_one=False)


def evaluate(params: ParamsLike, seq: Union[DigitSequence, Sequence[int]]) -> float:
    """Value of a finite digit prefix, folded from the innermost level out.

    The level after the last digit is treated as an infinite digit, i.e. the
    innermost denominator is 1 + a_m.
    """
    p = as_params(params)
    if isinstance(seq, DigitSequence):
        digits, hits_one = seq.digits, seq.hits_one
    else:
        digits, hits_one = tuple(int(a) for a in seq), False
    if not digits:
        if hits_one:
            return 1.0
        raise ValueError("cannot evaluate an empty digit sequence")
    if any(a < p.N for a in digits):
        raise InvalidDigitError(f"digits must be >= N={p.N}")
    y = math.inf
    for a in reversed(digits):
        a = min(a, _DIGIT_CAP)
        y = 1.0 + a - p.N / y
    return 1.0 - p.N / y


def invariant_density(params: ParamsLike, x):
    """Density of the invariant measure, 1 / (log(N/(N-1)) (x + N - 1))."""
    p = as_params(params)
    arr = _check_unit(x)
    out = 1.0 / (p.logK * (arr + p.N - 1))
    return float(out) if out.ndim == 0 else out


def invariant_cdf(params: ParamsLike, x):
    """Distribution function G_N(x) = log((x+N-1)/(N-1)) / log(N/(N-1))."""
    p = as_params(params)
    arr = _check_unit(x)
    out = np.log1p(arr / (p.N - 1)) / p.logK
    return float(out) if out.ndim == 0 else out
