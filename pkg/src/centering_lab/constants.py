"""Closed forms and maximization of the two-point constants C_p(alpha) and C_p.

``C_p(alpha)`` is the L^p norm of ``xi -> xi - E xi`` on the two-atom space with
masses ``(1 - alpha, alpha)``; its maximum over ``alpha`` is the constant C_p
that bounds every conditional centering operator ``I - E^G``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError

__all__ = [
    "Exponent",
    "as_exponent",
    "TwoPointDistribution",
    "MaxCp",
    "ExtremalTwoPoint",
    "UniformConstant",
    "cp_alpha",
    "max_cp",
    "riesz_thorin_bound",
    "extremal_two_point",
    "uniform_n_constant",
]

MASS_TOL = 1e-12
GRID_STEP = 1e-4
BRENT_XTOL = 1e-12


@dataclass(frozen=True)
class Exponent:
    """An exponent ``p`` in ``[1, inf]``; ``math.inf`` marks the infinite case."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if math.isnan(v) or v < 1:
            raise DomainError(f"exponent must satisfy p >= 1, got {self.value!r}")
        object.__setattr__(self, "value", v)

    @classmethod
    def parse(cls, text: Union[str, float, int]) -> "Exponent":
        if isinstance(text, str):
            s = text.strip().lower()
            if s in ("inf", "infinity", "oo", "∞"):
                return cls(math.inf)
            try:
                return cls(float(s))
            except ValueError:
                raise DomainError(f"cannot parse exponent {text!r}") from None
        return cls(float(text))

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)

    @property
    def is_finite(self) -> bool:
        return not self.is_infinite

    def dual(self) -> "Exponent":
        """Conjugate exponent p' = p / (p - 1)."""
        if self.is_infinite:
            return Exponent(1.0)
        if self.value == 1.0:
            return Exponent(math.inf)
        return Exponent(self.value / (self.value - 1.0))

    def __float__(self) -> float:
        return self.value

    def __str__(self) -> str:
        return "inf" if self.is_infinite else repr(self.value)


ExponentLike = Union[Exponent, float, int, str]


def as_exponent(p: ExponentLike) -> Exponent:
    if isinstance(p, Exponent):
        return p
    return Exponent.parse(p)


@dataclass(frozen=True)
class TwoPointDistribution:
    value1: complex
    mass1: float
    value2: complex
    mass2: float

    def __post_init__(self):
        for m in (self.mass1, self.mass2):
            if not 0 < m < 1:
                raise DomainError(f"two-point masses must lie in (0, 1), got {m!r}")
        if abs(self.mass1 + self.mass2 - 1) > MASS_TOL:
            raise DomainError("two-point masses must sum to 1")
        if self.value1 == self.value2:
            raise DomainError("two-point values must be distinct")

    @property
    def mean(self) -> complex:
        return self.mass1 * self.value1 + self.mass2 * self.value2

    def abs_moment(self, p: float) -> float:
        return self.mass1 * abs(self.value1) ** p + self.mass2 * abs(self.value2) ** p


@dataclass(frozen=True)
class MaxCp:
    value: float
    argmax_alpha: Optional[float]


@dataclass(frozen=True)
class ExtremalTwoPoint:
    dist: TwoPointDistribution
    b: float
    mean: float
    abs_moment_p: float
    centered_moment_p: float
    ratio: float


@dataclass(frozen=True)
class UniformConstant:
    value: float
    k1: int
    k2: int


def _open_exponent(p: ExponentLike) -> float:
    e = as_exponent(p)
    if e.is_infinite or e.value <= 1:
        raise DomainError(f"need 1 < p < inf, got p = {e}")
    return e.value


def _log_power_sum(alpha, s):
    # log(alpha^s + (1 - alpha)^s)
    return np.logaddexp(s * np.log(alpha), s * np.log1p(-alpha))


def _cp_alpha_unchecked(p: float, alpha):
    log_c = _log_power_sum(alpha, p - 1) / p + _log_power_sum(alpha, 1 / (p - 1)) * (1 - 1 / p)
    return np.exp(log_c)


def cp_alpha(p: ExponentLike, alpha) -> float:
    """C_p(alpha) for 1 < p < inf and 0 < alpha < 1.

    Accepts an array of ``alpha`` values as well; the result then has the
    same shape.
    """
    pv = _open_exponent(p)
    a = np.asarray(alpha, dtype=float)
    if np.any(~((a > 0) & (a < 1))):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    out = _cp_alpha_unchecked(pv, a)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=256)
def _max_cp_finite(p: float) -> MaxCp:
    grid = np.arange(1, int(round(0.5 / GRID_STEP)) + 1) * GRID_STEP
    vals = _cp_alpha_unchecked(p, grid)
    k = int(np.argmax(vals))
    if k == len(grid) - 1:
        return MaxCp(float(vals[k]), float(grid[k]))

    def neg(a):
        return -float(_cp_alpha_unchecked(p, a))

    hi = grid[k + 1]
    if k > 0:
        lo = grid[k - 1]
    else:
        lo = grid[0] / 10
        while lo > 1e-300 and -neg(lo) >= vals[0]:
            lo /= 10
    # bounded Brent: near p = 2 neighbouring grid values tie, so no strict bracket exists
    res = minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": BRENT_XTOL})
    a_star = float(res.x)
    v_star = -float(res.fun)
    if v_star < vals[k]:
        a_star, v_star = float(grid[k]), float(vals[k])
    return MaxCp(v_star, a_star)


def max_cp(p: ExponentLike) -> MaxCp:
    """C_p = max over alpha of C_p(alpha), with its maximizer in (0, 1/2].

    p = 1 and p = inf give the limiting value 2; p = 2 is the flat case
    C_2 = 1. In those cases no maximizer is reported.
    """
    e = as_exponent(p)
    if e.is_infinite or e.value == 1.0:
        return MaxCp(2.0, None)
    if e.value == 2.0:
        return MaxCp(1.0, None)
    return _max_cp_finite(e.value)


def riesz_thorin_bound(p: ExponentLike) -> float:
    """The interpolation bound 2^{|1 - 2/p|}."""
    e = as_exponent(p)
    if e.is_infinite:
        return 2.0
    return 2.0 ** abs(1 - 2 / e.value)


def extremal_two_point(p: ExponentLike, alpha: float) -> ExtremalTwoPoint:
    """The two-valued random variable whose centering ratio is exactly C_p(alpha).

    It takes the value ``-b`` with mass ``1 - alpha`` and ``1 - b`` with mass
    ``alpha``; moments come from their closed forms, not from summation.
    """
    pv = _open_exponent(p)
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    s = 1 / (pv - 1)
    a_s = alpha ** s
    c_s = (1 - alpha) ** s
    b = a_s / (a_s + c_s)
    mean = (alpha * c_s - (1 - alpha) * a_s) / (a_s + c_s)
    abs_moment = alpha * (1 - alpha) / (a_s + c_s) ** (pv - 1)
    centered = alpha * (1 - alpha) * (alpha ** (pv - 1) + (1 - alpha) ** (pv - 1))
    dist = TwoPointDistribution(-b, 1 - alpha, 1 - b, alpha)
    ratio = (centered / abs_moment) ** (1 / pv)
    return ExtremalTwoPoint(dist, b, mean, abs_moment, centered, ratio)


def uniform_n_constant(p: ExponentLike, n: int) -> UniformConstant:
    """max{C_p(k1/n), C_p(k2/n)} with k1, k2 the grid points bracketing alpha_p."""
    pv = _open_exponent(p)
    if int(n) != n or n < 2:
        raise DomainError(f"n must be an integer >= 2, got {n!r}")
    n = int(n)
    alpha_p = max_cp(pv).argmax_alpha
    if alpha_p is None:
        return UniformConstant(1.0, 1, 1)
    k1 = max(1, math.floor(alpha_p * n))
    k2 = max(1, math.ceil(alpha_p * n))
    if not 2 * k2 < n:
        k2 = k1
    value = max(cp_alpha(pv, k1 / n), cp_alpha(pv, k2 / n))
    return UniformConstant(float(value), k1, k2)
