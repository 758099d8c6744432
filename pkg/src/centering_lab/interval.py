"""The sigma-algebra G_beta on [0, 1] and its conditional expectation.

``J_beta`` maps [beta, 1] affinely and order-reversingly onto [0, beta];
G_beta-measurable functions take equal values at ``x`` and ``J_beta x``.
On step functions the conditional expectation is exact once the grid is
refined so that ``J_beta`` maps right-hand cells onto left-hand cells; the
refined grid has the same number of cells on either side of beta.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Union

import numpy as np
from scipy.optimize import bisect

from .constants import ExponentLike, as_exponent, cp_alpha, max_cp
from .errors import DomainError
from .opnorm import OptimizerOptions, operator_norm
from .prob_core import FiniteProbSpace, Partition, cond_exp_matrix, weighted_lp_norm

__all__ = [
    "BetaAlgebra",
    "GridFunction",
    "GbetaExtremal",
    "DiscretizeResult",
    "BetaTarget",
    "jbeta_map",
    "jbeta_inverse",
    "gbeta_cond_exp",
    "gbeta_norm",
    "gbeta_extremal",
    "paired_grid",
    "discretize_check",
    "beta_for_target",
    "sweep_csv",
]

EDGE_TOL = 1e-12
MAX_CELLS = 512
MAX_ATOMS = 1024


@dataclass(frozen=True)
class BetaAlgebra:
    beta: float

    def __post_init__(self):
        b = float(self.beta)
        if not 0 < b < 1:
            raise DomainError(f"beta must lie in (0, 1), got {self.beta!r}")
        object.__setattr__(self, "beta", b)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A step function on [0, 1]; uniform cells unless ``edges`` is given."""

    cells: int
    values: np.ndarray
    edges: Optional[np.ndarray] = None

    def __post_init__(self):
        n = int(self.cells)
        if n < 1:
            raise DomainError("a grid needs at least one cell")
        v = np.array(self.values, dtype=complex).ravel()
        if v.size != n:
            raise DomainError(f"grid has {n} cells but {v.size} values")
        if self.edges is None:
            e = np.linspace(0.0, 1.0, n + 1)
        else:
            e = np.array(self.edges, dtype=float).ravel()
            if e.size != n + 1 or e[0] != 0.0 or e[-1] != 1.0 or np.any(np.diff(e) <= 0):
                raise DomainError("edges must increase strictly from 0 to 1, one more than cells")
        v.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "cells", n)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "edges", e)

    @classmethod
    def from_callable(cls, f: Callable[[np.ndarray], np.ndarray], cells: int) -> "GridFunction":
        """Sample ``f`` at cell midpoints of the uniform grid."""
        mid = (np.arange(cells) + 0.5) / cells
        return cls(cells, np.asarray(f(mid), dtype=complex) * np.ones(cells))

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def is_uniform(self) -> bool:
        return bool(np.allclose(self.edges, np.linspace(0, 1, self.cells + 1), rtol=0, atol=EDGE_TOL))

    def lp_norm(self, p: ExponentLike) -> float:
        return weighted_lp_norm(self.values, self.widths, as_exponent(p).value)

    def __call__(self, x):
        i = np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, self.cells - 1)
        return self.values[i]

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        if self.cells != other.cells or not np.array_equal(self.edges, other.edges):
            raise DomainError("grid functions live on different grids")
        return GridFunction(self.cells, self.values - other.values, self.edges)


def jbeta_map(b: BetaAlgebra, x):
    """J_beta x = beta (1 - x) / (1 - beta) for x in [beta, 1]."""
    xa = np.asarray(x, dtype=float)
    if np.any((xa < b.beta - EDGE_TOL) | (xa > 1 + EDGE_TOL)):
        raise DomainError(f"J_beta is defined on [{b.beta}, 1]")
    out = b.beta * (1 - xa) / (1 - b.beta)
    return float(out) if out.ndim == 0 else out


def jbeta_inverse(b: BetaAlgebra, y):
    """J_beta^{-1} y = 1 - (1 - beta) y / beta for y in [0, beta]."""
    ya = np.asarray(y, dtype=float)
    if np.any((ya < -EDGE_TOL) | (ya > b.beta + EDGE_TOL)):
        raise DomainError(f"J_beta^-1 is defined on [0, {b.beta}]")
    out = 1 - (1 - b.beta) * ya / b.beta
    return float(out) if out.ndim == 0 else out


def _dedupe(points: np.ndarray) -> np.ndarray:
    points = np.sort(points)
    keep = np.concatenate([[True], np.diff(points) > EDGE_TOL])
    return points[keep]


def _paired_edges(b: BetaAlgebra, edges: np.ndarray) -> np.ndarray:
    """Coarsest refinement of ``edges`` on which J_beta maps cells onto cells."""
    beta = b.beta
    if not np.any(np.abs(edges - beta) <= EDGE_TOL):
        raise DomainError(f"beta = {beta} is not a cell boundary of the grid")
    left = edges[edges <= beta + EDGE_TOL]
    right = edges[edges >= beta - EDGE_TOL]
    ys = _dedupe(np.concatenate([left, beta * (1 - right) / (1 - beta)]))
    ys = ys[(ys > EDGE_TOL) & (ys < beta - EDGE_TOL)]
    ys = np.concatenate([[0.0], ys, [beta]])
    xs = (1 - (1 - beta) * ys / beta)[::-1]
    xs[0], xs[-1] = beta, 1.0
    return np.concatenate([ys, xs[1:]])


def paired_grid(b: BetaAlgebra, cells: int) -> np.ndarray:
    """Edges of the J_beta-paired refinement of the uniform grid with ``cells`` cells."""
    return _paired_edges(b, np.linspace(0.0, 1.0, int(cells) + 1))


def gbeta_cond_exp(b: BetaAlgebra, xi: Union[GridFunction, Callable]):
    """E^{G_beta} xi.

    For a callable the result is the callable
    ``x -> (1 - beta) xi(x) + beta xi(J x)`` on [beta, 1] (and its mirror on
    [0, beta)). For a ``GridFunction`` the result lives on the paired
    refinement of its grid and takes identical values on paired cells.
    """
    beta = b.beta
    if not isinstance(xi, GridFunction):
        f = xi

        def cond(x):
            xa = np.asarray(x, dtype=float)
            right = xa >= beta
            xr = np.where(right, xa, 1 - (1 - beta) * xa / beta)
            yl = beta * (1 - xr) / (1 - beta)
            out = (1 - beta) * np.asarray(f(xr)) + beta * np.asarray(f(yl))
            return out if out.ndim else out[()]

        return cond

    edges = _paired_edges(b, xi.edges)
    m = (edges.size - 1) // 2
    mid = 0.5 * (edges[:-1] + edges[1:])
    v = xi(mid)
    left, right = v[:m], v[m:][::-1]
    pair = np.where(left == right, left, (1 - beta) * right + beta * left)
    return GridFunction(2 * m, np.concatenate([pair, pair[::-1]]), edges)


def gbeta_norm(b: BetaAlgebra, p: ExponentLike) -> float:
    """||I - E^{G_beta}||: C_p(beta) for 1 < p < inf, 2 max(beta, 1 - beta) at p in {1, inf}."""
    e = as_exponent(p)
    if e.is_infinite or e.value == 1.0:
        return 2.0 * max(b.beta, 1 - b.beta)
    return float(cp_alpha(e, b.beta))


@dataclass(frozen=True)
class GbetaExtremal:
    xi: GridFunction
    ratio: float
    gamma_star: float
    kappa: float


def gbeta_extremal(b: BetaAlgebra, p: ExponentLike) -> GbetaExtremal:
    """The two-step function attaining ||I - E^{G_beta}||_p.

    Its p-th power mass on [beta, 1] is ``gamma_star``, the maximizer of the
    bound kappa * Psi_beta(gamma); on [0, beta) it is a negative multiple
    of its value on [beta, 1].
    """
    e = as_exponent(p)
    if e.is_infinite or e.value <= 1:
        raise DomainError("gbeta_extremal needs 1 < p < inf")
    pv, beta = e.value, b.beta
    s = 1 / (pv - 1)
    gamma = beta ** s / ((1 - beta) ** s + beta ** s)
    kappa = (beta * ((1 - beta) ** (pv - 1) + beta ** (pv - 1))) ** (1 / pv)
    c1 = (gamma / (1 - beta)) ** (1 / pv)
    c2 = -(((1 - gamma) * (1 - beta) / (gamma * beta)) ** (1 / pv)) * c1
    xi = GridFunction(2, [c2, c1], [0.0, beta, 1.0])
    ratio = (xi - gbeta_cond_exp(b, xi)).lp_norm(e) / xi.lp_norm(e)
    return GbetaExtremal(xi, float(ratio), float(gamma), float(kappa))


@dataclass(frozen=True)
class DiscretizeResult:
    numeric_norm: float
    analytic_norm: float
    atoms: int
    converged: bool


def discretize_check(b: BetaAlgebra, p: ExponentLike, cells: int,
                     opts: OptimizerOptions = OptimizerOptions()) -> DiscretizeResult:
    """Numerical ||I - E^{G_beta}|| on the paired refinement of a uniform grid.

    The finite space has one atom per refined cell, with the cell length as
    its mass; each J_beta-pair is a block, so conditional weights inside a
    block are (beta, 1 - beta).
    """
    e = as_exponent(p)
    cells = int(cells)
    if not 1 <= cells <= MAX_CELLS:
        raise DomainError(f"cells must lie in [1, {MAX_CELLS}]")
    k = b.beta * cells
    if abs(k - round(k)) > 1e-9 or not 0 < round(k) < cells:
        raise DomainError(f"beta * cells = {k} is not an integer: incompatible grid")
    left, right = int(round(k)), cells - int(round(k))
    m = left * right // math.gcd(left, right)
    if 2 * m > MAX_ATOMS:
        raise DomainError(f"paired refinement needs {2 * m} atoms (limit {MAX_ATOMS}): incompatible grid")
    edges = paired_grid(b, cells)
    m = (edges.size - 1) // 2
    sp = FiniteProbSpace.normalize(np.diff(edges))
    part = Partition(tuple((m - 1 - j, m + j) for j in range(m)))
    A = np.eye(2 * m) - cond_exp_matrix(part, sp)
    r = operator_norm(A, sp, e, opts)
    return DiscretizeResult(r.value, gbeta_norm(b, e), 2 * m, r.converged)


@dataclass(frozen=True)
class BetaTarget:
    """A beta realizing a target norm; ``trivial`` marks G = {empty, [0,1]}."""

    target: float
    beta: Optional[float]
    value: float
    trivial: bool = False


def beta_for_target(p: ExponentLike, c: float) -> BetaTarget:
    """Find beta with ||I - E^{G_beta}||_p = c by bisection on [alpha_p, 1/2].

    c = 2 at p in {1, inf} is not reached by any beta; the trivial
    sigma-algebra supplies it instead.
    """
    e = as_exponent(p)
    top = max_cp(e).value
    if not 1.0 <= c <= top:
        raise DomainError(f"target {c} outside [1, {top}]")
    extreme = e.is_infinite or e.value == 1.0
    if extreme and c == 2.0:
        return BetaTarget(c, None, 2.0, True)
    if c == 1.0 or (not extreme and e.value == 2.0):
        return BetaTarget(c, 0.5, gbeta_norm(BetaAlgebra(0.5), e))
    lo = 1e-15 if extreme else max_cp(e).argmax_alpha

    def f(beta):
        return gbeta_norm(BetaAlgebra(beta), e) - c

    if f(lo) <= 0:
        beta = lo
    else:
        beta = bisect(f, lo, 0.5, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return BetaTarget(c, float(beta), gbeta_norm(BetaAlgebra(beta), e))


def _csv_cell(x):
    if isinstance(x, (float, np.floating)):
        return "inf" if math.isinf(x) else f"{float(x):.12g}"
    return x


def sweep_csv(rows: Iterable[Sequence], header: Sequence[str]) -> str:
    """RFC 4180 text (CRLF line ends), floats at 12 significant digits."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_csv_cell(x) for x in r])
    return buf.getvalue()
