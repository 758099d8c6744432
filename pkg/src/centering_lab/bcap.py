"""Compact approximation of the identity on L^p([0, 1]) on a grid model.

The constructive half: for finitely many functions and a tolerance, a
conditional expectation over a coarse partition approximates each function
and satisfies ``||I - E^G|| <= C_p``. The other half (no compact operator
does better) concerns the nonatomic interval; on a grid it is only tracked
numerically through ``nu_p(gamma) = ||I - gamma E||`` and refinement sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Sequence, Tuple

import numpy as np
from scipy.sparse.csgraph import connected_components

from .constants import ExponentLike, as_exponent
from .errors import DomainError, EigenSolverError
from .interval import GridFunction, sweep_csv
from .opnorm import OptimizerOptions, OptReport, cp_of_space, lower_norm, operator_norm
from .prob_core import FiniteProbSpace, Partition, RandVar, cond_exp_matrix, cond_expectation, lp_norm

__all__ = [
    "ApproximationCertificate",
    "GammaExperiment",
    "GammaSweep",
    "EigenCheck",
    "build_bcap_approximant",
    "nu_estimate",
    "nu_report",
    "gamma_inequality_experiment",
    "gamma_refinement_sweep",
    "eigen_lower_bound_check",
    "is_sanctioned",
    "mean_operator",
    "block_cond_exp",
    "REFINEMENT_LEVELS",
]

REFINEMENT_LEVELS = (8, 16, 32, 64)
PERSISTENT_NEGATIVE = -1e-3
EIG_RESIDUAL_TOL = 1e-8
ZERO_TOL = 1e-12


@dataclass(frozen=True)
class ApproximationCertificate:
    partition: Partition
    per_function_error: Tuple[float, ...]
    norm_bound: float
    epsilon: float
    p: float

    @property
    def rank(self) -> int:
        """Dimension of the range of E^G: one indicator per block."""
        return len(self.partition.blocks)


def _block_error_ok(vals: np.ndarray, w: np.ndarray, p: float, budget: float) -> bool:
    """Width-weighted mean of |f - block mean|^p stays below budget^p."""
    wn = w / w.sum()
    for v in vals:
        dev = np.abs(v - np.dot(wn, v))
        if math.isinf(p):
            if dev.max() >= budget:
                return False
        elif np.dot(wn, dev ** p) >= budget ** p:
            return False
    return True


@lru_cache(maxsize=512)
def _block_constant(widths: Tuple[float, ...], p: float, opts: OptimizerOptions) -> float:
    sub = FiniteProbSpace.normalize(widths)
    return cp_of_space(sub, Partition.trivial(len(widths)), p, opts).value


def build_bcap_approximant(fs: Sequence[GridFunction], p: ExponentLike, eps: float,
                           opts: OptimizerOptions = OptimizerOptions(starts=32)) -> ApproximationCertificate:
    """Greedy left-to-right coarsening into blocks of adjacent cells.

    A block keeps growing while every function's width-weighted mean p-th
    power deviation from its block mean stays below (eps/2)^p; summing over
    blocks keeps each L^p error below eps/2. ``norm_bound`` is the largest
    per-block norm of ``I - E`` computed by ``opnorm``.
    """
    e = as_exponent(p)
    if not eps > 0:
        raise DomainError("eps must be > 0")
    fs = list(fs)
    if not fs:
        raise DomainError("need at least one function")
    edges = fs[0].edges
    if any(f.cells != fs[0].cells or not np.array_equal(f.edges, edges) for f in fs):
        raise DomainError("all functions must share one grid")
    n = fs[0].cells
    widths = np.diff(edges)
    F = np.stack([f.values for f in fs])
    budget = eps / 2

    blocks: List[Tuple[int, ...]] = []
    start = 0
    for i in range(1, n + 1):
        if i == n or not _block_error_ok(F[:, start:i + 1], widths[start:i + 1], e.value, budget):
            blocks.append(tuple(range(start, i)))
            start = i
    part = Partition(tuple(blocks))

    sp = FiniteProbSpace.normalize(widths) if n >= 2 else None
    errors = []
    for f in fs:
        if sp is None:
            errors.append(0.0)
            continue
        xi = RandVar(f.values)
        errors.append(lp_norm(xi - cond_expectation(xi, part, sp), sp, e))
    if max(errors) >= eps:
        raise DomainError(f"eps = {eps} unattainable at this resolution; minimal error {float(max(errors))!r}")

    bound = 0.0
    for b in blocks:
        if len(b) >= 2:
            key = tuple(float(x) for x in widths[list(b)])
            bound = max(bound, _block_constant(key, e.value, opts))
    return ApproximationCertificate(part, tuple(errors), bound, float(eps), e.value)


def mean_operator(n: int) -> np.ndarray:
    """E on the uniform n-atom space."""
    return np.full((n, n), 1.0 / n)


def block_cond_exp(n: int, blocks: int) -> np.ndarray:
    """E^G for ``blocks`` equal contiguous blocks of the uniform n-grid."""
    if n % blocks:
        raise DomainError(f"{blocks} blocks do not divide {n} cells")
    k = n // blocks
    part = Partition(tuple(tuple(range(j * k, (j + 1) * k)) for j in range(blocks)))
    return cond_exp_matrix(part, FiniteProbSpace.uniform(n))


@lru_cache(maxsize=1024)
def nu_report(gamma: complex, p: ExponentLike, n: int,
              opts: OptimizerOptions = OptimizerOptions()) -> OptReport:
    if int(n) != n or n < 2:
        raise DomainError("n must be an integer >= 2")
    n = int(n)
    A = np.eye(n) - complex(gamma) * mean_operator(n)
    if complex(gamma).imag == 0:
        A = A.real
    return operator_norm(A, FiniteProbSpace.uniform(n), as_exponent(p), opts)


def nu_estimate(gamma: complex, p: ExponentLike, n: int,
                opts: OptimizerOptions = OptimizerOptions()) -> float:
    """||I - gamma E|| on the uniform n-atom space."""
    return nu_report(complex(gamma), as_exponent(p), int(n), opts).value


@dataclass(frozen=True)
class GammaExperiment:
    n: int
    gamma: complex
    lhs_norm: float
    lower: float
    nu: float
    slack: float
    converged: bool


def _check_uniform_operator(T, n: int) -> np.ndarray:
    t = np.asarray(T)
    if t.shape != (n, n):
        raise DomainError(f"operator shape {t.shape} does not match n = {n}")
    return t


def gamma_inequality_experiment(T, gamma: complex, p: ExponentLike, n: int,
                                opts: OptimizerOptions = OptimizerOptions()) -> GammaExperiment:
    """lhs = ||I - T||, lower = inf ||(gamma I - T)u||, nu = ||I - gamma E||.

    ``slack = lhs + lower - nu`` is reported as is. On the nonatomic interval
    it is never negative for compact T; on a grid it can be.
    """
    e = as_exponent(p)
    t = _check_uniform_operator(T, n)
    sp = FiniteProbSpace.uniform(n)
    lhs = operator_norm(np.eye(n) - t, sp, e, opts)
    low = lower_norm(complex(gamma) * np.eye(n) - t, sp, e, opts)
    nu = nu_report(complex(gamma), e, n, opts)
    slack = lhs.value + low.value - nu.value
    return GammaExperiment(n, complex(gamma), lhs.value, low.value, nu.value, slack,
                           lhs.converged and low.converged and nu.converged)


@dataclass(frozen=True)
class GammaSweep:
    rows: Tuple[GammaExperiment, ...]
    persistent_negative: bool

    def to_csv(self) -> str:
        return sweep_csv(((r.n, r.lhs_norm, r.lower, r.nu, r.slack) for r in self.rows),
                         ("n", "lhs_norm", "lower", "nu", "slack"))


def gamma_refinement_sweep(family: Callable[[int], np.ndarray], gamma: complex, p: ExponentLike,
                           ns: Sequence[int] = REFINEMENT_LEVELS,
                           opts: OptimizerOptions = OptimizerOptions()) -> GammaSweep:
    """Run the experiment for ``family(n)`` at each refinement level.

    ``persistent_negative`` is set when the slack is below -1e-3 at every level.
    """
    rows = tuple(gamma_inequality_experiment(family(n), gamma, p, n, opts) for n in ns)
    return GammaSweep(rows, all(r.slack < PERSISTENT_NEGATIVE for r in rows))


def is_sanctioned(T) -> bool:
    """True for block-diagonal sums of scaled means over blocks of >= 2 atoms.

    Covers E, s E, and E^G for partitions without singleton blocks. A
    singleton block with a nonzero entry acts as the identity on that cell,
    which has no compact counterpart on the interval.
    """
    t = np.asarray(T)
    n = t.shape[0]
    nz = np.abs(t) > ZERO_TOL
    ncomp, labels = connected_components(nz | nz.T, directed=False)
    for c in range(ncomp):
        idx = np.flatnonzero(labels == c)
        sub = t[np.ix_(idx, idx)]
        if idx.size == 1:
            if abs(sub[0, 0]) > ZERO_TOL:
                return False
            continue
        level = sub.mean()
        if not np.allclose(sub, level, rtol=0, atol=1e-10):
            return False
    return n >= 1


@dataclass(frozen=True)
class EigenCheck:
    eigenvalues_tested: Tuple[complex, ...]
    slacks: Tuple[float, ...]
    min_slack: float
    lhs_norm: float
    sanctioned: bool
    converged: bool


def eigen_lower_bound_check(T, p: ExponentLike, n: int,
                            opts: OptimizerOptions = OptimizerOptions()) -> EigenCheck:
    """min over eigenvalues gamma of T of ||I - T|| - ||I - gamma E||.

    Eigenvalues are rounded to 10 decimals and deduplicated before use.
    """
    e = as_exponent(p)
    t = _check_uniform_operator(T, n)
    try:
        ev, vecs = np.linalg.eig(t)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(str(exc)) from exc
    scale = max(1.0, float(np.abs(t).sum(axis=1).max()))
    resid = np.abs(t @ vecs - vecs * ev).max() if ev.size else 0.0
    if not np.isfinite(resid) or resid > EIG_RESIDUAL_TOL * scale:
        raise EigenSolverError(f"eigenpair residual {float(resid)!r} exceeds tolerance")
    rounded = np.round(ev.real, 10) + 1j * np.round(ev.imag, 10) + 0.0
    gammas = sorted({complex(g.real + 0.0, g.imag + 0.0) for g in rounded}, key=lambda g: (g.real, g.imag))
    sp = FiniteProbSpace.uniform(n)
    lhs = operator_norm(np.eye(n) - t, sp, e, opts)
    slacks = []
    conv = lhs.converged
    for g in gammas:
        nu = nu_report(g, e, n, opts)
        conv &= nu.converged
        slacks.append(lhs.value - nu.value)
    return EigenCheck(tuple(gammas), tuple(slacks), min(slacks), lhs.value, is_sanctioned(t), conv)
