"""Operator norms and lower norms on weighted finite-dimensional L^p spaces.

The weighted space L^p(w) is mapped isometrically onto unweighted l^p by
``x = w^{1/p} xi``, so a matrix ``A`` acting on L^p(w) becomes
``B = D A D^{-1}`` with ``D = diag(w^{1/p})``. The maximization of
``||Bx||_p / ||x||_p`` uses Boyd's dual-vector fixed-point iteration

    x <- dual_q(B^H dual_p(Bx)),

which never decreases the ratio. Many starts are run as columns of one
array; the starts are processed in fixed-size chunks so the result does not
depend on how many worker threads are used.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np

from .constants import ExponentLike, as_exponent, cp_alpha
from .errors import DomainError
from .prob_core import (
    FiniteProbSpace,
    Partition,
    RandVar,
    cond_exp_matrix,
    weighted_lp_norm,
)

__all__ = [
    "OptimizerOptions",
    "OptReport",
    "OracleResult",
    "operator_norm",
    "lower_norm",
    "cp_of_space",
    "two_value_oracle",
    "THREADS_ENV",
]

THREADS_ENV = "CENTERING_LAB_THREADS"
CHUNK = 16
TINY = 1e-300
BLOCK_AGREEMENT_TOL = 1e-6
ORACLE_MAX_ATOMS = 24


@dataclass(frozen=True)
class OptimizerOptions:
    starts: int = 64
    max_iters: int = 10_000
    tol: float = 1e-10
    seed: int = 0
    workers: Optional[int] = None

    def __post_init__(self):
        if int(self.starts) < 1:
            raise DomainError("starts must be >= 1")
        if not self.tol > 0:
            raise DomainError("tol must be > 0")
        if int(self.max_iters) < 1:
            raise DomainError("max_iters must be >= 1")
        if int(self.seed) < 0:
            raise DomainError("seed must be unsigned")

    def resolved_workers(self) -> int:
        if self.workers is not None:
            return max(1, int(self.workers))
        try:
            return max(1, int(os.environ.get(THREADS_ENV, "1")))
        except ValueError:
            return 1


@dataclass(frozen=True)
class OptReport:
    value: float
    witness: RandVar
    converged: bool
    starts_used: int
    method: str = "ascent"
    cross_check: Optional[float] = None


@dataclass(frozen=True)
class OracleResult:
    value: float
    subset_mass: float


def _as_matrix(A, sp: FiniteProbSpace) -> np.ndarray:
    a = np.asarray(A)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"operator must be a square matrix, got shape {a.shape}")
    if a.shape[0] != sp.size:
        raise DomainError(f"matrix dimension {a.shape[0]} does not match {sp.size} atoms")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix entries must be finite")
    return a


def _phase(v: np.ndarray) -> np.ndarray:
    a = np.abs(v)
    return np.where(a > TINY, v / np.where(a > TINY, a, 1.0), 0.0)


def _colnorm(V: np.ndarray, p: float) -> np.ndarray:
    a = np.abs(V)
    if math.isinf(p):
        return a.max(axis=0)
    m = a.max(axis=0)
    safe = np.where(m > 0, m, 1.0)
    return np.where(m > 0, safe * ((a / safe) ** p).sum(axis=0) ** (1.0 / p), 0.0)


def _dual(V: np.ndarray, p: float) -> np.ndarray:
    """Columnwise dual vectors: unit q-norm and ``<d, v> = ||v||_p``.

    p = inf yields the subgradient concentrated on the maximal entries.
    """
    a = np.abs(V)
    s = _phase(V)
    if math.isinf(p):
        top = a >= a.max(axis=0) * (1 - 1e-12)
        top &= a > TINY
        cnt = np.maximum(top.sum(axis=0), 1)
        return np.where(top, s, 0) / cnt
    nrm = _colnorm(V, p)
    safe = np.where(nrm > 0, nrm, 1.0)
    d = s * (a / safe) ** (p - 1)
    return np.where(nrm > 0, d, 0)


def _start_vector(n: int, seed: int, k: int) -> np.ndarray:
    # even starts: dense complex Gaussian; odd starts: Gaussian on a random
    # support whose density is log-uniform in [1/n, 1]
    rng = np.random.default_rng([int(seed), int(k)])
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    if k % 2 == 1 and n > 1:
        rho = math.exp(rng.uniform(math.log(1.0 / n), 0.0))
        mask = rng.random(n) < rho
        if not mask.any():
            mask[rng.integers(n)] = True
        x = np.where(mask, x, 0)
    return x


def _starts(n: int, opts: OptimizerOptions, ks, p: float) -> np.ndarray:
    X = np.column_stack([_start_vector(n, opts.seed, k) for k in ks])
    return X / _colnorm(X, p)


def _ascent_chunk(B, BH, p, q, X, opts) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    val = _colnorm(B @ X, p)
    best_X = X.copy()
    done = np.zeros(X.shape[1], dtype=bool)
    done |= val == 0
    for _ in range(int(opts.max_iters)):
        idx = np.flatnonzero(~done)
        if idx.size == 0:
            break
        Y = B @ X[:, idx]
        Z = BH @ _dual(Y, p)
        Xn = _dual(Z, q)
        nrm = _colnorm(Xn, p)
        dead = nrm == 0
        Xn = Xn / np.where(dead, 1.0, nrm)
        v = _colnorm(B @ Xn, p)
        gain = v - val[idx]
        improved = (gain > 0) & ~dead
        upd = idx[improved]
        X[:, upd] = Xn[:, improved]
        best_X[:, upd] = Xn[:, improved]
        val[upd] = v[improved]
        stop = dead | (gain <= opts.tol * np.maximum(1.0, v))
        done[idx[stop]] = True
    return val, best_X, done


def _run_chunks(fn, n_starts: int, opts: OptimizerOptions):
    chunks = [range(i, min(i + CHUNK, n_starts)) for i in range(0, n_starts, CHUNK)]
    workers = min(opts.resolved_workers(), len(chunks))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(fn, chunks))
    else:
        results = [fn(c) for c in chunks]
    vals = np.concatenate([r[0] for r in results])
    X = np.concatenate([r[1] for r in results], axis=1)
    conv = np.concatenate([r[2] for r in results])
    return vals, X, conv


def _exact_norm_unweighted(B: np.ndarray, p: float) -> Tuple[float, np.ndarray]:
    """||B||_{p->p} on unweighted l^p for p in {1, inf}, attained at an extreme point."""
    n = B.shape[0]
    if math.isinf(p):
        # the best sign pattern for row i aligns with conj(phase(B_i.))
        rows = np.abs(B).sum(axis=1)
        i = int(np.argmax(rows))
        x = np.conj(_phase(B[i]))
        x = np.where(np.abs(x) > 0, x, 1.0)
        return float(rows[i]), x.astype(complex)
    cols = np.abs(B).sum(axis=0)
    j = int(np.argmax(cols))
    x = np.zeros(n, dtype=complex)
    x[j] = 1.0
    return float(cols[j]), x


def _weight_scaling(sp: FiniteProbSpace, p: float) -> np.ndarray:
    if math.isinf(p):
        return np.ones(sp.size)
    return sp.weights ** (1.0 / p)


def _ascent(B: np.ndarray, p: float, opts: OptimizerOptions):
    n = B.shape[0]
    q = p / (p - 1)
    BH = B.conj().T

    def chunk(ks):
        return _ascent_chunk(B, BH, p, q, _starts(n, opts, ks, p), opts)

    vals, X, conv = _run_chunks(chunk, int(opts.starts), opts)
    k = int(np.argmax(vals))
    return X[:, k], bool(conv[k])


def _report(A, sp, p, xi_values, converged, starts, method) -> OptReport:
    w = sp.weights
    nx = weighted_lp_norm(xi_values, w, p)
    xi_values = xi_values / nx
    value = weighted_lp_norm(A @ xi_values, w, p)
    return OptReport(float(value), RandVar(xi_values), converged, starts, method)


def operator_norm(A, sp: FiniteProbSpace, p: ExponentLike, opts: OptimizerOptions = OptimizerOptions()) -> OptReport:
    """sup_{xi != 0} ||A xi||_p / ||xi||_p on L^p(sp).

    p = 1 and p = inf are evaluated exactly at extreme points of the unit
    ball (basis vectors and sign patterns), p = 2 by an SVD. Other exponents use multistart
    dual-vector ascent; ``converged`` is false when the best start ran out
    of iterations.
    """
    e = as_exponent(p)
    a = _as_matrix(A, sp)
    pv = e.value
    d = _weight_scaling(sp, pv)
    B = (d[:, None] * a) / d[None, :]
    if pv == 1.0 or e.is_infinite:
        _, x = _exact_norm_unweighted(B, pv)
        method = "basis-enumeration" if pv == 1.0 else "sign-enumeration"
        return _report(a, sp, pv, x / d, True, sp.size, method)
    if pv == 2.0:
        # top right singular vector of the rescaled matrix
        x = np.linalg.svd(B)[2][0].conj()
        return _report(a, sp, pv, x / d, True, 1, "svd")
    x, conv = _ascent(B, pv, opts)
    return _report(a, sp, pv, x / d, conv, int(opts.starts), "ascent")


def _descent_chunk(B, BH, p, X, opts):
    S = X.shape[1]
    h = _colnorm(B @ X, p)
    step = np.ones(S)
    done = h == 0
    stopped = done.copy()
    for _ in range(int(opts.max_iters)):
        idx = np.flatnonzero(~done)
        if idx.size == 0:
            break
        Xi = X[:, idx]
        hi = h[idx]
        G = BH @ _dual(B @ Xi, p) - hi * _dual(Xi, p)
        gnorm = _colnorm(G, p)
        Xn = Xi - step[idx] * G / np.where(gnorm > 0, gnorm, 1.0)
        nrm = _colnorm(Xn, p)
        ok = nrm > 0
        Xn = Xn / np.where(ok, nrm, 1.0)
        hn = _colnorm(B @ Xn, p)
        acc = ok & (hn < hi)
        up = idx[acc]
        X[:, up] = Xn[:, acc]
        h[up] = hn[acc]
        small_gain = acc & (hi - hn <= opts.tol * np.maximum(hi, TINY))
        step[up] = np.minimum(step[up] * 2.0, 1.0)
        step[idx[~acc]] *= 0.5
        flat = (gnorm == 0) | small_gain | (step[idx] < 1e-14) | (hn == 0)
        done[idx[flat]] = True
        stopped[idx[flat]] = True
    return h, X, stopped


def lower_norm(A, sp: FiniteProbSpace, p: ExponentLike, opts: OptimizerOptions = OptimizerOptions()) -> OptReport:
    """inf over unit xi of ||A xi||_p.

    Three routes are combined and the smallest witnessed value wins:
    projected subgradient descent on the unit sphere from the seeded starts
    plus the smallest right singular vector; and, when ``A`` is invertible,
    ``1 / ||A^{-1}||``. At p = 2 the result is cross-checked against the
    smallest singular value; disagreement clears ``converged``.
    """
    e = as_exponent(p)
    a = _as_matrix(A, sp)
    pv = e.value
    d = _weight_scaling(sp, pv)
    B = (d[:, None] * a) / d[None, :]
    n = B.shape[0]
    BH = B.conj().T
    _, sing, vh = np.linalg.svd(B)
    svd_start = vh[-1].conj()

    candidates: List[Tuple[float, np.ndarray, bool, str]] = []

    def chunk(ks):
        X = _starts(n, opts, ks, pv)
        if ks[0] == 0:
            X[:, 0] = svd_start / _colnorm(svd_start[:, None], pv)[0]
        return _descent_chunk(B, BH, pv, X, opts)

    vals, X, conv = _run_chunks(chunk, int(opts.starts), opts)
    k = int(np.argmin(vals))
    candidates.append((float(vals[k]), X[:, k], bool(conv[k]), "descent"))

    if sing[-1] > 1e-12 * max(sing[0], TINY):
        Binv = np.linalg.inv(B)
        if pv == 1.0 or e.is_infinite:
            mu, v = _exact_norm_unweighted(Binv, pv)
            exact = True
        else:
            v, exact = _ascent(Binv, pv, opts)
        u = Binv @ v
        val = _colnorm((B @ u)[:, None], pv)[0] / _colnorm(u[:, None], pv)[0]
        candidates.append((float(val), u, exact, "inverse"))

    best = min(candidates, key=lambda c: c[0])
    x = best[1]
    report = _report(a, sp, pv, x / d, best[2], int(opts.starts), best[3])
    if pv == 2.0:
        ok = abs(report.value - sing[-1]) <= 1e-8 * max(1.0, sing[0])
        report = replace(report, converged=report.converged and ok, cross_check=float(sing[-1]))
    return report


def _embed_witness(xi_block: np.ndarray, block, sp: FiniteProbSpace, p: float) -> np.ndarray:
    full = np.zeros(sp.size, dtype=complex)
    mass = sp.weights[list(block)].sum()
    scale = 1.0 if math.isinf(p) else mass ** (-1.0 / p)
    full[list(block)] = xi_block * scale
    return full


def cp_of_space(sp: FiniteProbSpace, part: Partition, p: ExponentLike,
                opts: OptimizerOptions = OptimizerOptions()) -> OptReport:
    """||I - E^G|| on L^p(sp), cross-checked block by block.

    The norm of ``I - E^G`` is the largest of the per-block constants, so
    each block of two or more atoms is solved on its own renormalized space.
    The better witness is returned; ``cross_check`` carries the block value
    and a gap above 1e-6 clears ``converged``.
    """
    e = as_exponent(p)
    pv = e.value
    part.validate(sp.size)
    n = sp.size
    A = np.eye(n) - cond_exp_matrix(part, sp)
    if part.is_singletons():
        return OptReport(0.0, RandVar(np.ones(n, dtype=complex)), True, 0, "exact", 0.0)
    full = operator_norm(A, sp, e, opts)
    if len(part.blocks) == 1:
        return full

    best_block = None
    for b in part.blocks:
        if len(b) < 2:
            continue
        sub = FiniteProbSpace.normalize(sp.weights[list(b)])
        k = len(b)
        r = operator_norm(np.eye(k) - cond_exp_matrix(Partition.trivial(k), sub), sub, e, opts)
        if best_block is None or r.value > best_block[0].value:
            best_block = (r, b)
    r, b = best_block
    agree = abs(r.value - full.value) <= BLOCK_AGREEMENT_TOL
    conv = full.converged and r.converged and agree
    if r.value > full.value:
        embedded = _report(A, sp, pv, _embed_witness(r.witness.values, b, sp, pv), conv,
                           full.starts_used, full.method)
        return replace(embedded, cross_check=full.value)
    return OptReport(full.value, full.witness, conv, full.starts_used, full.method, r.value)


def two_value_oracle(sp: FiniteProbSpace, p: ExponentLike) -> OracleResult:
    """max over proper nonempty atom subsets S of C_p(P(S)).

    Each split is evaluated once: subsets of all atoms but the last cover
    every split up to complement, and C_p(alpha) = C_p(1 - alpha).
    """
    e = as_exponent(p)
    if e.is_infinite or e.value <= 1:
        raise DomainError("two_value_oracle needs 1 < p < inf")
    if sp.size > ORACLE_MAX_ATOMS:
        raise DomainError(f"two_value_oracle enumerates subsets; at most {ORACLE_MAX_ATOMS} atoms")
    sums = np.zeros(1)
    for w in sp.weights[:-1]:
        sums = np.unique(np.concatenate([sums, sums + w]))
    masses = sums[sums > 0]
    masses = np.clip(masses, 1e-300, 1 - 1e-16)
    vals = cp_alpha(e, masses)
    vals = np.atleast_1d(vals)
    k = int(np.argmax(vals))
    m = float(masses[k])
    return OracleResult(float(vals[k]), min(m, 1 - m))
