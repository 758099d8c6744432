"""Finite probability spaces and conditional expectation over partitions.

Every sub-sigma-algebra of a finite space is generated by a partition of the
atoms, so ``Partition`` is the only representation of G used here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np

from .constants import ExponentLike, as_exponent
from .errors import DomainError

__all__ = [
    "FiniteProbSpace",
    "RandVar",
    "Partition",
    "expectation",
    "lp_norm",
    "cond_expectation",
    "cond_exp_matrix",
    "centering_ratio",
    "weighted_lp_norm",
]

WEIGHT_SUM_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FiniteProbSpace:
    """Atom weights of a finite probability space; validated, never repaired."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        if w.size < 2:
            raise DomainError("a probability space needs at least 2 atoms")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise DomainError("atom weights must be positive and finite")
        if abs(w.sum() - 1) > WEIGHT_SUM_TOL:
            raise DomainError(f"atom weights sum to {float(w.sum())!r}, not 1")
        object.__setattr__(self, "weights", _frozen(w))

    @classmethod
    def normalize(cls, weights: Iterable[float]) -> "FiniteProbSpace":
        """Rescale positive weights to sum to 1."""
        w = np.array(list(weights), dtype=float)
        if w.size and np.all(w > 0):
            w = w / w.sum()
        return cls(w)

    @classmethod
    def uniform(cls, n: int) -> "FiniteProbSpace":
        return cls(np.full(n, 1.0 / n))

    @property
    def size(self) -> int:
        return self.weights.size

    def __len__(self) -> int:
        return self.weights.size


@dataclass(frozen=True, eq=False)
class RandVar:
    """One complex value per atom."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex).ravel()
        if not np.all(np.isfinite(v)):
            raise DomainError("random variable values must be finite")
        object.__setattr__(self, "values", _frozen(v))

    @classmethod
    def constant(cls, c: complex, n: int) -> "RandVar":
        return cls(np.full(n, c, dtype=complex))

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.values.imag == 0))

    def __len__(self) -> int:
        return self.values.size

    def __sub__(self, other: "RandVar") -> "RandVar":
        return RandVar(self.values - other.values)


@dataclass(frozen=True)
class Partition:
    """Disjoint blocks of atom indices; ``validate(n)`` checks coverage."""

    blocks: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(int(i) for i in b) for b in self.blocks)
        if any(len(b) == 0 for b in blocks):
            raise DomainError("partition blocks must be nonempty")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def trivial(cls, n: int) -> "Partition":
        return cls((tuple(range(n)),))

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(tuple((i,) for i in range(n)))

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Partition":
        """Group atom indices by label, blocks ordered by first appearance."""
        order = {}
        for i, lab in enumerate(labels):
            order.setdefault(lab, []).append(i)
        return cls(tuple(tuple(b) for b in order.values()))

    def validate(self, n: int) -> None:
        seen = [i for b in self.blocks for i in b]
        if len(seen) != len(set(seen)):
            raise DomainError("partition blocks overlap")
        if sorted(seen) != list(range(n)):
            raise DomainError(f"partition does not cover atoms 0..{n - 1} exactly")

    def labels(self, n: int) -> np.ndarray:
        self.validate(n)
        lab = np.empty(n, dtype=int)
        for k, b in enumerate(self.blocks):
            lab[list(b)] = k
        return lab

    def is_singletons(self) -> bool:
        return all(len(b) == 1 for b in self.blocks)


def _check_len(xi: RandVar, sp: FiniteProbSpace) -> None:
    if len(xi) != sp.size:
        raise DomainError(f"random variable has {len(xi)} values but the space has {sp.size} atoms")


def expectation(xi: RandVar, sp: FiniteProbSpace) -> complex:
    _check_len(xi, sp)
    return complex(np.dot(sp.weights, xi.values))


def weighted_lp_norm(values: np.ndarray, weights: np.ndarray, p: float) -> float:
    """(sum w |v|^p)^{1/p}, or max |v| for p = inf; scaled to avoid overflow."""
    a = np.abs(values)
    m = a.max() if a.size else 0.0
    if m == 0 or np.isinf(p):
        return float(m)
    return float(m * np.dot(weights, (a / m) ** p) ** (1.0 / p))


def lp_norm(xi: RandVar, sp: FiniteProbSpace, p: ExponentLike) -> float:
    _check_len(xi, sp)
    return weighted_lp_norm(xi.values, sp.weights, as_exponent(p).value)


def cond_expectation(xi: RandVar, part: Partition, sp: FiniteProbSpace) -> RandVar:
    """Block-wise weighted means of ``xi``.

    Blocks on which ``xi`` is already constant are copied through unchanged,
    which makes the operator exactly idempotent and exactly constant-preserving.
    """
    _check_len(xi, sp)
    part.validate(sp.size)
    out = np.empty(sp.size, dtype=complex)
    for b in part.blocks:
        idx = list(b)
        v = xi.values[idx]
        if np.all(v == v[0]):
            out[idx] = v[0]
        else:
            w = sp.weights[idx]
            out[idx] = np.dot(w / w.sum(), v)
    return RandVar(out)


def cond_exp_matrix(part: Partition, sp: FiniteProbSpace) -> np.ndarray:
    """Dense matrix of E^G: row i holds w_j / P(block(i)) on block(i)."""
    part.validate(sp.size)
    m = np.zeros((sp.size, sp.size))
    for b in part.blocks:
        idx = np.array(b)
        w = sp.weights[idx]
        m[np.ix_(idx, idx)] = w / w.sum()
    return m


def centering_ratio(xi: RandVar, part: Partition, sp: FiniteProbSpace, p: ExponentLike) -> float:
    """||xi - E^G xi||_p / ||xi||_p."""
    e = as_exponent(p)
    denom = lp_norm(xi, sp, e)
    if denom == 0:
        raise DomainError("centering ratio is undefined for the zero random variable")
    return lp_norm(xi - cond_expectation(xi, part, sp), sp, e) / denom
