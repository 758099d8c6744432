"""Splitting a zero-mean discrete law into zero-mean two-point laws.

Every zero-mean distribution on the line is a mixture of two-point laws with
zero mean. The greedy pairing below produces such a mixture with at most
``atoms - 1`` components; feeding each component to the two-point bound
C_p(alpha) bounds the centering ratio of the original variable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .constants import ExponentLike, TwoPointDistribution, as_exponent, cp_alpha
from .errors import DomainError
from .prob_core import FiniteProbSpace, Partition, RandVar, centering_ratio, expectation

__all__ = [
    "DiscreteDistribution",
    "MixtureDecomposition",
    "MixtureRatio",
    "decompose_zero_mean",
    "strip_zero_atoms",
    "verify_ratio_via_mixture",
    "random_zero_mean",
]

MASS_TOL = 1e-12
MEAN_TOL = 1e-10
RESIDUE = 1e-14


@dataclass(frozen=True)
class DiscreteDistribution:
    atoms: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        atoms = tuple((float(v), float(m)) for v, m in self.atoms)
        if any(not m > 0 for _, m in atoms):
            raise DomainError("atom masses must be positive")
        if abs(sum(m for _, m in atoms) - 1) > MASS_TOL:
            raise DomainError("atom masses must sum to 1")
        vals = [v for v, _ in atoms]
        if len(set(vals)) != len(vals):
            raise DomainError("atom values must be pairwise distinct")
        object.__setattr__(self, "atoms", atoms)

    @property
    def mean(self) -> float:
        return float(sum(v * m for v, m in self.atoms))

    def __len__(self) -> int:
        return len(self.atoms)


@dataclass(frozen=True)
class MixtureDecomposition:
    components: Tuple[Tuple[float, TwoPointDistribution], ...]

    def marginal(self) -> dict:
        """Mass carried at each value, summed over components."""
        out: dict = {}
        for w, d in self.components:
            out[d.value1] = out.get(d.value1, 0.0) + w * d.mass1
            out[d.value2] = out.get(d.value2, 0.0) + w * d.mass2
        return out


@dataclass(frozen=True)
class MixtureRatio:
    ratio: float
    component_max: float


def strip_zero_atoms(d: DiscreteDistribution) -> DiscreteDistribution:
    """Drop atoms at 0 and renormalize; the mean stays zero if it was."""
    kept = [(v, m) for v, m in d.atoms if v != 0]
    total = sum(m for _, m in kept)
    return DiscreteDistribution(tuple((v, m / total) for v, m in kept))


def _zero_mean_pair(neg: float, pos: float) -> TwoPointDistribution:
    # masses proportional to the other value's magnitude
    span = pos - neg
    return TwoPointDistribution(neg, pos / span, pos, -neg / span)


def decompose_zero_mean(d: DiscreteDistribution) -> MixtureDecomposition:
    """Greedy pairing of the heaviest negative and heaviest positive atoms.

    Each step forms the zero-mean law on the two chosen values and gives it
    the largest weight that does not overdraw either atom, so every step
    exhausts at least one atom.
    """
    if len(d) < 2:
        raise DomainError("need at least 2 atoms")
    if abs(d.mean) > MEAN_TOL:
        raise DomainError(f"distribution mean {d.mean!r} is not zero")
    if any(v == 0 for v, _ in d.atoms):
        raise DomainError("zero-valued atom present; call strip_zero_atoms first")

    neg = {v: m for v, m in d.atoms if v < 0}
    pos = {v: m for v, m in d.atoms if v > 0}
    comps: List[Tuple[float, TwoPointDistribution]] = []

    def heaviest(pool):
        return min(pool.items(), key=lambda vm: (-vm[1], vm[0]))[0]

    while neg and pos:
        a, b = heaviest(neg), heaviest(pos)
        pair = _zero_mean_pair(a, b)
        w = min(neg[a] / pair.mass1, pos[b] / pair.mass2)
        comps.append((w, pair))
        neg[a] -= w * pair.mass1
        pos[b] -= w * pair.mass2
        for pool, v in ((neg, a), (pos, b)):
            if pool[v] <= RESIDUE:
                del pool[v]

    leftover = sum(neg.values()) + sum(pos.values())
    if leftover > 1e3 * MEAN_TOL:
        raise DomainError(f"unpaired mass {leftover!r} left over; mean is not zero")
    return MixtureDecomposition(tuple(comps))


def verify_ratio_via_mixture(xi: RandVar, sp: FiniteProbSpace, p: ExponentLike) -> MixtureRatio:
    """Centering ratio of ``xi`` next to the mixture bound max_k C_p(alpha_k).

    ``alpha_k`` is the smaller mass of the k-th two-point component of
    ``xi - E xi``. The bound never drops below the ratio.
    """
    e = as_exponent(p)
    if e.is_infinite or e.value <= 1:
        raise DomainError("need 1 < p < inf")
    if not xi.is_real:
        raise DomainError("mixture route needs a real-valued random variable")
    vals = xi.values.real
    if np.all(vals == vals[0]):
        raise DomainError("constant xi")
    if len(xi) != sp.size:
        raise DomainError("random variable length does not match the space")
    eta = vals - expectation(xi, sp).real
    grouped: dict = {}
    for v, w in zip(eta, sp.weights):
        if v != 0:
            grouped[v] = grouped.get(v, 0.0) + w
    total = sum(grouped.values())
    dist = DiscreteDistribution(tuple((v, m / total) for v, m in sorted(grouped.items())))
    # renormalizing away zero atoms rescales the mean, which stays ~0
    mix = decompose_zero_mean(dist)
    component_max = max(float(cp_alpha(e, min(c.mass1, c.mass2))) for _, c in mix.components)
    ratio = centering_ratio(xi, Partition.trivial(sp.size), sp, e)
    return MixtureRatio(ratio, component_max)


def random_zero_mean(rng: np.random.Generator, atoms: int) -> DiscreteDistribution:
    """A random zero-mean law with ``atoms`` distinct nonzero values."""
    if atoms < 2:
        raise DomainError("need at least 2 atoms")
    while True:
        m = rng.dirichlet(np.ones(atoms))
        v = rng.standard_normal(atoms)
        v = v - np.dot(m, v)
        if np.all(v != 0) and len(set(v)) == atoms and (v > 0).any() and (v < 0).any():
            return DiscreteDistribution(tuple(zip(v.tolist(), (m / m.sum()).tolist())))

