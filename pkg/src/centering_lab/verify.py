"""Seeded invariant suites for every module.

Each check records its inputs and the numbers it compared, never wall-clock
time, so a report is a pure function of (suite, seed, starts).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Tuple

import numpy as np

from . import bcap, constants, interval, mixture, opnorm, prob_core
from .constants import cp_alpha, max_cp, riesz_thorin_bound, uniform_n_constant
from .interval import BetaAlgebra, GridFunction
from .opnorm import OptimizerOptions
from .prob_core import FiniteProbSpace, Partition, RandVar

__all__ = ["Check", "SUITES", "run_suite", "run_all", "random_instance", "random_functions",
           "sanctioned_family", "DUALITY_PS"]

DUALITY_PS = (1.1, 1.25, 1.5, 2.0, 3.0, 4.0, 8.0, 16.0)


@dataclass
class Check:
    name: str
    passed: bool
    details: Dict = field(default_factory=dict)


def random_instance(rng: np.random.Generator, max_atoms: int = 8):
    """A random (space, partition, xi, p) with 2..max_atoms atoms."""
    n = int(rng.integers(2, max_atoms + 1))
    sp = FiniteProbSpace.normalize(rng.dirichlet(np.ones(n)) + 1e-3)
    part = Partition.from_labels(rng.integers(0, n, size=n).tolist())
    xi = RandVar(rng.standard_normal(n) + 1j * rng.standard_normal(n) * (rng.random() < 0.5))
    p = float(np.exp(rng.uniform(np.log(1.05), np.log(20.0))))
    return sp, part, xi, p


def random_functions(rng: np.random.Generator, cells: int = 40, count: int = 3) -> List[GridFunction]:
    """Smooth-ish random step functions: partial sums of a few sines."""
    x = (np.arange(cells) + 0.5) / cells
    out = []
    for _ in range(count):
        a = rng.standard_normal(4)
        v = sum(a[k] * np.sin((k + 1) * np.pi * x + a[(k + 1) % 4]) for k in range(4))
        out.append(GridFunction(cells, v))
    return out


def sanctioned_family(n: int) -> Dict[str, np.ndarray]:
    """E, 0.5 E and E^G for four grid partitions of the uniform n-grid."""
    sp = FiniteProbSpace.uniform(n)
    interleaved = Partition((tuple(range(0, n, 2)), tuple(range(1, n, 2))))
    return {
        "E": bcap.mean_operator(n),
        "E^G halves": bcap.block_cond_exp(n, 2),
        "E^G quarters": bcap.block_cond_exp(n, 4),
        "E^G eighths": bcap.block_cond_exp(n, 8),
        "E^G interleaved": prob_core.cond_exp_matrix(interleaved, sp),
        "0.5 E": 0.5 * bcap.mean_operator(n),
    }


def _suite_constants(seed: int, opts: OptimizerOptions) -> List[Check]:
    c3 = (17 + 7 * np.sqrt(7)) ** (1 / 3) / 3
    c4 = (1 + 2 * np.sqrt(3) / 3) ** 0.25
    out = [
        Check("closed form C_3", abs(max_cp(3).value - c3) <= 1e-9, {"value": max_cp(3).value, "expected": c3}),
        Check("closed form C_4", abs(max_cp(4).value - c4) <= 1e-9, {"value": max_cp(4).value, "expected": c4}),
    ]
    for p in DUALITY_PS:
        a, b = max_cp(p).value, max_cp(p / (p - 1)).value
        out.append(Check(f"duality and interpolation bound p={p:g}",
                         abs(a - b) <= 1e-9 and a <= riesz_thorin_bound(p) + 1e-12,
                         {"C_p": a, "C_q": b, "bound": riesz_thorin_bound(p)}))
    rng = np.random.default_rng([seed, 1])
    worst = -np.inf
    worst_ext = 0.0
    for _ in range(200):
        p = float(np.exp(rng.uniform(np.log(1.05), np.log(20.0))))
        alpha = float(rng.uniform(1e-6, 1 - 1e-6))
        worst = max(worst, cp_alpha(p, alpha) - max_cp(p).value)
        ext = constants.extremal_two_point(p, alpha)
        worst_ext = max(worst_ext, abs(ext.ratio - cp_alpha(p, alpha)))
    out.append(Check("extremal two-point law attains C_p(alpha)", worst_ext <= 1e-9, {"max gap": worst_ext}))
    out.append(Check("C_p(alpha) below its maximum", worst <= 1e-12, {"max excess": worst}))
    return out


def _suite_prob_core(seed: int, opts: OptimizerOptions) -> List[Check]:
    rng = np.random.default_rng([seed, 2])
    violations = 0
    worst = -np.inf
    idem = 0.0
    contract = 0.0
    for _ in range(2000):
        sp, part, xi, p = random_instance(rng)
        r = prob_core.centering_ratio(xi, part, sp, p)
        worst = max(worst, r - max_cp(p).value)
        violations += r > max_cp(p).value + 1e-9
        ex = prob_core.cond_expectation(xi, part, sp)
        idem = max(idem, float(np.abs(prob_core.cond_expectation(ex, part, sp).values - ex.values).max()))
        contract = max(contract, prob_core.lp_norm(ex, sp, p) - prob_core.lp_norm(xi, sp, p))
    return [
        Check("centering ratio bounded by C_p", violations == 0,
              {"trials": 2000, "violations": violations, "max excess": worst}),
        Check("conditional expectation idempotent", idem <= 1e-12, {"max deviation": idem}),
        Check("conditional expectation contractive", contract <= 1e-12, {"max growth": contract}),
    ]


def _suite_opnorm(seed: int, opts: OptimizerOptions) -> List[Check]:
    out = []
    gap = 0.0
    for p in (1.5, 3.0, 6.0):
        for alpha in (0.05, 0.2, 0.4, 0.7):
            sp = FiniteProbSpace([alpha, 1 - alpha])
            v = opnorm.cp_of_space(sp, Partition.trivial(2), p, opts).value
            gap = max(gap, abs(v - cp_alpha(p, alpha)))
    out.append(Check("two-point sharpness", gap <= 1e-6, {"max gap": gap}))
    gap = 0.0
    for n in (3, 4):
        for p in (1.5, 2.5, 3.0, 4.0):
            v = opnorm.cp_of_space(FiniteProbSpace.uniform(n), Partition.trivial(n), p, opts).value
            gap = max(gap, abs(v - uniform_n_constant(p, n).value))
    out.append(Check("uniform n = 3, 4 closed form", gap <= 1e-6, {"max gap": gap}))
    gap = 0.0
    for n in (5, 8, 12):
        for p in (1.5, 3.0):
            sp = FiniteProbSpace.uniform(n)
            v = opnorm.cp_of_space(sp, Partition.trivial(n), p, opts).value
            gap = max(gap, abs(v - opnorm.two_value_oracle(sp, p).value))
    out.append(Check("uniform space agrees with two-value oracle", gap <= 1e-6, {"max gap": gap}))
    tau, p = 0.01, 3.0
    a = max_cp(p).argmax_alpha
    sp = FiniteProbSpace([tau * (1 - a), tau * a, 1 - tau])
    v = opnorm.cp_of_space(sp, Partition(((0, 1), (2,))), p, opts).value
    out.append(Check("three-point example attains C_3", abs(v - max_cp(p).value) <= 1e-6,
                     {"value": v, "C_3": max_cp(p).value}))
    v = opnorm.cp_of_space(sp, Partition.trivial(3), p, opts).value
    bound = 1 + tau ** (1 / p) + tau ** (1 - 1 / p)
    out.append(Check("three-point example, trivial partition", v <= bound + 1e-6, {"value": v, "bound": bound}))
    return out


def _suite_mixture(seed: int, opts: OptimizerOptions) -> List[Check]:
    rng = np.random.default_rng([seed, 4])
    recon = 0.0
    bad = 0
    for _ in range(300):
        d = mixture.random_zero_mean(rng, int(rng.integers(2, 11)))
        mix = mixture.decompose_zero_mean(d)
        marg = mix.marginal()
        recon = max(recon, max(abs(marg.get(v, 0.0) - m) for v, m in d.atoms))
        bad += len(mix.components) > len(d) - 1
        bad += any(abs(c.mean) > 1e-10 or c.value1 * c.value2 >= 0 for _, c in mix.components)
    ratio_bad = 0
    for _ in range(100):
        sp, _, xi, p = random_instance(rng)
        xi = RandVar(xi.values.real)
        if np.all(xi.values == xi.values[0]):
            continue
        r = mixture.verify_ratio_via_mixture(xi, sp, p)
        ratio_bad += not (r.ratio <= r.component_max + 1e-9 <= max_cp(p).value + 2e-9)
    return [
        Check("decomposition reconstructs", recon <= 1e-10 and bad == 0, {"max error": recon, "bad": bad}),
        Check("mixture bound dominates ratio", ratio_bad == 0, {"violations": ratio_bad}),
    ]


def _suite_interval(seed: int, opts: OptimizerOptions) -> List[Check]:
    out = []
    gap = 0.0
    for p in (1.0, 1.5, 3.0, np.inf):
        for beta in (0.1, 0.3, 0.5):
            b = BetaAlgebra(beta)
            r = interval.discretize_check(b, p, 10, opts)
            gap = max(gap, abs(r.numeric_norm - r.analytic_norm))
    out.append(Check("discretized norm matches closed form", gap <= 1e-6, {"max gap": gap}))
    gap = 0.0
    for p in (1.5, 3.0, 8.0):
        for beta in (0.1, 0.3, 0.5):
            b = BetaAlgebra(beta)
            gap = max(gap, abs(interval.gbeta_extremal(b, p).ratio - interval.gbeta_norm(b, p)))
    out.append(Check("extremal step function attains the norm", gap <= 1e-10, {"max gap": gap}))
    gap = 0.0
    for p in (1.5, 3.0, np.inf):
        top = max_cp(p).value
        for c in (1.0, (1 + top) / 2, top):
            t = interval.beta_for_target(p, c)
            gap = max(gap, abs(t.value - c))
    out.append(Check("bisection hits target norms", gap <= 1e-9, {"max gap": gap}))
    return out


def _suite_bcap(seed: int, opts: OptimizerOptions) -> List[Check]:
    rng = np.random.default_rng([seed, 6])
    out = []
    bad = 0
    for _ in range(10):
        p = float(rng.choice([1.5, 2.0, 3.0]))
        eps = float(rng.uniform(0.05, 0.5))
        cert = bcap.build_bcap_approximant(random_functions(rng), p, eps, opts)
        bad += max(cert.per_function_error) >= eps or cert.norm_bound > max_cp(p).value + 1e-9
    out.append(Check("certificates meet eps and the C_p bound", bad == 0, {"batches": 10, "violations": bad}))
    ns = (2, 4, 8, 16, 32, 64)
    nus = [bcap.nu_estimate(1, 3.0, n, opts) for n in ns]
    top = max_cp(3).value
    mono = all(b >= a - 1e-6 for a, b in zip(nus, nus[1:]))
    out.append(Check("nu(1) nondecreasing along doubling n, below C_3",
                     mono and max(nus) <= top + 1e-6 and top - nus[-1] <= 5e-3,
                     {"n": list(ns), "nu": nus, "C_3": top}))
    n = 32
    slacks = {}
    for name, T in sanctioned_family(n).items():
        slacks[name] = bcap.eigen_lower_bound_check(T, 3.0, n, opts).min_slack
    out.append(Check("sanctioned operators: eigenvalue slack >= -1e-4 at n = 32",
                     min(slacks.values()) >= -1e-4, {"min_slack": slacks}))
    return out


SUITES: Dict[str, Callable[[int, OptimizerOptions], List[Check]]] = {
    "constants": _suite_constants,
    "prob_core": _suite_prob_core,
    "opnorm": _suite_opnorm,
    "mixture": _suite_mixture,
    "interval": _suite_interval,
    "bcap": _suite_bcap,
}


def run_suite(name: str, seed: int = 0, opts: OptimizerOptions = OptimizerOptions()) -> List[Check]:
    return SUITES[name](seed, opts)


def run_all(seed: int = 0, opts: OptimizerOptions = OptimizerOptions(),
            names: Tuple[str, ...] = tuple(SUITES)) -> Dict:
    """Report dict: per-suite checks plus an overall ``passed`` flag."""
    suites = []
    for name in names:
        checks = run_suite(name, seed, opts)
        suites.append({
            "suite": name,
            "passed": all(c.passed for c in checks),
            "checks": [{"name": c.name, "passed": c.passed, "details": c.details} for c in checks],
        })
    return {"seed": seed, "passed": all(s["passed"] for s in suites), "suites": suites}
