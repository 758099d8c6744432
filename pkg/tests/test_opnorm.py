import numpy as np
import pytest

from centering_lab.constants import cp_alpha, max_cp, uniform_n_constant
from centering_lab.errors import DomainError
from centering_lab.opnorm import OptimizerOptions, cp_of_space, lower_norm, operator_norm, two_value_oracle
from centering_lab.prob_core import FiniteProbSpace, Partition, cond_exp_matrix
from oracles import (brute_lp_ratio_signs, brute_opnorm_1, brute_opnorm_inf, two_atom_ratio_bruteforce,
                     uniform_two_value_bruteforce)

OPTS = OptimizerOptions(starts=32)


@pytest.mark.parametrize("alpha", [0.05, 0.3, 0.5, 0.8])
@pytest.mark.parametrize("p", [1.3, 3.0, 7.0])
def test_two_atom_against_bruteforce(alpha, p):
    sp = FiniteProbSpace([alpha, 1 - alpha])
    r = cp_of_space(sp, Partition.trivial(2), p, OPTS)
    assert r.converged
    assert r.value == pytest.approx(two_atom_ratio_bruteforce(alpha, p), abs=1e-8)
    assert r.value == pytest.approx(cp_alpha(p, alpha), abs=1e-9)


@pytest.mark.parametrize("n", [3, 5, 9, 16])
@pytest.mark.parametrize("p", [1.5, 3.0, 10.0])
def test_uniform_against_two_value_bruteforce(n, p):
    sp = FiniteProbSpace.uniform(n)
    r = cp_of_space(sp, Partition.trivial(n), p)
    assert r.value == pytest.approx(float(uniform_two_value_bruteforce(n, p)), abs=1e-8)


def test_witness_reproduces_value():
    sp = FiniteProbSpace([0.1, 0.2, 0.3, 0.4])
    A = np.eye(4) - cond_exp_matrix(Partition.trivial(4), sp)
    r = operator_norm(A, sp, 3)
    x = r.witness.values
    w = sp.weights
    ratio = (w @ np.abs(A @ x) ** 3) ** (1 / 3) / (w @ np.abs(x) ** 3) ** (1 / 3)
    assert ratio == pytest.approx(r.value, abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_extreme_exponents_exact(seed):
    rng = np.random.default_rng(seed)
    n = 6
    sp = FiniteProbSpace.normalize(rng.random(n) + 0.1)
    A = rng.standard_normal((n, n))
    assert operator_norm(A, sp, "inf").value == pytest.approx(brute_opnorm_inf(A, sp.weights), abs=1e-12)
    assert operator_norm(A, sp, 1).value == pytest.approx(brute_opnorm_1(A, sp.weights), abs=1e-12)


@pytest.mark.parametrize("seed", range(4))
def test_random_matrix_dominates_sign_vectors(seed):
    rng = np.random.default_rng(seed)
    n = 7
    sp = FiniteProbSpace.normalize(rng.random(n) + 0.1)
    A = rng.standard_normal((n, n))
    r = operator_norm(A, sp, 3)
    assert r.value >= brute_lp_ratio_signs(A, sp.weights, 3) - 1e-9


def test_p2_is_largest_singular_value():
    rng = np.random.default_rng(3)
    sp = FiniteProbSpace.normalize(rng.random(5) + 0.2)
    A = rng.standard_normal((5, 5))
    d = np.sqrt(sp.weights)
    s = np.linalg.svd(d[:, None] * A / d[None, :], compute_uv=False)
    assert operator_norm(A, sp, 2).value == pytest.approx(s[0], abs=1e-12)
    low = lower_norm(A, sp, 2)
    assert low.value == pytest.approx(s[-1], abs=1e-8)
    assert low.cross_check == pytest.approx(s[-1])


def test_lower_norm_singular_and_diagonal():
    sp = FiniteProbSpace.uniform(4)
    E = np.full((4, 4), 0.25)
    assert lower_norm(np.eye(4) - E, sp, 3).value <= 1e-10
    D = np.diag([3.0, 2.0, 0.5, 4.0])
    for p in (1, 1.5, 3, "inf"):
        assert lower_norm(D, sp, p).value == pytest.approx(0.5, abs=1e-9)


def test_cp_of_space_block_structure():
    sp = FiniteProbSpace([0.1, 0.2, 0.3, 0.4])
    part = Partition(((0, 1), (2, 3)))
    r = cp_of_space(sp, part, 3)
    # blockwise renormalized two-point constants
    expect = max(cp_alpha(3, 1 / 3), cp_alpha(3, 3 / 7))
    assert r.value == pytest.approx(expect, abs=1e-9)
    assert r.cross_check == pytest.approx(expect, abs=1e-9)
    assert cp_of_space(sp, Partition.singletons(4), 3).value == 0


def test_cp_of_space_bounded_by_cp():
    rng = np.random.default_rng(11)
    for _ in range(10):
        n = int(rng.integers(2, 7))
        sp = FiniteProbSpace.normalize(rng.random(n) + 0.05)
        part = Partition.from_labels(rng.integers(0, 3, size=n).tolist())
        for p in (1.5, 4.0):
            assert cp_of_space(sp, part, p, OPTS).value <= max_cp(p).value + 1e-9


def test_three_point_example():
    tau, p = 0.01, 3
    a = max_cp(p).argmax_alpha
    sp = FiniteProbSpace([tau * (1 - a), tau * a, 1 - tau])
    assert cp_of_space(sp, Partition(((0, 1), (2,))), p).value == pytest.approx(max_cp(p).value, abs=1e-6)
    assert cp_of_space(sp, Partition.trivial(3), p).value <= 1 + tau ** (1 / 3) + tau ** (2 / 3) + 1e-6


@pytest.mark.parametrize("n", [3, 4])
@pytest.mark.parametrize("p", [1.5, 2.5, 3.0, 4.0])
def test_uniform_closed_form(n, p):
    v = cp_of_space(FiniteProbSpace.uniform(n), Partition.trivial(n), p).value
    assert v == pytest.approx(uniform_n_constant(p, n).value, abs=1e-6)


def test_two_value_oracle():
    sp = FiniteProbSpace([0.1, 0.2, 0.3, 0.4])
    o = two_value_oracle(sp, 3)
    best = max(cp_alpha(3, m) for m in (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7))
    assert o.value == pytest.approx(best, abs=1e-12)
    with pytest.raises(DomainError):
        two_value_oracle(FiniteProbSpace.uniform(30), 3)


def test_determinism_and_threads(monkeypatch):
    sp = FiniteProbSpace.normalize(np.arange(1, 11))
    A = np.random.default_rng(0).standard_normal((10, 10))
    r1 = operator_norm(A, sp, 3.5, OptimizerOptions(seed=5))
    r2 = operator_norm(A, sp, 3.5, OptimizerOptions(seed=5, workers=4))
    monkeypatch.setenv("CENTERING_LAB_THREADS", "3")
    r3 = operator_norm(A, sp, 3.5, OptimizerOptions(seed=5))
    assert r1.value == r2.value == r3.value
    assert np.array_equal(r1.witness.values, r3.witness.values)


def test_shape_errors():
    with pytest.raises(DomainError):
        operator_norm(np.eye(3), FiniteProbSpace.uniform(4), 2)
    with pytest.raises(DomainError):
        operator_norm(np.ones((2, 3)), FiniteProbSpace.uniform(2), 2)
    with pytest.raises(DomainError):
        OptimizerOptions(starts=0)
