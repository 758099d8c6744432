import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from centering_lab.constants import max_cp
from centering_lab.errors import DomainError
from centering_lab.prob_core import (FiniteProbSpace, Partition, RandVar, centering_ratio, cond_exp_matrix,
                                     cond_expectation, expectation, lp_norm)


@st.composite
def instances(draw, max_atoms=8):
    n = draw(st.integers(2, max_atoms))
    w = np.array(draw(st.lists(st.floats(0.01, 1.0), min_size=n, max_size=n)))
    labels = draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    re = draw(st.lists(st.floats(-10, 10), min_size=n, max_size=n))
    im = draw(st.lists(st.floats(-10, 10), min_size=n, max_size=n))
    p = draw(st.floats(1.0, 25.0))
    return FiniteProbSpace.normalize(w), Partition.from_labels(labels), RandVar(np.array(re) + 1j * np.array(im)), p


def test_space_validation():
    with pytest.raises(DomainError):
        FiniteProbSpace([1.0])
    with pytest.raises(DomainError):
        FiniteProbSpace([0.5, 0.6])
    with pytest.raises(DomainError):
        FiniteProbSpace([1.5, -0.5])
    assert FiniteProbSpace.normalize([1, 3]).weights.tolist() == [0.25, 0.75]
    assert len(FiniteProbSpace.uniform(5)) == 5


def test_partition_helpers():
    part = Partition.from_labels([2, 0, 2, 1])
    assert part.blocks == ((0, 2), (1,), (3,))
    assert part.labels(4).tolist() == [0, 1, 0, 2]
    with pytest.raises(DomainError):
        Partition(((0, 1), (1, 2))).validate(3)
    with pytest.raises(DomainError):
        Partition(((0,),)).validate(2)
    assert Partition.singletons(3).is_singletons()


def test_expectation_and_norm():
    sp = FiniteProbSpace([0.25, 0.75])
    xi = RandVar([4.0, -4.0])
    assert expectation(xi, sp) == -2.0
    assert lp_norm(xi, sp, 3) == pytest.approx(4.0)
    assert lp_norm(RandVar([1.0, 3.0]), sp, "inf") == 3.0
    assert lp_norm(RandVar([1.0, 3.0]), sp, 1) == pytest.approx(2.5)
    with pytest.raises(DomainError):
        expectation(RandVar([1.0, 2.0, 3.0]), sp)


def test_cond_expectation_blocks():
    sp = FiniteProbSpace([0.1, 0.2, 0.3, 0.4])
    part = Partition(((0, 3), (1, 2)))
    ex = cond_expectation(RandVar([1.0, 2.0, 3.0, 4.0]), part, sp)
    assert ex.values.real.tolist() == pytest.approx([3.4, 2.6, 2.6, 3.4])
    assert np.allclose(cond_exp_matrix(part, sp) @ np.array([1.0, 2, 3, 4]), ex.values.real)


def test_trivial_and_singleton_partitions():
    sp = FiniteProbSpace([0.2, 0.3, 0.5])
    xi = RandVar([1.0, -2.0, 5.0])
    assert np.allclose(cond_expectation(xi, Partition.trivial(3), sp).values, expectation(xi, sp))
    assert np.array_equal(cond_expectation(xi, Partition.singletons(3), sp).values, xi.values)
    assert centering_ratio(xi, Partition.singletons(3), sp, 3) == 0


def test_zero_variable_ratio_rejected():
    sp = FiniteProbSpace.uniform(3)
    with pytest.raises(DomainError):
        centering_ratio(RandVar.constant(0, 3), Partition.trivial(3), sp, 2)


@settings(max_examples=300, deadline=None)
@given(instances())
def test_projection_invariants(inst):
    sp, part, xi, p = inst
    ex = cond_expectation(xi, part, sp)
    # exact idempotence and constant preservation
    assert np.array_equal(cond_expectation(ex, part, sp).values, ex.values)
    c = RandVar.constant(2 - 1j, sp.size)
    assert np.array_equal(cond_expectation(c, part, sp).values, c.values)
    # contraction and tower property
    assert lp_norm(ex, sp, p) <= lp_norm(xi, sp, p) * (1 + 1e-12) + 1e-12
    assert expectation(ex, sp) == pytest.approx(expectation(xi, sp), abs=1e-9)


@settings(max_examples=300, deadline=None)
@given(instances())
def test_centering_ratio_bounded(inst):
    sp, part, xi, p = inst
    if lp_norm(xi, sp, p) == 0:
        return
    assert centering_ratio(xi, part, sp, p) <= max_cp(p).value + 1e-9
