import numpy as np
import pytest

from centering_lab.constants import cp_alpha, max_cp
from centering_lab.errors import DomainError
from centering_lab.interval import (BetaAlgebra, GridFunction, beta_for_target, discretize_check,
                                    gbeta_cond_exp, gbeta_extremal, gbeta_norm, jbeta_inverse, jbeta_map,
                                    paired_grid, sweep_csv)


def test_jbeta_is_measure_scaling_bijection():
    b = BetaAlgebra(0.3)
    x = np.linspace(0.3, 1.0, 11)
    y = jbeta_map(b, x)
    assert y.min() >= 0 and y.max() <= 0.3 + 1e-15
    assert np.allclose(jbeta_inverse(b, y), x)
    # decreasing pairing: the right end of [beta, 1] meets 0
    assert jbeta_map(b, 1.0) == pytest.approx(0.0)
    assert jbeta_map(b, 0.3) == pytest.approx(0.3)


def test_cond_exp_of_constant_and_callable():
    b = BetaAlgebra(0.3)
    g = gbeta_cond_exp(b, GridFunction(10, np.full(10, 0.7)))
    assert np.all(g.values == 0.7)
    h = gbeta_cond_exp(b, lambda x: np.where(x < 0.3, 1.0, 0.0))
    assert h(0.1) == pytest.approx(0.3) and h(0.8) == pytest.approx(0.3)


def test_cond_exp_idempotent_and_pair_constant():
    b = BetaAlgebra(0.25)
    f = GridFunction.from_callable(lambda x: np.sin(7 * x) + x ** 2, 8)
    g = gbeta_cond_exp(b, f)
    assert np.array_equal(gbeta_cond_exp(b, g).values, g.values)
    # compare at interior points of the refined cells; edges are a null set
    mids = 0.5 * (g.edges[:-1] + g.edges[1:])
    for x in mids[mids > 0.25]:
        assert g(x) == pytest.approx(g(jbeta_map(b, x)), abs=1e-12)
    assert g.lp_norm(3) <= f.lp_norm(3) + 1e-12


def test_paired_grid_maps_cells_onto_cells():
    b = BetaAlgebra(0.3)
    e = paired_grid(b, 10)
    m = (e.size - 1) // 2
    assert e[0] == 0 and e[m] == pytest.approx(0.3) and e[-1] == 1
    # refines the original grid and J_beta sends right edges onto left edges
    assert all(np.min(np.abs(e - t)) < 1e-12 for t in np.linspace(0, 1, 11))
    assert np.allclose(np.sort(jbeta_map(b, e[m:])), e[:m + 1])
    assert m == 9


@pytest.mark.parametrize("p", [1.5, 3, 6])
def test_norm_is_cp_beta(p):
    for beta in (0.1, 0.3, 0.5, 0.8):
        assert gbeta_norm(BetaAlgebra(beta), p) == pytest.approx(cp_alpha(p, beta), abs=1e-15)


def test_norm_extremes():
    assert gbeta_norm(BetaAlgebra(0.3), "inf") == pytest.approx(1.4)
    assert gbeta_norm(BetaAlgebra(0.3), 1) == pytest.approx(1.4)
    assert gbeta_norm(BetaAlgebra(0.5), "inf") == pytest.approx(1.0)


@pytest.mark.parametrize("p", [1.5, 3, 10])
@pytest.mark.parametrize("beta", [0.1, 0.3, 0.7])
def test_extremal_attains_norm(p, beta):
    b = BetaAlgebra(beta)
    ext = gbeta_extremal(b, p)
    assert ext.ratio == pytest.approx(gbeta_norm(b, p), abs=1e-10)
    w = np.array([beta, 1 - beta])
    assert (w[1] * abs(ext.xi.values[1]) ** p) / (w @ np.abs(ext.xi.values) ** p) == pytest.approx(ext.gamma_star)


@pytest.mark.parametrize("p", [1, 2, 3, "inf"])
@pytest.mark.parametrize("beta,cells", [(0.3, 10), (0.25, 8), (0.5, 4)])
def test_discretize_matches_closed_form(p, beta, cells):
    r = discretize_check(BetaAlgebra(beta), p, cells)
    assert r.converged
    assert r.numeric_norm == pytest.approx(r.analytic_norm, abs=1e-6)


def test_discretize_rejects_incompatible_grid():
    with pytest.raises(DomainError):
        discretize_check(BetaAlgebra(0.3), 3, 7)
    with pytest.raises(DomainError):
        discretize_check(BetaAlgebra(0.5), 3, 1000)


@pytest.mark.parametrize("p", [1.5, 3, 8, "inf", 1])
def test_beta_for_target(p):
    top = max_cp(p).value
    for c in (1.0, (1 + top) / 2, top):
        t = beta_for_target(p, c)
        assert abs(t.value - c) <= 1e-9


def test_beta_for_target_trivial_and_range():
    assert beta_for_target("inf", 2.0).trivial
    with pytest.raises(DomainError):
        beta_for_target(3, 1.2)


def test_sweep_csv_crlf():
    text = sweep_csv([(1, 0.1234567890123456, "x,y")], ("a", "b", "c"))
    assert text == 'a,b,c\r\n1,0.123456789012,"x,y"\r\n'


def test_grid_function_validation():
    with pytest.raises(DomainError):
        GridFunction(3, [1, 2])
    with pytest.raises(DomainError):
        GridFunction(2, [1, 2], [0.0, 0.7, 0.9])
    with pytest.raises(DomainError):
        BetaAlgebra(1.0)
