import numpy as np
import pytest

from hkreduce import brackets, coords, jets, potentials
from hkreduce.coords import FullPoint, ReducedPoint


def rho(q, zeta, v, rho):
    return rho


def v_(q, zeta, v, rho):
    return v


def zeta_(q, zeta, v, rho):
    return zeta


def q_(q, zeta, v, rho):
    return q


def re_q(q, zeta, v, rho):
    return jets.real(q)


def test_rho_v_bracket():
    x = ReducedPoint(0.3 + 0.4j, -0.2j, 0.5, 0.0).to_real()
    assert brackets.reduced_bracket(rho, v_, x) == pytest.approx(-1j, abs=1e-15)


def test_zeta_q_bracket():
    x = ReducedPoint(0.3 + 0.4j, -0.2j, 0.5, np.log(2)).to_real()
    assert brackets.reduced_bracket(zeta_, q_, x) == pytest.approx(0.5, abs=1e-15)


def test_darboux_pairs(full_grid):
    def p1(q1, q2, p1, p2):
        return p1

    def q1(q1, q2, p1, p2):
        return q1

    def q2(q1, q2, p1, p2):
        return q2

    np.testing.assert_allclose(brackets.original_bracket(p1, q1, full_grid), 1.0, atol=1e-15)
    np.testing.assert_allclose(brackets.original_bracket(p1, q2, full_grid), 0.0, atol=1e-15)


def test_modulus_bracket():
    def mod(q1, q2, p1, p2):
        return jets.abs2(p1)

    def q1(q1, q2, p1, p2):
        return q1

    x = FullPoint(0.1, 0.2j, 2j, 1).to_real()
    assert brackets.original_bracket(mod, q1, x) == pytest.approx(-2j, abs=1e-15)


def test_antisymmetry_and_bilinearity(rng, reduced_grid):
    f, g, h = (brackets.random_cubic(rng) for _ in range(3))
    x = reduced_grid[:30]
    fg = brackets.reduced_bracket(f, g, x)
    np.testing.assert_allclose(brackets.reduced_bracket(g, f, x), -fg, atol=1e-12)

    def combo(**kw):
        return 2.5 * f(**kw) - 0.75 * h(**kw)

    lhs = brackets.reduced_bracket(combo, g, x)
    rhs = 2.5 * fg - 0.75 * brackets.reduced_bracket(h, g, x)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * (1 + np.max(np.abs(rhs)))


def test_original_antisymmetry(rng, full_grid):
    f = brackets.pullback(brackets.random_cubic(rng))
    g = brackets.pullback(brackets.random_cubic(rng))
    x = full_grid[:30]
    a = brackets.original_bracket(f, g, x)
    np.testing.assert_allclose(brackets.original_bracket(g, f, x), -a, atol=1e-12 * (1 + np.max(np.abs(a))))


def test_leibniz(rng, reduced_grid):
    f, g, h = (brackets.random_cubic(rng) for _ in range(3))
    x = reduced_grid[:30]

    def gh(**kw):
        return g(**kw) * h(**kw)

    gv, hv = g(**coords.REDUCED.values(x)), h(**coords.REDUCED.values(x))
    lhs = brackets.reduced_bracket(f, gh, x)
    rhs = brackets.reduced_bracket(f, g, x) * hv + gv * brackets.reduced_bracket(f, h, x)
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * (1 + np.max(np.abs(rhs)))


def test_jacobi_on_coordinates(reduced_grid):
    d = brackets.jacobi_defect(v_, rho, re_q, reduced_grid[:20])
    np.testing.assert_array_equal(d, 0)


def test_jacobi_degenerate_slot(rng, reduced_grid):
    H = potentials.flat_H()
    d = brackets.jacobi_defect(H, H, brackets.random_cubic(rng), reduced_grid[:20])
    assert np.max(np.abs(d)) <= 1e-12


def test_jacobi_suite():
    assert brackets.jacobi_suite(100, seed=1).max() <= 1e-10


def test_jacobi_suite_rejects_no_trials():
    with pytest.raises(ValueError):
        brackets.jacobi_suite(0)


def _flat_H_rho(q, zeta, v, rho):
    return jets.exp(rho) * (1 + jets.abs2(zeta))


def test_remark2_flat_pair(full_grid):
    d = brackets.remark2_relation_defect(_flat_H_rho, potentials.flat_H(), full_grid)
    assert np.max(np.abs(d)) <= 1e-10


def test_remark2_coordinate_pair(full_grid):
    d = brackets.remark2_relation_defect(q_, zeta_, full_grid)
    assert np.max(np.abs(d)) <= 1e-12


def test_remark2_constant(full_grid):
    d = brackets.remark2_relation_defect(lambda q, zeta, v, rho: 3.0, potentials.flat_H(), full_grid)
    np.testing.assert_array_equal(d, 0)


def test_remark2_random_pairs(rng, full_grid):
    worst = 0.0
    for k in range(20):
        f, g = brackets.random_cubic(rng), brackets.random_cubic(rng)
        x = full_grid[5 * k:5 * k + 5]
        worst = max(worst, np.max(np.abs(brackets.remark2_relation_defect(f, g, x))))
    assert worst <= 1e-10


def test_remark2_rejects_p1_zero():
    with pytest.raises(jets.DomainError):
        brackets.remark2_relation_defect(q_, zeta_, FullPoint(1, 1, 0, 1).to_real())
