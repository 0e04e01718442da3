import numpy as np
import pytest

from hkreduce import residuals, solver
from hkreduce.solver import BasisExpansion, SolveConfig


@pytest.fixture(scope="module")
def pts():
    return solver.collocation_points(60, seed=0)


def test_basis_size_and_order():
    E = solver.monomial_exponents(3)
    assert len(E) == 84
    np.testing.assert_array_equal(E[0], 0)
    assert list(E.sum(axis=1)) == sorted(E.sum(axis=1))
    assert solver.monomial_label(E[0]) == "1"
    assert solver.monomial_label([0, 0, 2, 0, 0, 1]) == "zeta.re^2*s"


def test_wrong_coefficient_count():
    with pytest.raises(ValueError):
        BasisExpansion(np.zeros(10), 3)


def test_flat_coefficients_are_a_root(pts):
    assert np.max(np.abs(solver.residual_vector(BasisExpansion.flat(3), pts))) <= 1e-13


def test_zero_coefficients_give_negated_targets(pts):
    r = solver.residual_vector(BasisExpansion.zeros(3), pts).reshape(-1, 6, 2)
    x = pts.points
    want = np.zeros_like(r)
    want[:, 0, 0] = want[:, 1, 0] = -1
    want[:, 2, 0], want[:, 2, 1] = -x[:, 2], x[:, 3]
    np.testing.assert_array_equal(r, want)


def test_cubic_v_term(pts):
    c = BasisExpansion.flat(3).coefficients.copy()
    c += BasisExpansion.from_terms({(0, 0, 0, 0, 3, 0): 0.1}, 3).coefficients
    r = solver.residual_vector(BasisExpansion(c, 3), pts).reshape(-1, 6, 2)
    np.testing.assert_allclose(r[:, 0, 0], 0.6 * pts.points[:, 4], atol=1e-13)
    np.testing.assert_allclose(r[:, 0, 1], 0, atol=1e-13)


def test_potential_matches_collocation_residuals(pts, rng):
    c = BasisExpansion(BasisExpansion.flat(3).coefficients + 0.1 * rng.normal(size=84), 3)
    jet_res = residuals.reduced_residuals(c.potential(), pts.points).stack()
    r = solver.residual_vector(c, pts).reshape(-1, 6, 2)
    np.testing.assert_allclose(r[..., 0] + 1j * r[..., 1], jet_res, atol=1e-12)


def test_jacobian_against_finite_differences(pts, rng):
    c = BasisExpansion(BasisExpansion.flat(3).coefficients + 0.1 * rng.normal(size=84), 3)
    J = solver.residual_jacobian(c, pts)
    h = 1e-6
    for k in rng.choice(84, 8, replace=False):
        d = np.zeros(84)
        d[k] = h
        fd = (solver.residual_vector(BasisExpansion(c.coefficients + d, 3), pts)
              - solver.residual_vector(BasisExpansion(c.coefficients - d, 3), pts)) / (2 * h)
        assert np.max(np.abs(J[:, k] - fd)) <= 1e-7 * (1 + np.max(np.abs(fd)))


def test_jacobian_at_flat_is_rank_deficient(pts):
    J = solver.residual_jacobian(BasisExpansion.flat(3), pts)
    rank = np.linalg.matrix_rank(J)
    assert 0 < rank < 84


def test_jacobian_at_zero(pts):
    J = solver.residual_jacobian(BasisExpansion.zeros(3), pts)
    # residuals are homogeneous quadratic plus constant: no linear part at c = 0
    np.testing.assert_array_equal(J, 0)


def test_constant_column_vanishes(pts):
    J = solver.residual_jacobian(BasisExpansion.flat(3), pts)
    np.testing.assert_array_equal(J[:, 0], 0)


def test_flat_start_converges_immediately(pts):
    out = solver.solve(BasisExpansion.flat(3), pts)
    assert out.converged and out.iterations == 0


def test_recovery_from_noise():
    p = solver.collocation_points(400, seed=0)
    out = solver.solve(solver.perturbed_start(3, 1e-2, seed=0), p)
    assert out.converged
    assert out.iterations <= 50
    assert out.sup_history[-1] <= 1e-8
    assert np.all(np.diff(out.rms_history) <= 0)
    fresh = solver.collocation_points(400, seed=1)
    assert solver.verify_on(out.coefficients, fresh) <= 1e-7


@pytest.mark.parametrize("seed", [3, 11, 41])
def test_recovery_other_seeds(seed):
    p = solver.collocation_points(400, seed=seed)
    out = solver.solve(solver.perturbed_start(3, 1e-2, seed=seed), p)
    assert out.converged and out.sup_history[-1] <= 1e-8


def test_degree_one_cannot_solve(pts):
    out = solver.solve(BasisExpansion.zeros(1), pts, SolveConfig(max_iter=20))
    assert not out.converged
    assert min(out.sup_history) > 0.1


def test_solve_is_deterministic():
    p = solver.collocation_points(100, seed=2)
    a = solver.solve(solver.perturbed_start(3, 1e-2, seed=5), p)
    b = solver.solve(solver.perturbed_start(3, 1e-2, seed=5), p)
    assert a.coefficients.coefficients.tobytes() == b.coefficients.coefficients.tobytes()
    assert a.sup_history == b.sup_history


def test_config_validation():
    with pytest.raises(ValueError):
        SolveConfig(max_iter=0)
    with pytest.raises(ValueError):
        SolveConfig(tol=-1.0)


def test_collocation_validation():
    with pytest.raises(ValueError):
        solver.collocation_points(0)
    with pytest.raises(ValueError):
        solver.collocation_points(10, box={**solver.DEFAULT_BOX, "s": (-1.0, 1.0)})
