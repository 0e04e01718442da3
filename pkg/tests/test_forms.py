import numpy as np
import pytest

from hkreduce import coords, forms, jets, potentials, residuals
from hkreduce.forms import TwoForm8
from hkreduce.potentials import GaugeFunction, Potential, apply_gauge

STANDARD = np.kron(np.eye(4), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _quartic_violation():
    def expression(q1, q2, p1, p2):
        return potentials._flat_omega(q1, q2, p1, p2) + 0.05 * jets.abs2(q1) ** 2
    return Potential("flat-omega+0.05|q1|^4", "full", expression)


def test_flat_kahler_form_is_standard(full_grid):
    w1 = forms.omega1_at(potentials.flat_omega(), full_grid)
    np.testing.assert_array_equal(w1.matrix, np.broadcast_to(STANDARD, w1.matrix.shape))


def test_gauge_leaves_kahler_form_alone(full_grid):
    F = GaugeFunction({(1, 2, 0, 0): 0.3 - 1j, (0, 0, 3, 0): 0.2j, (1, 0, 0, 1): 1.5})
    base = potentials.calabi_omega_full()
    x = coords.default_calabi_grid(20)
    a = forms.omega1_at(base, x).matrix
    b = forms.omega1_at(apply_gauge(base, F), x).matrix
    assert np.max(np.abs(a - b)) <= 1e-13


def test_calabi_kahler_form_nondegenerate():
    w1 = forms.omega1_at(potentials.calabi_omega_full(), coords.CalabiPoint(1, 1, 0, -1j).to_real())
    assert abs(np.linalg.det(w1.matrix)) > 1e-3


def test_holomorphic_symplectic_coefficient():
    w2, w3 = forms.omega_plus_at()
    # dq1 ^ dp1 has real part dx_q1 ^ dx_p1 - dy_q1 ^ dy_p1
    assert w2.coefficient(0, 4) == 1.0
    assert w2.coefficient(1, 5) == -1.0
    assert w3.coefficient(0, 5) == 1.0


@pytest.mark.parametrize("t", [0.4, 1.9, -2.7])
def test_phase_rotation_of_plus_form(t):
    w2, w3 = forms.omega_plus_at()
    R = np.eye(8)
    rot = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
    R[4:6, 4:6] = rot
    R[6:8, 6:8] = rot
    # pullback of w+ under p -> e^{it} p is e^{it} w+
    pulled2, pulled3 = R.T @ w2.matrix @ R, R.T @ w3.matrix @ R
    np.testing.assert_allclose(pulled2, np.cos(t) * w2.matrix - np.sin(t) * w3.matrix, atol=1e-15)
    np.testing.assert_allclose(pulled3, np.sin(t) * w2.matrix + np.cos(t) * w3.matrix, atol=1e-15)


def test_plus_forms_have_equal_volume():
    w2, w3 = forms.omega_plus_at()
    a, b = forms.wedge(w2, w2), forms.wedge(w3, w3)
    assert forms.wedge_top(a, a) == forms.wedge_top(b, b) != 0


def test_wedge_commutes_exactly(rng):
    a = TwoForm8.from_matrix(rng.normal(size=(8, 8)))
    b = TwoForm8.from_matrix(rng.normal(size=(8, 8)))
    np.testing.assert_array_equal(forms.wedge(a, b).coeffs, forms.wedge(b, a).coeffs)
    np.testing.assert_array_equal(a.matrix, -a.matrix.T)
    np.testing.assert_array_equal((a - b).matrix, -(a - b).matrix.T)


def test_top_form_of_standard_symplectic():
    w = TwoForm8(STANDARD)
    ww = forms.wedge(w, w)
    assert forms.wedge_top(ww, ww) == 24.0


def test_calibration_constant_is_one():
    assert forms.calibration_constant() == pytest.approx(1.0, abs=1e-15)


def test_flat_defect(full_grid):
    assert forms.hyperkahler_algebra_defect(potentials.flat_omega(), full_grid).max <= 1e-13
    assert forms.hyperkahler_algebra_defect(potentials.flat_omega_prime(), full_grid).max <= 1e-13


def test_calabi_defect(calabi_grid):
    assert forms.hyperkahler_algebra_defect(potentials.calabi_omega_full(), calabi_grid).max <= 1e-8


def test_quartic_violation_is_detected():
    x = coords.default_full_grid(40, 2)
    phase = np.linspace(0, 2 * np.pi, 40, endpoint=False)
    x[:, 0], x[:, 1] = np.cos(phase), np.sin(phase)   # |q1| = 1
    d = forms.hyperkahler_algebra_defect(_quartic_violation(), x)
    assert np.all(d.stack().max(axis=-1) > 1e-3)
    assert residuals.full_residuals(_quartic_violation(), x).sup() > 1e-3


def _oracle_suite():
    suite = {
        "flat-omega": (potentials.flat_omega(), coords.default_full_grid(200), residuals.TOL_FLAT),
        "flat-omega-prime": (potentials.flat_omega_prime(), coords.default_full_grid(200), residuals.TOL_FLAT),
        "lift(flat-H)": (residuals.lift_potential(potentials.flat_H()), coords.default_full_grid(200),
                         residuals.TOL_FLAT),
        "calabi-omega": (potentials.calabi_omega_full(), coords.default_calabi_grid(50), residuals.TOL_CALABI),
        "flat-omega+0.05|q1|^4": (_quartic_violation(), coords.default_full_grid(200), residuals.TOL_FLAT),
    }
    for name, H in potentials.violation_suite().items():
        suite[f"lift({name})"] = (residuals.lift_potential(H), coords.default_full_grid(200), residuals.TOL_FLAT)
    return suite


@pytest.mark.parametrize("name", sorted(_oracle_suite()))
def test_oracles_agree(name):
    pot, x, tol = _oracle_suite()[name]
    ma = residuals.report(pot, "full", x, tol).passed
    algebra = forms.hyperkahler_algebra_defect(pot, x).max <= tol
    assert ma == algebra
