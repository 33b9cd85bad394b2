import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from cyclicwv import jones
from cyclicwv.errors import DomainError, WeakValueSingular

SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])

angles = st.floats(-3.0, 3.0, allow_nan=False)


def hv_rotation(angle):
    # independent oracle: exp(i * angle * sigma_y) in the linear basis
    return expm(1j * angle * SIGMA_Y)


def test_circular_basis_vectors():
    assert np.allclose(jones.R.vector, np.array([1.0, -1.0j]) / np.sqrt(2))
    assert np.allclose(jones.L.vector, np.array([1.0, 1.0j]) / np.sqrt(2))
    assert abs(jones.R.inner(jones.L)) < 1e-15


def test_observable_is_sigma_y():
    a = jones.observable_a()
    assert np.allclose(a.hv, SIGMA_Y, atol=1e-15)
    assert a.is_hermitian()
    assert np.allclose(a.rl, np.diag([-1.0, 1.0]))


def test_u_phi_examples():
    assert np.allclose(jones.u_phi(0.0).hv, np.eye(2), atol=1e-15)
    # 2*phi1 = pi/2: V -> H
    out = jones.u_phi(np.pi / 4) @ jones.V
    assert out.equivalent(jones.H)
    out = jones.u_phi(0.05) @ jones.V
    assert np.allclose(out.vector, [np.sin(0.1), np.cos(0.1)], atol=1e-15)


@given(angles)
def test_u_phi_matches_matrix_exponential(phi1):
    u = jones.u_phi(phi1)
    assert u.is_unitary()
    assert abs(u.det() - 1.0) < 1e-12
    assert np.allclose(u.hv, hv_rotation(2 * phi1), atol=1e-12)


@given(angles, st.floats(-1e3, 1e3), st.floats(-1.0, 1.0))
def test_u_w_unitary(phi1, omega, t):
    u = jones.u_w(omega, t) @ jones.u_phi(phi1)
    assert u.is_unitary(atol=1e-10)


@given(st.complex_numbers(max_magnitude=10), st.complex_numbers(max_magnitude=10))
def test_basis_round_trip(h, v):
    if abs(h) + abs(v) < 1e-3:
        return
    state = jones.PolarizationState(h, v)
    back = jones.PolarizationState.from_rl(*state.to_rl())
    assert np.allclose(back.vector, state.vector, atol=1e-12)


def test_operator_basis_round_trip():
    m = np.array([[1.0, 2.0j], [0.5, -1.0]])
    op = jones.LinearOperator2(m)
    assert np.allclose(op.in_basis(jones.RL).in_basis(jones.HV).matrix, m)


def test_zero_state_rejected():
    with pytest.raises(DomainError):
        jones.PolarizationState(0, 0)
    with pytest.raises(DomainError):
        jones.u_phi(np.nan)


def test_pre_selected_state():
    sel = jones.SelectionAngles(0.05, 0.0)
    pre = sel.pre_state()
    assert np.allclose(pre.vector, [np.sin(0.1), np.cos(0.1)], atol=1e-15)
    # (i/sqrt2)[e^{-i phi}|R> - e^{i phi}|L>]
    r, l = pre.to_rl()
    assert np.isclose(r, 1j * np.exp(-0.1j) / np.sqrt(2), atol=1e-15)
    assert np.isclose(l, -1j * np.exp(0.1j) / np.sqrt(2), atol=1e-15)


@given(st.floats(-1.5, 1.5))
def test_circular_post_selection_form_is_double_angle(phi2):
    # the (i/sqrt2)[e^{-2i phi2} R + e^{2i phi2} L] expansion is the analyser at 2*phi2
    circ = jones.post_selected_state_circular_form(phi2)
    assert circ.equivalent(jones.post_selected_state(2 * phi2))


def test_circular_post_selection_form_differs_at_phi2():
    circ = jones.post_selected_state_circular_form(0.1)
    assert not circ.equivalent(jones.post_selected_state(0.1))


@given(st.floats(-1.0, 1.0), st.floats(-1e3, 1e3), st.floats(-5e-3, 5e-3))
def test_measurement_matrix_against_exponential(phi, omega, t):
    u = hv_rotation(phi + 2 * omega * t)
    kets = {1: jones.V.vector, 2: jones.H.vector}
    m = jones.measurement_matrix(phi, omega, t)
    for i in (1, 2):
        for j in (1, 2):
            expected = np.vdot(kets[j], u @ kets[i])
            assert abs(m[i - 1, j - 1] - expected) < 1e-12


def test_measurement_operators_closed_values():
    theta = 0.1 + 2 * 1e-3 * 0.5
    assert np.isclose(jones.measurement_operator(1, 1, 0.1, 1e-3, 0.5), np.cos(theta), atol=1e-15)
    assert np.isclose(jones.measurement_operator(1, 2, 0.1, 1e-3, 0.5), np.sin(theta), atol=1e-15)
    assert np.isclose(jones.measurement_operator(2, 1, 0.1, 1e-3, 0.5), -np.sin(theta), atol=1e-15)
    assert np.isclose(jones.measurement_operator(2, 2, 0.1, 1e-3, 0.5), np.cos(theta), atol=1e-15)
    with pytest.raises(DomainError):
        jones.measurement_operator(3, 1, 0.1, 0.0, 0.0)


def test_measurement_matrix_vectorized():
    t = np.linspace(-1, 1, 7)
    m = jones.measurement_matrix(0.2, 3.0, t)
    assert m.shape == (7, 2, 2)
    assert np.allclose(m[:, 0, 1], np.sin(0.2 + 6.0 * t))


@pytest.mark.parametrize("phi", [0.01, 0.05, 0.1, 0.2])
def test_weak_value_exact_and_small_angle(phi):
    sel = jones.SelectionAngles(phi / 2, 0.0)
    aw = jones.weak_value(sel.pre_state(), sel.post_state())
    assert np.isclose(aw, -1j / np.tan(phi), rtol=1e-12)
    assert abs(aw.real) < 1e-12
    # cot(phi) - 1/phi = -phi/3 - phi^3/45 - ...
    assert abs(aw.imag + 1 / phi) <= phi / 3 + phi**3 / 30
    assert np.isclose(jones.weak_value_small_angle(phi), -1j / phi)


@given(st.floats(0.01, 0.5), st.floats(-0.5, 0.5))
def test_weak_value_depends_on_phi_only(phi, phi2):
    sel = jones.SelectionAngles((phi + phi2) / 2, phi2)
    assert np.isclose(sel.phi, phi)
    aw = jones.weak_value(sel.pre_state(), sel.post_state())
    assert np.isclose(aw, -1j / np.tan(phi), rtol=1e-9)


def test_weak_value_singular():
    with pytest.raises(WeakValueSingular) as info:
        jones.weak_value(jones.V, jones.H)
    assert info.value.overlap < 1e-14
