"""
Polarization algebra for the weak interaction.

States are Jones vectors over the linear {H, V} basis; the circular basis
uses R = (H - iV)/sqrt(2) and L = (H + iV)/sqrt(2). The observable coupled
to the meter is A = |L><L| - |R><R|, so every evolution operator here is
diagonal in the {R, L} basis.

Functions
=========
u_phi                -- polarization rotation exp(2i phi1 A)
u_w                  -- weak interaction exp(2i omega t A)
measurement_operator -- <psi_j| U_w U_phi |psi_i> for the cavity ports
measurement_matrix   -- all four measurement operators, vectorized over t
weak_value           -- exact weak value of A for given selections
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, WeakValueSingular

HV = "HV"
RL = "RL"

# columns are |R>, |L> written in {H, V} coordinates
_RL_TO_HV = np.array([[1.0, 1.0], [-1.0j, 1.0j]]) / np.sqrt(2.0)
_HV_TO_RL = _RL_TO_HV.conj().T


def _check_finite(**values):
    for name, value in values.items():
        if not np.all(np.isfinite(value)):
            raise DomainError(f"{name} must be finite, got {value!r}")


def canonical_phase(vec):
    """Remove the global phase so the first nonzero entry is real positive."""
    vec = np.asarray(vec, dtype=complex)
    nonzero = np.flatnonzero(np.abs(vec) > 1e-15)
    if nonzero.size == 0:
        return vec.copy()
    lead = vec[nonzero[0]]
    return vec * (abs(lead) / lead)


@dataclass(frozen=True)
class PolarizationState:
    """Normalized Jones vector h|H> + v|V>."""

    h: complex
    v: complex

    def __post_init__(self):
        h, v = complex(self.h), complex(self.v)
        _check_finite(h=h, v=v)
        norm = np.sqrt(abs(h) ** 2 + abs(v) ** 2)
        if norm == 0.0:
            raise DomainError("zero vector is not a polarization state")
        object.__setattr__(self, "h", h / norm)
        object.__setattr__(self, "v", v / norm)

    @classmethod
    def from_vector(cls, vec, basis=HV):
        vec = np.asarray(vec, dtype=complex)
        if basis == RL:
            vec = _RL_TO_HV @ vec
        elif basis != HV:
            raise DomainError(f"unknown basis {basis!r}")
        return cls(vec[0], vec[1])

    @classmethod
    def from_rl(cls, r, l):
        return cls.from_vector([r, l], basis=RL)

    @property
    def vector(self):
        return np.array([self.h, self.v])

    def to_rl(self):
        """Return the (R, L) amplitudes."""
        r, l = _HV_TO_RL @ self.vector
        return complex(r), complex(l)

    def inner(self, other):
        """<self|other>"""
        return complex(np.vdot(self.vector, other.vector))

    def canonical(self):
        return PolarizationState.from_vector(canonical_phase(self.vector))

    def equivalent(self, other, atol=1e-12):
        """Equality modulo a global phase."""
        return bool(np.allclose(canonical_phase(self.vector), canonical_phase(other.vector), rtol=0, atol=atol))


H = PolarizationState(1.0, 0.0)
V = PolarizationState(0.0, 1.0)
R = PolarizationState.from_rl(1.0, 0.0)
L = PolarizationState.from_rl(0.0, 1.0)


@dataclass(frozen=True)
class LinearOperator2:
    """A 2x2 complex operator together with the basis its entries refer to."""

    matrix: np.ndarray = field(repr=True)
    basis: str = HV

    def __post_init__(self):
        if self.basis not in (HV, RL):
            raise DomainError(f"unknown basis {self.basis!r}")
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise DomainError(f"operator must be 2x2, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def in_basis(self, basis):
        if basis == self.basis:
            return self
        if basis == RL:
            return LinearOperator2(_HV_TO_RL @ self.matrix @ _RL_TO_HV, RL)
        if basis == HV:
            return LinearOperator2(_RL_TO_HV @ self.matrix @ _HV_TO_RL, HV)
        raise DomainError(f"unknown basis {basis!r}")

    @property
    def hv(self):
        return self.in_basis(HV).matrix

    @property
    def rl(self):
        return self.in_basis(RL).matrix

    def __getitem__(self, index):
        return complex(self.matrix[index])

    def __matmul__(self, other):
        if isinstance(other, LinearOperator2):
            return LinearOperator2(self.matrix @ other.in_basis(self.basis).matrix, self.basis)
        if isinstance(other, PolarizationState):
            return PolarizationState.from_vector(self.hv @ other.vector)
        return NotImplemented

    def dagger(self):
        return LinearOperator2(self.matrix.conj().T, self.basis)

    def det(self):
        return complex(np.linalg.det(self.matrix))

    def is_unitary(self, atol=1e-12):
        return bool(np.allclose(self.matrix.conj().T @ self.matrix, np.eye(2), rtol=0, atol=atol))

    def is_hermitian(self, atol=1e-12):
        return bool(np.allclose(self.matrix, self.matrix.conj().T, rtol=0, atol=atol))

    def expectation(self, bra, ket):
        """<bra| O |ket>"""
        return complex(np.vdot(bra.vector, self.hv @ ket.vector))


def observable_a():
    """A = |L><L| - |R><R|, eigenvalue -1 on R and +1 on L."""
    return LinearOperator2(np.diag([-1.0, 1.0]), RL)


def _rl_rotation(angle):
    # exp(i * angle * A), A = diag(-1, +1) over (R, L)
    return LinearOperator2(np.diag([np.exp(-1j * angle), np.exp(1j * angle)]), RL)


def u_phi(phi1):
    """Polarization rotation exp(2i*phi1*A) set by the pre-selection half-wave plate."""
    _check_finite(phi1=phi1)
    return _rl_rotation(2.0 * phi1)


def u_w(omega, t):
    """Weak interaction exp(2i*omega*t*A) of the rotating half-wave plate."""
    _check_finite(omega=omega, t=t)
    return _rl_rotation(2.0 * omega * t)


@dataclass(frozen=True)
class SelectionAngles:
    """Half-wave plate angle `phi1` and analyser angle `phi2`."""

    phi1: float
    phi2: float = 0.0

    @property
    def phi(self):
        return 2.0 * self.phi1 - self.phi2

    def pre_state(self):
        return u_phi(self.phi1) @ V

    def post_state(self):
        return post_selected_state(self.phi2)


def post_selected_state(phi2):
    """Analyser state cos(phi2)|H> - sin(phi2)|V>."""
    _check_finite(phi2=phi2)
    return PolarizationState(np.cos(phi2), -np.sin(phi2))


def post_selected_state_circular_form(phi2):
    """The circular-basis expansion (i/sqrt2)[e^{-2i phi2}|R> + e^{2i phi2}|L>].

    This equals the analyser state at angle 2*phi2, not phi2; it is kept for
    comparison against :func:`post_selected_state`, which is definitional.
    """
    _check_finite(phi2=phi2)
    scale = 1j / np.sqrt(2.0)
    return PolarizationState.from_rl(scale * np.exp(-2j * phi2), scale * np.exp(2j * phi2))


PORT_STATES = {1: V, 2: H}


def measurement_operator(i, j, phi, omega, t):
    """Scalar <psi_j| U_w(omega, t) U_phi(phi/2) |psi_i> with psi_1 = V, psi_2 = H.

    Evaluated from the state algebra; `t` may be a scalar or an array.
    """
    if i not in PORT_STATES or j not in PORT_STATES:
        raise DomainError(f"port indices must be 1 or 2, got ({i}, {j})")
    return measurement_matrix(phi, omega, t)[..., i - 1, j - 1]


def measurement_matrix(phi, omega, t):
    """Array [..., i-1, j-1] = M_ij over the (vectorized) time argument."""
    _check_finite(phi=phi, omega=omega, t=t)
    angle = phi + 2.0 * omega * np.asarray(t, dtype=float)
    diag = np.zeros(angle.shape + (2, 2), dtype=complex)
    diag[..., 0, 0] = np.exp(-1j * angle)
    diag[..., 1, 1] = np.exp(1j * angle)
    op = _RL_TO_HV @ diag @ _HV_TO_RL
    kets = np.stack([V.vector, H.vector])  # rows: psi_1, psi_2
    # out[..., i, j] = <psi_j| op |psi_i>
    out = np.einsum("jk,...kl,il->...ij", kets.conj(), op, kets)
    if np.max(np.abs(out.imag), initial=0.0) > 1e-12:
        raise AssertionError("measurement operators acquired an imaginary part")
    return out.real


def weak_value(pre, post, eps=1e-14, observable=None):
    """Exact weak value <post|A|pre> / <post|pre>."""
    observable = observable_a() if observable is None else observable
    overlap = post.inner(pre)
    if abs(overlap) < eps:
        raise WeakValueSingular(abs(overlap))
    return observable.expectation(post, pre) / overlap


def weak_value_small_angle(phi):
    """Leading-order weak value -i/phi for the angle phi = 2*phi1 - phi2."""
    return -1j / phi
