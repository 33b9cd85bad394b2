"""
Recycling cavities around the polarization weak measurement.

Closed forms
------------
factor_A      -- amplitude gain of power (or signal) recycling
factor_B      -- amplitude gain of dual recycling
factor_B_non  -- dual gain degraded by walk-off when no filter is used
walkoff_shift -- time shift of the unfiltered power-recycled pointer

Series engine
-------------
traversal_sum    -- explicit sum over traversal numbers, pointwise in t
detected_profile -- |traversal_sum|^2 as a DetectionProfile

The closed forms use cos(phi) in every denominator and a 4*omega*tau^2
prefactor for the walk-off shift; `factor_A_printed` and
`walkoff_shift_printed` keep the cos(2 phi) / 2*omega*tau^2 variants for
comparison against the series.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import jones
from .errors import ConvergenceError, DegenerateCavity, DegenerateSelection, DomainError
from .meter import DetectionProfile, SampledAmplitude, TimeGrid, check_regime, sample_initial, standard_shift

SCHEMES = ("standard", "power", "signal", "dual")


def _check_mirror(r, gamma):
    if not (np.isfinite(r) and 0.0 <= r < 1.0):
        raise DomainError(f"reflection coefficient must lie in [0, 1), got {r}")
    if not (np.isfinite(gamma) and 0.0 <= gamma < 1.0):
        raise DomainError(f"loss must lie in [0, 1), got {gamma}")


@dataclass(frozen=True)
class CavityConfig:
    """Cavity description shared by the closed forms and the series engine.

    `r` is the amplitude reflectivity of the (first) partially transmitting
    mirror, `gamma` the single-pass power loss. For the dual scheme `r2`
    sets the second mirror; it defaults to `r`.
    """

    scheme: str = "standard"
    r: float = 0.0
    gamma: float = 0.0
    filter_enabled: bool = True
    epsilon: float = 1e-12
    n_cap: int = 100_000
    t_cav: float = 0.0
    r2: float | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise DomainError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        _check_mirror(self.r, self.gamma)
        if self.r2 is not None:
            _check_mirror(self.r2, self.gamma)
        if self.scheme == "standard" and (self.r != 0.0 or self.r2 not in (None, 0.0)):
            raise DomainError("the standard scheme has no cavity mirror (r must be 0)")
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")
        if int(self.n_cap) != self.n_cap or self.n_cap < 1:
            raise DomainError("n_cap must be a positive integer")
        if not np.isfinite(self.t_cav):
            raise DomainError("t_cav must be finite")

    @property
    def p(self):
        return np.sqrt(1.0 - self.r**2)

    @property
    def loss_amplitude(self):
        """Amplitude survival sqrt(1 - gamma) per return."""
        return np.sqrt(1.0 - self.gamma)

    @property
    def second_r(self):
        return self.r if self.r2 is None else self.r2


# --------------------------------------------------------------------------
# closed forms


def factor_A(r, gamma, phi):
    """Power/signal-recycling gain sqrt(1-r^2) / (1 - r sqrt(1-gamma) cos(phi))."""
    _check_mirror(r, gamma)
    denom = 1.0 - r * np.sqrt(1.0 - gamma) * np.cos(phi)
    if denom <= 0:
        raise DegenerateCavity(f"round-trip gain reaches unity (1 - rL cos phi = {denom})")
    return np.sqrt(1.0 - r**2) / denom


def factor_A_printed(r, gamma, phi):
    """Variant of `factor_A` with cos(2 phi) in the denominator."""
    _check_mirror(r, gamma)
    denom = 1.0 - r * np.sqrt(1.0 - gamma) * np.cos(2.0 * phi)
    if denom <= 0:
        raise DegenerateCavity(f"round-trip gain reaches unity (denominator {denom})")
    return np.sqrt(1.0 - r**2) / denom


def _dual_denominator(r, gamma, phi):
    loss = np.sqrt(1.0 - gamma)
    denom = 1.0 + (1.0 - gamma) * r**2 - 2.0 * loss * r * np.cos(phi)
    if denom <= 0:
        raise DegenerateCavity(f"dual cavity denominator vanishes ({denom})")
    return denom


def factor_B(r, gamma, phi):
    """Dual-recycling gain (1-r^2) / (1 + (1-gamma) r^2 - 2 sqrt(1-gamma) r cos(phi))."""
    _check_mirror(r, gamma)
    return (1.0 - r**2) / _dual_denominator(r, gamma, phi)


def walkoff_xi(r, gamma, phi):
    """Walk-off degradation of the unfiltered dual scheme (ratio of its shift to 4 omega tau^2/phi)."""
    _check_mirror(r, gamma)
    if np.sin(phi) == 0:
        raise DegenerateSelection("sin(phi) = 0")
    g = r**2 * (1.0 - gamma)
    num = np.cos(phi) * (1.0 + g) - 2.0 * r * np.sqrt(1.0 - gamma)
    return phi * num / (np.sin(phi) * _dual_denominator(r, gamma, phi))


def factor_B_non(r, gamma, phi):
    """(B_non, xi) for a dual cavity without the profile filter."""
    xi = walkoff_xi(r, gamma, phi)
    return xi * factor_B(r, gamma, phi), xi


def walkoff_shift(r, gamma, phi, omega, tau, prefactor=4.0, cos_multiple=1.0):
    """Centroid shift of the unfiltered power-recycled pointer.

    4 omega tau^2 (cos phi - rL) / [sin phi (1 - rL cos phi)]; `prefactor`
    and `cos_multiple` select the alternative conventions.
    """
    _check_mirror(r, gamma)
    if np.sin(phi) == 0:
        raise DegenerateSelection("sin(phi) = 0")
    a = r * np.sqrt(1.0 - gamma)
    denom = 1.0 - a * np.cos(cos_multiple * phi)
    if denom <= 0:
        raise DegenerateCavity(f"round-trip gain reaches unity ({denom})")
    return prefactor * omega * tau**2 * (np.cos(phi) - a) / (np.sin(phi) * denom)


def walkoff_shift_printed(r, gamma, phi, omega, tau):
    """2 omega tau^2 prefactor with cos(2 phi) in the denominator."""
    return walkoff_shift(r, gamma, phi, omega, tau, prefactor=2.0, cos_multiple=2.0)


def power_walkoff_xi(r, gamma, phi):
    """walkoff_shift divided by 4 omega tau^2 / phi."""
    return walkoff_shift(r, gamma, phi, 1.0, 1.0) * phi / 4.0


def dual_walkoff_shift(r, gamma, phi, omega, tau):
    """Centroid shift of the unfiltered dual pointer, xi * 4 omega tau^2 / phi."""
    return walkoff_xi(r, gamma, phi) * standard_shift(phi, omega, tau)


def optimal_reflectivity(scheme, gamma, phi):
    """Closed-form reflectivity maximizing A (power/signal) or B (dual)."""
    loss = np.sqrt(1.0 - gamma)
    c = np.cos(phi)
    if scheme in ("power", "signal"):
        return loss * c
    if scheme == "dual":
        b = 1.0 + loss**2
        return (b - np.sqrt(b**2 - 4.0 * loss**2 * c**2)) / (2.0 * loss * c)
    raise DomainError(f"no optimum for scheme {scheme!r}")


def maximize_factor(scheme, gamma, phi, r_max=0.999999):
    """Golden-section search for the reflectivity maximizing the gain.

    Returns (r_opt, factor_max).
    """
    f = factor_B if scheme == "dual" else factor_A
    if scheme not in ("power", "signal", "dual"):
        raise DomainError(f"no gain to maximize for scheme {scheme!r}")
    coarse = np.linspace(0.0, r_max, 2001)
    values = np.array([f(r, gamma, phi) for r in coarse])
    k = int(np.argmax(values))
    if k == 0 or k == len(coarse) - 1:
        return float(coarse[k]), float(values[k])
    res = optimize.minimize_scalar(
        lambda r: -f(r, gamma, phi),
        bracket=(coarse[k - 1], coarse[k], coarse[k + 1]),
        method="golden",
        tol=1e-12,
    )
    return float(res.x), float(-res.fun)


@dataclass(frozen=True)
class ImprovementReport:
    scheme: str
    factor: float
    xi: float
    shift: float
    r: float
    gamma: float
    phi: float
    omega: float
    tau: float
    filter_enabled: bool


def improvement(config, phi, omega=0.0, tau=1.0):
    """Closed-form gain, walk-off degradation and pointer shift for `config`."""
    dt = standard_shift(phi, omega, tau)
    r, gamma = config.r, config.gamma
    if config.scheme == "standard":
        factor, xi, shift = 1.0, 1.0, dt
    elif config.scheme in ("power", "signal"):
        factor = factor_A(r, gamma, phi)
        if config.filter_enabled:
            xi, shift = 1.0, dt
        else:
            xi = power_walkoff_xi(r, gamma, phi)
            shift = walkoff_shift(r, gamma, phi, omega, tau)
    else:
        if config.filter_enabled:
            factor, xi, shift = factor_B(r, gamma, phi), 1.0, dt
        else:
            factor, xi = factor_B_non(r, gamma, phi)
            shift = xi * dt
    return ImprovementReport(config.scheme, float(factor), float(xi), float(shift), r, gamma, phi, omega, tau, config.filter_enabled)


def mean_traversal_delay(config, phi):
    """Amplitude-weighted mean number of returns times t_cav (filtered power/signal)."""
    q = config.r * config.loss_amplitude * np.cos(phi)
    return config.t_cav * q / (1.0 - q)


# --------------------------------------------------------------------------
# series engine


def _filter_matrix(grid, weights, phi, omega):
    # <phi0|M_ij|phi0> with normalized |phi0|^2 weights on the grid
    m = jones.measurement_matrix(phi, omega, grid.t)
    return grid.integrate(np.moveaxis(m, 0, -1) * weights)


def traversal_sum(config, pulse, phi, omega, grid=None):
    """Detected meter amplitude summed over traversal numbers.

    Each term is evaluated on the grid and the sum stops once the newest
    term is below `config.epsilon` relative to the partial sum (or raises
    ConvergenceError at `config.n_cap`). With the filter enabled, every pass
    before the last is replaced by its projection <phi0|M|phi0> onto the
    initial profile, so the only time dependence left is the M12(t) of the
    final pass into the detector.
    """
    if grid is None:
        shift = improvement(config, phi, omega, pulse.tau).shift
        if config.scheme != "dual":
            shift += mean_traversal_delay(config, phi)
        grid = TimeGrid.around(pulse, shift=shift)
    base = sample_initial(pulse, grid)
    t = grid.t
    # discrete normalization of the analytic envelope
    scale = np.sqrt(pulse.n_photons / grid.integrate(pulse.intensity(t)))

    def envelope(s):
        return scale * pulse.amplitude(s)

    if config.scheme == "dual":
        if config.t_cav != 0.0:
            raise DomainError("traversal delay is only modelled for power and signal recycling")
        values, n_used = _dual_sum(config, base, phi, omega)
    else:
        values, n_used = _single_mirror_sum(config, grid, envelope, base, phi, omega)
    return SampledAmplitude(grid, values, n_used)


def _converged(term_size, sum_size, eps):
    if sum_size == 0.0:
        return term_size == 0.0
    return term_size / sum_size < eps


def _single_mirror_sum(config, grid, envelope, base, phi, omega):
    t = grid.t
    if config.scheme == "standard":
        return jones.measurement_operator(1, 2, phi, omega, t) * base.values, 1
    q = config.r * config.loss_amplitude
    port = 1 if config.scheme == "power" else 2
    if config.filter_enabled:
        weights = np.abs(base.values) ** 2 / base.photons
        recirc = _filter_matrix(grid, weights, phi, omega)[port - 1, port - 1]

    def pieces(s):
        out = config.p * jones.measurement_operator(1, 2, phi, omega, s) * envelope(s)
        step = q * recirc if config.filter_enabled else q * jones.measurement_operator(port, port, phi, omega, s)
        return out, step

    fixed = pieces(t) if config.t_cav == 0.0 else None
    total = np.zeros(grid.n_points, dtype=complex)
    ratio = np.inf
    for n in range(config.n_cap):
        out, step = fixed if fixed is not None else pieces(t - n * config.t_cav)
        term = out * step**n
        total += term
        term_size, sum_size = np.max(np.abs(term)), np.max(np.abs(total))
        ratio = term_size / max(sum_size, np.finfo(float).tiny)
        if _converged(term_size, sum_size, config.epsilon):
            return total, n + 1
    raise ConvergenceError(config.n_cap, ratio)


def _dual_sum(config, base, phi, omega):
    # row-vector convention: port amplitudes x -> x @ U per pass, x -> x @ diag(r1, r2) * L per return
    grid = base.grid
    loss = config.loss_amplitude
    r1, r2 = config.r, config.second_r
    p1, p2 = np.sqrt(1.0 - r1**2), np.sqrt(1.0 - r2**2)
    feedback = loss * np.diag([r1, r2])
    u = jones.measurement_matrix(phi, omega, grid.t)  # (G, 2, 2)
    env = np.abs(base.values)
    if config.filter_enabled:
        # refreshed passes are scalars; the final pass keeps only the M12(t) profile
        u_bar = _filter_matrix(grid, env**2 / base.photons, phi, omega)
        if u_bar[0, 1] == 0.0:
            raise DegenerateSelection("filtered transfer <phi0|M12|phi0> vanishes")
        step, power = u_bar @ feedback, np.eye(2)
        total = np.zeros((2, 2))
        for n in range(config.n_cap):
            term = power @ u_bar
            total += term
            term_size, sum_size = np.linalg.norm(term), np.linalg.norm(total)
            ratio = term_size / max(sum_size, np.finfo(float).tiny)
            if _converged(term_size, sum_size, config.epsilon):
                shape = u[:, 0, 1] / u_bar[0, 1]
                return p1 * p2 * total[0, 1] * shape * base.values, n + 1
            power = power @ step
        raise ConvergenceError(config.n_cap, ratio)
    step = u @ feedback
    power = np.broadcast_to(np.eye(2), u.shape).copy()
    total = np.zeros(u.shape)
    for n in range(config.n_cap):
        term = power @ u  # (U R L)^n U, pointwise in t
        total += term
        term_size = np.max(np.linalg.norm(term, axis=(-2, -1)) * env)
        sum_size = np.max(np.linalg.norm(total, axis=(-2, -1)) * env)
        ratio = term_size / max(sum_size, np.finfo(float).tiny)
        if _converged(term_size, sum_size, config.epsilon):
            return p1 * p2 * total[:, 0, 1] * base.values, n + 1
        power = power @ step
    raise ConvergenceError(config.n_cap, ratio)


def detected_profile(config, pulse, phi, omega, grid=None):
    """Intensity at the detector for any scheme."""
    in_regime = check_regime(phi, omega, pulse.tau, warn=omega != 0.0)
    amp = traversal_sum(config, pulse, phi, omega, grid)
    return amp.to_profile(regime_warning=not in_regime, metadata={"scheme": config.scheme})


def reflected_port_amplitude(config, pulse, phi, omega, grid=None):
    """Amplitude leaving the power-recycling mirror back toward the source.

    Uses the Stokes convention: the prompt reflection carries -r. Only the
    unfiltered power cavity is modelled.
    """
    if config.scheme != "power" or config.filter_enabled:
        raise DomainError("reflected port is modelled for the unfiltered power scheme only")
    if config.t_cav != 0.0:
        raise DomainError("reflected port is modelled without traversal delay")
    if grid is None:
        grid = TimeGrid.around(pulse)
    base = sample_initial(pulse, grid)
    m11 = jones.measurement_operator(1, 1, phi, omega, grid.t)
    q = config.r * config.loss_amplitude
    total = np.zeros(grid.n_points, dtype=complex)
    term = config.p**2 * m11 * base.values
    for n in range(config.n_cap):
        total += term
        if _converged(np.max(np.abs(term)), np.max(np.abs(total)), config.epsilon):
            return SampledAmplitude(grid, total - config.r * base.values, n + 1)
        term = term * q * m11
    raise ConvergenceError(config.n_cap, np.max(np.abs(term)) / np.max(np.abs(total)))


def series_factor(config, phi, tau=1.0, grid=None):
    """Peak amplitude ratio of the recycled series to the single-pass scheme at omega = 0.

    Returns (ratio, n_used).
    """
    from .meter import GaussianPulse

    pulse = GaussianPulse(1.0, tau)
    grid = TimeGrid.around(pulse) if grid is None else grid
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        amp = traversal_sum(config, pulse, phi, 0.0, grid)
        ref = traversal_sum(CavityConfig("standard"), pulse, phi, 0.0, grid)
    return float(np.max(np.abs(amp.values)) / np.max(np.abs(ref.values))), amp.n_used
