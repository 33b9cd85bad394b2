"""
Gaussian temporal pointer.

The meter is a pulse of N photons with intensity
I0(t) = N / sqrt(2 pi tau^2) * exp(-(t - t0)^2 / (2 tau^2)).
Everything time-resolved lives on a uniform `TimeGrid` and is integrated
with the trapezoid rule.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from . import jones
from .errors import DomainError, EmptyProfile, RegimeWarning, TruncationError

DEFAULT_HALF_WIDTH = 8.0
DEFAULT_INTERVALS = 4096
MIN_HALF_WIDTH = 6.0
REGIME_RATIO = 0.1


@dataclass(frozen=True)
class GaussianPulse:
    """Gaussian pulse with `n_photons` photons and length `tau` (seconds)."""

    n_photons: float
    tau: float
    t0: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.n_photons) and self.n_photons > 0):
            raise DomainError(f"n_photons must be positive, got {self.n_photons}")
        if not (np.isfinite(self.tau) and self.tau > 0):
            raise DomainError(f"tau must be positive, got {self.tau}")
        if not np.isfinite(self.t0):
            raise DomainError("t0 must be finite")

    @property
    def peak_intensity(self):
        return self.n_photons / np.sqrt(2.0 * np.pi * self.tau**2)

    def intensity(self, t):
        t = np.asarray(t, dtype=float)
        return self.peak_intensity * np.exp(-((t - self.t0) ** 2) / (2.0 * self.tau**2))

    def amplitude(self, t):
        """sqrt(I0(t)); units sqrt(photons/s)."""
        t = np.asarray(t, dtype=float)
        return np.sqrt(self.peak_intensity) * np.exp(-((t - self.t0) ** 2) / (4.0 * self.tau**2))

    def captured_fraction(self, t_min, t_max):
        """Fraction of the pulse energy inside [t_min, t_max]."""
        s = np.sqrt(2.0) * self.tau
        return 0.5 * (special.erf((t_max - self.t0) / s) - special.erf((t_min - self.t0) / s))


@dataclass(frozen=True)
class TimeGrid:
    t_min: float
    t_max: float
    n_points: int

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise DomainError(f"n_points must be an integer >= 2, got {self.n_points}")
        if not (np.isfinite(self.t_min) and np.isfinite(self.t_max) and self.t_max > self.t_min):
            raise DomainError(f"need finite t_min < t_max, got [{self.t_min}, {self.t_max}]")
        object.__setattr__(self, "n_points", int(self.n_points))

    @classmethod
    def around(cls, pulse, shift=0.0, half_width=DEFAULT_HALF_WIDTH, n_intervals=DEFAULT_INTERVALS):
        """Grid of +-half_width*tau about the pulse centre displaced by `shift`."""
        centre = pulse.t0 + shift
        return cls(centre - half_width * pulse.tau, centre + half_width * pulse.tau, n_intervals + 1)

    @property
    def t(self):
        return np.linspace(self.t_min, self.t_max, self.n_points)

    @property
    def dt(self):
        return (self.t_max - self.t_min) / (self.n_points - 1)

    def refined(self):
        """Same span, half the spacing."""
        return TimeGrid(self.t_min, self.t_max, 2 * self.n_points - 1)

    def shifted(self, offset):
        return TimeGrid(self.t_min + offset, self.t_max + offset, self.n_points)

    def integrate(self, y):
        return np.trapezoid(y, dx=self.dt, axis=-1)


@dataclass(frozen=True)
class SampledAmplitude:
    """Complex meter amplitude <t|phi> sampled on a grid."""

    grid: TimeGrid
    values: np.ndarray
    n_used: int | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != (self.grid.n_points,):
            raise DomainError(f"values shape {v.shape} does not match grid of {self.grid.n_points} points")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def photons(self):
        return float(self.grid.integrate(np.abs(self.values) ** 2))

    def normalized(self, total=1.0):
        """Rescale so the trapezoid integral of |values|^2 equals `total`."""
        current = self.photons
        if current <= 0:
            raise EmptyProfile("cannot normalize a zero amplitude")
        return SampledAmplitude(self.grid, self.values * np.sqrt(total / current), self.n_used)

    def overlap(self, other):
        """<self|other> by the trapezoid rule."""
        return complex(self.grid.integrate(self.values.conj() * other.values))

    def to_profile(self, **kwargs):
        return DetectionProfile(self.grid, np.abs(self.values) ** 2, n_used=self.n_used, **kwargs)


@dataclass(frozen=True)
class DetectionProfile:
    """Detected intensity I(t) in photons/s.

    `reference` optionally holds a second (approximate) intensity for the
    same configuration, e.g. the small-angle closed form.
    """

    grid: TimeGrid
    intensity: np.ndarray
    reference: np.ndarray | None = None
    regime_warning: bool = False
    n_used: int | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        inten = np.array(self.intensity, dtype=float)
        if inten.shape != (self.grid.n_points,):
            raise DomainError("intensity shape does not match grid")
        if np.any(inten < 0):
            raise DomainError("intensity must be non-negative")
        inten.setflags(write=False)
        object.__setattr__(self, "intensity", inten)

    @property
    def total_photons(self):
        return float(self.grid.integrate(self.intensity))

    @property
    def peak_intensity(self):
        return float(self.intensity.max())

    @property
    def centroid_shift(self):
        return centroid_shift(self)

    def shifted(self, offset):
        """The same samples relabelled on a grid displaced by `offset`."""
        return DetectionProfile(self.grid.shifted(offset), self.intensity, self.reference, self.regime_warning, self.n_used)


def check_regime(phi, omega, tau, warn=True):
    """True when 2*omega*tau < phi/10 and |phi| < 1; optionally warn otherwise."""
    ok = 2.0 * abs(omega) * tau < REGIME_RATIO * abs(phi) and 0.0 < abs(phi) < 1.0
    if not ok and warn:
        warnings.warn(
            f"outside weak-value regime: 2*omega*tau = {2 * abs(omega) * tau:.3g}, phi = {phi:.3g}",
            RegimeWarning,
            stacklevel=3,
        )
    return ok


def sample_initial(pulse, grid=None):
    """Sample the initial meter amplitude sqrt(I0(t)) on `grid`.

    The grid must contain [t0 - 6 tau, t0 + 6 tau]; the samples are rescaled
    so the discrete photon number is exactly N.
    """
    grid = TimeGrid.around(pulse) if grid is None else grid
    lo = pulse.t0 - MIN_HALF_WIDTH * pulse.tau
    hi = pulse.t0 + MIN_HALF_WIDTH * pulse.tau
    if grid.t_min > lo or grid.t_max < hi:
        raise TruncationError(pulse.captured_fraction(grid.t_min, grid.t_max))
    amp = SampledAmplitude(grid, pulse.amplitude(grid.t))
    return amp.normalized(pulse.n_photons)


def standard_shift(phi, omega, tau):
    """Small-angle weak-value time shift 4*omega*tau^2/phi."""
    return 4.0 * omega * tau**2 / phi


def detected_intensity_standard(pulse, phi, omega, grid=None):
    """Intensity at the bright output of the single-pass weak measurement.

    The returned profile is |M12(t)|^2 I0(t) evaluated exactly; its
    `reference` is the small-angle form N/sqrt(2 pi tau^2) sin^2(phi)
    exp[-(t - dt)^2 / 2 tau^2] with dt = 4 omega tau^2 / phi.
    """
    dt_expected = standard_shift(phi, omega, pulse.tau)
    grid = TimeGrid.around(pulse, shift=dt_expected) if grid is None else grid
    in_regime = check_regime(phi, omega, pulse.tau)
    initial = sample_initial(pulse, grid)
    t = grid.t
    m12 = jones.measurement_operator(1, 2, phi, omega, t)
    exact = np.abs(m12 * initial.values) ** 2
    approx = pulse.peak_intensity * np.sin(phi) ** 2 * np.exp(-((t - pulse.t0 - dt_expected) ** 2) / (2.0 * pulse.tau**2))
    return DetectionProfile(grid, exact, reference=approx, regime_warning=not in_regime)


def centroid_shift(profile):
    """First moment of the intensity, integral(t I) / integral(I)."""
    total = profile.grid.integrate(profile.intensity)
    if not total > 0:
        raise EmptyProfile("profile carries no photons")
    return float(profile.grid.integrate(profile.grid.t * profile.intensity) / total)


def fit_gaussian_shift(profile, tau=None):
    """Least-squares Gaussian fit; returns the fitted centre.

    With `tau` given the width is held fixed at the meter width.
    """
    t = profile.grid.t
    y = profile.intensity
    c0 = centroid_shift(profile)
    scale = y.max()
    if tau is None:
        spread = np.sqrt(profile.grid.integrate((t - c0) ** 2 * y) / profile.grid.integrate(y))

        def model(x, a, c, s):
            return a * np.exp(-((x - c) ** 2) / (2.0 * s**2))

        p0 = [1.0, c0, spread]
    else:

        def model(x, a, c):
            return a * np.exp(-((x - c) ** 2) / (2.0 * tau**2))

        p0 = [1.0, c0]
    popt, _ = optimize.curve_fit(model, t, y / scale, p0=p0, xtol=1e-14, ftol=1e-14)
    return float(popt[1])


def _filter_moments(phi, omega, tau, order=80):
    # E[cos(phi + 2 omega t)] and E[cos^2(...)] for t ~ N(0, tau^2), Gauss-Hermite
    nodes, weights = np.polynomial.hermite_e.hermegauss(order)
    weights = weights / np.sqrt(2.0 * np.pi)
    m11 = np.cos(phi + 2.0 * omega * tau * nodes)
    return float(np.sum(weights * m11)), float(np.sum(weights * m11**2))


def filter_survival(pulse, phi, omega, method="closed"):
    """Probability that the reflected meter state passes the profile filter.

    The filter projects M11|phi0> (normalized) back onto |phi0>. `method`
    selects the closed form or Gauss-Hermite quadrature of
    |<phi0|M11|phi0>|^2 / <phi0|M11^2|phi0>. The pulse is taken centred on
    t = 0.
    """
    tau = pulse.tau
    if method == "closed":
        x = 4.0 * omega**2 * tau**2
        c2 = np.cos(phi) ** 2
        return float(c2 / (np.sinh(x) + c2 * np.exp(-x)))
    if method == "quadrature":
        first, second = _filter_moments(phi, omega, tau)
        return first**2 / second
    raise DomainError(f"unknown method {method!r}")


def minimum_filter_loss(phi, omega, tau):
    """Leading-order filter loss 4 omega^2 tau^2 phi^2."""
    return 4.0 * omega**2 * tau**2 * phi**2
