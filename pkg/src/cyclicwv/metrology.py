"""
Precision of the angular-velocity estimate.

Fisher information of the pointer shift, Cramer-Rao bounds, SNR, the
quantum Fisher information of the conventional (no post-selection)
measurement, and a seeded photon-counting Monte Carlo that checks the
bounds empirically.

The pointer shift and the angular velocity are related through the single
conversion factor d(shift)/d(omega) = 4 tau^2 / phi (`shift_per_omega`).
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate, stats

from .errors import CyclicWVError, DomainError
from .meter import TimeGrid
from .recycling import CavityConfig, detected_profile

TIME_SHIFT = "time_shift"
ANGULAR_VELOCITY = "angular_velocity"


def shift_per_omega(phi, tau):
    """d(shift)/d(omega) = 4 tau^2 / phi."""
    return 4.0 * tau**2 / phi


@dataclass(frozen=True)
class PrecisionReport:
    fisher_info: float
    estimand: str = TIME_SHIFT
    snr: float | None = None

    @property
    def crb_sigma(self):
        return 1.0 / math.sqrt(self.fisher_info)


def fisher_information(profile):
    """Fisher information about a pure shift of the detected intensity.

    F = integral I(t) (d ln I / d shift)^2 dt, with d/d(shift) = -d/dt taken
    by central differences on the grid.
    """
    inten = profile.intensity
    if inten.size < 3:
        raise DomainError("need at least three samples for a derivative")
    deriv = np.gradient(inten, profile.grid.dt)
    keep = inten > inten.max() * 1e-300
    integrand = np.zeros_like(inten)
    integrand[keep] = deriv[keep] ** 2 / inten[keep]
    return float(profile.grid.integrate(integrand))


def fisher_information_omega(config, pulse, phi, omega, grid=None, step=None):
    """Classical Fisher information about omega carried by the detected intensity.

    Uses the full omega dependence of the profile (shift and power), by a
    central difference in omega on a fixed grid.
    """
    if grid is None:
        grid = TimeGrid.around(pulse)
    step = 1e-6 / pulse.tau if step is None else step
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        mid = detected_profile(config, pulse, phi, omega, grid).intensity
        up = detected_profile(config, pulse, phi, omega + step, grid).intensity
        down = detected_profile(config, pulse, phi, omega - step, grid).intensity
    deriv = (up - down) / (2.0 * step)
    keep = mid > mid.max() * 1e-300
    integrand = np.zeros_like(mid)
    integrand[keep] = deriv[keep] ** 2 / mid[keep]
    return float(grid.integrate(integrand))


def crb_angular_velocity(fisher_dt, phi, tau):
    """Cramer-Rao bound on omega from the Fisher information of the shift."""
    if not fisher_dt > 0:
        raise DomainError(f"Fisher information must be positive, got {fisher_dt}")
    return 1.0 / (shift_per_omega(phi, tau) * math.sqrt(fisher_dt))


def snr(omega, tau, n_photons, factor=1.0, phi=0.1):
    """factor * 4 omega tau sqrt(N).

    The same number is also formed as factor * sqrt(N) phi dt / tau with
    dt = 4 omega tau^2 / phi; the two must agree.
    """
    direct = factor * 4.0 * omega * tau * math.sqrt(n_photons)
    dt = omega * shift_per_omega(phi, tau)
    via_shift = factor * math.sqrt(n_photons) * phi * dt / tau
    if not math.isclose(direct, via_shift, rel_tol=1e-12, abs_tol=1e-300):
        raise AssertionError(f"SNR forms disagree: {direct} vs {via_shift}")
    return direct


def qfi_conventional(pulse, omega=0.0, grid=None):
    """Quantum Fisher information about omega for the unselected meter e^{-2i omega t}|phi0>.

    Evaluates 4[<d phi|d phi> - |<phi|d phi>|^2] per photon by quadrature,
    with d phi/d omega = -2i t phi, and scales by N. The result is checked
    against 16 N tau^2.
    """
    grid = TimeGrid.around(pulse) if grid is None else grid
    t = grid.t
    state = pulse.amplitude(t) * np.exp(-2j * omega * t)
    state = state / np.sqrt(grid.integrate(np.abs(state) ** 2))
    dstate = -2j * t * state
    norm_d = grid.integrate(np.abs(dstate) ** 2).real
    overlap = grid.integrate(state.conj() * dstate)
    qfi = pulse.n_photons * 4.0 * (norm_d - abs(overlap) ** 2)
    expected = 16.0 * pulse.n_photons * pulse.tau**2
    if abs(qfi / expected - 1.0) > 1e-6:
        raise CyclicWVError(f"QFI quadrature {qfi} departs from 16 N tau^2 = {expected}; grid too coarse?")
    delta = 1.0 / math.sqrt(qfi)
    return PrecisionReport(qfi, ANGULAR_VELOCITY, snr=omega / delta)


def precision_budget(config, pulse, phi, omega, grid=None):
    """Classical FI of the detected port against the conventional QFI.

    Reports the ratio both per input photon and per detected photon; neither
    normalization is privileged.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        profile = detected_profile(config, pulse, phi, omega, grid)
    f_omega = fisher_information_omega(config, pulse, phi, omega, grid)
    qf = qfi_conventional(pulse).fisher_info
    detected = profile.total_photons
    return {
        "fisher_omega": f_omega,
        "qfi_conventional": qf,
        "input_photons": pulse.n_photons,
        "detected_photons": detected,
        "ratio_per_input_photon": (f_omega / pulse.n_photons) / (qf / pulse.n_photons),
        "ratio_per_detected_photon": (f_omega / detected) / (qf / pulse.n_photons),
    }


@dataclass(frozen=True)
class EstimationResult:
    """Statistics of repeated photon-counting estimates of omega."""

    trials: int
    estimate_mean: float
    estimate_std: float
    predicted_crb: float
    saturation_ratio: float
    seed: int
    shift_mean: float
    shift_std: float
    mean_detected_photons: float

    def to_dict(self):
        return asdict(self)


class ArrivalSampler:
    """Draws photon arrival times from a detected intensity on its grid.

    The CDF is the cumulative trapezoid integral of the intensity, inverted
    by linear interpolation, so arrivals are uniform within each grid cell.
    """

    def __init__(self, profile):
        t = profile.grid.t
        cdf = integrate.cumulative_trapezoid(profile.intensity, t, initial=0.0)
        if not cdf[-1] > 0:
            raise DomainError("profile has zero expected photons")
        cdf /= cdf[-1]
        keep = np.concatenate([[True], np.diff(cdf) > 0])
        self.cdf, self.times = cdf[keep], t[keep]
        cells = np.diff(cdf)
        self.cell_probs = cells / cells.sum()
        self.cell_left = t[:-1]
        self.dt = profile.grid.dt

    def draw(self, k, rng):
        """k arrival times by inverse CDF."""
        return np.interp(rng.random(k), self.cdf, self.times)

    def draw_mean(self, k, rng):
        """Sample mean of k arrivals without materializing them.

        Cell occupation is multinomial and positions are uniform inside a
        cell, so the mean has the same distribution as ``draw(k).mean()``.
        """
        counts = rng.multinomial(k, self.cell_probs)
        return (counts @ self.cell_left + self.dt * rng.random(k).sum()) / k


def _mean_and_std(values):
    n = len(values)
    mean = math.fsum(values) / n
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


def monte_carlo(
    config,
    pulse,
    phi,
    omega,
    trials,
    seed,
    photon_model="poisson",
    estimator="mean",
    trim=0.1,
    grid=None,
    workers=1,
    sampling="cells",
):
    """Repeat a photon-counting experiment and estimate omega each time.

    Per trial the detected photon number is Poisson around the profile's
    mean (or fixed at its rounded value with ``photon_model="fixed"``),
    arrival times are drawn from the detected profile by inverse CDF, and
    the shift is estimated by the sample mean (or a trimmed mean). For the
    sample mean, ``sampling="cells"`` draws it through cell counts instead
    of individual arrivals (same distribution, far cheaper). Trial
    streams are spawned from ``SeedSequence(seed)``, so results do not
    depend on `workers`.
    """
    if int(trials) != trials or trials < 2:
        raise DomainError("need at least two trials")
    if photon_model not in ("poisson", "fixed"):
        raise DomainError(f"unknown photon model {photon_model!r}")
    if estimator not in ("mean", "trimmed"):
        raise DomainError(f"unknown estimator {estimator!r}")
    if sampling not in ("cells", "inverse_cdf"):
        raise DomainError(f"unknown sampling mode {sampling!r}")
    profile = detected_profile(config, pulse, phi, omega, grid)
    expected = profile.total_photons
    if not expected > 0:
        raise DomainError("profile has zero expected photons")
    sampler = ArrivalSampler(profile)
    conversion = shift_per_omega(phi, pulse.tau)
    children = np.random.SeedSequence(seed).spawn(trials)

    def one_trial(child):
        rng = np.random.default_rng(child)
        k = rng.poisson(expected) if photon_model == "poisson" else int(round(expected))
        if k == 0:
            return math.nan, 0
        if estimator == "mean" and sampling == "cells":
            return float(sampler.draw_mean(k, rng)), k
        arrivals = sampler.draw(k, rng)
        est = arrivals.mean() if estimator == "mean" else stats.trim_mean(arrivals, trim)
        return float(est), k

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            outcomes = list(pool.map(one_trial, children))
    else:
        outcomes = [one_trial(c) for c in children]

    shifts = [s for s, _ in outcomes if not math.isnan(s)]
    if len(shifts) < 2:
        raise DomainError("too few trials detected any photons")
    shift_mean, shift_std = _mean_and_std(shifts)
    omegas = [s / conversion for s in shifts]
    est_mean, est_std = _mean_and_std(omegas)
    crb = crb_angular_velocity(fisher_information(profile), phi, pulse.tau)
    return EstimationResult(
        trials=int(trials),
        estimate_mean=est_mean,
        estimate_std=est_std,
        predicted_crb=crb,
        saturation_ratio=est_std / crb,
        seed=int(seed),
        shift_mean=shift_mean,
        shift_std=shift_std,
        mean_detected_photons=math.fsum(k for _, k in outcomes) / trials,
    )

