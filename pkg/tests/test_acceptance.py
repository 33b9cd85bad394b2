"""
Acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line (also collected in the terminal
summary) and asserts the criterion at its stated tolerance.
"""

import itertools
import json
import time
import warnings

import numpy as np
import pytest

from cyclicwv import cli, meter
from cyclicwv import metrology as mt
from cyclicwv import recycling as rc
from cyclicwv.meter import GaussianPulse, TimeGrid

R_GRID = (0.0, 0.3, 0.6, 0.9, 0.99)
GAMMA_GRID = (0.0, 0.1, 0.2)
PHI_GRID = (0.02, 0.05, 0.1, 0.2)
SEED = 2024


@pytest.fixture(autouse=True)
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield


def test_c1_closed_form_matches_series(verdict):
    start = time.perf_counter()
    worst = 0.0
    for r, gamma, phi in itertools.product(R_GRID, GAMMA_GRID, PHI_GRID):
        for scheme, closed in (("power", rc.factor_A), ("dual", rc.factor_B)):
            ratio, _ = rc.series_factor(rc.CavityConfig(scheme, r=r, gamma=gamma), phi)
            worst = max(worst, abs(ratio / closed(r, gamma, phi) - 1.0))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-8 and elapsed < 10.0
    verdict("C1 closed form vs traversal sum", ok, f"max rel. dev {worst:.2e} (< 1e-8), {elapsed:.2f} s (< 10 s)")


def test_c2_fig2_maxima(verdict):
    phi = 0.1
    target = 1 / np.sin(phi)
    r_a, a_max = rc.maximize_factor("power", 0.0, phi)
    r_b, b_max = rc.maximize_factor("dual", 0.0, phi)
    checks = [
        abs(a_max - 10.0167) < 1e-4,
        abs(b_max - 10.0167) < 1e-4,
        abs(a_max - target) < 1e-9,
        abs(b_max / (1 / phi) - 1.0) < 2e-3,
        abs(r_a - np.cos(phi)) < 1e-6,
        abs(r_b - (1 - np.sin(phi)) / np.cos(phi)) < 1e-6,
    ]
    verdict(
        "C2 gain maxima over r",
        all(checks),
        f"A_max {a_max:.7f} at r {r_a:.9f}, B_max {b_max:.7f} at r {r_b:.9f}, 1/sin(phi) {target:.7f}",
    )


def test_c3_fig3_dominance(verdict):
    rs = np.linspace(0.0, 0.99, 100)
    phis = np.linspace(0.01, 0.2, 100)
    gaps, violations = [], 0
    for gamma in GAMMA_GRID:
        gap = -np.inf
        for r, phi in itertools.product(rs, phis):
            b = rc.factor_B(r, gamma, phi)
            b_non, _ = rc.factor_B_non(r, gamma, phi)
            violations += b < b_non
            gap = max(gap, b - b_non)
        gaps.append(float(gap))
    ok = violations == 0 and gaps[0] > gaps[1] > gaps[2]
    verdict("C3 B dominates B_non", ok, f"B < B_non at {violations} points; max gap by gamma {[round(g, 4) for g in gaps]}")


def _centroid(config, phi, omega, hint):
    pulse = GaussianPulse(1e6, 1.0)
    return meter.centroid_shift(rc.detected_profile(config, pulse, phi, omega, TimeGrid.around(pulse, shift=hint)))


def test_c4_filter_efficacy(verdict):
    r, gamma, phi, omega = 0.9, 0.0, 0.1, 1e-3
    dt = meter.standard_shift(phi, omega, 1.0)
    on = _centroid(rc.CavityConfig("power", r=r, gamma=gamma), phi, omega, dt)
    dtp = rc.walkoff_shift(r, gamma, phi, omega, 1.0)
    off = _centroid(rc.CavityConfig("power", r=r, gamma=gamma, filter_enabled=False), phi, omega, dtp)
    single = _centroid(rc.CavityConfig("power", r=0.0, filter_enabled=False), phi, omega, dt)
    printed = rc.walkoff_shift_printed(0.0, gamma, phi, omega, 1.0)
    printed_ratio = single / printed
    ok = abs(on / dt - 1) < 0.02 and abs(off / dtp - 1) < 0.02 and abs(printed_ratio - 2.0) < 0.1
    verdict(
        "C4 filter efficacy",
        ok,
        f"filtered centroid {on:.6f} vs {dt:.6f}; unfiltered {off:.6f} vs dt_p {dtp:.6f}; "
        f"printed 2wt^2 form off by x{printed_ratio:.3f} at r=0 (expected failure)",
    )


def test_c5_filter_survival(verdict):
    pulse = GaussianPulse(1.0, 1.0)
    worst_quad = 0.0
    checked = violations = 0
    worst_excess = 0.0
    for phi, wt in itertools.product(np.linspace(0.0, 0.3, 20), np.linspace(0.0, 0.05, 20)):
        closed = meter.filter_survival(pulse, phi, wt)
        quad = meter.filter_survival(pulse, phi, wt, method="quadrature")
        worst_quad = max(worst_quad, abs(closed - quad))
        if 2 * wt <= phi / 5:
            checked += 1
            x = 4 * wt**2
            lhs = abs((1 - closed) - meter.minimum_filter_loss(phi, wt, 1.0))
            bound = 10 * x**2
            if lhs > bound:
                violations += 1
                worst_excess = max(worst_excess, lhs / bound)
    ok = worst_quad < 1e-10 and violations == 0
    verdict(
        "C5 filter survival",
        ok,
        f"closed vs quadrature max |diff| {worst_quad:.1e} (< 1e-10); fourth-order bound "
        f"|(1-p_f) - 4w^2t^2phi^2| <= 10(4w^2t^2)^2 violated at {violations}/{checked} points, "
        f"worst x{worst_excess:.1f} over (leading term is x tan^2 phi, not x phi^2)",
    )


def test_c6_fisher_and_monte_carlo(verdict):
    start = time.perf_counter()
    pulse = GaussianPulse(1e6, 1.0)
    phi, omega = 0.1, 1e-3
    fi = mt.fisher_information(meter.detected_intensity_standard(pulse, phi, omega))
    fi_ok = abs(fi / (1e6 * np.sin(phi) ** 2) - 1) < 0.01

    std = mt.monte_carlo(rc.CavityConfig("standard"), pulse, phi, omega, 200, SEED)
    sat_ok = 0.9 <= std.saturation_ratio <= 1.1 and abs(std.predicted_crb / 2.5e-4 - 1) < 0.01

    # the gain ratio of two 200-trial std estimates scatters by about 7%, so the
    # improvement factors are checked with 1000 trials per scheme
    trials = 1000
    base = mt.monte_carlo(rc.CavityConfig("standard"), pulse, phi, omega, trials, SEED)
    gains = {}
    for scheme, closed in (("power", rc.factor_A), ("dual", rc.factor_B)):
        res = mt.monte_carlo(rc.CavityConfig(scheme, r=0.9), pulse, phi, omega, trials, SEED)
        gains[scheme] = (base.estimate_std / res.estimate_std, closed(0.9, 0.0, phi))
    gain_ok = all(abs(g / c - 1) < 0.1 for g, c in gains.values())
    elapsed = time.perf_counter() - start
    ok = fi_ok and sat_ok and gain_ok and elapsed < 60
    verdict(
        "C6 Fisher/CRB and Monte Carlo",
        ok,
        f"F {fi:.1f} vs N sin^2 phi {1e6 * np.sin(phi) ** 2:.1f}; sigma/CRB {std.saturation_ratio:.3f} "
        f"(CRB {std.predicted_crb:.4e}); gain A {gains['power'][0]:.3f} vs {gains['power'][1]:.4f}, "
        f"B {gains['dual'][0]:.3f} vs {gains['dual'][1]:.4f}; {elapsed:.1f} s",
    )


def test_c7_quantum_fisher_information(verdict):
    pulse = GaussianPulse(1e6, 1.0)
    qf = mt.qfi_conventional(pulse)
    expected = 16 * pulse.n_photons * pulse.tau**2
    delta_c = qf.crb_sigma
    wva = mt.crb_angular_velocity(pulse.n_photons * 0.1**2, 0.1, pulse.tau)
    f_omega = mt.fisher_information_omega(rc.CavityConfig("standard"), pulse, 0.1, 1e-3)
    ok = (
        abs(qf.fisher_info / expected - 1) < 1e-6
        and abs(delta_c / (1 / (4 * np.sqrt(pulse.n_photons) * pulse.tau)) - 1) < 1e-6
        and abs(delta_c / wva - 1) < 1e-6
        and f_omega <= qf.fisher_info * (1 + 1e-6)
    )
    verdict(
        "C7 quantum Fisher information",
        ok,
        f"QF_c {qf.fisher_info:.6f} vs 16 N tau^2 {expected:.0f}; dw_c {delta_c:.6e} = WVA bound {wva:.6e}; "
        f"post-selected F_w {f_omega:.4e} <= QF_c",
    )


def test_c8_power_signal_equivalence(verdict):
    pulse = GaussianPulse(1e6, 1.0)
    worst = 0.0
    for r, gamma, phi, omega in ((0.9, 0.0, 0.1, 1e-3), (0.5, 0.1, 0.05, 2e-4), (0.99, 0.2, 0.2, 0.0)):
        grid = TimeGrid.around(pulse, shift=meter.standard_shift(phi, omega, 1.0))
        for filt in (True, False):
            a = rc.traversal_sum(rc.CavityConfig("power", r=r, gamma=gamma, filter_enabled=filt), pulse, phi, omega, grid)
            b = rc.traversal_sum(rc.CavityConfig("signal", r=r, gamma=gamma, filter_enabled=filt), pulse, phi, omega, grid)
            worst = max(worst, np.max(np.abs(a.values - b.values)) / np.max(np.abs(a.values)))
    verdict("C8 power/signal equivalence", worst < 1e-12, f"max pointwise rel. difference {worst:.1e} (< 1e-12)")


def test_c9_determinism(verdict, tmp_path):
    mismatched = []
    for preset in sorted(cli.PRESETS):
        outputs = []
        for k in range(2):
            path = tmp_path / f"{preset}_{k}.csv"
            assert cli.main(["sweep", "--preset", preset, "--seed", str(SEED), "--out", str(path)]) == 0
            outputs.append(path.read_bytes())
        if outputs[0] != outputs[1]:
            mismatched.append(preset)
    config = tmp_path / "mc.json"
    config.write_text(
        json.dumps({"scheme": "dual", "r": 0.9, "phi": 0.1, "omega": 1e-3, "tau": 1.0, "n_photons": 1e6, "trials": 100})
    )
    reports = []
    for k in range(2):
        path = tmp_path / f"mc_{k}.json"
        assert cli.main(["montecarlo", "--config", str(config), "--seed", str(SEED), "--out", str(path)]) == 0
        reports.append(path.read_bytes())
    if reports[0] != reports[1]:
        mismatched.append("montecarlo")
    verdict(
        "C9 determinism",
        not mismatched,
        f"{len(cli.PRESETS)} presets and one Monte Carlo report byte-identical across reruns"
        if not mismatched
        else f"differing outputs: {mismatched}",
    )
