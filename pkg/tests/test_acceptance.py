"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

These are end-to-end checks against frozen reference numbers; the unit
suites carry the fine-grained oracles.
"""

import json
import math

import numpy as np
import pytest

from penningcool.cli import main
from penningcool.constants import TWO_PI
from penningcool.dynamics import (AxializationConfig, SimConfig,
                                  equilibrium_phonons, simulate_trajectory)
from penningcool.laser import LaserConfig
from penningcool.limits import (DopplerLimitInputs, axialization_coupling_rate,
                                doppler_limit_cyclotron,
                                doppler_limit_magnetron, is_unstable,
                                limit_curve)
from penningcool.sbc import (CoolingPulse, RateModelParams, simulate_sequence,
                             table1_sequence)
from penningcool.spectroscopy import (ThermalState, first_coupling_zero,
                                      fit_spectrum, lamb_dicke,
                                      synthesize_scan, thermal_tail,
                                      two_mode_rabi, fit_flop, SidebandId)
from penningcool.trap import CA40, TrapConfig, compute_frequencies, total_energy

NU_C, NU_Z = 729e3, 265e3
NU_P, NU_M = 677146.36572332, 51853.63427667996
GAMMA = TWO_PI * 21.6e6
PROBE = 280e-6


def report(capsys, k, ok, detail):
    with capsys.disabled():
        print(f"\nACCEPTANCE {k}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def trap():
    return TrapConfig.from_frequencies_hz(NU_C, NU_Z)


@pytest.fixture(scope="module")
def freqs(trap):
    return compute_frequencies(trap)


def cooling_laser():
    return LaserConfig(wavelength=397e-9, power=1e-6, waist=100e-6,
                       offset=50e-6)


def drift_sim(trap, **kw):
    base = dict(trap=trap, laser=None, axialization=None, dt=20e-9,
                t_end=20e-3, averaging_window=(10e-3, 20e-3),
                record_stride=500)
    base.update(kw)
    return SimConfig(**base)


def dominant_freq_hz(t, y):
    """Sub-bin peak frequency via a zero-padded windowed FFT."""
    y = y - y.mean()
    n = len(y)
    spec = np.abs(np.fft.rfft(y * np.hanning(n), 8 * n))
    f = np.fft.rfftfreq(8 * n, d=t[1] - t[0])
    i = int(np.argmax(spec))
    if 0 < i < len(spec) - 1:
        denom = spec[i - 1] - 2 * spec[i] + spec[i + 1]
        if denom != 0:
            i_frac = i + 0.5 * (spec[i - 1] - spec[i + 1]) / denom
            return float(np.interp(i_frac, np.arange(len(f)), f))
    return float(f[i])


def test_criterion_01_frequency_closure(freqs, capsys):
    nu_p = freqs.omega_plus / TWO_PI
    nu_m = freqs.omega_minus / TWO_PI
    closure = abs(freqs.omega_plus * freqs.omega_minus
                  - 0.5 * freqs.omega_z ** 2) / (0.5 * freqs.omega_z ** 2)
    ok = (abs(nu_p - 677.1e3) < 0.2e3 and abs(nu_m - 51.9e3) < 0.2e3
          and closure < 1e-12)
    report(capsys, 1, ok,
           f"nu+={nu_p:.1f} Hz, nu-={nu_m:.1f} Hz, closure rel={closure:.1e}")


def test_criterion_02_coupling_rate(capsys):
    rate = axialization_coupling_rate(1.0, 0.01, CA40, TWO_PI * 300e3)
    ok = abs(rate / TWO_PI - 509.0) / 509.0 < 0.01
    report(capsys, 2, ok, f"Omega_a/2pi = {rate / TWO_PI:.1f} Hz (509 +/- 1%)")


def test_criterion_03_drift_conservation(trap, capsys):
    rec = simulate_trajectory(drift_sim(trap))
    e = [total_energy(0.0, rp, rm, rec.freqs, trap.ion)
         for rp, rm in ((rec.r_plus_sq[0], rec.r_minus_sq[0]),
                        (rec.r_plus_sq[-1], rec.r_minus_sq[-1]))]
    e_drift = abs(e[1] - e[0]) / abs(e[0])
    a_plus = np.ptp(rec.r_plus_sq) / rec.r_plus_sq.mean()
    a_minus = np.ptp(rec.r_minus_sq) / rec.r_minus_sq.mean()
    ok = e_drift <= 1e-9 and a_plus <= 1e-9 and a_minus <= 1e-9
    report(capsys, 3, ok,
           f"energy drift {e_drift:.1e}, amplitude drifts "
           f"{a_plus:.1e}/{a_minus:.1e} over 20 ms")


def test_criterion_04_exchange_scaling(trap, freqs, capsys):
    volts = (0.25, 0.5, 1.0, 2.0)
    measured = []
    for v in volts:
        cfg = drift_sim(trap, axialization=AxializationConfig(amplitude=v),
                        record_stride=250)
        rec = simulate_trajectory(cfg)
        measured.append(dominant_freq_hz(rec.times, rec.r_plus_sq))
    expected = [2 * axialization_coupling_rate(
        v, trap.ring_radius, trap.ion, freqs.omega_1) / TWO_PI
        for v in volts]
    ratios = np.array(measured) / np.array(expected)
    slope, intercept = np.polyfit(volts, measured, 1)
    fitted = np.polyval([slope, intercept], volts)
    ss_res = np.sum((np.array(measured) - fitted) ** 2)
    ss_tot = np.sum((np.array(measured) - np.mean(measured)) ** 2)
    r2 = 1 - ss_res / ss_tot
    ok = r2 > 0.999 and ratios.max() / ratios.min() < 1.05
    report(capsys, 4, ok,
           f"R^2={r2:.6f}, measured/(2 Omega_a) = "
           + ", ".join(f"{r:.3f}" for r in ratios))


def test_criterion_05_cooling_regimes(trap, capsys):
    # (a) no axialization: magnetron runs away, cyclotron stays cold
    cfg_a = drift_sim(trap, laser=cooling_laser(), seed=0)
    rec = simulate_trajectory(cfg_a)
    if rec.diverged:
        ok_a, case_a = True, "diverged (runaway)"
    else:
        eq = equilibrium_phonons(rec, cfg_a.averaging_window)
        ok_a = eq.n_minus > 1e4 and eq.n_plus < 200
        case_a = f"n+={eq.n_plus:.0f}, n-={eq.n_minus:.0f}"
    # (b) 1 V axialization: both modes equilibrate together
    n_plus, n_minus = [], []
    for seed in range(6):
        cfg_b = drift_sim(trap, laser=cooling_laser(), seed=seed,
                          axialization=AxializationConfig(amplitude=1.0))
        eq = equilibrium_phonons(simulate_trajectory(cfg_b),
                                 cfg_b.averaging_window)
        n_plus.append(eq.n_plus)
        n_minus.append(eq.n_minus)
    mp, mm = float(np.mean(n_plus)), float(np.mean(n_minus))
    ratio = max(mp, mm) / min(mp, mm)
    ok_b = 10 <= mp <= 500 and 10 <= mm <= 500 and ratio <= 2.0
    report(capsys, 5, ok_a and ok_b,
           f"(a) {case_a}; (b) means n+={mp:.0f}, n-={mm:.0f}, "
           f"ratio {ratio:.2f} over 6 seeds")


def test_criterion_06_doppler_limits(capsys):
    def inputs(y0, nu_p=677e3, nu_m=52e3):
        return DopplerLimitInputs(gradient_length=y0, detuning=GAMMA / 2,
                                  linewidth=GAMMA,
                                  wavenumber=TWO_PI / 397e-9,
                                  omega_plus=TWO_PI * nu_p,
                                  omega_minus=TWO_PI * nu_m)

    def reference(y0, omega, magnetron):
        lw = (GAMMA / 2) ** 2 + (GAMMA / 2) ** 2
        k = TWO_PI / 397e-9
        num = 5.0 * y0 * k * lw
        den = 6.0 * (2.0 * (GAMMA / 2) * omega * y0 * k - lw)
        if magnetron:
            den = -den
        return num / den if den > 0 else math.inf

    cyc = doppler_limit_cyclotron(inputs(50e-6))
    mag_unstable = is_unstable(doppler_limit_magnetron(inputs(50e-6)))
    mag = doppler_limit_magnetron(inputs(5e-6))
    ok = (abs(cyc - reference(50e-6, TWO_PI * 677e3, False))
          <= 1e-6 * cyc and abs(cyc - 13.6) / 13.6 < 0.01
          and mag_unstable
          and abs(mag - reference(5e-6, TWO_PI * 52e3, True)) <= 1e-6 * mag
          and abs(mag - 107) / 107 < 0.01)
    # shape: magnetron blows up monotonically toward the boundary,
    # cyclotron curve is nearly flat
    axis = TWO_PI * np.linspace(5e3, 150e3, 40)
    rows = limit_curve(TWO_PI * 729e3, axis, gradient_length=50e-6,
                       detuning=GAMMA / 2, linewidth=GAMMA,
                       wavenumber=TWO_PI / 397e-9)
    stable = [r for r in rows if r[3]]
    mags = [r[2] for r in stable]
    cycs = [r[1] for r in rows]
    ok = (ok and len(stable) < len(rows) and mags == sorted(mags)
          and max(cycs) / min(cycs) < 1.3)
    report(capsys, 6, ok,
           f"n+={cyc:.2f} (13.6), magnetron(50um)=unstable:{mag_unstable}, "
           f"n-={mag:.1f} (107), curve shapes ok")


def test_criterion_07_coupling_minimum(freqs, capsys):
    eta = lamb_dicke(freqs, 729e-9, CA40)
    n_zero = first_coupling_zero(eta, order=1)
    tail = thermal_tail(136.0, 196)
    ok_tail = abs(tail - 0.236) <= 1e-3
    ok_zero = 193 <= n_zero <= 199
    report(capsys, 7, ok_zero and ok_tail,
           f"eta={eta:.4f}, first zero n={n_zero} (spec: 196 +/- 3), "
           f"P(n>196|136)={tail:.4f} (0.236 +/- 0.001)")


def _case1_axis():
    segs = [np.arange(-220e3, 220e3 + 1, 3e3)]
    for c in (NU_P, -NU_P):
        segs.append(np.arange(c - 220e3, c + 220e3 + 1, 3e3))
    for c in (2 * NU_P, -2 * NU_P):
        segs.append(np.arange(c - 60e3, c + 60e3 + 1, 5e3))
    return np.unique(np.concatenate(segs))


def _case2_axis():
    segs = [np.arange(-260e3, 260e3 + 1, 2.5e3)]
    for c in (NU_P, -NU_P):
        segs.append(np.arange(c - 80e3, c + 80e3 + 1, 2e3))
    return np.unique(np.concatenate(segs))


def test_criterion_08_thermometry_round_trips(freqs, capsys):
    eta = lamb_dicke(freqs, 729e-9, CA40)
    cases = [
        dict(truth=(96.0, 136.0, TWO_PI * 26e3), axis=_case1_axis(),
             guess=(80.0, 110.0, TWO_PI * 24e3),
             quoted=(5.0, 8.0, TWO_PI * 2e3), noise_seed=3),
        dict(truth=(0.35, 1.7, TWO_PI * 14.13e3), axis=_case2_axis(),
             guess=(0.5, 2.0, TWO_PI * 14e3),
             quoted=(0.05, 0.2, TWO_PI * 40.0), noise_seed=11),
    ]
    details, ok = [], True
    for case in cases:
        np_t, nm_t, om_t = case["truth"]
        state = ThermalState(np_t, nm_t)
        guess = dict(n_plus=case["guess"][0], n_minus=case["guess"][1],
                     omega0=case["guess"][2], background=0.04, center=0.0)
        # noiseless: 1% round trip
        scan = synthesize_scan(case["axis"], PROBE, om_t, state, eta,
                               NU_P, NU_M)
        res = fit_spectrum(scan, PROBE, eta, NU_P, NU_M, guess, restarts=2)
        clean_ok = (res.converged
                    and abs(res["n_plus"] - np_t) <= 0.01 * np_t
                    and abs(res["n_minus"] - nm_t) <= 0.01 * nm_t
                    and abs(res["omega0"] - om_t) <= 0.01 * om_t)
        # 150 shots/point: within the quoted one-sigma errors
        noisy = synthesize_scan(case["axis"], PROBE, om_t, state, eta,
                                NU_P, NU_M, shots=150,
                                seed=case["noise_seed"])
        resn = fit_spectrum(noisy, PROBE, eta, NU_P, NU_M, guess, restarts=2)
        dq = case["quoted"]
        noisy_ok = (resn.converged
                    and abs(resn["n_plus"] - np_t) <= dq[0]
                    and abs(resn["n_minus"] - nm_t) <= dq[1]
                    and abs(resn["omega0"] - om_t) <= dq[2])
        ok = ok and clean_ok and noisy_ok
        details.append(
            f"({np_t:g},{nm_t:g}): clean {'ok' if clean_ok else 'BAD'}, "
            f"noisy dev=({resn['n_plus'] - np_t:+.2f},"
            f"{resn['n_minus'] - nm_t:+.2f},"
            f"{(resn['omega0'] - om_t) / TWO_PI:+.1f} Hz)")
    # flop round trip at the cold parameters
    om_t = TWO_PI * 14.13e3
    t = np.linspace(0, 4e-4, 80)
    y = two_mode_rabi(t, om_t, ThermalState(0.35, 1.7), SidebandId(
        "magnetron", 1), eta)
    resf = fit_flop(t, y, eta, SidebandId("magnetron", 1),
                    guess={"n_minus": 2.0, "omega0": TWO_PI * 14e3},
                    fixed={"n_plus": 0.35, "tau_e": math.inf}, restarts=2)
    flop_ok = (resf.converged
               and abs(resf["n_minus"] - 1.7) <= 0.017
               and abs(resf["omega0"] - om_t) <= 0.01 * om_t)
    ok = ok and flop_ok
    report(capsys, 8, ok, "; ".join(details)
           + f"; flop {'ok' if flop_ok else 'BAD'}")


def test_criterion_09_sbc_sequencer(freqs, capsys):
    eta = lamb_dicke(freqs, 729e-9, CA40)
    params = RateModelParams(omega0=TWO_PI * 14.13e3,
                             effective_linewidth=TWO_PI * 7.5e3,
                             heating_rate_minus=300.0)
    res = simulate_sequence(table1_sequence(), ThermalState(96.0, 136.0),
                            params, eta)
    final = res.final
    order_ok = (final.n_plus_bar < 1.0 < final.n_minus_bar < 5.0
                and final.n_plus_bar < final.n_minus_bar)
    # first-order-only magnetron cooling traps population above the
    # coupling minimum
    first_only = [CoolingPulse("magnetron", 1, 20e-3, 1.0)]
    res1 = simulate_sequence(first_only, ThermalState(0.0, 136.0),
                             RateModelParams(omega0=TWO_PI * 14.13e3,
                                             effective_linewidth=TWO_PI * 7.5e3),
                             eta)
    trapped = float(res1.p_minus[197:].sum())
    ok = order_ok and trapped >= 0.05
    report(capsys, 9, ok,
           f"final n+={final.n_plus_bar:.2f}, n-={final.n_minus_bar:.2f}; "
           f"first-order-only leaves {trapped:.3f} above n=196")


def test_criterion_10_sweep_determinism(tmp_path, capsys):
    cfgf = tmp_path / "run.cfg"
    cfgf.write_text("sim.t_end = 2e-3\nsim.window_start = 1e-3\n"
                    "sim.window_end = 2e-3\nsweep.replicas = 2\n")
    blobs = []
    for name, jobs in (("a", "1"), ("b", "2")):
        out = tmp_path / name
        rc = main(["sweep", "--config", str(cfgf), "--out", str(out),
                   "--axis", "axialization.amplitude", "--values", "0,1",
                   "--seed", "5", "--jobs", jobs])
        assert rc == 0
        blobs.append((out / "sweep.csv").read_bytes())
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seed"] == 5
    ok = blobs[0] == blobs[1] and len(blobs[0]) > 0
    report(capsys, 10, ok,
           f"serial and 2-worker sweep CSVs byte-identical "
           f"({len(blobs[0])} bytes)")
