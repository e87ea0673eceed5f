"""Rate-equation sideband-cooling sequencer for the two radial modes.

A pulse addresses one mode on a single sideband order and removes phonons
(red sidebands of the modified cyclotron, blue sidebands of the magnetron,
whose energy ladder is inverted).  In the weak-coupling regime the pump
rate out of Fock state n is R(n) = Omega_{n,n-s}^2 / Gamma_eff, with the
coupling taken from the full Laguerre-polynomial matrix element, so the
model reproduces the coupling minima that trap population when only
first-order sidebands are driven.

During a pulse the addressed mode's Fock distribution evolves under the
linear master equation (cooling cascade plus heating at the configured
rate), solved exactly with a sparse matrix exponential so stiff high-n
rates need no step-size tuning.  The spectator mode only heats: its mean
drifts linearly and the distribution is re-thermalized at each sub-step.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.sparse import csc_matrix
from scipy.sparse.linalg import expm_multiply

from .constants import TWO_PI
from .errors import CutoffExceeded, ParseError, ValidationError
from .spectroscopy import ThermalState, fock_cutoff, sideband_coupling, thermal_weights

MODES = ("cyclotron", "magnetron")

# Leaked weight at the top of the Fock ladder that invalidates a run.
LEAK_TOLERANCE = 1e-3


@dataclass(frozen=True)
class CoolingPulse:
    """One sideband pulse: which mode, which order, how long, how hard."""
    mode: str
    order: int
    duration: float              # s
    intensity_fraction: float    # fraction of the full carrier Rabi frequency

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}")
        if self.order < 1:
            raise ValidationError("sideband order must be >= 1")
        if self.duration <= 0:
            raise ValidationError("pulse duration must be positive")
        if not 0.0 <= self.intensity_fraction <= 1.0:
            raise ValidationError("intensity fraction must lie in [0, 1]")


@dataclass(frozen=True)
class RateModelParams:
    """Parameters of the weak-coupling cooling model.

    carrier_offset_rate adds extra magnetron heating during first-order
    magnetron pulses, standing in for off-resonant carrier excitation by
    the nearby carrier; zero by default.
    """
    omega0: float = TWO_PI * 14.13e3          # rad/s, full carrier Rabi freq
    effective_linewidth: float = TWO_PI * 7.5e3   # rad/s, quench-broadened
    heating_rate_plus: float = 0.0            # phonons/s
    heating_rate_minus: float = 0.0           # phonons/s
    carrier_offset_rate: float = 0.0          # phonons/s, magnetron 1st order
    cutoff: int = None                        # Fock cutoff; None = automatic
    substep: float = 1e-4                     # s, recording/rethermal grid

    def __post_init__(self):
        if self.omega0 <= 0 or self.effective_linewidth <= 0:
            raise ValidationError("omega0 and effective linewidth must be positive")
        if min(self.heating_rate_plus, self.heating_rate_minus,
               self.carrier_offset_rate) < 0:
            raise ValidationError("heating rates must be >= 0")
        if self.substep <= 0:
            raise ValidationError("substep must be positive")


def table1_sequence():
    """The 68 ms two-mode cooling sequence used in the experiment."""
    c, m = MODES
    rows = [
        (c, 2, 5e-3, 1.00), (c, 1, 10e-3, 1.00),
        (m, 3, 5e-3, 1.00), (m, 2, 5e-3, 1.00), (m, 1, 5e-3, 0.52),
        (c, 2, 5e-3, 1.00), (c, 1, 5e-3, 1.00),
        (m, 3, 5e-3, 1.00), (m, 2, 5e-3, 1.00), (m, 1, 5e-3, 0.52),
        (c, 1, 10e-3, 1.00), (m, 1, 2e-3, 0.52), (c, 1, 1e-3, 1.00),
    ]
    return [CoolingPulse(*r) for r in rows]


def parse_sequence(text):
    """Parse a sequence file: one `mode order duration_ms intensity_pct`
    per line; blank lines and `#` comments ignored."""
    pulses = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ParseError("expected 'mode order duration_ms intensity_pct'",
                             line=ln)
        mode = parts[0].lower()
        if mode not in MODES:
            raise ParseError(f"unknown mode {parts[0]!r}", line=ln)
        try:
            order = int(parts[1])
            duration_ms = float(parts[2])
            intensity_pct = float(parts[3])
        except ValueError as exc:
            raise ParseError(str(exc), line=ln) from None
        try:
            pulses.append(CoolingPulse(mode, order, duration_ms * 1e-3,
                                       intensity_pct / 100.0))
        except ValidationError as exc:
            raise ParseError(str(exc), line=ln) from None
    return pulses


def format_sequence(pulses):
    """Inverse of parse_sequence."""
    lines = ["# mode order duration_ms intensity_pct"]
    for p in pulses:
        lines.append(f"{p.mode} {p.order} {p.duration * 1e3:g} "
                     f"{p.intensity_fraction * 100.0:g}")
    return "\n".join(lines) + "\n"


def pump_rate(n, pulse, params, eta):
    """Phonon-removing pump rate out of Fock state n, in 1/s."""
    if n < pulse.order:
        return 0.0
    g = abs(sideband_coupling(n, -pulse.order, eta))
    omega = params.omega0 * pulse.intensity_fraction * g
    return omega * omega / params.effective_linewidth


@dataclass
class SBCResult:
    """Time series and final Fock distributions of a cooling sequence."""
    times: np.ndarray
    n_plus: np.ndarray
    n_minus: np.ndarray
    p_plus: np.ndarray
    p_minus: np.ndarray
    pulse_edges: np.ndarray

    @property
    def final(self):
        return ThermalState(float(self.n_plus[-1]), float(self.n_minus[-1]))


def _generator(cutoff, pulse, params, eta, heating):
    """Sparse master-equation generator for the addressed mode."""
    n = np.arange(cutoff + 1)
    cool = np.array([pump_rate(k, pulse, params, eta) for k in n])
    diag = -cool.copy()
    rows = [n[pulse.order:] - pulse.order]
    cols = [n[pulse.order:]]
    vals = [cool[pulse.order:]]
    if heating > 0:
        up = heating * (n + 1.0)
        up[-1] = 0.0   # clamp the ladder top; leakage is monitored instead
        down = heating * n.astype(float)
        diag -= up + down
        rows += [n[:-1] + 1, n[1:] - 1]
        cols += [n[:-1], n[1:]]
        vals += [up[:-1], down[1:]]
    rows.append(n)
    cols.append(n)
    vals.append(diag)
    return csc_matrix((np.concatenate(vals),
                       (np.concatenate(rows), np.concatenate(cols))),
                      shape=(cutoff + 1, cutoff + 1))


def _mode_cutoff(nbar, params):
    if params.cutoff is not None:
        return params.cutoff
    # generous tail so trapped population near coupling minima stays
    # comfortably below the ladder top
    return fock_cutoff(nbar, tail=1e-4, minimum=40)


def simulate_sequence(seq, initial, params, eta):
    """Evolve two thermal modes through a pulse sequence.

    The addressed mode's distribution is propagated exactly under the
    cooling-plus-heating generator; the spectator mode's mean heats
    linearly and is re-thermalized every sub-step.  Distributions stay
    normalized to machine precision; weight reaching the ladder top in
    excess of LEAK_TOLERANCE raises CutoffExceeded.
    """
    cut = {"cyclotron": _mode_cutoff(initial.n_plus_bar, params),
           "magnetron": _mode_cutoff(initial.n_minus_bar, params)}
    p = {"cyclotron": thermal_weights(initial.n_plus_bar, cut["cyclotron"]),
         "magnetron": thermal_weights(initial.n_minus_bar, cut["magnetron"])}
    for mode in MODES:
        p[mode] /= p[mode].sum()
    heat = {"cyclotron": params.heating_rate_plus,
            "magnetron": params.heating_rate_minus}

    def mean(mode):
        return float(np.arange(cut[mode] + 1) @ p[mode])

    times = [0.0]
    series = {m: [mean(m)] for m in MODES}
    edges = [0.0]
    t = 0.0

    for pulse in seq:
        n_sub = max(1, int(round(pulse.duration / params.substep)))
        dt = pulse.duration / n_sub
        addressed, spectator = pulse.mode, (
            "magnetron" if pulse.mode == "cyclotron" else "cyclotron")

        h = heat[addressed]
        if addressed == "magnetron" and pulse.order == 1:
            h += params.carrier_offset_rate
        gen = _generator(cut[addressed], pulse, params, eta, h)
        states = expm_multiply(gen, p[addressed], start=0.0,
                               stop=pulse.duration, num=n_sub + 1,
                               endpoint=True)
        p[addressed] = states[-1]
        if p[addressed][-1] > LEAK_TOLERANCE:
            raise CutoffExceeded(
                f"{addressed} weight {p[addressed][-1]:.2e} at the Fock "
                f"ladder top (cutoff {cut[addressed]})")

        spec_bar = series[spectator][-1]
        grid = np.arange(cut[addressed] + 1, dtype=float)
        for i in range(1, n_sub + 1):
            t += dt
            spec_bar += heat[spectator] * dt
            times.append(t)
            series[addressed].append(float(grid @ states[i]))
            series[spectator].append(spec_bar)
        p[spectator] = thermal_weights(spec_bar, cut[spectator])
        p[spectator] /= p[spectator].sum()
        edges.append(t)

    return SBCResult(times=np.asarray(times),
                     n_plus=np.asarray(series["cyclotron"]),
                     n_minus=np.asarray(series["magnetron"]),
                     p_plus=p["cyclotron"], p_minus=p["magnetron"],
                     pulse_edges=np.asarray(edges))
