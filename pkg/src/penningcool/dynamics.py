"""Stochastic cooling dynamics: RK8 drift + photon recoil + axialization.

A trajectory is integrated on a fixed 20 ns grid (configurable) so that the
Poissonian recoil kicks land between deterministic drift steps.  Cycle
averaged squared amplitudes are recorded after subtracting the static
displacement caused by the constant radiation-pressure force, and converted
to mean phonon numbers with the zero-point-free convention.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import _rk8_tableau as _tab
from .constants import HBAR, TWO_PI
from .errors import StepRejected, ValidationError, WindowEmpty
from .kernel import simulate_core
from .laser import scattering_rate
from .rng import derive_seed
from .trap import (PhaseState, PhononNumbers, compute_frequencies)

# Default initial condition: a hot magnetron orbit with a modest cyclotron
# component (n_minus ~ 1.8e4, n_plus ~ 200 at the reference frequencies).
DEFAULT_INITIAL_STATE = PhaseState(t=0.0, x=-4e-6, y=0.0, vx=1.0, vy=2.0)


@dataclass(frozen=True)
class AxializationConfig:
    """Azimuthal quadrupolar drive that couples the two radial modes."""
    amplitude: float                 # V
    drive_frequency: float = None    # rad/s; None = true cyclotron frequency
    phase: float = 0.0               # rad

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValidationError("axialization amplitude must be >= 0")
        if self.drive_frequency is not None and self.drive_frequency <= 0:
            raise ValidationError("drive frequency must be positive")


@dataclass(frozen=True)
class SimConfig:
    trap: object
    laser: object = None
    axialization: AxializationConfig = None
    dt: float = 20e-9
    t_end: float = 20e-3
    averaging_window: tuple = (10e-3, 20e-3)
    initial_state: PhaseState = DEFAULT_INITIAL_STATE
    seed: int = 0
    record_stride: int = 500
    divergence_bound: float = 1e-3   # m

    def __post_init__(self):
        if self.dt <= 0:
            raise ValidationError("dt must be positive")
        freqs = compute_frequencies(self.trap)
        if self.dt > 0.1 * TWO_PI / freqs.omega_plus:
            raise ValidationError(
                "dt must resolve the modified cyclotron period "
                f"(dt <= {0.1 * TWO_PI / freqs.omega_plus:.3g} s required)")
        t_a, t_b = self.averaging_window
        if not (t_a < t_b <= self.t_end):
            raise ValidationError("averaging window must satisfy t_a < t_b <= t_end")
        if self.record_stride < 1:
            raise ValidationError("record stride must be >= 1")
        if self.divergence_bound <= 0:
            raise ValidationError("divergence bound must be positive")


@dataclass
class TrajectoryRecord:
    """Sampled time series of one stochastic trajectory."""
    times: np.ndarray
    r_plus_sq: np.ndarray
    r_minus_sq: np.ndarray
    n_plus: np.ndarray
    n_minus: np.ndarray
    photons: np.ndarray
    final_state: PhaseState
    diverged: bool
    total_photons: int
    freqs: object = field(repr=False, default=None)


def radial_acceleration(state, trap, axialization=None):
    """Radial acceleration (ax, ay) including the axialization drive."""
    freqs = compute_frequencies(trap)
    d = 0.0
    if axialization is not None and axialization.amplitude > 0:
        omega_d = axialization.drive_frequency or freqs.omega_c
        d = (trap.ion.charge * axialization.amplitude
             / (trap.ion.mass * trap.ring_radius ** 2)
             ) * math.sin(omega_d * state.t + axialization.phase)
    half_wz_sq = 0.5 * freqs.omega_z ** 2
    ax = freqs.omega_c * state.vy + half_wz_sq * state.x + d * state.x
    ay = -freqs.omega_c * state.vx + half_wz_sq * state.y - d * state.y
    return ax, ay


def _drive_params(trap, axialization, freqs):
    if axialization is None or axialization.amplitude == 0:
        return 0.0, freqs.omega_c, 0.0
    omega_d = axialization.drive_frequency or freqs.omega_c
    amp = (trap.ion.charge * axialization.amplitude
           / (trap.ion.mass * trap.ring_radius ** 2))
    return amp, omega_d, axialization.phase


def integrate_step(state, trap, axialization, dt):
    """One deterministic RK8 step of the drift dynamics (no recoil)."""
    freqs = compute_frequencies(trap)
    drive_amp, drive_freq, phase = _drive_params(trap, axialization, freqs)
    out = np.zeros((4, 2))
    _, _, _, x, y, vx, vy, t = simulate_core(
        state.x, state.y, state.vx, state.vy, state.t, 1, dt,
        freqs.omega_c, 0.5 * freqs.omega_z ** 2,
        drive_amp, drive_freq, phase,
        0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0, 1,
        freqs.omega_plus, freqs.omega_minus,
        0.25 / freqs.omega_1 ** 2, np.inf,
        _tab.A, _tab.B, _tab.C,
        out[0], out[1], out[2], out[3])
    if not all(map(math.isfinite, (x, y, vx, vy))):
        raise StepRejected("integration step produced a non-finite state")
    return PhaseState(t=t, x=x, y=y, vx=vx, vy=vy)


def laser_force_offset(laser, trap, state=None):
    """Static x displacement caused by the mean radiation-pressure force.

    Subtracted from the x coordinate before projecting onto the circular
    modes, so recorded amplitudes refer to the displaced orbit center.
    """
    if laser is None:
        return 0.0
    if state is None:
        state = DEFAULT_INITIAL_STATE
    freqs = compute_frequencies(trap)
    if freqs.omega_z == 0:
        return 0.0
    gamma0 = scattering_rate(state, laser)
    return (2.0 * HBAR * laser.wavenumber * gamma0
            / (trap.ion.mass * freqs.omega_z ** 2))


def simulate_trajectory(cfg):
    """Run one stochastic cooling trajectory, reproducible from cfg.seed."""
    freqs = compute_frequencies(cfg.trap)
    drive_amp, drive_freq, phase = _drive_params(
        cfg.trap, cfg.axialization, freqs)

    has_laser = 0
    flux_peak = y_center = two_over_wsq = hg = delta = k_laser = recoil = 0.0
    x_shift = 0.0
    if cfg.laser is not None:
        las = cfg.laser
        has_laser = 1
        peak = 2.0 * las.power / (math.pi * las.waist ** 2)
        flux_peak = peak * las.cross_section / (HBAR * las.angular_frequency)
        y_center = las.offset
        two_over_wsq = 2.0 / las.waist ** 2
        hg = 0.5 * las.linewidth
        delta = las.detuning
        k_laser = las.wavenumber
        recoil = las.recoil_velocity(cfg.trap.ion)
        x_shift = laser_force_offset(las, cfg.trap, cfg.initial_state)

    n_steps = int(round(cfg.t_end / cfg.dt))
    n_rec_max = n_steps // cfg.record_stride + 1
    out_t = np.zeros(n_rec_max)
    out_rp2 = np.zeros(n_rec_max)
    out_rm2 = np.zeros(n_rec_max)
    out_ph = np.zeros(n_rec_max)

    st = cfg.initial_state
    n_rec, diverged, total_photons, x, y, vx, vy, t = simulate_core(
        st.x, st.y, st.vx, st.vy, st.t, n_steps, cfg.dt,
        freqs.omega_c, 0.5 * freqs.omega_z ** 2,
        drive_amp, drive_freq, phase,
        has_laser, flux_peak, y_center, two_over_wsq,
        hg, delta, k_laser, recoil,
        x_shift, cfg.seed, cfg.record_stride,
        freqs.omega_plus, freqs.omega_minus,
        0.25 / freqs.omega_1 ** 2, cfg.divergence_bound ** 2,
        _tab.A, _tab.B, _tab.C,
        out_t, out_rp2, out_rm2, out_ph)

    scale = cfg.trap.ion.mass * freqs.omega_1 / HBAR
    sl = slice(0, n_rec)
    final = PhaseState(t=t, x=x, y=y, vx=vx, vy=vy) if all(
        map(math.isfinite, (x, y, vx, vy))) else PhaseState(t=t)
    return TrajectoryRecord(
        times=out_t[sl].copy(),
        r_plus_sq=out_rp2[sl].copy(),
        r_minus_sq=out_rm2[sl].copy(),
        n_plus=out_rp2[sl] * scale,
        n_minus=out_rm2[sl] * scale,
        photons=out_ph[sl].copy(),
        final_state=final,
        diverged=bool(diverged),
        total_photons=int(total_photons),
        freqs=freqs)


def equilibrium_phonons(record, window):
    """Ergodic single-trajectory estimate: time-average n over the window."""
    t_a, t_b = window
    mask = (record.times >= t_a) & (record.times <= t_b)
    if not mask.any():
        raise WindowEmpty(
            f"no samples in window [{t_a}, {t_b}] "
            f"(record ends at {record.times[-1] if len(record.times) else 'start'})")
    return PhononNumbers(n_plus=float(record.n_plus[mask].mean()),
                         n_minus=float(record.n_minus[mask].mean()))


# sweep axes: config attribute paths that may be scanned
SWEEP_AXES = (
    "axialization.amplitude",
    "laser.waist",
    "laser.offset",
    "laser.power",
    "laser.detuning",
    "trap.trap_voltage",
    "seed",
)


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: float
    replica: int
    seed: int
    n_plus: float
    n_minus: float
    diverged: bool


def _with_axis_value(cfg, axis, value):
    if axis == "seed":
        return replace(cfg, seed=int(value))
    section, _, key = axis.partition(".")
    if section == "axialization":
        ax = cfg.axialization or AxializationConfig(amplitude=0.0)
        return replace(cfg, axialization=replace(ax, **{key: value}))
    if section == "laser":
        if cfg.laser is None:
            raise ValidationError("cannot sweep a laser axis without a laser")
        return replace(cfg, laser=replace(cfg.laser, **{key: value}))
    if section == "trap":
        return replace(cfg, trap=replace(cfg.trap, **{key: value}))
    raise ValidationError(f"unknown sweep axis {axis!r}")


def _sweep_point(args):
    cfg, axis, value, value_ix, replica = args
    seed = int(value) if axis == "seed" else derive_seed(
        cfg.seed, value_ix, replica)
    point = _with_axis_value(cfg, axis, value)
    point = replace(point, seed=seed)
    rec = simulate_trajectory(point)
    try:
        eq = equilibrium_phonons(rec, cfg.averaging_window)
        n_plus, n_minus = eq.n_plus, eq.n_minus
    except WindowEmpty:
        n_plus = n_minus = math.nan
    return SweepRow(axis=axis, value=float(value), replica=replica, seed=seed,
                    n_plus=n_plus, n_minus=n_minus, diverged=rec.diverged)


def sweep(cfg, axis, values, replicas=1, jobs=None):
    """Equilibrium phonon numbers along one parameter axis.

    One row per (value, replica).  Each point runs with an independent RNG
    stream derived from (cfg.seed, value index, replica index), so results
    are deterministic and order-independent.  Diverged trajectories are
    returned as tagged rows, not raised.
    """
    if axis not in SWEEP_AXES:
        raise ValidationError(f"sweep axis must be one of {SWEEP_AXES}")
    tasks = [(cfg, axis, v, i, r)
             for i, v in enumerate(values) for r in range(replicas)]
    if jobs is not None and jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(t) for t in tasks]
    return rows
