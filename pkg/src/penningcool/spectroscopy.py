"""Sideband spectrum synthesis and fitting for two-mode thermometry.

Phonon-change convention: sideband order is the line position in units of
the mode frequency relative to the carrier (sign = laser detuning sign).
For the modified cyclotron mode an order +s line changes n_plus by +s; for
the magnetron mode an order +s line changes n_minus by -s, because the mode
energy is negative (the blue magnetron sideband removes phonons and is the
cooling-relevant one).

Spectra are incoherent sums over well-resolved sidebands; every line is a
thermally weighted sum of generalized-Rabi excitation profiles.  Because a
thermal state near 100 phonons needs ~1000 Fock states per mode, the
two-mode sum is evaluated by histogramming the product couplings onto a
fixed grid, which keeps model evaluation fast enough for simplex fitting.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import eval_genlaguerre

from .constants import HBAR, KB, TWO_PI
from .errors import (FitFailed, NotConverged, TruncationInsufficient,
                     ValidationError)
from .rng import SplitMix64

DEFAULT_TAIL = 1e-3
MAX_CUTOFF = 4000


@dataclass(frozen=True)
class ThermalState:
    """Two independent thermal Fock distributions."""
    n_plus_bar: float
    n_minus_bar: float

    def __post_init__(self):
        if self.n_plus_bar < 0 or self.n_minus_bar < 0:
            raise ValidationError("mean phonon numbers must be >= 0")


@dataclass(frozen=True)
class SidebandId:
    mode: str    # "cyclotron" | "magnetron"
    order: int   # line position in units of the mode frequency; 0 = carrier

    def __post_init__(self):
        if self.mode not in ("cyclotron", "magnetron"):
            raise ValidationError("mode must be 'cyclotron' or 'magnetron'")

    @property
    def phonon_change(self):
        """Change of the addressed mode's phonon number when driven."""
        return self.order if self.mode == "cyclotron" else -self.order

    def detuning_hz(self, nu_plus_hz, nu_minus_hz):
        nu = nu_plus_hz if self.mode == "cyclotron" else nu_minus_hz
        return self.order * nu


CARRIER = SidebandId("cyclotron", 0)


def default_sidebands(max_cyclotron=2, max_magnetron=4):
    """Carrier plus symmetric single-mode sidebands."""
    out = [CARRIER]
    for s in range(1, max_cyclotron + 1):
        out += [SidebandId("cyclotron", s), SidebandId("cyclotron", -s)]
    for s in range(1, max_magnetron + 1):
        out += [SidebandId("magnetron", s), SidebandId("magnetron", -s)]
    return out


@dataclass
class SpectrumScan:
    detuning_hz: np.ndarray       # relative to the carrier
    excitation: np.ndarray        # shelving probability per point
    shots: np.ndarray = None      # experimental repetitions per point

    def __post_init__(self):
        self.detuning_hz = np.asarray(self.detuning_hz, dtype=float)
        self.excitation = np.asarray(self.excitation, dtype=float)
        if self.excitation.min() < 0 or self.excitation.max() > 1:
            raise ValidationError("excitation probabilities must lie in [0, 1]")
        if self.shots is not None:
            self.shots = np.asarray(self.shots, dtype=float)


@dataclass
class FitResult:
    names: list
    values: np.ndarray
    sigmas: np.ndarray
    residual_norm: float
    converged: bool
    fixed: dict = field(default_factory=dict)

    def __getitem__(self, name):
        if name in self.fixed:
            return self.fixed[name]
        return self.values[self.names.index(name)]

    def sigma(self, name):
        return self.sigmas[self.names.index(name)]

    def as_dict(self):
        d = {n: float(v) for n, v in zip(self.names, self.values)}
        d.update(self.fixed)
        return d


def lamb_dicke(freqs, probe_wavelength, ion=None):
    """Radial Lamb-Dicke parameter k*r0/2, identical for both radial modes."""
    from .trap import CA40
    if ion is None:
        ion = CA40
    k = TWO_PI / probe_wavelength
    return 0.5 * k * freqs.ground_state_radius(ion)


def fock_cutoff(nbar, tail=DEFAULT_TAIL, minimum=15, maximum=MAX_CUTOFF):
    """Smallest Fock cutoff N with thermal weight beyond N below `tail`."""
    if nbar <= 0:
        return minimum
    n = math.ceil(math.log(tail) / math.log(nbar / (nbar + 1.0))) - 1
    n = max(n, minimum)
    if n > maximum:
        raise TruncationInsufficient(
            f"nbar={nbar} needs cutoff {n} > maximum {maximum}")
    return n


def thermal_weights(nbar, cutoff):
    """Thermal occupation p(n) = nbar^n / (nbar+1)^(n+1), n = 0..cutoff."""
    n = np.arange(cutoff + 1)
    if nbar == 0:
        p = np.zeros(cutoff + 1)
        p[0] = 1.0
        return p
    return np.exp(n * math.log(nbar) - (n + 1) * math.log(nbar + 1.0))


def thermal_tail(nbar, n_cut):
    """Thermal probability of occupying any Fock state above n_cut."""
    if nbar < 0:
        raise ValidationError("nbar must be >= 0")
    if n_cut < 0:
        raise ValidationError("n_cut must be >= 0")
    if nbar == 0:
        return 0.0
    return (nbar / (nbar + 1.0)) ** (n_cut + 1)


def sideband_coupling(n, delta_n, eta):
    """Relative Rabi coupling <n+dn| e^{i eta (a+a^dag)} |n> / Omega0.

    Signed value; magnitude is the physically relevant factor.  Zero when
    the target state n+delta_n would be negative.
    """
    n = np.asarray(n)
    scalar = n.ndim == 0
    n = np.atleast_1d(n).astype(int)
    adn = abs(delta_n)
    n_less = np.minimum(n, n + delta_n)
    valid = n_less >= 0
    nl = np.where(valid, n_less, 0)
    # sqrt(n_<! / n_>!) = 1 / sqrt((n_<+1) (n_<+2) ... (n_<+|dn|))
    ratio = np.ones_like(nl, dtype=float)
    for i in range(1, adn + 1):
        ratio *= nl + i
    out = (math.exp(-0.5 * eta * eta) * eta ** adn
           * eval_genlaguerre(nl, adn, eta * eta) / np.sqrt(ratio))
    out = np.where(valid, out, 0.0)
    return float(out[0]) if scalar else out


def first_coupling_zero(eta, order=1, n_max=2000):
    """Fock number of the first sign change of the order-`order` coupling."""
    n = np.arange(n_max)
    vals = eval_genlaguerre(n, order, eta * eta)
    sign_change = np.nonzero(np.diff(np.sign(vals)))[0]
    if len(sign_change) == 0:
        raise ValidationError(f"no coupling zero below n={n_max}")
    return int(sign_change[0]) + 1


from functools import lru_cache


@lru_cache(maxsize=256)
def _coupling_array(cutoff, delta_n, eta):
    return np.abs(sideband_coupling(np.arange(cutoff + 1), delta_n, eta))


def _rebin(g, w, n_bins):
    """Compress (coupling, weight) pairs onto <= n_bins representative pairs
    using the weight-averaged coupling of each bin."""
    gmax = g.max()
    if gmax == 0.0:
        return np.array([0.0]), np.array([w.sum()])
    idx = np.minimum((g * (n_bins / gmax)).astype(np.intp), n_bins - 1)
    w_bins = np.bincount(idx, weights=w, minlength=n_bins)
    gw_bins = np.bincount(idx, weights=w * g, minlength=n_bins)
    occupied = w_bins > 0
    return gw_bins[occupied] / w_bins[occupied], w_bins[occupied]


def _pair_coupling_bins(state, sideband, eta, tail, n_bins,
                        marginal_bins=96):
    """Histogram |coupling| over the thermal two-mode Fock distribution.

    Returns (g_bins, w_bins): representative coupling per occupied bin and
    the total thermal weight in it.  The addressed mode carries the
    sideband's phonon change; the spectator contributes its carrier factor.
    Each mode's marginal is compressed first, so cost stays bounded even at
    the ~1000-state cutoffs a 100-phonon thermal state needs.
    """
    np_cut = fock_cutoff(state.n_plus_bar, tail)
    nm_cut = fock_cutoff(state.n_minus_bar, tail)
    dn_plus = sideband.phonon_change if sideband.mode == "cyclotron" else 0
    dn_minus = sideband.phonon_change if sideband.mode == "magnetron" else 0
    gp, wp = _rebin(_coupling_array(np_cut, dn_plus, eta),
                    thermal_weights(state.n_plus_bar, np_cut), marginal_bins)
    gm, wm = _rebin(_coupling_array(nm_cut, dn_minus, eta),
                    thermal_weights(state.n_minus_bar, nm_cut), marginal_bins)
    return _rebin(np.outer(gp, gm).ravel(), np.outer(wp, wm).ravel(), n_bins)


def two_mode_rabi(t, omega0, state, sideband=CARRIER, eta=0.0,
                  tau_e=math.inf, tail=DEFAULT_TAIL, n_bins=256):
    """Excitation probability of a Rabi flop on one sideband.

    Thermally weighted sum of 0.5 * (1 - exp(-t/tau_e) cos(Omega t)) over
    both modes' Fock distributions.
    """
    g, w = _pair_coupling_bins(state, sideband, eta, tail, n_bins)
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    tv = np.atleast_1d(t)
    osc = np.cos(np.outer(tv, omega0 * g)) @ w
    decay = np.exp(-tv / tau_e) if math.isfinite(tau_e) else 1.0
    p = 0.5 * (w.sum() - decay * osc)
    return float(p[0]) if scalar else p


def spectrum_model(detuning_hz, probe_time, omega0, state, eta,
                   nu_plus_hz, nu_minus_hz, sidebands=None,
                   background=0.04, tail=DEFAULT_TAIL, n_bins=256):
    """Incoherent multi-sideband excitation spectrum.

    Each sideband contributes a thermal sum of generalized-Rabi profiles
    Omega^2/(Omega^2+delta^2) sin^2(sqrt(Omega^2+delta^2) t/2) centered on
    its line position; a constant shelving background is added and the
    result clipped to [0, 1].
    """
    if sidebands is None:
        sidebands = default_sidebands()
    if not sidebands:
        raise ValidationError("sideband set must be non-empty")
    detuning_hz = np.asarray(detuning_hz, dtype=float)
    p = np.full(detuning_hz.shape, float(background))
    for sb in sidebands:
        g, w = _pair_coupling_bins(state, sb, eta, tail, n_bins)
        omega = omega0 * g
        delta = TWO_PI * (detuning_hz - sb.detuning_hz(nu_plus_hz, nu_minus_hz))
        om2 = omega * omega
        gen2 = om2[None, :] + (delta * delta)[:, None]
        # a zero-coupling bin on line center gives 0/0; its excitation is 0
        with np.errstate(invalid="ignore", divide="ignore"):
            profile = (om2[None, :] / gen2) * np.sin(0.5 * np.sqrt(gen2)
                                                     * probe_time) ** 2
        profile[gen2 == 0.0] = 0.0
        p += profile @ w
    return np.clip(p, 0.0, 1.0)


def synthesize_scan(detuning_hz, probe_time, omega0, state, eta,
                    nu_plus_hz, nu_minus_hz, sidebands=None,
                    background=0.04, shots=None, seed=0):
    """Generate a scan from the spectrum model, optionally with shot noise."""
    p = spectrum_model(detuning_hz, probe_time, omega0, state, eta,
                       nu_plus_hz, nu_minus_hz, sidebands, background)
    if shots is None:
        return SpectrumScan(detuning_hz=detuning_hz, excitation=p)
    rng = np.random.Generator(np.random.PCG64(seed))
    counts = rng.binomial(int(shots), p)
    return SpectrumScan(detuning_hz=detuning_hz,
                        excitation=counts / float(shots),
                        shots=np.full(len(p), float(shots)))


# ---------------------------------------------------------------------------
# generic weighted least-squares engine


def fit(model, xdata, ydata, p0, bounds, shots=None, restarts=4,
        xatol=1e-6, fatol=1e-9, spread=0.2, seed=12345):
    """Weighted least squares via multi-start Nelder-Mead.

    model(params, xdata) -> predicted values.  Weights are binomial standard
    errors from the shot counts, evaluated at the model prediction (unit
    weights when shots is None).  Weighting by the predicted rather than the
    observed probability avoids the small-p bias where downward fluctuations
    get tiny error bars and drag the fit.  After the multi-start search the
    weights are frozen at the best-fit prediction and the minimization is
    repeated; with fixed weights the estimator loses the residual incentive
    to inflate low-probability predictions.  Uncertainties come from the
    quadratic expansion of the chi^2 surface at the optimum.  Restarts
    perturb the initial guess deterministically and the best residual wins
    (ties: lowest restart index).
    """
    p0 = np.asarray(p0, dtype=float)
    lo = np.asarray([b[0] for b in bounds], dtype=float)
    hi = np.asarray([b[1] for b in bounds], dtype=float)
    if np.any(p0 < lo) or np.any(p0 > hi):
        raise ValidationError("initial guess outside bounds")
    ydata = np.asarray(ydata, dtype=float)
    shots_arr = None if shots is None else np.asarray(shots, dtype=float)

    def make_chi2(sig):
        def chi2(params):
            if np.any(params < lo) or np.any(params > hi):
                # smooth penalty keeps the simplex inside the box
                excess = (np.maximum(lo - params, 0) ** 2
                          + np.maximum(params - hi, 0) ** 2)
                params = np.clip(params, lo, hi)
                return chi2(params) + 1e8 * excess.sum()
            pred = model(params, xdata)
            r = ydata - pred
            if sig is not None:
                return float(((r / sig) ** 2).sum())
            if shots_arr is None:
                return float(r @ r)
            pc = np.clip(pred, 0.01, 0.99)
            var = pc * (1.0 - pc) / shots_arr
            return float((r * r / var).sum())
        return chi2

    def frozen_sigma(params):
        pc = np.clip(model(params, xdata), 0.01, 0.99)
        return np.sqrt(pc * (1.0 - pc) / shots_arr)

    chi2 = make_chi2(None)
    opts = {"xatol": xatol, "fatol": fatol, "maxiter": 4000 * len(p0)}
    rng = SplitMix64(seed)
    best = None
    best_ix = -1
    for ix in range(restarts):
        if ix == 0:
            start = p0
        else:
            jitter = np.array([1.0 + spread * (2.0 * rng.uniform() - 1.0)
                               for _ in p0])
            start = np.clip(p0 * jitter, lo, hi)
        res = minimize(chi2, start, method="Nelder-Mead", options=opts)
        if best is None or res.fun < best.fun:
            best = res
            best_ix = ix
    if best is None or not np.isfinite(best.fun):
        raise NotConverged("no restart produced a finite residual")

    if shots_arr is not None:
        # frozen-weight refinement (iteratively reweighted least squares)
        for _ in range(2):
            prev = np.clip(best.x, lo, hi)
            chi2 = make_chi2(frozen_sigma(prev))
            best = minimize(chi2, prev, method="Nelder-Mead", options=opts)
            if np.allclose(best.x, prev, rtol=1e-6, atol=0.0):
                break

    values = np.clip(best.x, lo, hi)
    sigmas = _hessian_sigmas(chi2, values, lo, hi)
    return values, sigmas, math.sqrt(best.fun), bool(best.success), best_ix


def _hessian_sigmas(chi2, p, lo, hi):
    """1-sigma uncertainties from the local quadratic chi^2 expansion."""
    npar = len(p)
    h = np.maximum(1e-5 * np.maximum(np.abs(p), 1e-12), 1e-12)
    hess = np.zeros((npar, npar))
    f0 = chi2(p)
    for i in range(npar):
        ei = np.zeros(npar)
        ei[i] = h[i]
        hess[i, i] = (chi2(p + ei) - 2 * f0 + chi2(p - ei)) / h[i] ** 2
        for j in range(i + 1, npar):
            ej = np.zeros(npar)
            ej[j] = h[j]
            hess[i, j] = hess[j, i] = (
                chi2(p + ei + ej) - chi2(p + ei - ej)
                - chi2(p - ei + ej) + chi2(p - ei - ej)
            ) / (4 * h[i] * h[j])
    try:
        cov = 2.0 * np.linalg.inv(hess)
        diag = np.diag(cov)
        sig = np.sqrt(np.where(diag > 0, diag, np.nan))
    except np.linalg.LinAlgError:
        sig = np.full(npar, np.nan)
    return sig


# ---------------------------------------------------------------------------
# high-level thermometry fits

SPECTRUM_PARAMS = ("n_plus", "n_minus", "omega0", "background", "center")
FLOP_PARAMS = ("n_plus", "n_minus", "omega0", "tau_e")


def _split_params(defaults, guess, fixed):
    fixed = dict(fixed or {})
    names = [n for n in defaults if n not in fixed]
    for n in names:
        if n not in guess:
            raise ValidationError(f"missing initial guess for {n!r}")
    return names, fixed


def fit_spectrum(scan, probe_time, eta, nu_plus_hz, nu_minus_hz,
                 guess, sidebands=None, fixed=None, bounds=None, restarts=4):
    """Fit the two-mode thermal spectrum model to a scan.

    Free parameters (unless pinned via `fixed`): n_plus, n_minus, omega0,
    background, center (a common carrier-frequency offset in Hz).
    """
    names, fixed = _split_params(SPECTRUM_PARAMS, guess, fixed)
    default_bounds = {"n_plus": (0.0, 2e3), "n_minus": (0.0, 2e3),
                      "omega0": (0.0, 1e7), "background": (0.0, 0.5),
                      "center": (-1e5, 1e5)}
    bnds = [tuple((bounds or {}).get(n, default_bounds[n])) for n in names]

    def model(params, x):
        d = dict(zip(names, params))
        d.update(fixed)
        state = ThermalState(n_plus_bar=d["n_plus"], n_minus_bar=d["n_minus"])
        return spectrum_model(x - d["center"], probe_time, d["omega0"], state,
                              eta, nu_plus_hz, nu_minus_hz, sidebands,
                              background=d["background"])

    p0 = [guess[n] for n in names]
    values, sigmas, rnorm, ok, _ = fit(model, scan.detuning_hz,
                                       scan.excitation, p0, bnds,
                                       shots=scan.shots, restarts=restarts)
    return FitResult(names=names, values=values, sigmas=sigmas,
                     residual_norm=rnorm, converged=ok, fixed=fixed)


def fit_flop(times, excitation, eta, sideband, guess, shots=None,
             fixed=None, bounds=None, restarts=4):
    """Fit the two-mode thermal Rabi-flop formula to time-series data.

    Free parameters (unless pinned): n_plus, n_minus, omega0, tau_e.
    """
    names, fixed = _split_params(FLOP_PARAMS, guess, fixed)
    default_bounds = {"n_plus": (0.0, 2e3), "n_minus": (0.0, 2e3),
                      "omega0": (0.0, 1e7), "tau_e": (1e-6, 1e3)}
    bnds = [tuple((bounds or {}).get(n, default_bounds[n])) for n in names]

    def model(params, t):
        d = dict(zip(names, params))
        d.update(fixed)
        state = ThermalState(n_plus_bar=d["n_plus"], n_minus_bar=d["n_minus"])
        return two_mode_rabi(t, d["omega0"], state, sideband, eta,
                             tau_e=d["tau_e"])

    p0 = [guess[n] for n in names]
    values, sigmas, rnorm, ok, _ = fit(model, np.asarray(times, dtype=float),
                                       excitation, p0, bnds, shots=shots,
                                       restarts=restarts)
    return FitResult(names=names, values=values, sigmas=sigmas,
                     residual_norm=rnorm, converged=ok, fixed=fixed)


# ---------------------------------------------------------------------------
# Gaussian-comb envelope thermometry


@dataclass
class CombThermometry:
    sigma_hz: float
    temperature: float
    nbar: float
    fit: FitResult


def _comb_model(params, x, spacing_hz):
    amp, sigma_env, sigma_line, background, center = params
    xc = x - center
    j_min = int(np.floor(xc.min() / spacing_hz)) - 1
    j_max = int(np.ceil(xc.max() / spacing_hz)) + 1
    comb = np.zeros_like(xc)
    for j in range(j_min, j_max + 1):
        comb += np.exp(-0.5 * ((xc - j * spacing_hz) / sigma_line) ** 2)
    env = np.exp(-0.5 * (xc / sigma_env) ** 2)
    return background + amp * env * comb


def gaussian_comb_thermometry(scan, spacing_hz, mode, freqs, ion,
                              probe_wavelength, guess=None, restarts=4):
    """Temperature from the Gaussian envelope of an unresolved sideband comb.

    Fits a comb of Gaussian peaks (spacing fixed to the mode frequency)
    modulated by a Gaussian envelope of width sigma (Hz); the envelope
    defines T = M lambda^2 sigma^2 / kB and the mean occupation follows
    from the mode frequencies.
    """
    span = scan.detuning_hz.max() - scan.detuning_hz.min()
    if span < 3 * spacing_hz:
        raise ValidationError("scan must span at least 3 sidebands")
    if guess is None:
        amp0 = max(scan.excitation.max() - scan.excitation.min(), 0.05)
        guess = {"amp": amp0, "sigma_env": span / 4,
                 "sigma_line": spacing_hz / 6,
                 "background": max(scan.excitation.min(), 1e-3), "center": 0.0}
    p0 = [guess["amp"], guess["sigma_env"], guess["sigma_line"],
          guess["background"], guess["center"]]
    bnds = [(1e-4, 1.0), (spacing_hz / 10, 100 * span), (1.0, spacing_hz),
            (0.0, 0.5), (-span, span)]

    def model(params, x):
        return _comb_model(params, x, spacing_hz)

    values, sigmas, rnorm, ok, _ = fit(model, scan.detuning_hz,
                                       scan.excitation, p0, bnds,
                                       shots=scan.shots, restarts=restarts)
    sigma_env = values[1]
    if not np.isfinite(sigmas[1]) or sigma_env >= 99 * span:
        raise FitFailed("envelope width unconstrained by the scan")
    temperature = ion.mass * probe_wavelength ** 2 * sigma_env ** 2 / KB
    omega_mode = (freqs.omega_plus if mode == "cyclotron"
                  else freqs.omega_minus)
    nbar = temperature * KB * freqs.omega_1 / (2 * HBAR * omega_mode ** 2)
    result = FitResult(names=["amp", "sigma_env", "sigma_line", "background",
                              "center"],
                       values=values, sigmas=sigmas, residual_norm=rnorm,
                       converged=ok)
    return CombThermometry(sigma_hz=float(sigma_env),
                           temperature=float(temperature),
                           nbar=float(nbar), fit=result)
