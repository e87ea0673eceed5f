"""Command-line interface: simulate | sweep | limits | fit | sbc.

Every run writes its artifacts into --out together with an echo of the
effective configuration and a manifest carrying the seed, package version
and config hash, so identical (config, seed, version) runs are
byte-identical and mismatched re-runs are detectable.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 fit non-convergence.  Failures print a machine-readable JSON object on
stderr.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__, sbc as sbc_mod, svg
from .config import (build_sim, build_trap, parse_config)
from .constants import TWO_PI
from .dynamics import equilibrium_phonons, simulate_trajectory, sweep
from .errors import (FitFailed, ParseError, PenningCoolError, ValidationError,
                     WindowEmpty)
from .limits import limit_curve
from .spectroscopy import (SpectrumScan, ThermalState, fit_spectrum,
                           lamb_dicke, spectrum_model)
from .trap import CA40, compute_frequencies, cycle_averaged_amplitudes, total_energy


def _g17(x):
    return f"{float(x):.17g}"


def write_csv(path, header, rows):
    """One header row, fixed column order, floats at 17 significant digits."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = [_g17(c) if isinstance(c, float) else str(c) for c in row]
            fh.write(",".join(cells) + "\n")
    return path


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _emit_manifest(out_dir, command, cfg, artifacts):
    cfg_path = os.path.join(out_dir, "effective_config.txt")
    with open(cfg_path, "w", encoding="utf-8") as fh:
        fh.write(cfg.canonical_text())
    manifest = {
        "command": command,
        "version": __version__,
        "seed": cfg["run.seed"],
        "config_sha256": cfg.config_hash(),
        "artifacts": [os.path.basename(a) for a in artifacts],
    }
    _write_json(os.path.join(out_dir, "manifest.json"), manifest)


def _json_safe(x):
    x = float(x)
    return None if not math.isfinite(x) else x


def cmd_simulate(cfg, out_dir, make_svg):
    sim = build_sim(cfg)
    rec = simulate_trajectory(sim)
    rows = zip(rec.times, rec.r_plus_sq, rec.r_minus_sq,
               rec.n_plus, rec.n_minus, rec.photons)
    artifacts = [write_csv(
        os.path.join(out_dir, "trajectory.csv"),
        ("t_s", "r_plus_sq_m2", "r_minus_sq_m2", "n_plus", "n_minus",
         "photons"),
        [(float(a), float(b), float(c), float(d), float(e), float(f))
         for a, b, c, d, e, f in rows])]

    summary = {"diverged": rec.diverged, "total_photons": rec.total_photons}
    try:
        eq = equilibrium_phonons(rec, sim.averaging_window)
        summary["n_plus_eq"] = _json_safe(eq.n_plus)
        summary["n_minus_eq"] = _json_safe(eq.n_minus)
    except WindowEmpty:
        summary["n_plus_eq"] = summary["n_minus_eq"] = None
    if sim.laser is None:
        # conservative dynamics: report the relative drift of the total
        # energy between the first and last recorded samples
        e = [total_energy(0.0, rp, rm, rec.freqs, sim.trap.ion)
             for rp, rm in ((rec.r_plus_sq[0], rec.r_minus_sq[0]),
                            (rec.r_plus_sq[-1], rec.r_minus_sq[-1]))]
        summary["energy_drift_rel"] = _json_safe(abs(e[1] - e[0]) / abs(e[0]))
    artifacts.append(_write_json(os.path.join(out_dir, "summary.json"),
                                 summary))
    if make_svg:
        artifacts.append(svg.write_svg(
            os.path.join(out_dir, "plot.svg"),
            [("n_plus", rec.times, rec.n_plus),
             ("n_minus", rec.times, rec.n_minus)],
            title="phonon numbers", xlabel="t (s)", ylabel="n"))
    return artifacts, 0


def cmd_sweep(cfg, out_dir, make_svg, axis, values, jobs):
    sim = build_sim(cfg)
    rows = sweep(sim, axis, values, replicas=cfg["sweep.replicas"], jobs=jobs)
    artifacts = [write_csv(
        os.path.join(out_dir, "sweep.csv"),
        ("axis", "value", "replica", "seed", "n_plus", "n_minus", "diverged"),
        [(r.axis, float(r.value), r.replica, r.seed,
          float(r.n_plus), float(r.n_minus), int(r.diverged))
         for r in rows])]
    if make_svg:
        vals = sorted({r.value for r in rows})

        def mode_means(attr):
            out = []
            for v in vals:
                pts = [getattr(r, attr) for r in rows if r.value == v
                       and math.isfinite(getattr(r, attr))]
                out.append(float(np.mean(pts)) if pts else math.nan)
            return out

        artifacts.append(svg.write_svg(
            os.path.join(out_dir, "plot.svg"),
            [("n_plus", vals, mode_means("n_plus")),
             ("n_minus", vals, mode_means("n_minus"))],
            title=f"sweep over {axis}", xlabel=axis, ylabel="n"))
    return artifacts, 0


def cmd_limits(cfg, out_dir, make_svg):
    freqs = compute_frequencies(build_trap(cfg))
    axis = np.linspace(cfg["limits.nu_minus_min"], cfg["limits.nu_minus_max"],
                       cfg["limits.points"]) * TWO_PI
    rows = limit_curve(freqs.omega_c, axis,
                       gradient_length=cfg["limits.gradient_length"],
                       detuning=cfg["limits.detuning"],
                       linewidth=cfg["limits.linewidth"],
                       wavenumber=TWO_PI / cfg["limits.wavelength"])
    artifacts = [write_csv(
        os.path.join(out_dir, "limits.csv"),
        ("nu_minus_hz", "nbar_plus", "nbar_minus", "stable_flag"),
        [(float(nu), float(np_), float(nm), int(st))
         for nu, np_, nm, st in rows])]
    if make_svg:
        nu = [r[0] for r in rows]
        artifacts.append(svg.write_svg(
            os.path.join(out_dir, "plot.svg"),
            [("nbar_plus", nu, [r[1] for r in rows]),
             ("nbar_minus", nu, [r[2] for r in rows])],
            title="Doppler limits", xlabel="nu_minus (Hz)", ylabel="nbar"))
    return artifacts, 0


def _load_scan(path):
    data = np.genfromtxt(path, delimiter=",", names=True)
    for col in ("detuning_hz", "excitation_prob"):
        if col not in (data.dtype.names or ()):
            raise ValidationError(f"scan file {path!r} lacks column {col!r}")
    shots = data["shots"] if "shots" in data.dtype.names else None
    return SpectrumScan(detuning_hz=data["detuning_hz"],
                        excitation=data["excitation_prob"], shots=shots)


def cmd_fit(cfg, out_dir, make_svg, data_path):
    path = data_path or cfg["fit.data"]
    if not path:
        raise ValidationError("fit needs a scan file (fit.data or --data)")
    scan = _load_scan(path)
    trap = build_trap(cfg)
    freqs = compute_frequencies(trap)
    eta = lamb_dicke(freqs, cfg["fit.probe_wavelength"], trap.ion)
    nu_plus = freqs.omega_plus / TWO_PI
    nu_minus = freqs.omega_minus / TWO_PI
    guess = {"n_plus": cfg["fit.n_plus"], "n_minus": cfg["fit.n_minus"],
             "omega0": cfg["fit.omega0"], "background": cfg["fit.background"],
             "center": cfg["fit.center"]}
    result = fit_spectrum(scan, cfg["fit.probe_time"], eta, nu_plus, nu_minus,
                          guess, restarts=cfg["fit.restarts"])
    artifacts = [_write_json(os.path.join(out_dir, "fit.json"), {
        "names": result.names,
        "values": [float(v) for v in result.values],
        "sigmas": [_json_safe(s) for s in result.sigmas],
        "residual_norm": _json_safe(result.residual_norm),
        "converged": bool(result.converged),
    })]
    if make_svg:
        d = result.as_dict()
        model = spectrum_model(
            scan.detuning_hz - d["center"], cfg["fit.probe_time"],
            d["omega0"], ThermalState(d["n_plus"], d["n_minus"]), eta,
            nu_plus, nu_minus, background=d["background"])
        artifacts.append(svg.write_svg(
            os.path.join(out_dir, "plot.svg"),
            [("data", scan.detuning_hz, scan.excitation),
             ("model", scan.detuning_hz, model)],
            title="sideband spectrum fit", xlabel="detuning (Hz)",
            ylabel="excitation"))
    return artifacts, 0 if result.converged else 4


def cmd_sbc(cfg, out_dir, make_svg, sequence_path):
    source = sequence_path or cfg["sbc.sequence"]
    if source == "table1":
        seq = sbc_mod.table1_sequence()
    else:
        with open(source, encoding="utf-8") as fh:
            seq = sbc_mod.parse_sequence(fh.read())
    trap = build_trap(cfg)
    freqs = compute_frequencies(trap)
    eta = lamb_dicke(freqs, cfg["sbc.probe_wavelength"], trap.ion)
    params = sbc_mod.RateModelParams(
        omega0=cfg["sbc.omega0"],
        effective_linewidth=cfg["sbc.effective_linewidth"],
        heating_rate_plus=cfg["sbc.heating_plus"],
        heating_rate_minus=cfg["sbc.heating_minus"],
        carrier_offset_rate=cfg["sbc.carrier_offset"],
        substep=cfg["sbc.substep"])
    initial = ThermalState(cfg["sbc.n_plus"], cfg["sbc.n_minus"])
    res = sbc_mod.simulate_sequence(seq, initial, params, eta)
    artifacts = [write_csv(
        os.path.join(out_dir, "sbc.csv"), ("t_s", "n_plus", "n_minus"),
        [(float(t), float(a), float(b))
         for t, a, b in zip(res.times, res.n_plus, res.n_minus)])]
    artifacts.append(_write_json(os.path.join(out_dir, "final.json"), {
        "n_plus": _json_safe(res.final.n_plus_bar),
        "n_minus": _json_safe(res.final.n_minus_bar),
    }))
    if make_svg:
        artifacts.append(svg.write_svg(
            os.path.join(out_dir, "plot.svg"),
            [("n_plus", res.times, res.n_plus),
             ("n_minus", res.times, res.n_minus)],
            title="sideband cooling", xlabel="t (s)", ylabel="n"))
    return artifacts, 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="penningcool",
        description="Doppler and sideband cooling toolkit for the radial "
                    "motion of a single ion in a Penning trap")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="configuration file path")
    common.add_argument("--seed", type=int, help="master RNG seed")
    common.add_argument("--jobs", type=int,
                        help="worker processes for sweeps")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--svg", action="store_true",
                        help="also render an SVG plot")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common],
                   help="one stochastic cooling trajectory")
    p_sweep = sub.add_parser("sweep", parents=[common],
                             help="equilibrium phonons along a parameter axis")
    p_sweep.add_argument("--axis", help="config path to sweep")
    p_sweep.add_argument("--values",
                         help="comma-separated axis values")
    sub.add_parser("limits", parents=[common],
                   help="closed-form Doppler-limit curves")
    p_fit = sub.add_parser("fit", parents=[common],
                           help="two-mode thermometry fit of a scan CSV")
    p_fit.add_argument("--data", help="scan CSV path")
    p_sbc = sub.add_parser("sbc", parents=[common],
                           help="rate-model sideband cooling sequence")
    p_sbc.add_argument("--sequence", help="sequence file path or 'table1'")
    return parser


def run(args):
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
    else:
        cfg = parse_config("")
    if args.seed is not None:
        cfg.values["run.seed"] = args.seed
    if args.jobs is not None:
        cfg.values["run.jobs"] = args.jobs
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)

    if args.command == "simulate":
        artifacts, status = cmd_simulate(cfg, out_dir, args.svg)
    elif args.command == "sweep":
        axis = args.axis or cfg["sweep.axis"]
        if args.values:
            values = tuple(float(v) for v in
                           args.values.replace(",", " ").split())
        else:
            values = cfg["sweep.values"]
        artifacts, status = cmd_sweep(cfg, out_dir, args.svg, axis, values,
                                      cfg["run.jobs"])
    elif args.command == "limits":
        artifacts, status = cmd_limits(cfg, out_dir, args.svg)
    elif args.command == "fit":
        artifacts, status = cmd_fit(cfg, out_dir, args.svg, args.data)
    else:
        artifacts, status = cmd_sbc(cfg, out_dir, args.svg, args.sequence)
    _emit_manifest(out_dir, args.command, cfg, artifacts)
    return status


def _error_json(exc):
    payload = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ParseError) and getattr(exc, "line", None):
        payload["line"] = exc.line
    return json.dumps(payload)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except (ParseError, ValidationError, FileNotFoundError) as exc:
        print(_error_json(exc), file=sys.stderr)
        return 2
    except FitFailed as exc:
        print(_error_json(exc), file=sys.stderr)
        return 4
    except (PenningCoolError, FloatingPointError) as exc:
        print(_error_json(exc), file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
