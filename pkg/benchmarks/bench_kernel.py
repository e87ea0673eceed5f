"""Benchmark the compiled integration kernel against the pure-Python one.

Both kernels are bit-identical by construction (shared RNG and identical
arithmetic), so this only measures throughput.  Run:

    python benchmarks/bench_kernel.py [--ms 2.0]
"""

import argparse
import time

import numpy as np

from penningcool import _kernel_py
from penningcool import kernel
from penningcool.config import build_sim, parse_config
from penningcool.dynamics import simulate_trajectory


def run_once(sim_cfg):
    t0 = time.perf_counter()
    rec = simulate_trajectory(sim_cfg)
    return time.perf_counter() - t0, rec


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--ms", type=float, default=2.0,
                        help="simulated horizon in milliseconds")
    args = parser.parse_args()
    t_end = args.ms * 1e-3
    cfg = parse_config(
        f"sim.t_end = {t_end}\n"
        f"sim.window_start = {0.5 * t_end}\n"
        f"sim.window_end = {t_end}\n")
    sim_cfg = build_sim(cfg)
    steps = int(round(sim_cfg.t_end / sim_cfg.dt))

    if not kernel.USING_COMPILED:
        print("compiled kernel unavailable; benchmarking pure Python only")

    results = {}
    for name, core in (("compiled", kernel.simulate_core),
                       ("pure-python", _kernel_py.simulate_core)):
        if name == "compiled" and not kernel.USING_COMPILED:
            continue
        # patch the selected core into the dynamics module for the run
        import penningcool.dynamics as dyn
        saved = dyn.simulate_core
        dyn.simulate_core = core
        try:
            dt, rec = run_once(sim_cfg)
        finally:
            dyn.simulate_core = saved
        results[name] = (dt, rec)
        print(f"{name:>12}: {dt:8.3f} s  ({steps / dt / 1e6:6.2f} Msteps/s), "
              f"photons={rec.total_photons}")

    if len(results) == 2:
        (dt_c, rec_c), (dt_p, rec_p) = results["compiled"], results["pure-python"]
        same = (np.array_equal(rec_c.r_plus_sq, rec_p.r_plus_sq)
                and np.array_equal(rec_c.r_minus_sq, rec_p.r_minus_sq)
                and rec_c.total_photons == rec_p.total_photons)
        print(f"    speedup: {dt_p / dt_c:.1f}x, trajectories bit-identical: "
              f"{same}")


if __name__ == "__main__":
    main()
