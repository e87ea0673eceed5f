"""Bit-identity between the compiled kernel and the pure-Python fallback."""

import numpy as np
import pytest

import penningcool.dynamics as dynamics
from penningcool.dynamics import AxializationConfig, SimConfig, simulate_trajectory
from penningcool.kernel import USING_COMPILED
from penningcool.laser import LaserConfig
from penningcool.trap import TrapConfig

pytestmark = pytest.mark.skipif(
    not USING_COMPILED, reason="compiled kernel not available")


def run_with(impl_name, cfg, monkeypatch):
    import importlib
    impl = importlib.import_module(f"penningcool.{impl_name}")
    monkeypatch.setattr(dynamics, "simulate_core", impl.simulate_core)
    return simulate_trajectory(cfg)


@pytest.fixture
def base_cfg(ref_trap):
    return SimConfig(trap=ref_trap, laser=None, axialization=None,
                     dt=20e-9, t_end=0.4e-3,
                     averaging_window=(0.2e-3, 0.4e-3),
                     record_stride=100, seed=12)


def assert_identical(a, b):
    assert np.array_equal(a.times, b.times)
    assert np.array_equal(a.r_plus_sq, b.r_plus_sq)
    assert np.array_equal(a.r_minus_sq, b.r_minus_sq)
    assert np.array_equal(a.photons, b.photons)
    assert a.total_photons == b.total_photons
    assert a.diverged == b.diverged
    assert a.final_state == b.final_state


def test_drift_only_bit_identical(base_cfg, monkeypatch):
    ext = run_with("_kernel", base_cfg, monkeypatch)
    py = run_with("_kernel_py", base_cfg, monkeypatch)
    assert_identical(ext, py)


def test_driven_bit_identical(base_cfg, monkeypatch):
    cfg = SimConfig(trap=base_cfg.trap, laser=None,
                    axialization=AxializationConfig(amplitude=1.0),
                    dt=base_cfg.dt, t_end=base_cfg.t_end,
                    averaging_window=base_cfg.averaging_window,
                    record_stride=base_cfg.record_stride, seed=12)
    ext = run_with("_kernel", cfg, monkeypatch)
    py = run_with("_kernel_py", cfg, monkeypatch)
    assert_identical(ext, py)


def test_laser_path_bit_identical(base_cfg, monkeypatch):
    laser = LaserConfig(wavelength=397e-9, power=1e-6, waist=100e-6,
                        offset=50e-6)
    cfg = SimConfig(trap=base_cfg.trap, laser=laser,
                    axialization=AxializationConfig(amplitude=0.5),
                    dt=base_cfg.dt, t_end=base_cfg.t_end,
                    averaging_window=base_cfg.averaging_window,
                    record_stride=base_cfg.record_stride, seed=12)
    ext = run_with("_kernel", cfg, monkeypatch)
    py = run_with("_kernel_py", cfg, monkeypatch)
    assert ext.total_photons > 0
    assert_identical(ext, py)
