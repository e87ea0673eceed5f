"""Run configuration: `section.key = value` documents with typed defaults.

Values use plain SI units (e.g. `laser.waist = 100e-6`).  Unknown keys are
rejected with the offending line; blank values mean "use the derived
default" for optional keys.  Environment variables with the prefix
PENNINGCOOL_ override file values, e.g. PENNINGCOOL_LASER_WAIST=50e-6.
"""

import hashlib
import os
from dataclasses import dataclass, field

from .constants import TWO_PI
from .dynamics import AxializationConfig, SimConfig
from .errors import ParseError, StabilityViolation, ValidationError
from .laser import DEFAULT_LINEWIDTH, LaserConfig
from .trap import CA40, PhaseState, TrapConfig

ENV_PREFIX = "PENNINGCOOL_"

# key -> (type, default); types: float, int, bool, str, floatlist.
# A default of None marks an optional key whose value is derived at build
# time when left blank.
SCHEMA = {
    "run.seed": ("int", 0),
    "run.jobs": ("int", 1),

    "trap.b_field": ("float", None),
    "trap.v0": ("float", None),
    "trap.d0": ("float", 0.01),
    "trap.r0": ("float", 0.01),
    "trap.nu_c": ("float", 729e3),
    "trap.nu_z": ("float", 265e3),

    "laser.enabled": ("bool", True),
    "laser.wavelength": ("float", 397e-9),
    "laser.power": ("float", 1e-6),
    "laser.waist": ("float", 100e-6),
    "laser.offset": ("float", 50e-6),
    "laser.detuning": ("float", 0.5 * DEFAULT_LINEWIDTH),
    "laser.linewidth": ("float", DEFAULT_LINEWIDTH),

    "axialization.amplitude": ("float", 1.0),
    "axialization.drive_frequency": ("float", None),
    "axialization.phase": ("float", 0.0),

    "sim.dt": ("float", 20e-9),
    "sim.t_end": ("float", 20e-3),
    "sim.window_start": ("float", 10e-3),
    "sim.window_end": ("float", 20e-3),
    "sim.record_stride": ("int", 500),
    "sim.divergence_bound": ("float", 1e-3),
    "sim.x0": ("float", -4e-6),
    "sim.y0": ("float", 0.0),
    "sim.vx0": ("float", 1.0),
    "sim.vy0": ("float", 2.0),

    "sweep.axis": ("str", "axialization.amplitude"),
    "sweep.values": ("floatlist", (0.0, 0.25, 0.5, 1.0, 2.0)),
    "sweep.replicas": ("int", 1),

    "limits.gradient_length": ("float", 50e-6),
    "limits.detuning": ("float", 0.5 * DEFAULT_LINEWIDTH),
    "limits.linewidth": ("float", DEFAULT_LINEWIDTH),
    "limits.wavelength": ("float", 397e-9),
    "limits.nu_minus_min": ("float", 5e3),
    "limits.nu_minus_max": ("float", 150e3),
    "limits.points": ("int", 100),

    "fit.data": ("str", ""),
    "fit.probe_time": ("float", 280e-6),
    "fit.probe_wavelength": ("float", 729e-9),
    "fit.n_plus": ("float", 100.0),
    "fit.n_minus": ("float", 100.0),
    "fit.omega0": ("float", TWO_PI * 20e3),
    "fit.background": ("float", 0.04),
    "fit.center": ("float", 0.0),
    "fit.restarts": ("int", 2),

    "sbc.sequence": ("str", "table1"),
    "sbc.omega0": ("float", TWO_PI * 14.13e3),
    "sbc.effective_linewidth": ("float", TWO_PI * 7.5e3),
    "sbc.heating_plus": ("float", 0.0),
    "sbc.heating_minus": ("float", 300.0),
    "sbc.carrier_offset": ("float", 0.0),
    "sbc.substep": ("float", 1e-4),
    "sbc.probe_wavelength": ("float", 729e-9),
    "sbc.n_plus": ("float", 96.0),
    "sbc.n_minus": ("float", 136.0),
}


def _parse_value(key, raw, line):
    kind, _ = SCHEMA[key]
    raw = raw.strip()
    if raw == "" or raw.lower() == "none":
        return None
    try:
        if kind == "float":
            return float(raw)
        if kind == "int":
            return int(raw)
        if kind == "bool":
            lowered = raw.lower()
            if lowered in ("true", "yes", "on", "1"):
                return True
            if lowered in ("false", "no", "off", "0"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if kind == "floatlist":
            return tuple(float(tok) for tok in raw.replace(",", " ").split())
        return raw.strip("\"'")
    except ValueError as exc:
        raise ParseError(f"{key}: {exc}", line=line) from None


@dataclass
class RunConfig:
    """Validated key-value document with all defaults filled in."""
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def canonical_text(self):
        """Deterministic echo of the effective configuration."""
        lines = []
        for key in SCHEMA:
            v = self.values[key]
            if v is None:
                rendered = ""
            elif isinstance(v, bool):
                rendered = "true" if v else "false"
            elif isinstance(v, tuple):
                rendered = ", ".join(repr(x) for x in v)
            elif isinstance(v, float):
                rendered = repr(v)
            else:
                rendered = str(v)
            lines.append(f"{key} = {rendered}")
        return "\n".join(lines) + "\n"

    def config_hash(self):
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()


def parse_config(text):
    """Parse and validate a configuration document."""
    values = {key: default for key, (_, default) in SCHEMA.items()}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected 'section.key = value'", line=ln)
        key, _, rest = line.partition("=")
        key = key.strip()
        if key not in SCHEMA:
            raise ParseError(f"unknown key {key!r}", line=ln)
        values[key] = _parse_value(key, rest, ln)
    cfg = RunConfig(values)
    apply_env_overrides(cfg)
    validate(cfg)
    return cfg


def apply_env_overrides(cfg, environ=None):
    """Apply PENNINGCOOL_SECTION_KEY environment overrides in place."""
    environ = os.environ if environ is None else environ
    for key in SCHEMA:
        env_name = ENV_PREFIX + key.replace(".", "_").upper()
        if env_name in environ:
            cfg.values[key] = _parse_value(key, environ[env_name], 0)
    return cfg


def validate(cfg):
    for key, (_, default) in SCHEMA.items():
        if cfg.values[key] is None and default is not None:
            raise ValidationError(f"{key} must not be blank")
    # building the trap surfaces stability violations early
    build_trap(cfg)
    if not cfg["laser.enabled"] and cfg["sweep.axis"].startswith("laser."):
        raise ValidationError("cannot sweep a laser axis with the laser disabled")
    return cfg


def build_trap(cfg):
    try:
        if cfg["trap.b_field"] is not None and cfg["trap.v0"] is not None:
            trap = TrapConfig(magnetic_field=cfg["trap.b_field"],
                              trap_voltage=cfg["trap.v0"],
                              trap_dimension=cfg["trap.d0"],
                              ring_radius=cfg["trap.r0"], ion=CA40)
        else:
            trap = TrapConfig.from_frequencies_hz(
                cfg["trap.nu_c"], cfg["trap.nu_z"], CA40,
                trap_dimension=cfg["trap.d0"], ring_radius=cfg["trap.r0"])
    except StabilityViolation as exc:
        hint = ""
        if cfg["trap.b_field"] is not None:
            limit = (CA40.charge * cfg["trap.d0"] ** 2
                     * cfg["trap.b_field"] ** 2 / (8 * CA40.mass))
            hint = f" (stability requires v0 <= {limit:.6g} V)"
        raise ValidationError(
            f"trap.v0 violates the radial stability rule "
            f"V0 <= q D0^2 B^2 / (8 M){hint}: {exc}") from None
    return trap


def build_laser(cfg):
    if not cfg["laser.enabled"]:
        return None
    return LaserConfig(wavelength=cfg["laser.wavelength"],
                       power=cfg["laser.power"],
                       waist=cfg["laser.waist"],
                       offset=cfg["laser.offset"],
                       detuning=cfg["laser.detuning"],
                       linewidth=cfg["laser.linewidth"])


def build_axialization(cfg):
    if cfg["axialization.amplitude"] == 0:
        return None
    return AxializationConfig(amplitude=cfg["axialization.amplitude"],
                              drive_frequency=cfg["axialization.drive_frequency"],
                              phase=cfg["axialization.phase"])


def build_sim(cfg, seed=None):
    initial = PhaseState(t=0.0, x=cfg["sim.x0"], y=cfg["sim.y0"],
                         vx=cfg["sim.vx0"], vy=cfg["sim.vy0"])
    return SimConfig(trap=build_trap(cfg),
                     laser=build_laser(cfg),
                     axialization=build_axialization(cfg),
                     dt=cfg["sim.dt"],
                     t_end=cfg["sim.t_end"],
                     averaging_window=(cfg["sim.window_start"],
                                       cfg["sim.window_end"]),
                     initial_state=initial,
                     seed=cfg["run.seed"] if seed is None else seed,
                     record_stride=cfg["sim.record_stride"],
                     divergence_bound=cfg["sim.divergence_bound"])
