import json

import pytest

from penningcool.cli import main
from penningcool.config import (SCHEMA, apply_env_overrides, build_laser,
                                build_sim, build_trap, parse_config)
from penningcool.errors import ParseError, ValidationError
from penningcool import svg

SHORT_SIM = """
laser.enabled = false
axialization.amplitude = 0
sim.t_end = 0.2e-3
sim.window_start = 0.1e-3
sim.window_end = 0.2e-3
sim.record_stride = 100
"""


class TestConfig:
    def test_defaults(self):
        cfg = parse_config("")
        assert cfg["run.seed"] == 0
        assert cfg["laser.waist"] == 100e-6
        assert cfg["trap.v0"] is None    # derived from the frequencies
        assert build_laser(cfg) is not None
        assert build_trap(cfg).trap_voltage > 0

    def test_unknown_key_carries_line(self):
        with pytest.raises(ParseError) as exc:
            parse_config("run.seed = 1\nnope.key = 2\n")
        assert exc.value.line == 2

    def test_bad_value(self):
        with pytest.raises(ParseError):
            parse_config("laser.waist = wide")
        with pytest.raises(ParseError):
            parse_config("run.seed")

    def test_floatlist_and_bool(self):
        cfg = parse_config("sweep.values = 0, 0.5 2\nlaser.enabled = off\n"
                           "sweep.axis = trap.trap_voltage\n")
        assert cfg["sweep.values"] == (0.0, 0.5, 2.0)
        assert cfg["laser.enabled"] is False
        assert build_laser(cfg) is None

    def test_blank_required_key(self):
        with pytest.raises(ValidationError):
            parse_config("laser.waist =\n")

    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("PENNINGCOOL_LASER_WAIST", "55e-6")
        cfg = parse_config("laser.waist = 100e-6")
        assert cfg["laser.waist"] == 55e-6

    def test_env_override_explicit_environ(self):
        cfg = parse_config("")
        apply_env_overrides(cfg, environ={"PENNINGCOOL_RUN_SEED": "77"})
        assert cfg["run.seed"] == 77

    def test_stability_violation_names_rule(self):
        with pytest.raises(ValidationError) as exc:
            parse_config("trap.b_field = 1.89\ntrap.v0 = 150.0\n")
        assert "stability" in str(exc.value)
        assert "v0 <=" in str(exc.value)

    def test_laser_sweep_without_laser(self):
        with pytest.raises(ValidationError):
            parse_config("laser.enabled = false\nsweep.axis = laser.power\n")

    def test_hash_tracks_content(self):
        a = parse_config("")
        b = parse_config("run.seed = 1")
        assert a.config_hash() != b.config_hash()
        assert a.canonical_text() == parse_config("").canonical_text()
        for key in SCHEMA:
            assert key in a.canonical_text()

    def test_build_sim_seed_override(self):
        cfg = parse_config(SHORT_SIM)
        assert build_sim(cfg).seed == 0
        assert build_sim(cfg, seed=9).seed == 9


class TestSvg:
    def test_render_and_write(self, tmp_path):
        doc = svg.render_lines([("a", [0, 1, 2], [0.0, 1.0, 0.5]),
                                ("b", [0, 1, 2], [1.0, float("nan"), 2.0])],
                               title="t", xlabel="x", ylabel="y")
        assert doc.startswith("<svg") or "<svg" in doc
        assert "polyline" in doc and "a" in doc and "t" in doc
        path = tmp_path / "plot.svg"
        svg.write_svg(str(path), [("a", [0, 1], [0, 1])])
        assert path.read_text().strip().endswith("</svg>")


class TestCli:
    def test_limits_smoke(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["limits", "--out", str(out), "--svg"])
        assert rc == 0
        assert (out / "limits.csv").exists()
        assert (out / "plot.svg").exists()
        assert (out / "effective_config.txt").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "limits"
        assert "limits.csv" in manifest["artifacts"]
        assert len(manifest["config_sha256"]) == 64

    def test_simulate_smoke_conserves_energy(self, tmp_path):
        cfgf = tmp_path / "run.cfg"
        cfgf.write_text(SHORT_SIM)
        out = tmp_path / "out"
        rc = main(["simulate", "--config", str(cfgf), "--out", str(out)])
        assert rc == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["diverged"] is False
        assert summary["total_photons"] == 0
        assert summary["energy_drift_rel"] < 1e-9
        header = (out / "trajectory.csv").read_text().splitlines()[0]
        assert header == "t_s,r_plus_sq_m2,r_minus_sq_m2,n_plus,n_minus,photons"

    def test_sweep_byte_identical_reruns(self, tmp_path):
        cfgf = tmp_path / "run.cfg"
        cfgf.write_text(SHORT_SIM)
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            rc = main(["sweep", "--config", str(cfgf), "--out", str(out),
                       "--axis", "axialization.amplitude",
                       "--values", "0,0.5", "--seed", "4"])
            assert rc == 0
            outs.append((out / "sweep.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_bad_config_exits_2(self, tmp_path, capsys):
        cfgf = tmp_path / "run.cfg"
        cfgf.write_text("nope = 1\n")
        rc = main(["simulate", "--config", str(cfgf), "--out",
                   str(tmp_path / "o")])
        assert rc == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "ParseError"
        assert err["line"] == 1

    def test_unstable_trap_exits_2(self, tmp_path, capsys):
        cfgf = tmp_path / "run.cfg"
        cfgf.write_text("trap.b_field = 1.89\ntrap.v0 = 150.0\n")
        rc = main(["limits", "--config", str(cfgf), "--out",
                   str(tmp_path / "o")])
        assert rc == 2
        err = json.loads(capsys.readouterr().err)
        assert "stability" in err["message"]

    def test_fit_without_data_exits_2(self, tmp_path, capsys):
        rc = main(["fit", "--out", str(tmp_path / "o")])
        assert rc == 2

    def test_fit_bad_columns_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "scan.csv"
        bad.write_text("a,b\n1,2\n")
        rc = main(["fit", "--data", str(bad), "--out", str(tmp_path / "o")])
        assert rc == 2

    def test_sbc_smoke_with_sequence_file(self, tmp_path):
        cfgf = tmp_path / "run.cfg"
        cfgf.write_text("sbc.n_plus = 4\nsbc.n_minus = 8\n"
                        "sbc.heating_minus = 100\n")
        seqf = tmp_path / "seq.txt"
        seqf.write_text("magnetron 1 2 100\ncyclotron 1 2 100\n")
        out = tmp_path / "out"
        rc = main(["sbc", "--config", str(cfgf), "--out", str(out),
                   "--sequence", str(seqf)])
        assert rc == 0
        final = json.loads((out / "final.json").read_text())
        assert final["n_minus"] < 8.0
        assert (out / "sbc.csv").exists()

    def test_bad_sequence_exits_2(self, tmp_path, capsys):
        seqf = tmp_path / "seq.txt"
        seqf.write_text("magnetron 1 2\n")
        rc = main(["sbc", "--sequence", str(seqf),
                   "--out", str(tmp_path / "o")])
        assert rc == 2
        err = json.loads(capsys.readouterr().err)
        assert err["line"] == 1
