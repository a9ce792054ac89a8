import json
import subprocess
import sys

import numpy as np
import pytest
import yaml

from cylris.cli import main
from cylris.config import load_config, parse_config
from cylris.errors import ConfigError


def toy_config(outdir, method="mpdr", phi=20.0, **overrides):
    cfg = {
        "geometry": {"radius_m": 0.12, "freq_hz": 3.6e9},
        "array": {"n_elements": 8, "arc_pitch_m": 0.038},
        "steering": {"phi_o_deg": phi, "delta_phi_mode": "ref_factor", "value": 1.2},
        "meta_atom": {"model": "constant"},
        "method": {"name": method},
        "output": {
            "directory": str(outdir),
            "grid_points": 721,
            "objective_grid_points": 361,
            "sigma_grid_points": 57600,
        },
    }
    for key, val in overrides.items():
        cfg[key] = {**cfg.get(key, {}), **val}
    return cfg


def write_config(tmp_path, cfg, name="config.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(cfg))
    return p


def run_cli(argv):
    return main(argv)


class TestConfigParsing:
    def test_unknown_key_rejected(self, tmp_path):
        cfg = toy_config(tmp_path / "out")
        cfg["geometry"]["radius_mm"] = 120
        with pytest.raises(ConfigError, match="radius_mm"):
            parse_config(cfg)

    def test_unknown_block_rejected(self, tmp_path):
        cfg = toy_config(tmp_path / "out")
        cfg["extras"] = {}
        with pytest.raises(ConfigError, match="extras"):
            parse_config(cfg)

    def test_missing_required_field(self, tmp_path):
        cfg = toy_config(tmp_path / "out")
        del cfg["geometry"]["freq_hz"]
        with pytest.raises(ConfigError, match="freq_hz"):
            parse_config(cfg)

    def test_discrete_method_requires_array(self, tmp_path):
        cfg = toy_config(tmp_path / "out")
        del cfg["array"]
        with pytest.raises(ConfigError, match="array"):
            parse_config(cfg)

    def test_resolved_round_trip(self, tmp_path):
        cfg = parse_config(toy_config(tmp_path / "out"))
        again = parse_config(cfg.resolved())
        assert again == cfg

    def test_load_from_yaml_file(self, tmp_path):
        path = write_config(tmp_path, toy_config(tmp_path / "out"))
        cfg = load_config(path)
        assert cfg.methods == ("mpdr",)
        assert cfg.phi_o_deg == (20.0,)


class TestSynthCommand:
    def test_mpdr_toy_run_writes_artifacts(self, tmp_path, capsys):
        out = tmp_path / "run"
        path = write_config(tmp_path, toy_config(out))
        assert run_cli(["synth", "-c", str(path)]) == 0
        for name in ("pattern.csv", "metrics.json", "result.json", "manifest.json"):
            assert (out / name).exists(), name
        metrics = json.loads((out / "metrics.json").read_text())
        assert set(metrics) == {
            "peak_db", "peak_dir_deg", "sll_db", "beamwidth_deg", "target_level_db"
        }
        assert metrics["sll_db"] < 0
        result = json.loads((out / "result.json").read_text())
        assert result["method"] == "mpdr"
        assert result["wall_time_ms"] is None
        assert len(result["gamma"]) == 8
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["steering"]["phi_o_deg"] == [20.0]

    def test_exact_method_writes_impedance(self, tmp_path):
        out = tmp_path / "run"
        cfg = toy_config(out, method="exact")
        cfg["geometry"] = {"radius_m": 0.4, "freq_hz": 3.6e9}
        cfg["array"] = {"n_elements": 30, "arc_pitch_m": 0.038}
        cfg["output"]["grid_points"] = 1441
        path = write_config(tmp_path, cfg)
        assert run_cli(["synth", "-c", str(path)]) == 0
        assert (out / "impedance.csv").exists()
        header = (out / "impedance.csv").read_text().splitlines()[0]
        assert header == "phi_deg,re_Z_over_eta0,im_Z_over_eta0,pole_flag"
        metrics = json.loads((out / "metrics.json").read_text())
        assert abs(metrics["peak_dir_deg"] - 20.0) < 2.0

    def test_go_method_writes_singular_flag(self, tmp_path):
        out = tmp_path / "run"
        cfg = toy_config(out, method="go")
        cfg["geometry"] = {"radius_m": 0.4, "freq_hz": 3.6e9}
        cfg["array"] = {"n_elements": 30, "arc_pitch_m": 0.038}
        cfg["output"]["grid_points"] = 1440
        path = write_config(tmp_path, cfg)
        assert run_cli(["synth", "-c", str(path)]) == 0
        header = (out / "impedance.csv").read_text().splitlines()[0]
        assert header == "phi_deg,re_Z_over_eta0,im_Z_over_eta0,singular_flag"

    def test_full_scale_es_hits_budget_guard(self, tmp_path, capsys):
        out = tmp_path / "run"
        cfg = toy_config(out, method="es")
        cfg["array"] = {"n_elements": 30, "arc_pitch_m": 0.038}
        cfg["geometry"] = {"radius_m": 0.4, "freq_hz": 3.6e9}
        path = write_config(tmp_path, cfg)
        code = run_cli(["synth", "-c", str(path)])
        assert code == 3
        err = capsys.readouterr().err.strip()
        payload = json.loads(err)  # single machine-parsable line
        assert payload["code"] == 3

    def test_config_error_exit_code(self, tmp_path, capsys):
        cfg = toy_config(tmp_path / "run")
        cfg["method"]["name"] = "newton"
        path = write_config(tmp_path, cfg)
        assert run_cli(["synth", "-c", str(path)]) == 2
        payload = json.loads(capsys.readouterr().err.strip())
        assert payload["code"] == 2

    def test_cli_overrides(self, tmp_path):
        out = tmp_path / "a"
        out2 = tmp_path / "b"
        path = write_config(tmp_path, toy_config(out, method="go_q", phi=10.0))
        assert run_cli(["synth", "-c", str(path), "-o", str(out2), "--phi-o-deg", "25"]) == 0
        manifest = json.loads((out2 / "manifest.json").read_text())
        assert manifest["config"]["steering"]["phi_o_deg"] == [25.0]
        assert not out.exists()


class TestDeterminism:
    def test_manifest_round_trip_byte_identical(self, tmp_path):
        out1 = tmp_path / "r1"
        out2 = tmp_path / "r2"
        cfg = toy_config(out1, method="ga")
        cfg["method"].update({"population": 40, "generations": 10, "seed": 5})
        path = write_config(tmp_path, cfg)
        assert run_cli(["synth", "-c", str(path)]) == 0
        assert run_cli(["synth", "--from-manifest", str(out1 / "manifest.json"),
                        "-o", str(out2)]) == 0
        for name in ("pattern.csv", "metrics.json", "result.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name

    def test_es_serial_parallel_byte_identical(self, tmp_path):
        outs, outp = tmp_path / "serial", tmp_path / "parallel"
        cfg = toy_config(outs, method="es")
        path = write_config(tmp_path, cfg)
        assert run_cli(["synth", "-c", str(path)]) == 0
        assert run_cli(["synth", "-c", str(path), "-o", str(outp), "--workers", "2"]) == 0
        for name in ("pattern.csv", "metrics.json", "result.json"):
            assert (outs / name).read_bytes() == (outp / name).read_bytes(), name
        m1 = json.loads((outs / "manifest.json").read_text())
        m2 = json.loads((outp / "manifest.json").read_text())
        m1["config"]["output"].pop("directory")
        m2["config"]["output"].pop("directory")
        assert m1 == m2  # only the target directory may differ

    def test_identical_seeds_identical_outputs(self, tmp_path):
        out1, out2 = tmp_path / "x1", tmp_path / "x2"
        cfg = toy_config(out1, method="ga")
        cfg["method"].update({"population": 30, "generations": 8, "seed": 11})
        path = write_config(tmp_path, cfg)
        assert run_cli(["synth", "-c", str(path)]) == 0
        assert run_cli(["synth", "-c", str(path), "-o", str(out2)]) == 0
        for name in ("pattern.csv", "metrics.json", "result.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name


class TestSweepAndCompare:
    def test_sweep_produces_comparison(self, tmp_path):
        out = tmp_path / "sweep"
        cfg = toy_config(out, method="mpdr", phi=20.0)
        cfg["method"]["name"] = ["mpdr", "go_q"]
        cfg["steering"]["phi_o_deg"] = [10.0, 20.0]
        path = write_config(tmp_path, cfg)
        assert run_cli(["sweep", "-c", str(path)]) == 0
        comparison = json.loads((out / "comparison.json").read_text())
        assert len(comparison["rows"]) == 4
        header = (out / "comparison.csv").read_text().splitlines()[0]
        assert header.startswith("method,phi_o_deg,peak_db,sll_db,pointing_err_deg")
        norm_at_10 = [
            r["target_level_norm_db"] for r in comparison["rows"] if r["phi_o_deg"] == 10.0
        ]
        assert max(norm_at_10) == 0.0  # shared normalization anchored at the smallest angle
        for sub in ("mpdr_phi10", "mpdr_phi20", "go_q_phi10", "go_q_phi20"):
            assert (out / sub / "metrics.json").exists()

    def test_compare_merges_prior_runs(self, tmp_path):
        d1, d2 = tmp_path / "m", tmp_path / "g"
        p1 = write_config(tmp_path, toy_config(d1, method="mpdr"), "c1.yaml")
        p2 = write_config(tmp_path, toy_config(d2, method="go_q"), "c2.yaml")
        assert run_cli(["synth", "-c", str(p1)]) == 0
        assert run_cli(["synth", "-c", str(p2)]) == 0
        out = tmp_path / "cmp"
        assert run_cli(["compare", str(d1), str(d2), "-o", str(out)]) == 0
        comparison = json.loads((out / "comparison.json").read_text())
        assert {r["method"] for r in comparison["rows"]} == {"mpdr", "go_q"}

    def test_compare_rejects_mismatched_geometry(self, tmp_path, capsys):
        d1, d2 = tmp_path / "m", tmp_path / "g"
        cfg2 = toy_config(d2, method="go_q")
        cfg2["geometry"]["radius_m"] = 0.16
        cfg2["array"]["n_elements"] = 6
        p1 = write_config(tmp_path, toy_config(d1, method="mpdr"), "c1.yaml")
        p2 = write_config(tmp_path, cfg2, "c2.yaml")
        assert run_cli(["synth", "-c", str(p1)]) == 0
        assert run_cli(["synth", "-c", str(p2)]) == 0
        assert run_cli(["compare", str(d1), str(d2), "-o", str(tmp_path / "cmp")]) == 2

    def test_sweep_exact_vs_go_degradation_column(self, tmp_path):
        # the continuous syntheses side by side: the quantization-free
        # steered-lobe gap between them grows monotonically with angle
        out = tmp_path / "sweep"
        cfg = toy_config(out, method="exact")
        cfg["geometry"] = {"radius_m": 0.4, "freq_hz": 3.6e9}
        cfg["array"] = {"n_elements": 30, "arc_pitch_m": 0.038}
        cfg["method"]["name"] = ["exact", "go"]
        cfg["steering"]["phi_o_deg"] = [15.0, 45.0, 75.0]
        cfg["output"]["grid_points"] = 1440
        path = write_config(tmp_path, cfg)
        assert run_cli(["sweep", "-c", str(path)]) == 0
        rows = json.loads((out / "comparison.json").read_text())["rows"]
        levels = {
            (r["method"], r["phi_o_deg"]): r["target_level_abs_db"] for r in rows
        }
        gaps = [levels[("exact", d)] - levels[("go", d)] for d in (15.0, 45.0, 75.0)]
        assert gaps[0] < gaps[1] < gaps[2]

    def test_compare_toy_exhaustive_dominates(self, tmp_path):
        dirs = []
        for method in ("es", "ga", "mpdr", "go_q"):
            d = tmp_path / method
            cfg = toy_config(d, method=method)
            if method == "ga":
                cfg["method"].update({"population": 100, "generations": 50, "seed": 0})
            p = write_config(tmp_path, cfg, f"{method}.yaml")
            assert run_cli(["synth", "-c", str(p)]) == 0
            dirs.append(str(d))
        out = tmp_path / "cmp"
        assert run_cli(["compare", *dirs, "-o", str(out)]) == 0
        rows = json.loads((out / "comparison.json").read_text())["rows"]
        sll = {r["method"]: r["sll_db"] for r in rows}
        # reported SLL is recomputed on the fine grid; allow the grid-split drift
        assert sll["es"] <= min(sll.values()) + 0.1

    def test_single_run_compare_degenerate(self, tmp_path):
        d1 = tmp_path / "m"
        p1 = write_config(tmp_path, toy_config(d1, method="go_q"))
        assert run_cli(["synth", "-c", str(p1)]) == 0
        out = tmp_path / "cmp"
        assert run_cli(["compare", str(d1), "-o", str(out)]) == 0
        comparison = json.loads((out / "comparison.json").read_text())
        assert len(comparison["rows"]) == 1
        assert comparison["rows"][0]["target_level_norm_db"] == 0.0


class TestValidate:
    def test_validate_passes(self, capsys):
        assert run_cli(["validate"]) == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out
        assert out.count("PASS") >= 7


def test_angle_units_round_trip(tmp_path):
    # degrees in config and files, radians inside
    out = tmp_path / "run"
    cfg = toy_config(out, method="go_q", phi=37.5)
    path = write_config(tmp_path, cfg)
    assert run_cli(["synth", "-c", str(path)]) == 0
    metrics = json.loads((out / "metrics.json").read_text())
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["steering"]["phi_o_deg"] == [37.5]
    rows = (out / "pattern.csv").read_text().splitlines()[1:]
    degs = np.array([float(r.split(",")[0]) for r in rows])
    assert degs[0] == -180.0 and degs[-1] < 180.0
    assert abs(metrics["peak_dir_deg"]) <= 180.0


def test_cosine_taper_model_through_pipeline(tmp_path):
    out = tmp_path / "run"
    cfg = toy_config(out, method="go_q")
    cfg["meta_atom"] = {"model": "cosine"}
    path = write_config(tmp_path, cfg)
    assert run_cli(["synth", "-c", str(path)]) == 0
    states = json.loads((out / "states.json").read_text())
    # the state split shrinks with the element's off-axis angle
    splits = {}
    for el in states["elements"]:
        s0, s1 = (complex(s["re"], s["im"]) for s in el["states"])
        splits[abs(el["alpha_deg"])] = abs(np.angle(s1 / s0))
    angles = sorted(splits)
    assert splits[angles[0]] > splits[angles[-1]]


def test_csv_state_table_through_pipeline(tmp_path):
    table = tmp_path / "atom.csv"
    table.write_text(
        "angle_deg,state_index,mag,phase_deg\n"
        "0,0,1.0,0\n0,1,1.0,180\n"
        "80,0,0.95,-20\n80,1,0.9,120\n"
    )
    out = tmp_path / "run"
    cfg = toy_config(out, method="mpdr")
    cfg["meta_atom"] = {"model": "table", "table_path": str(table)}
    path = write_config(tmp_path, cfg)
    assert run_cli(["synth", "-c", str(path)]) == 0
    result = json.loads((out / "result.json").read_text())
    assert all(abs(complex(g["re"], g["im"])) <= 1 + 1e-9 for g in result["gamma"])


def test_cos2_element_pattern_through_pipeline(tmp_path):
    out = tmp_path / "run"
    cfg = toy_config(out, method="go_q")
    cfg["array"]["element_pattern"] = "cos2"
    path = write_config(tmp_path, cfg)
    assert run_cli(["synth", "-c", str(path)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["array"]["element_pattern"] == "cos2"


def test_es_budget_override(tmp_path):
    out = tmp_path / "run"
    cfg = toy_config(out, method="es")
    cfg["method"]["budget"] = 100  # 2^8 = 256 > 100: refused
    path = write_config(tmp_path, cfg)
    assert run_cli(["synth", "-c", str(path)]) == 3
    cfg["method"]["budget"] = 256
    cfg["output"]["directory"] = str(tmp_path / "run2")
    path2 = write_config(tmp_path, cfg, "c2.yaml")
    assert run_cli(["synth", "-c", str(path2)]) == 0


def test_state_sets_audit_export(tmp_path):
    out = tmp_path / "run"
    path = write_config(tmp_path, toy_config(out, method="go_q"))
    assert run_cli(["synth", "-c", str(path)]) == 0
    states = json.loads((out / "states.json").read_text())
    assert len(states["elements"]) == 8
    for el in states["elements"]:
        assert len(el["states"]) == 2
        assert abs(el["alpha_deg"]) < 90.0


def test_shipped_baseline_config_runs(tmp_path):
    import pathlib

    baseline = pathlib.Path(__file__).resolve().parents[1] / "configs" / "baseline_mpdr.yaml"
    out = tmp_path / "baseline"
    assert run_cli(["synth", "-c", str(baseline), "-o", str(out)]) == 0
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["sll_db"] < 0
    assert abs(metrics["peak_dir_deg"] - 15.0) < 3.0
    for name in ("pattern.csv", "metrics.json", "result.json", "manifest.json"):
        assert (out / name).exists()


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "cylris.cli", "--version"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert "cylris" in proc.stdout
