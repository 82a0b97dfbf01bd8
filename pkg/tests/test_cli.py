import json
import os

import numpy as np
import pytest

import spinquench.cli as cli
from spinquench.serialize import file_sha256, read_timeseries_csv

SINGLE_SPIN = {
    "model": {"model": "terms", "n_sites": 1,
              "terms": [{"coefficient": 1.0, "factors": [["z", 1]]}]},
    "measurement": {"site": 1, "outcome_policy": "forced-up"},
    "grid": {"t_max": 4.0, "dt": 0.05},
}


def _write_config(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def _run(tmp_path, command, cfg, extra=(), name="config.json", out="out"):
    out_dir = tmp_path / out
    argv = [command, "--config", _write_config(tmp_path, cfg, name),
            "--out", str(out_dir), *extra]
    return cli.main(argv), out_dir


class TestSelftest:
    def test_passes_and_writes_report(self, tmp_path, capsys):
        out = tmp_path / "st"
        assert cli.main(["selftest", "--out", str(out)]) == 0
        report = json.loads((out / "selftest.json").read_text())
        assert report["ok"] is True
        manifest = json.loads((out / "manifest.json").read_text())
        assert [a["path"] for a in manifest["artifacts"]] == ["selftest.json"]
        lines = capsys.readouterr().out
        assert "ok" in lines


class TestQuench:
    def test_single_spin_cosine_csv(self, tmp_path):
        code, out = _run(tmp_path, "quench", SINGLE_SPIN)
        assert code == 0
        series = read_timeseries_csv(out / "series.csv")
        assert np.max(np.abs(series.values - np.cos(2 * series.grid.times))) < 1e-9
        assert series.meta["collapse_probability"] == pytest.approx(0.5)

    def test_rerun_byte_identical(self, tmp_path):
        _, out1 = _run(tmp_path, "quench", SINGLE_SPIN, out="a")
        _, out2 = _run(tmp_path, "quench", SINGLE_SPIN, out="b")
        assert (out1 / "series.csv").read_bytes() == (out2 / "series.csv").read_bytes()

    def test_manifest_checksums_verify(self, tmp_path):
        code, out = _run(tmp_path, "quench", SINGLE_SPIN)
        assert code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        for entry in manifest["artifacts"]:
            assert file_sha256(out / entry["path"]) == entry["sha256"]

    def test_sampled_outcome_seed_flag_wins(self, tmp_path):
        cfg = {"model": {"model": "tfic", "n_sites": 4, "lam": 0.8},
               "measurement": {"site": 2, "outcome_policy": "sampled", "seed": 1},
               "grid": {"t_max": 0.5, "dt": 0.25}}
        outcomes = set()
        for seed in range(8):
            code, out = _run(tmp_path, "quench", cfg,
                             extra=["--seed", str(seed)], out=f"s{seed}")
            assert code == 0
            meta = read_timeseries_csv(out / "series.csv").meta
            outcomes.add(meta["outcome"])
        # p = 1/2 per outcome: eight seeds essentially surely hit both
        assert outcomes == {"up", "down"}


class TestConfigErrors:
    def test_unknown_top_level_key(self, tmp_path, capsys):
        code, _ = _run(tmp_path, "quench", dict(SINGLE_SPIN, bogus=1))
        assert code == 2
        err = json.loads(capsys.readouterr().out)["error"]
        assert err["code"] == 2
        assert err["stage"] == "config"
        assert "bogus" in err["message"]

    def test_missing_required_key(self, tmp_path):
        cfg = {k: v for k, v in SINGLE_SPIN.items() if k != "grid"}
        code, _ = _run(tmp_path, "quench", cfg)
        assert code == 2

    def test_invalid_json_document(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert cli.main(["quench", "--config", str(path),
                         "--out", str(tmp_path / "o")]) == 2

    def test_config_required_for_quench(self, tmp_path):
        assert cli.main(["quench", "--out", str(tmp_path / "o")]) == 2

    def test_unknown_nested_key(self, tmp_path):
        cfg = dict(SINGLE_SPIN, grid={"t_max": 1.0, "dt": 0.1, "steps": 3})
        code, _ = _run(tmp_path, "quench", cfg)
        assert code == 2


SPECTRO_CFG = {
    "model": {"model": "long_range_ising", "n_sites": 6, "alpha": 3.0,
              "b_over_j": 1.0},
    "measurement": {"site": 3, "outcome_policy": "forced-up"},
    "grid": {"t_max": 100.0, "dt": 0.05},
    "spectro": {"e_max": 12.0, "e_count": 4000,
                "window": {"kind": "hann"}, "prominence_floor": 0.04},
}


class TestSpectroscopy:
    def test_artifacts_and_match(self, tmp_path):
        code, out = _run(tmp_path, "spectroscopy", SPECTRO_CFG)
        assert code == 0
        assert (out / "series.csv").exists()
        assert (out / "spectrum.csv").exists()
        match = json.loads((out / "match.json").read_text())
        assert match["matched"]
        assert not match["orphan_peaks"]
        manifest = json.loads((out / "manifest.json").read_text())
        assert {a["path"] for a in manifest["artifacts"]} == \
            {"series.csv", "spectrum.csv", "match.json"}

    def test_oracle_cap_skips_matching(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setattr(cli, "MATCH_ORACLE_CAP", 16)
        code, out = _run(tmp_path, "spectroscopy", SPECTRO_CFG)
        assert code == 0
        assert not (out / "match.json").exists()
        assert "matching skipped" in capsys.readouterr().out


class TestCollapse:
    def test_tfic_with_nu_scan(self, tmp_path):
        cfg = {"model_kind": "tfic", "sizes": [6, 8, 10], "target_ratio": 1.0,
               "grid": {"x_max": 1.0, "dt": 0.1}, "nu": 1.0,
               "nu_scan": [0.5, 1.0, 2.0]}
        code, out = _run(tmp_path, "collapse", cfg)
        assert code == 0
        payload = json.loads((out / "metric.json").read_text())
        assert payload["metric"] >= 0
        assert set(payload["controls"]) == {"6", "8", "10"}
        assert len(payload["nu_scan"]) == 3
        assert payload["nu_best"] in (0.5, 1.0, 2.0)
        header = (out / "collapse.csv").read_text().splitlines()[0]
        assert header == "x,m,N,control"

    def test_kondo_scaling_window_payload(self, tmp_path):
        cfg = {"model_kind": "kondo", "sizes": [8, 12], "target_ratio": 2.0,
               "xi_table": [[0.3, 8.0], [0.5, 4.0], [0.7, 2.5]],
               "grid": {"x_max": 1.0, "dt": 0.1}}
        code, out = _run(tmp_path, "collapse", cfg)
        assert code == 0
        payload = json.loads((out / "metric.json").read_text())
        window = payload["scaling_window"]
        assert window["x_break"] == 0.5
        assert window["pre_metric"] >= 0
        assert window["post_metric"] >= 0

    def test_unreachable_control_is_config_error(self, tmp_path):
        cfg = {"model_kind": "tfic", "sizes": [4, 6], "target_ratio": 8.0,
               "grid": {"x_max": 0.5, "dt": 0.1}}
        code, _ = _run(tmp_path, "collapse", cfg)
        assert code == 2

    def test_parallel_matches_serial(self, tmp_path):
        cfg = {"model_kind": "tfic", "sizes": [6, 8], "target_ratio": 1.0,
               "grid": {"x_max": 1.0, "dt": 0.1}}
        _, out1 = _run(tmp_path, "collapse", cfg, extra=["--jobs", "1"], out="serial")
        _, out2 = _run(tmp_path, "collapse", cfg, extra=["--jobs", "2"], out="par")
        for name in ("collapse.csv", "metric.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


CLOUD_CFG = {
    "n_sites": 10, "j_prime_sweep": [0.4, 0.6, 0.8, 1.0], "dt": 0.02,
}


class TestCloud:
    def test_sweep_profiles_and_fits(self, tmp_path):
        code, out = _run(tmp_path, "cloud", CLOUD_CFG)
        assert code == 0
        for tag in ("0p4", "0p6", "0p8", "1p0"):
            assert (out / f"profile_J{tag}.csv").exists()
        fits = json.loads((out / "fits.json").read_text())
        assert "excluded" in fits["screening_fits"]["1.0"]
        xi = {jp: f["xi"] for jp, f in fits["screening_fits"].items()
              if "xi" in f}
        assert xi["0.4"] > xi["0.6"] > xi["0.8"]
        assert "a_coefficient" in fits["kondo_law"]

    def test_reference_profile_all_zero(self, tmp_path):
        code, out = _run(tmp_path, "cloud",
                         {"n_sites": 8, "j_prime_sweep": [1.0], "dt": 0.05})
        assert code == 0
        rows = (out / "profile_J1p0.csv").read_text().splitlines()[1:]
        assert all(float(r.split(",")[1]) == 0.0 for r in rows)

    def test_short_tail_gives_partial_results(self, tmp_path, capsys):
        cfg = {"n_sites": 10, "j_prime_sweep": [0.5], "dt": 0.05, "tail": 8}
        code, out = _run(tmp_path, "cloud", cfg)
        assert code == 4
        err = json.loads(capsys.readouterr().out)["error"]
        assert err["code"] == 4
        # partial artifacts are preserved and listed in the manifest
        fits = json.loads((out / "fits.json").read_text())
        assert "error" in fits["screening_fits"]["0.5"]
        manifest = json.loads((out / "manifest.json").read_text())
        assert {a["path"] for a in manifest["artifacts"]} == \
            {"profile_J0p5.csv", "fits.json"}

    def test_out_of_range_jprime_rejected(self, tmp_path):
        code, _ = _run(tmp_path, "cloud", {"n_sites": 8, "j_prime_sweep": [1.5]})
        assert code == 2


class TestJobsDefault:
    def test_env_variable_honored(self, monkeypatch):
        monkeypatch.setenv("SPINQUENCH_JOBS", "3")
        assert cli._default_jobs() == 3

    def test_garbage_env_falls_back(self, monkeypatch):
        monkeypatch.setenv("SPINQUENCH_JOBS", "many")
        assert cli._default_jobs() == 1
