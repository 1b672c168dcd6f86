import csv
import json
import math

import pytest

from quickdiag.cli import main
from quickdiag.config import ConfigError, bundled_config_path, load_config, parse_config
from quickdiag.report import FIGURE_COLUMNS

from oracles import cusum_chain_expectation


def bundled():
    return json.loads(bundled_config_path().read_text())


def write(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return str(path)


class TestConfig:
    def test_bundled(self):
        cfg = load_config(bundled_config_path())
        assert cfg.J == 2 and cfg.dimension == 2
        assert [a.id for a in cfg.algorithms] == ["mcusum-robust", "mcusum-oracle", "glr-w50", "glr-w100"]
        assert math.isinf(cfg.sets[0].lower[0]) and cfg.sets[1].upper[0] == 0.8
        assert len(cfg.sweep) == 11

    def test_round_trip(self):
        cfg = load_config(bundled_config_path())
        again = parse_config(json.loads(cfg.dumps()))
        assert again.to_dict() == cfg.to_dict()
        assert again.pairs["robust"].pairs == cfg.pairs["robust"].pairs
        assert again.sets == cfg.sets

    def test_both_gamma_and_h(self):
        data = bundled()
        data["algorithms"][0]["h"] = 3.0
        with pytest.raises(ConfigError):
            parse_config(data)

    def test_neither_gamma_nor_h(self):
        data = bundled()
        del data["algorithms"][0]["gamma"]
        with pytest.raises(ConfigError):
            parse_config(data)

    def test_missing_pairs(self):
        data = bundled()
        data["pairs"]["robust"] = data["pairs"]["robust"][:3]
        with pytest.raises(ConfigError, match="pairs/robust"):
            parse_config(data)

    def test_dimension_mismatch(self):
        data = bundled()
        data["lfds"][1] = [0.4, 0.4, 0.4]
        with pytest.raises(ConfigError, match="lfds/1"):
            parse_config(data)

    def test_bad_json_reports_position(self, tmp_path):
        with pytest.raises(ConfigError, match="line 1"):
            load_config(write(tmp_path, "{"))

    def test_toy(self):
        cfg = load_config(bundled_config_path("categorical_toy.json"))
        assert cfg.family == "categorical" and cfg.sweep == []


class TestVerify:
    def test_bundled_passes(self, tmp_path, capsys):
        out = tmp_path / "cert.json"
        assert main(["verify", "--config", str(bundled_config_path()), "--out", str(out)]) == 0
        cert = json.loads(out.read_text())
        assert cert["passed"] and cert["dsb_via_wsb"]["passed"]
        assert cert["delta_star"] == pytest.approx(0.16, abs=1e-12)
        assert all(w["passed"] for w in cert["wsb"].values())
        assert "Delta_* = 0.16" in capsys.readouterr().out

    def test_lfd_outside_set(self, tmp_path):
        data = bundled()
        data["lfds"][1] = [0.3, 0.3]
        out = tmp_path / "cert.json"
        assert main(["--config", write(tmp_path, data), "--out", str(out), "verify"]) == 1
        cert = json.loads(out.read_text())
        failed = [w["condition"] for w in cert["dsb_direct"]["witnesses"] if not w["passed"]]
        assert "member_lfd[1]" in failed

    def test_malformed_bound(self, tmp_path, capsys):
        data = bundled()
        data["sets"][1]["upper"][0] = "0.8x"
        assert main(["verify", "--config", write(tmp_path, data)]) == 2
        assert "sets/1/upper/0" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["verify", "--config", str(tmp_path / "none.json")]) == 2


class TestCalibrate:
    def test_theoretical(self, tmp_path):
        out = tmp_path / "cal.json"
        assert main(["calibrate", "--theoretical", "--config", str(bundled_config_path()), "--out", str(out)]) == 0
        cal = json.loads(out.read_text())["algorithms"]
        assert set(cal) == {"mcusum-robust", "mcusum-oracle", "glr-w50", "glr-w100"}
        assert all(v["h"] == pytest.approx(math.log(1e4)) for v in cal.values())

    def test_gamma_too_small(self, tmp_path):
        data = bundled()
        data["algorithms"][0]["gamma"] = 1.0
        assert main(["calibrate", "--config", write(tmp_path, data)]) == 2

    def test_toy_matches_chain(self, tmp_path):
        out = tmp_path / "cal.json"
        assert main(["calibrate", "--config", str(bundled_config_path("categorical_toy.json")), "--out", str(out)]) == 0
        entry = json.loads(out.read_text())["algorithms"]["cusum"]
        level = math.ceil(entry["h"] / math.log(2) - 1e-9)
        assert cusum_chain_expectation(1 / 3, level) == pytest.approx(78.0)
        assert abs(entry["F_mean"] - 78.0) <= 3 * entry["F_se"]

    def test_fixed_threshold(self, tmp_path):
        data = bundled()
        data["algorithms"] = [{"id": "m", "kind": "mcusum", "pair_source": "robust", "h": 2.0}]
        out = tmp_path / "cal.json"
        assert main(["calibrate", "--config", write(tmp_path, data), "--runs", "20", "--out", str(out)]) == 0
        entry = json.loads(out.read_text())["algorithms"]["m"]
        assert entry["h"] == 2.0 and entry["mode"] == "fixed" and entry["F_mean"] > 0


class TestReports:
    def test_figure_small_runs(self, tmp_path):
        assert main(["figure", "--config", str(bundled_config_path()), "--runs", "2", "--out", str(tmp_path)]) == 0
        with open(tmp_path / "delays_type1.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert list(rows[0]) == FIGURE_COLUMNS
        assert len(rows) == 5 * 4
        assert {"glr-w50", "glr-w100"} <= {r["algorithm"] for r in rows}
        assert (tmp_path / "delays_type2.png").stat().st_size > 0

    def test_figure_needs_sweep(self, tmp_path):
        toy = str(bundled_config_path("categorical_toy.json"))
        assert main(["figure", "--config", toy, "--out", str(tmp_path)]) == 2

    def test_delay_and_false(self, tmp_path):
        data = bundled()
        data["algorithms"] = [{"id": "m", "kind": "mcusum", "pair_source": "robust", "h": 2.0}]
        cfg = write(tmp_path, data)
        assert main(["delay", "--config", cfg, "--runs", "10", "--out", str(tmp_path)]) == 0
        assert main(["false", "--config", cfg, "--runs", "10", "--out", str(tmp_path)]) == 0
        assert len((tmp_path / "delays.csv").read_text().splitlines()) == 3
        assert len((tmp_path / "false.csv").read_text().splitlines()) == 5

    def test_calibration_file_is_used(self, tmp_path):
        data = bundled()
        data["algorithms"] = [{"id": "m", "kind": "mcusum", "pair_source": "robust", "gamma": 1e4}]
        cfg = write(tmp_path, data)
        cal = tmp_path / "cal.json"
        cal.write_text(json.dumps({"algorithms": {"m": {"h": 1.5}}}))
        assert main(["delay", "--config", cfg, "--runs", "5", "--calibration", str(cal), "--out", str(tmp_path)]) == 0
        with open(tmp_path / "delays.csv", newline="") as fh:
            assert {r["h"] for r in csv.DictReader(fh)} == {"1.5"}

    def test_runs_validation(self):
        assert main(["delay", "--config", str(bundled_config_path()), "--runs", "1"]) == 2
