import csv
import json

import numpy as np
import pytest

from rydberg_dqc1 import cli
from rydberg_dqc1.atomsim import PAPER_SEC3, PhysParams

SMALL = {
    "fig3": {"scenario": "fig3", "n_list": [1, 10], "t_grid": {"start": 0.0, "stop": 0.6, "count": 7}},
    "fig4": {"scenario": "fig4", "nbar": 50, "theta_grid": {"start": 0.0, "stop": 3.0, "count": 301}},
    "shots": {"scenario": "shots", "nr": 100, "repetitions": 50, "trace": [0.5, 0.25], "seed": 5},
    "discord": {"scenario": "discord", "n_list": [1, 2], "trials": 2, "grid_resolution": 300, "seed": 1},
    "xa": {"scenario": "xa", "n_list": [1, 2], "trials": 3, "seed": 2},
    "ising": {"scenario": "ising", "n": 3, "seed": 4},
}

COLUMNS = {
    "fig3": ["t_us", "n", "re_trace", "im_trace"],
    "fig4": ["n", "poisson_weight", "peak_width"],
    "shots": ["rep", "est_x", "est_y", "se_x", "se_y"],
    "discord": ["n", "alpha", "trial", "d_closed", "d_minsearch", "d_estimator", "min_pt_eig"],
    "xa": ["n", "trial", "max_abs_dev", "leakage", "unitarity_dev"],
    "ising": ["t_us", "re_s", "im_s"],
}


def write_config(path, raw):
    path.write_text(json.dumps(raw))
    return str(path)


def run(tmp_path, raw, name="cfg.json", out="out", extra=()):
    cfg = write_config(tmp_path / name, raw)
    return cli.main(["run", cfg, "--out", str(tmp_path / out), *extra])


class TestPreset:
    def test_values(self):
        p = cli.preset("paper-sec3")
        two_pi = 2 * np.pi
        assert p.omega_p == p.omega_q == two_pi * 70
        assert p.omega_c == two_pi * 700
        assert p.delta == two_pi * 1200
        assert p.gamma == two_pi * 6
        assert p.v_block == two_pi * 15000

    def test_round_trip_bit_exact(self, capsys):
        assert cli.main(["preset", "paper-sec3"]) == 0
        back = PhysParams(**json.loads(capsys.readouterr().out))
        assert back == PAPER_SEC3

    def test_config_round_trip(self):
        cfg = cli.ScenarioConfig.from_dict({"scenario": "fig3", "params": json.loads(json.dumps(PAPER_SEC3.to_dict()))})
        assert cfg.params == PAPER_SEC3

    def test_unknown(self, capsys):
        assert cli.main(["preset", "nope"]) == cli.EXIT_CONFIG
        assert "unknown preset" in capsys.readouterr().err


@pytest.mark.parametrize("scenario", sorted(SMALL))
def test_scenario_writes_csv_and_is_deterministic(tmp_path, capsys, scenario):
    raw = dict(SMALL[scenario], output=f"{scenario}.csv")
    assert run(tmp_path, raw, out="a") == 0
    summary = capsys.readouterr().out
    assert summary.startswith(f"{scenario}: ")
    assert run(tmp_path, raw, out="b") == 0
    first = (tmp_path / "a" / f"{scenario}.csv").read_bytes()
    assert first == (tmp_path / "b" / f"{scenario}.csv").read_bytes()
    assert b"\r" not in first
    rows = list(csv.reader(first.decode().splitlines()))
    assert rows[0] == COLUMNS[scenario]
    assert len(rows) > 1 and all(len(r) == len(rows[0]) for r in rows)
    assert not list((tmp_path / "a").glob(".*.tmp"))


def test_fig4_summary_reports_weighted_width(tmp_path, capsys):
    assert run(tmp_path, SMALL["fig4"]) == 0
    assert "weighted_avg_width=" in capsys.readouterr().out


def test_shots_summary_near_inverse_sqrt(tmp_path, capsys):
    raw = {"scenario": "shots", "nr": 400, "repetitions": 400, "seed": 9}
    assert run(tmp_path, raw) == 0
    out = capsys.readouterr().out
    rms = float(out.split("rms_error=")[1].split()[0])
    assert 0.04 < rms < 0.06


def test_seed_override_changes_output(tmp_path):
    raw = dict(SMALL["shots"], output="s.csv")
    assert run(tmp_path, raw, out="a") == 0
    assert run(tmp_path, raw, out="b", extra=["--seed", "6"]) == 0
    assert (tmp_path / "a/s.csv").read_bytes() != (tmp_path / "b/s.csv").read_bytes()


def test_seventeen_digit_format():
    assert cli.fmt(0.1) == "0.10000000000000001"
    assert float(cli.fmt(np.pi)) == np.pi
    assert cli.fmt(np.int64(3)) == "3"


class TestErrors:
    def test_bad_json(self, tmp_path):
        (tmp_path / "bad.json").write_text("{not json")
        assert cli.main(["run", str(tmp_path / "bad.json")]) == cli.EXIT_CONFIG

    def test_missing_file(self, tmp_path):
        assert cli.main(["run", str(tmp_path / "none.json")]) == cli.EXIT_CONFIG

    def test_unknown_scenario(self, tmp_path):
        assert run(tmp_path, {"scenario": "fig9"}) == cli.EXIT_CONFIG

    def test_unknown_preset_in_config(self, tmp_path):
        assert run(tmp_path, {"scenario": "fig3", "params": {"preset": "lab"}}) == cli.EXIT_CONFIG

    def test_unknown_params_field(self, tmp_path):
        assert run(tmp_path, {"scenario": "fig3", "params": {"preset": "paper-sec3", "omega_z": 1}}) == cli.EXIT_CONFIG

    def test_incomplete_params(self, tmp_path):
        assert run(tmp_path, {"scenario": "fig3", "params": {"omega_p": 1.0}}) == cli.EXIT_CONFIG

    def test_bad_argument(self):
        assert cli.main(["frobnicate"]) == cli.EXIT_CONFIG

    def test_descending_grid(self, tmp_path):
        raw = {"scenario": "fig3", "t_grid": [0.2, 0.1]}
        assert run(tmp_path, raw) == cli.EXIT_INVARIANT

    def test_empty_grid(self, tmp_path):
        assert run(tmp_path, {"scenario": "fig4", "theta_grid": []}) == cli.EXIT_INVARIANT

    def test_alpha_out_of_range(self, tmp_path):
        assert run(tmp_path, dict(SMALL["shots"], alpha=2.0)) == cli.EXIT_INVARIANT

    def test_negative_rate(self, tmp_path):
        raw = {"scenario": "fig3", "params": {"preset": "paper-sec3", "gamma": -1.0}}
        assert run(tmp_path, raw) == cli.EXIT_INVARIANT

    def test_coarse_ising_grid_is_numeric_failure(self, tmp_path):
        raw = {"scenario": "ising", "n": 4, "t_grid": {"start": 0, "stop": 5, "count": 6}}
        assert run(tmp_path, raw) == cli.EXIT_NUMERIC
