import json
import math

import pytest

from conescan.cli import main
from conescan.config import default_scenario, to_dict, to_json


@pytest.fixture
def empty_scenario(tmp_path):
    path = tmp_path / "empty.json"
    path.write_text(to_json(default_scenario(0, seed=1)))
    return path


class TestValidate:
    def test_good_config(self, empty_scenario, capsys):
        assert main(["validate", str(empty_scenario)]) == 0
        assert "valid" in capsys.readouterr().out

    def test_mapping_geometry_error(self, tmp_path, capsys):
        data = to_dict(default_scenario(0))
        data["camera"]["gamma"] = math.radians(15.0)
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data))
        assert main(["validate", str(path)]) == 1
        assert "gamma > beta/2" in capsys.readouterr().err

    def test_unparseable_json(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{")
        assert main(["validate", str(path)]) == 1
        assert "config error" in capsys.readouterr().err


class TestRun:
    def test_zero_target_run_exits_clean(self, empty_scenario, tmp_path, capsys):
        out = tmp_path / "run_out"
        code = main(["run", str(empty_scenario), "--out", str(out)])
        assert code == 0
        assert (out / "report.json").exists()
        assert "0/0 targets" in capsys.readouterr().out

    def test_seed_override_recorded(self, empty_scenario, tmp_path):
        out = tmp_path / "seeded"
        main(["run", str(empty_scenario), "--seed", "99", "--out", str(out)])
        report = json.loads((out / "report.json").read_text())
        assert report["seed"] == 99

    def test_env_var_default_out(self, empty_scenario, tmp_path, monkeypatch):
        monkeypatch.setenv("CONESCAN_OUT", str(tmp_path / "env_runs"))
        main(["run", str(empty_scenario)])
        assert (tmp_path / "env_runs" / "empty-seed1" / "report.json").exists()


class TestPlot:
    def test_plot_completed_run(self, empty_scenario, tmp_path, capsys):
        out = tmp_path / "run"
        main(["run", str(empty_scenario), "--out", str(out)])
        assert main(["plot", str(out)]) == 0
        assert (out / "plots" / "uav_path.csv").exists()

    def test_plot_rejects_non_run_dir(self, tmp_path, capsys):
        assert main(["plot", str(tmp_path)]) == 1


class TestSweep:
    def test_sweep_zero_target(self, empty_scenario, tmp_path, capsys):
        code = main(["sweep", str(empty_scenario), "--seeds", "1..3",
                     "--out", str(tmp_path / "sweep"), "--jobs", "2"])
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0].startswith("seed")
        assert len(lines) == 4
        for seed in (1, 2, 3):
            assert (tmp_path / "sweep" / f"seed{seed:04d}" / "report.json").exists()

    def test_sweep_bad_range(self, empty_scenario, capsys):
        assert main(["sweep", str(empty_scenario), "--seeds", "nope"]) == 1
