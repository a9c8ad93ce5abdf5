"""Command line interface: exit codes, CSV outputs, sweep resume."""

import csv

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rifosim import cli
from rifosim.config import OUTPUT_DIR_ENV, ConfigError, ExperimentConfig
from rifosim.metrics import CSV_COLUMNS

BASE_CONFIG = """
topology: desk
scheduler:
  kind: droptail
  capacity: 20
workload:
  distribution:
    kind: uniform
    lo: 500
    hi: 20000
  load: 0.3
  seed: 7
  horizon_ns: 2000000
output: out.csv
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "exp.yaml"
    path.write_text(BASE_CONFIG)
    return path


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestConfigParsing:
    def test_defaults_fill_in(self, config_file):
        cfg = ExperimentConfig.from_yaml(config_file)
        assert cfg.policy.kind == "srpt"
        assert cfg.scheduler.tracking_range == 50

    def test_round_trip_dict(self, config_file):
        cfg = ExperimentConfig.from_yaml(config_file)
        again = ExperimentConfig.from_dict(cfg.effective_dict(), cfg.base_dir)
        assert again.effective_dict() == cfg.effective_dict()

    def test_bad_fraction_names_field(self):
        with pytest.raises(ConfigError, match="scheduler.guaranteed_fraction"):
            ExperimentConfig.from_dict({"scheduler": {"guaranteed_fraction": 1.5}})

    def test_unknown_key_names_section(self):
        with pytest.raises(ConfigError, match="scheduler"):
            ExperimentConfig.from_dict({"scheduler": {"burst": 3}})

    def test_preset_and_fields_conflict(self):
        with pytest.raises(ConfigError, match="topology"):
            ExperimentConfig.from_dict({"topology": {"preset": "desk", "leaf_count": 3}})


class TestExitCodes:
    def test_missing_config_file_is_config_error(self, tmp_path, capsys):
        assert cli.main(["run", str(tmp_path / "nope.yaml")]) == 1
        assert "config error" in capsys.readouterr().err

    def test_invalid_value_is_config_error(self, tmp_path, capsys):
        path = tmp_path / "bad.yaml"
        path.write_text("workload: {load: 2.0}\n")
        assert cli.main(["run", str(path)]) == 1
        assert "workload.load" in capsys.readouterr().err

    def test_unknown_flag_is_config_error(self, capsys):
        assert cli.main(["trace-minmax", "--bogus"]) == 1

    def test_unknown_subcommand_is_config_error(self, capsys):
        assert cli.main(["frobnicate"]) == 1

    def test_runtime_failure_is_exit_2(self, config_file, monkeypatch, capsys):
        def boom(cfg):
            raise OSError("disk on fire")
        monkeypatch.setattr(cli, "simulate_once", boom)
        assert cli.main(["run", str(config_file)]) == 2
        assert "runtime error" in capsys.readouterr().err


class TestRun:
    def test_writes_expected_csv(self, config_file, capsys):
        assert cli.main(["run", str(config_file)]) == 0
        out = config_file.parent / "out.csv"
        rows = read_rows(out)
        assert rows and set(rows[0]) == set(CSV_COLUMNS)
        assert {r["class"] for r in rows} == {"small", "medium", "large"}
        assert all(r["scheduler"] == "droptail" for r in rows)

    def test_rerun_is_byte_identical(self, config_file):
        cli.main(["run", str(config_file)])
        out = config_file.parent / "out.csv"
        first = out.read_bytes()
        cli.main(["run", str(config_file)])
        assert out.read_bytes() == first

    def test_output_dir_env_override(self, config_file, tmp_path, monkeypatch):
        alt = tmp_path / "elsewhere"
        alt.mkdir()
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(alt))
        assert cli.main(["run", str(config_file)]) == 0
        assert (alt / "out.csv").exists()
        assert not (config_file.parent / "out.csv").exists()


SWEEP_CONFIG = BASE_CONFIG + """
sweep:
  schedulers: [droptail, pifo]
  loads: [0.2, 0.4]
  seeds: [3]
  processes: 1
"""


class TestSweep:
    @pytest.fixture
    def sweep_file(self, tmp_path):
        path = tmp_path / "sweep.yaml"
        path.write_text(SWEEP_CONFIG)
        return path

    def test_grid_rows_and_order(self, sweep_file):
        assert cli.main(["sweep", str(sweep_file)]) == 0
        rows = read_rows(sweep_file.parent / "out.csv")
        assert len(rows) == 2 * 2 * 1 * 3  # schedulers x loads x seeds x classes
        key = [(r["scheduler"], float(r["load"])) for r in rows]
        assert key == sorted(key)

    def test_part_files_named_by_cell(self, sweep_file):
        cli.main(["sweep", str(sweep_file)])
        parts = sweep_file.parent / "out.csv.parts"
        assert (parts / "droptail_load0.2_seed3.csv").exists()
        assert (parts / "pifo_load0.4_seed3.csv").exists()

    def test_resume_skips_existing_parts_and_merges_same(self, sweep_file, monkeypatch):
        cli.main(["sweep", str(sweep_file)])
        out = sweep_file.parent / "out.csv"
        first = out.read_bytes()
        out.unlink()

        calls = []
        real = cli._sweep_worker
        monkeypatch.setattr(cli, "_sweep_worker",
                            lambda payload: calls.append(payload) or real(payload))
        assert cli.main(["sweep", str(sweep_file)]) == 0
        assert calls == []  # every cell already had a part file
        assert out.read_bytes() == first

    def test_failed_cell_reported_with_exit_2(self, sweep_file, monkeypatch, capsys):
        real_worker = cli._sweep_worker

        def explode(payload):
            raw, base_dir, scheduler, load, seed, part = payload
            if scheduler == "pifo" and load == 0.4:
                return (scheduler, load, seed, "ValueError: boom")
            return real_worker(payload)

        monkeypatch.setattr(cli, "_sweep_worker", explode)
        assert cli.main(["sweep", str(sweep_file)]) == 2
        err = capsys.readouterr().err
        assert "pifo" in err and "0.4" in err


class TestTraceMinmax:
    def test_stdout_csv_shape(self, capsys):
        rc = cli.main(["trace-minmax", "--T", "10", "--packets", "100",
                       "--seed", "5", "--lo", "0", "--hi", "100"])
        assert rc == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "packet_index,sampled_min,sampled_max"
        assert len(lines) == 101
        for line in lines[1:]:
            _, lo, hi = line.split(",")
            assert 0 <= int(lo) <= int(hi) <= 100

    def test_deterministic_for_seed(self, capsys):
        cli.main(["trace-minmax", "--T", "50", "--packets", "200", "--seed", "1"])
        first = capsys.readouterr().out
        cli.main(["trace-minmax", "--T", "50", "--packets", "200", "--seed", "1"])
        assert capsys.readouterr().out == first

    def test_file_output(self, tmp_path):
        out = tmp_path / "trace.csv"
        cli.main(["trace-minmax", "--T", "10", "--packets", "20",
                  "--seed", "2", "--output", str(out)])
        assert out.read_text().startswith("packet_index,sampled_min,sampled_max")

    def test_bad_T_rejected(self, capsys):
        assert cli.main(["trace-minmax", "--T", "0", "--packets", "10",
                        "--seed", "1"]) == 1


class TestCompareApprox:
    def test_output_line_shape(self, capsys):
        rc = cli.main(["compare-approx", "--mode", "shift", "--trials", "1000",
                       "--seed", "3", "--capacity", "20"])
        assert rc == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "mode,trials,agreement,false_admit,false_drop"
        mode, trials, agreement, fa, fd = lines[1].split(",")
        assert mode == "shift" and trials == "1000"
        assert 0.0 <= float(agreement) <= 1.0
        assert int(fa) + int(fd) == round((1 - float(agreement)) * 1000)

    def test_crossmul_mode_is_exact(self, capsys):
        cli.main(["compare-approx", "--mode", "crossmul", "--trials", "2000",
                  "--seed", "9"])
        line = capsys.readouterr().out.strip().splitlines()[1]
        assert line.split(",")[2] == "1.000000000"

    def test_unknown_mode_rejected(self, capsys):
        assert cli.main(["compare-approx", "--mode", "sqrt"]) == 1


class TestSeedSubsets:
    @given(st.lists(st.integers(1, 50), min_size=1, max_size=3, unique=True))
    @settings(max_examples=5, deadline=None)
    def test_sweep_accepts_any_seed_list(self, seeds):
        cfg = ExperimentConfig.from_dict({"sweep": {"seeds": seeds}})
        assert cfg.sweep.seeds == seeds
