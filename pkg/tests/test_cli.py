"""
命令行测试：退出码、结果文件、可重复性
"""

import math

import numpy as np
import pytest

from magsim.cli import (
    EXIT_CONFIG,
    EXIT_NUMERICAL,
    EXIT_OK,
    build_config,
    load_flat_config,
    main,
    parse_overrides,
)
from magsim.exceptions import ConfigError, PreconditionError, SingularSystem
from magsim.output import csv_body_text, read_csv_body, read_csv_header


class TestConfigLoading:
    """配置读取"""

    def test_parse_overrides(self):
        assert parse_overrides(["physics.gamma0=2e-4", "mc.seed = 5"]) == {
            "physics.gamma0": "2e-4",
            "mc.seed": "5",
        }

    def test_bad_override(self):
        with pytest.raises(ConfigError):
            parse_overrides(["physics.gamma0"])

    def test_missing_config_file(self, tmp_path):
        with pytest.raises(ConfigError) as exc_info:
            load_flat_config(str(tmp_path / "missing.env"))
        assert exc_info.value.key == "--config"

    def test_build_config(self, tmp_path):
        path = tmp_path / "run.env"
        path.write_text(
            "# 示例\n"
            "mode = lineshape\n"
            "physics.gamma0 = 2e-4\n"
            "geometry.eta_list = 0.5,0.05\n"
            "detection.power_grid = 1e-2:1e8:21\n",
            encoding="utf-8",
        )
        config = build_config("figure4", str(path), ["mc.seed=5"], str(tmp_path / "out"))
        assert config.mode.value == "figure4"
        assert config.physics.gamma0 == pytest.approx(2e-4)
        assert config.geometry.eta_list == [0.5, 0.05]
        assert config.detection.power_ratios().size == 21
        assert config.seed == 5
        assert config.output.dir == str(tmp_path / "out")


class TestExitCodes:
    """退出码 0 / 1 / 2"""

    def test_empty_power_grid(self, tmp_path, capsys):
        code = main(["figure4", "--set", "detection.power_grid=", "--out", str(tmp_path)])
        assert code == EXIT_CONFIG
        assert "detection.power_grid" in capsys.readouterr().err

    def test_unknown_key(self, tmp_path, capsys):
        code = main(["figure4", "--set", "physics.unknown=1", "--out", str(tmp_path)])
        assert code == EXIT_CONFIG
        assert "physics.unknown" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert main(["figure4", "--config", str(tmp_path / "missing.env")]) == EXIT_CONFIG

    def test_unknown_mode(self):
        assert main(["nope"]) == EXIT_CONFIG

    def test_version(self, capsys):
        assert main(["--version"]) == EXIT_OK
        assert "magsim" in capsys.readouterr().out

    def test_numerical_failure(self, tmp_path, mocker, capsys):
        mocker.patch("magsim.cli.sql_table", side_effect=SingularSystem("方程组奇异", condition=1e13))
        assert main(["sql_table", "--out", str(tmp_path)]) == EXIT_NUMERICAL
        assert "方程组奇异" in capsys.readouterr().err

    @pytest.mark.parametrize("error", [
        ValueError("f(a) and f(b) must have different signs"),
        np.linalg.LinAlgError("Singular matrix"),
    ])
    def test_library_errors_are_numerical(self, tmp_path, mocker, capsys, error):
        mocker.patch("magsim.cli.sql_table", side_effect=error)
        assert main(["sql_table", "--out", str(tmp_path)]) == EXIT_NUMERICAL
        assert str(error) in capsys.readouterr().err

    def test_writer_failure_is_numerical(self, tmp_path, mocker, capsys):
        mocker.patch("magsim.cli.OutputWriter.finalize", side_effect=OSError("磁盘已满"))
        assert main(["sql_table", "--out", str(tmp_path)]) == EXIT_NUMERICAL
        assert "磁盘已满" in capsys.readouterr().err

    def test_atomic_precondition_is_config_error(self, tmp_path, mocker, capsys):
        mocker.patch("magsim.models.AtomicParams",
                     side_effect=PreconditionError("gamma_r 必须为正", gamma_r=0.0))
        assert main(["sql_table", "--out", str(tmp_path)]) == EXIT_CONFIG
        assert "physics" in capsys.readouterr().err
        assert not (tmp_path / "sql_table.csv").exists()


class TestModes:
    """各运行模式"""

    def test_figure4(self, tmp_path):
        out = tmp_path / "figure4"
        assert main(["figure4", "--out", str(out)]) == EXIT_OK
        for name in ("figure4_eta_0.8.csv", "figure4_eta_0.1.csv", "figure4_eta_0.01.csv",
                     "figure4_opm.csv", "figure4_summary.csv", "SCHEMA.md", "plot.gp"):
            assert (out / name).exists()

        summary = read_csv_body(out / "figure4_summary.csv")
        assert np.all(summary["opm_advantage"] >= 3.0)
        assert np.all((summary["power_ratio"] > 1e2) & (summary["power_ratio"] < 1e4))

        restored, meta = read_csv_header(out / "figure4_eta_0.1.csv")
        assert restored == build_config("figure4", None, [], str(out))
        assert meta["seed"] == str(restored.seed)

    def test_figure4_is_reproducible(self, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        assert main(["figure4", "--out", str(first)]) == EXIT_OK
        assert main(["figure4", "--out", str(second)]) == EXIT_OK
        for path in sorted(first.glob("*.csv")):
            assert csv_body_text(path) == csv_body_text(second / path.name)

    def test_sql_table(self, tmp_path):
        assert main(["sql_table", "--out", str(tmp_path)]) == EXIT_OK
        table = read_csv_body(tmp_path / "sql_table.csv")
        assert np.allclose(table["snr_unit_shift_over_sql"], math.sqrt(2.0), rtol=1e-9)

        summary = read_csv_body(tmp_path / "sql_summary.csv").set_index("quantity")["value"]
        assert 0.059 <= summary["optimal_eta"] <= 0.060
        assert summary["f_at_optimal_eta"] < 1.0

    def test_snr_point(self, tmp_path):
        code = main(["snr_point", "--set", "geometry.eta_list=0.8,0.1", "--out", str(tmp_path)])
        assert code == EXIT_OK
        summary = read_csv_body(tmp_path / "snr_point_summary.csv")
        assert np.allclose(summary["snr"], summary["snr_closed_form"], rtol=1e-2)
        assert np.allclose(summary["phase_variance"], summary["phase_variance_closed_form"], rtol=1e-2)
        assert np.allclose(summary["phi_sig"], summary["phi_sig_closed_form"], rtol=1e-3)
        assert np.allclose(summary["mean_counts"], summary["mean_counts_closed_form"], rtol=1e-2)
        assert np.allclose(summary["count_variance"], summary["count_variance_closed_form"], rtol=1e-2)
        assert (tmp_path / "snr_point_profile_eta_0.8.csv").exists()

    def test_mc_validate(self, tmp_path):
        code = main(["mc_validate", "--set", "mc.samples=20000", "--set", "mc.cells=16",
                     "--out", str(tmp_path)])
        assert code == EXIT_OK
        runs = read_csv_body(tmp_path / "mc_validate.csv").set_index("run")
        assert runs.loc["with_classical", "relative_shift_variance"] == pytest.approx(
            runs.loc["shot_only", "relative_shift_variance"], rel=1e-9)
        assert len(read_csv_body(tmp_path / "mc_cells.csv")) == 16

    def test_quantum_limit(self, tmp_path):
        assert main(["quantum_limit", "--out", str(tmp_path)]) == EXIT_OK
        table = read_csv_body(tmp_path / "quantum_limit.csv")
        interior = table[table["beta"] > 0]
        assert np.allclose(interior["n_var_opt"], interior["n_var_opt_closed_form"], rtol=1e-6)
        assert np.allclose(interior["delta_omega_min"], interior["delta_omega_min_closed_form"], rtol=1e-6)
        assert len(read_csv_body(tmp_path / "quantum_limit_eit.csv")) == 3

    def test_susceptibility(self, tmp_path):
        code = main(["susceptibility", "--set", "geometry.detuning_steps=512", "--out", str(tmp_path)])
        assert code == EXIT_OK
        summary = read_csv_body(tmp_path / "susceptibility_summary.csv").set_index("quantity")["value"]
        assert summary["chi_ratio"] == pytest.approx(-1e4, rel=1e-6)
        assert len(read_csv_body(tmp_path / "susceptibility.csv")) == 512

    def test_lineshape(self, tmp_path):
        code = main(["lineshape", "--set", "geometry.detuning_steps=1024", "--out", str(tmp_path)])
        assert code == EXIT_OK
        widths = read_csv_body(tmp_path / "lineshape_fwhm.csv")
        assert len(widths) == 13
        strong = widths[widths["omega0_sq_over_critical"] >= 1.0]
        assert np.all(np.diff(strong["fwhm"].to_numpy()) > 0)

        top = widths.iloc[-2:]
        slope = np.diff(np.log(top["fwhm"].to_numpy()))[0] / np.diff(np.log(top["omega0_sq"].to_numpy()))[0]
        assert slope == pytest.approx(1.0, abs=0.05)
