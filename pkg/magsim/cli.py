# ============================================================================
# 文件：magsim/cli.py
# 功能：magsim 命令行入口
# 技术：argparse、python-dotenv 读取扁平配置、各运行模式调度
# ============================================================================

"""
magsim 命令行接口

    magsim <mode> --config <file> [--set k=v ...] [--out <dir>]

退出码：0 成功，1 配置错误，2 数值计算失败。
"""

import argparse
import math
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from dotenv import dotenv_values

from .atomic import (
    critical_rabi_sq,
    dispersion_absorption_ratio,
    eit_susceptibility,
    eit_susceptibility_full,
)
from .exceptions import ConfigError, MagSimError, format_error_result
from .models import RunConfig, RunMode
from .output import OutputWriter, version_string
from .propagation import (
    broadened_lineshape,
    cell_length_for_transmission,
    lineshape_detuning_grid,
    lineshape_fwhm,
    propagate,
    propagate_intensity_ode,
    signal_phase,
)
from .sensitivity import (
    RegimeTag,
    count_variance,
    detection,
    eit_quantum_limit_consistency,
    faraday_counts,
    figure4_sweep,
    heisenberg_limit_note,
    min_detectable_shift,
    optimal_eta,
    optimal_rabi_sq,
    optimize_quantum_limit,
    photon_number,
    power_from_omega_sq,
    snr,
    sql_factor_f,
    sql_table,
    stark_phase_variance,
)
from .stark_noise import StarkModel, montecarlo_stark_oracle, noise_budget, phase_variance
from .utils import get_logger, setup_logging

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2

SQL_TABLE_ETAS = (0.01, 0.02, 0.05, 0.06, 0.1, 0.2, 0.4, 0.6, 0.8)
QUANTUM_LIMIT_BETAS = (0.0, 1e-6, 1e-4, 1e-3, 1e-2, 1e-1)
LINESHAPE_POWER_FACTORS = np.logspace(-1, 2, 13)

# ================================
# 1. 配置读取
# ================================

def load_flat_config(path: Optional[str]) -> Dict[str, Optional[str]]:
    """读取扁平 key = value 配置文件"""
    if path is None:
        return {}
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigError(f"配置文件不存在: {path}", key="--config")
    return dict(dotenv_values(config_path))


def parse_overrides(items: Sequence[str]) -> Dict[str, str]:
    """解析 --set key=value 覆盖项"""
    overrides: Dict[str, str] = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"覆盖项格式应为 key=value: {item}", key=item)
        overrides[key.strip()] = value.strip()
    return overrides


def build_config(mode: str, config_path: Optional[str] = None,
                 overrides: Sequence[str] = (), out_dir: Optional[str] = None) -> RunConfig:
    flat = load_flat_config(config_path)
    flat.update(parse_overrides(overrides))
    if out_dir is not None:
        flat["output.dir"] = out_dir
    flat.pop("mode", None)
    return RunConfig.from_flat(flat, mode=mode)

# ================================
# 2. 运行模式实现
# ================================

def _measurement_time(config: RunConfig) -> float:
    return config.detection.gamma0_tm / config.physics.gamma0


def _photons_at(config: RunConfig, omega0_sq: float) -> float:
    params = config.atomic_params
    return photon_number(power_from_omega_sq(params, omega0_sq),
                         config.detection.gamma0_tm, config.detection.lambda_sq_over_A)


def run_figure4(config: RunConfig, writer: OutputWriter):
    """每个 η 一条最小可探测频移曲线，外加 OPM 对比曲线"""
    params = config.atomic_params
    curves, opm = figure4_sweep(
        params,
        config.geometry.eta_list,
        config.detection.power_ratios(),
        config.detection.gamma0_tm,
        config.detection.lambda_sq_over_A,
        alpha=config.physics.alpha,
        opm_stark=config.physics.opm_stark,
    )

    summary = []
    for curve in curves:
        writer.write(f"figure4_eta_{curve.eta:g}.csv", curve.frame,
                     f"η = {curve.eta:g} 的最小可探测 Zeeman 频移随 P/P₀ 的变化（SNR = 1）。")
        best = curve.optimum
        summary.append({
            "eta": curve.eta,
            "f": curve.metadata["sql_factor_f"],
            "omega_opt_sq": curve.metadata["omega_opt_sq"],
            "power_ratio": float(best["power_ratio"]),
            "min_delta0_over_gamma0": float(best["min_delta0_over_gamma0"]),
            "opm_advantage": curve.metadata["opm_advantage"],
        })
    writer.write("figure4_opm.csv", opm.frame,
                 f"光泵磁强计对比曲线（{opm.metadata['model']}），α = {config.physics.alpha:g}。")
    writer.write("figure4_summary.csv", pd.DataFrame(summary), "各曲线的最佳点与 OPM 对比。")


def run_lineshape(config: RunConfig, writer: OutputWriter):
    """ac-Stark 非均匀展宽线型及半高宽随光强的变化"""
    params = config.atomic_params
    geometry = config.geometry
    kwargs = dict(
        absorption_model=geometry.absorption_model,
        eta=geometry.eta_lineshape,
        optical_depth=geometry.optical_depth,
    )

    omega0_sq = config.physics.omega0_sq
    grid = lineshape_detuning_grid(params, omega0_sq, geometry.detuning_steps, **kwargs)
    values = broadened_lineshape(params, omega0_sq, grid, z_steps=geometry.z_steps, **kwargs)
    writer.write("lineshape.csv", pd.DataFrame({
        "detuning": grid,
        "chi_imag_integrated": values,
        "chi_imag_normalized": values / values.max(),
    }), f"|Ω(0)|² = {omega0_sq:g} 的展宽线型（{geometry.absorption_model.value} 吸收剖面）。")

    critical = critical_rabi_sq(params, "stark")
    rows = []
    for factor in LINESHAPE_POWER_FACTORS:
        power = float(factor * critical)
        sweep_grid = lineshape_detuning_grid(params, power, geometry.detuning_steps, **kwargs)
        sweep_values = broadened_lineshape(params, power, sweep_grid, z_steps=geometry.z_steps, **kwargs)
        width, center = lineshape_fwhm(sweep_grid, sweep_values)
        rows.append({
            "omega0_sq": power,
            "omega0_sq_over_critical": float(factor),
            "fwhm": width,
            "center": center,
        })
    writer.write("lineshape_fwhm.csv", pd.DataFrame(rows),
                 "半高宽随入射光强的变化，光强以 Δ₀γ₀ 为单位。")


def run_snr_point(config: RunConfig, writer: OutputWriter):
    """单一光强下的传播、相位噪声与信噪比，数值链路与闭式解并列"""
    params = config.atomic_params
    omega0_sq = config.physics.omega0_sq
    t_m = _measurement_time(config)
    n_in = _photons_at(config, omega0_sq)

    rows = []
    for eta in config.geometry.eta_list:
        L = cell_length_for_transmission(params, omega0_sq, eta)
        solution = propagate(params, omega0_sq, L, steps=config.geometry.z_steps)
        writer.write(f"snr_point_profile_eta_{eta:g}.csv", solution.to_frame(),
                     f"η = {eta:g} 的光强与相位剖面。")

        model = StarkModel.from_photon_number(params.delta_eff, omega0_sq, L, t_m, n_in)
        phase_var = phase_variance(model, params, solution.profile, t_m)
        eta_ode = solution.transmission.eta_ode
        # 探测器取向使 δ₀ > 0 时计数为正
        counts = faraday_counts(eta_ode, n_in, -solution.phi_sig)
        variance = count_variance(eta_ode, n_in, phase_var)
        budget = noise_budget(eta_ode, n_in, phase_var)
        closed = detection(params, omega0_sq, eta, n_in)
        rows.append({
            "eta": eta,
            "omega0_sq": omega0_sq,
            "length": L,
            "n_in": n_in,
            "eta_ode": eta_ode,
            "phi_sig": solution.phi_sig,
            "phi_sig_closed_form": signal_phase(params, omega0_sq, L),
            "phase_variance": phase_var,
            "phase_variance_closed_form": stark_phase_variance(params, omega0_sq, eta, n_in),
            "mean_counts": counts,
            "mean_counts_closed_form": closed.mean_counts,
            "count_variance": variance,
            "count_variance_closed_form": closed.count_variance,
            "snr": counts / math.sqrt(variance),
            "snr_closed_form": snr(params, omega0_sq, eta, n_in),
            "min_delta0": min_detectable_shift(params, omega0_sq, eta, n_in),
            "regime": (RegimeTag.STARK_LIMITED if budget.stark_limited else RegimeTag.SHOT_LIMITED).value,
        })
        logger.debug("单点计算完成", eta=eta, snr=rows[-1]["snr"])
    writer.write("snr_point_summary.csv", pd.DataFrame(rows), "各 η 的信噪比汇总。")


def run_sql_table(config: RunConfig, writer: OutputWriter):
    """标准量子极限表"""
    params = config.atomic_params
    etas = sorted(set(SQL_TABLE_ETAS) | set(config.geometry.eta_list))
    table = sql_table(params, etas, config.detection.lambda_sq_over_A, config.detection.gamma0_tm)
    writer.write("sql_table.csv", table, "各透射率下的 SQL 因子、最佳光强与 δ₀^SQL。")

    eta_star = optimal_eta()
    writer.write("sql_summary.csv", pd.DataFrame([
        {"quantity": "optimal_eta", "value": eta_star},
        {"quantity": "f_at_optimal_eta", "value": sql_factor_f(eta_star)},
        {"quantity": "omega_opt_sq_at_optimal_eta", "value": optimal_rabi_sq(params, eta_star)},
        {"quantity": "max_f_tilde_gap", "value": float(np.max(1 - table["f_tilde"] / table["f"]))},
    ]), "最佳透射率及 f̃ 与 f 的最大相对差。")
    logger.info(heisenberg_limit_note())


def run_mc_validate(config: RunConfig, writer: OutputWriter):
    """蒙特卡洛校验相位方差，并注入共模经典噪声检验其抵消"""
    params = config.atomic_params
    omega0_sq = config.physics.omega0_sq
    eta = config.geometry.eta_list[0]
    t_m = _measurement_time(config)
    n_in = _photons_at(config, omega0_sq)

    L = cell_length_for_transmission(params, omega0_sq, eta)
    profile = propagate_intensity_ode(params, omega0_sq, L, steps=config.geometry.z_steps)
    model = StarkModel.from_photon_number(params.delta_eff, omega0_sq, L, t_m, n_in)

    runs = {}
    for label, ratio in (("shot_only", 0.0), ("with_classical", config.mc.classical_noise_ratio)):
        runs[label] = montecarlo_stark_oracle(
            model, params, profile,
            samples=config.mc.samples,
            seed=config.mc.seed,
            t_m=t_m,
            classical_noise_ratio=ratio,
            cells=config.mc.cells,
        )

    writer.write("mc_validate.csv",
                 pd.DataFrame([{"run": label, **result.to_dict()} for label, result in runs.items()]),
                 "蒙特卡洛相位方差与解析值；两次运行使用同一种子，共模噪声来自独立子流。")
    base = runs["shot_only"]
    writer.write("mc_cells.csv", pd.DataFrame({
        "cell": np.arange(base.cell_relative_variance.size),
        "cell_relative_variance": base.cell_relative_variance,
        "cell_relative_variance_analytic": base.cell_relative_variance_analytic,
    }), "各粗粒化单元的相对频移方差。")


def run_quantum_limit(config: RunConfig, writer: OutputWriter):
    """广义量子极限：数值最优化与闭式解，以及 EIT 模型代入的一致性报告"""
    params = config.atomic_params
    chi_ratio = abs(dispersion_absorption_ratio(params, math.sqrt(config.physics.omega0_sq)))
    rows = [optimize_quantum_limit(chi_ratio, beta).to_dict() for beta in QUANTUM_LIMIT_BETAS]
    writer.write("quantum_limit.csv", pd.DataFrame(rows),
                 "Δω_min 对光子数方差的最优化，数值与闭式解并列。")

    consistency = []
    for eta in config.geometry.eta_list:
        omega_opt = optimal_rabi_sq(params, eta)
        consistency.append(eit_quantum_limit_consistency(params, eta, omega_opt, _photons_at(config, omega_opt)))
    writer.write("quantum_limit_eit.csv", pd.DataFrame(consistency),
                 "EIT 模型参数代入广义量子极限的结果（只做报告）。")


def run_susceptibility(config: RunConfig, writer: OutputWriter):
    """EIT 透明窗口内的色散与吸收"""
    params = config.atomic_params
    omega_drive = math.sqrt(config.physics.omega0_sq)
    window = (config.physics.omega0_sq + params.gamma * params.gamma0) / params.gamma
    span = 4 * window + 4 * params.gamma
    detuning = np.linspace(-span, span, config.geometry.detuning_steps)
    approx = np.array([eit_susceptibility(params, omega_drive, d) for d in detuning])
    full = np.array([eit_susceptibility_full(params, omega_drive, d) for d in detuning])
    writer.write("susceptibility.csv", pd.DataFrame({
        "two_photon_detuning": detuning,
        "chi_real": approx.real,
        "chi_imag": approx.imag,
        "chi_real_full": full.real,
        "chi_imag_full": full.imag,
    }), "探测场极化率：强驱动近似式与完整三能级式。")
    writer.write("susceptibility_summary.csv", pd.DataFrame([
        {"quantity": "chi_ratio", "value": dispersion_absorption_ratio(params, omega_drive)},
        {"quantity": "chi_ratio_full", "value": dispersion_absorption_ratio(params, omega_drive, full=True)},
        {"quantity": "critical_rabi_sq_power", "value": critical_rabi_sq(params, "power")},
        {"quantity": "critical_rabi_sq_stark", "value": critical_rabi_sq(params, "stark")},
    ]), "δ = 0 处的色散 / 吸收比与临界光强。")


MODE_HANDLERS: Dict[RunMode, Callable[[RunConfig, OutputWriter], None]] = {
    RunMode.FIGURE4: run_figure4,
    RunMode.LINESHAPE: run_lineshape,
    RunMode.SNR_POINT: run_snr_point,
    RunMode.SQL_TABLE: run_sql_table,
    RunMode.MC_VALIDATE: run_mc_validate,
    RunMode.QUANTUM_LIMIT: run_quantum_limit,
    RunMode.SUSCEPTIBILITY: run_susceptibility,
}

# ================================
# 3. 调度
# ================================

def _report_error(kind: str, exc: BaseException):
    result = format_error_result(exc)
    logger.error(kind, **result)
    print(f"❌ {kind}: {exc}", file=sys.stderr)


def run(config: RunConfig) -> int:
    """执行一个运行模式并写出结果文件

    Returns:
        int: 退出码 0 / 1 / 2
    """
    handler = MODE_HANDLERS[config.mode]
    logger.info("运行开始", mode=config.mode.value, seed=config.seed, out_dir=config.output.dir)
    try:
        logger.debug("原子参数", **config.atomic_params.to_dict())
        writer = OutputWriter(Path(config.output.dir), config)
        handler(config, writer)
        paths = writer.finalize()
    except ConfigError as e:
        _report_error("配置错误", e)
        return EXIT_CONFIG
    except MagSimError as e:
        _report_error("数值计算失败", e)
        return EXIT_NUMERICAL
    except Exception as e:
        # scipy 求根、numpy 线性代数与文件写出的异常
        _report_error("数值计算失败", e)
        return EXIT_NUMERICAL

    print(f"✅ {config.mode.value} 完成，写出 {len(paths)} 个文件 → {config.output.dir}")
    return EXIT_OK

# ================================
# 4. 命令行接口
# ================================

def create_argument_parser() -> argparse.ArgumentParser:
    """创建命令行参数解析器"""
    parser = argparse.ArgumentParser(
        prog="magsim",
        description="EIT 法拉第磁强计灵敏度模拟",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
使用示例:
  magsim figure4 --config run.env                   # 最小可探测频移随功率的扫描
  magsim sql_table --set physics.delta_eff=1e4      # 标准量子极限表
  magsim mc_validate --set mc.samples=200000        # 蒙特卡洛校验
  magsim lineshape --out results/lineshape          # 非均匀展宽线型

退出码: 0 成功，1 配置错误，2 数值计算失败
        """
    )

    parser.add_argument(
        "mode",
        choices=[mode.value for mode in RunMode],
        help="运行模式"
    )

    parser.add_argument(
        "--config",
        type=str,
        help="扁平 key = value 配置文件"
    )

    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="覆盖配置项，可重复使用"
    )

    parser.add_argument(
        "--out",
        type=str,
        help="输出目录 (覆盖 output.dir)"
    )

    parser.add_argument(
        "--verbose",
        action="store_true",
        help="详细输出模式"
    )

    parser.add_argument(
        "--version",
        action="version",
        version=version_string(),
    )

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """主程序入口"""
    parser = create_argument_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse 的用法错误归为配置错误，退出码 2 留给数值计算失败
        return EXIT_OK if e.code in (0, None) else EXIT_CONFIG
    setup_logging(verbose=args.verbose)

    try:
        config = build_config(args.mode, args.config, args.overrides, args.out)
    except ConfigError as e:
        _report_error("配置错误", e)
        return EXIT_CONFIG

    return run(config)


if __name__ == "__main__":
    sys.exit(main())
