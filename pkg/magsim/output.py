# ============================================================================
# 文件：magsim/output.py
# 功能：结果文件输出（CSV 元数据头、SCHEMA.md、gnuplot 脚本）
# 技术：pandas CSV 读写、pathlib
# ============================================================================

"""
结果输出模块

每个 CSV 文件以 # 开头的元数据行起始：
    # magsim <版本> (<git describe>)
    # seed = <种子>
    # generated = <ISO 时间戳>
    # config.<键> = <值>
随后是 pandas 写出的数据体（浮点数 17 位有效数字）。
"""

from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import pandas as pd

from . import __version__
from .config import get_output_config
from .models import RunConfig
from .utils import get_logger, git_describe

logger = get_logger(__name__)

# 列说明，SCHEMA.md 使用
COLUMN_DESCRIPTIONS: Dict[str, str] = {
    "eta": "透射系数 η",
    "power_ratio": "入射功率 P/P₀",
    "log10_power_ratio": "log10(P/P₀)",
    "omega0_sq": "入射光强 |Ω(0)|²/γ²",
    "omega_sq": "光强 |Ω|²/γ²",
    "omega_plus_sq": "σ+ 分量光强 |Ω₊|²/γ²",
    "omega_minus_sq": "σ− 分量光强 |Ω₋|²/γ²",
    "n_in": "入射光子数 ⟨n_x⟩_in",
    "min_delta0": "最小可探测 Zeeman 频移 δ₀/γ（SNR = 1）",
    "min_delta0_over_gamma0": "最小可探测 Zeeman 频移 δ₀/γ₀",
    "log10_min_delta0_over_gamma0": "log10(δ₀/γ₀)",
    "effective_width": "OPM 有效线宽 Γ_eff/γ",
    "regime": "噪声区间标签",
    "linear_valid": "线性吸收解是否适用",
    "z": "传播距离 κz",
    "phi_plus": "σ+ 分量相位 φ₊",
    "phi_minus": "σ− 分量相位 φ₋",
    "phi_relative": "相对相位 φ₊ − φ₋",
    "detuning": "失谐 Δ/γ",
    "chi_imag_integrated": "沿气室积分的 χ″ 线型（任意单位）",
    "chi_imag_normalized": "归一化 χ″ 线型",
    "fwhm": "半高宽 /γ",
    "center": "线心位置 /γ",
    "f": "SQL 因子 f(η)",
    "f_tilde": "相位压缩输入的 SQL 因子 f̃(η)",
    "omega_opt_sq_over_delta_gamma0": "最佳光强 |Ω(0)|²_opt/(Δ₀γ₀)，闭式解",
    "omega_opt_sq_numeric_over_delta_gamma0": "最佳光强 |Ω(0)|²_opt/(Δ₀γ₀)，数值最大化",
    "sql_over_gamma0": "标准量子极限 δ₀^SQL/γ₀",
    "sql_squeezed_over_gamma0": "相位压缩输入的 δ₀^SQL/γ₀",
    "snr_unit_shift_over_sql": "最佳光强处 SNR = 1 的频移与 δ₀^SQL 之比（√2）",
    "omega0_sq_over_critical": "|Ω(0)|²/(Δ₀γ₀)",
    "opm_advantage": "OPM 最佳值与 EIT 最佳值之比",
    "length": "气室长度 κL",
    "eta_ode": "RK4 透射系数",
    "phi_sig": "信号相位（相位方程求积）",
    "phi_sig_closed_form": "信号相位闭式解 −(δ₀/γ₀)ln(1/η)",
    "phase_variance": "ac-Stark 相位方差（剖面求积）",
    "phase_variance_closed_form": "ac-Stark 相位方差（线性吸收闭式解）",
    "mean_counts": "平均计数",
    "mean_counts_closed_form": "平均计数闭式解（线性吸收剖面）",
    "count_variance": "计数方差",
    "count_variance_closed_form": "计数方差闭式解（线性吸收剖面）",
    "snr": "信噪比（数值链路）",
    "snr_closed_form": "信噪比闭式解",
    "run": "蒙特卡洛运行标签",
    "cell": "粗粒化单元序号",
    "cell_relative_variance": "单元相对频移方差（抽样）",
    "cell_relative_variance_analytic": "单元相对频移方差（解析）",
    "omega_opt_sq": "最佳光强 |Ω(0)|²_opt/γ²",
    "generic_limit": "广义量子极限 √(2β)/chi_ratio",
    "eit_min_shift_at_optimum": "最佳光强处 SNR = 1 的频移",
    "ratio": "两者之比",
    "two_photon_detuning": "双光子失谐 δ/γ",
    "chi_real": "χ′（近似式）",
    "chi_imag": "χ″（近似式）",
    "chi_real_full": "χ′（完整三能级式）",
    "chi_imag_full": "χ″（完整三能级式）",
    "chi_ratio": "色散 / 吸收比 (1/χ″)dχ′/dω",
    "beta": "光强-相位耦合系数 β",
    "n_var_opt": "最佳光子数方差（数值）",
    "n_var_opt_closed_form": "最佳光子数方差 1/β",
    "delta_omega_min": "最小可探测频移（数值）",
    "delta_omega_min_closed_form": "最小可探测频移 √(2β)/chi_ratio",
    "quantity": "量",
    "value": "值",
}

# ================================
# 1. CSV 元数据头
# ================================

def version_string() -> str:
    return f"magsim {__version__} ({git_describe()})"


def header_lines(config: RunConfig, generated: Optional[datetime] = None) -> List[str]:
    generated = generated or datetime.now()
    lines = [
        f"# {version_string()}",
        f"# seed = {config.seed}",
        f"# generated = {generated.isoformat(timespec='seconds')}",
    ]
    lines.extend(f"# config.{key} = {value}" for key, value in config.to_flat().items())
    return lines


def write_csv(path: Union[str, Path], frame: pd.DataFrame, config: RunConfig,
              float_format: Optional[str] = None) -> Path:
    """写出带元数据头的 CSV 文件"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    float_format = float_format or get_output_config().float_format
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write("\n".join(header_lines(config)) + "\n")
        frame.to_csv(f, index=False, float_format=float_format, lineterminator="\n")
    logger.debug("写出 CSV 文件", path=str(path), rows=len(frame))
    return path


def read_csv_header(path: Union[str, Path]) -> Tuple[RunConfig, Dict[str, str]]:
    """解析 CSV 元数据头

    Returns:
        Tuple: (还原的 RunConfig, 其余元数据 version/seed/generated)
    """
    flat: Dict[str, str] = {}
    meta: Dict[str, str] = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.startswith("#"):
                break
            text = line[1:].strip()
            key, sep, value = text.partition(" = ")
            if not sep:
                meta["version"] = text
            elif key.startswith("config."):
                flat[key[len("config."):]] = value
            else:
                meta[key] = value
    return RunConfig.from_flat(flat), meta


def read_csv_body(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def csv_body_text(path: Union[str, Path]) -> str:
    """数据体文本（去掉元数据头），用于比较两次运行的结果"""
    with open(path, encoding="utf-8") as f:
        return "".join(line for line in f if not line.startswith("#"))

# ================================
# 2. 结果目录
# ================================

@dataclass
class WrittenFile:
    name: str
    description: str
    columns: List[str]


@dataclass
class OutputWriter:
    """收集一次运行写出的文件，结束时生成 SCHEMA.md 与 plot.gp"""

    out_dir: Path
    config: RunConfig
    files: List[WrittenFile] = field(default_factory=list)

    def __post_init__(self):
        self.out_dir = Path(self.out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, frame: pd.DataFrame, description: str) -> Path:
        path = write_csv(self.out_dir / name, frame, self.config)
        self.files.append(WrittenFile(name, description, list(frame.columns)))
        return path

    def finalize(self) -> List[Path]:
        """写出附加文件，返回全部文件路径"""
        extra: List[Path] = []
        if self.config.output.schema_doc:
            extra.append(self._write_schema())
        if self.config.output.gnuplot:
            script = gnuplot_script(self.config.mode.value, self.files)
            if script:
                path = self.out_dir / "plot.gp"
                path.write_text(script, encoding="utf-8")
                extra.append(path)
        paths = [self.out_dir / f.name for f in self.files] + extra
        logger.info("结果文件写出完成", out_dir=str(self.out_dir), files=len(paths))
        return paths

    def _write_schema(self) -> Path:
        lines = [
            f"# 输出文件说明（{self.config.mode.value}）",
            "",
            f"由 {version_string()} 生成。所有 CSV 以 `#` 元数据行开头，数据体为逗号分隔，"
            "浮点数保留 17 位有效数字。",
            "",
        ]
        for written in self.files:
            lines.append(f"## {written.name}")
            lines.append("")
            lines.append(written.description)
            lines.append("")
            lines.append("| 列 | 说明 |")
            lines.append("| --- | --- |")
            for column in written.columns:
                lines.append(f"| {column} | {COLUMN_DESCRIPTIONS.get(column, '')} |")
            lines.append("")
        path = self.out_dir / "SCHEMA.md"
        path.write_text("\n".join(lines), encoding="utf-8")
        return path

# ================================
# 3. gnuplot 脚本
# ================================

def gnuplot_script(mode: str, files: List[WrittenFile]) -> str:
    """生成 gnuplot 脚本；没有可绘制的文件时返回空字符串"""
    header = [
        "# gnuplot 脚本，由 magsim 生成",
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set key autotitle columnhead",
    ]
    if mode == "figure4":
        curves = [f for f in files if "min_delta0_over_gamma0" in f.columns]
        if not curves:
            return ""
        plots = []
        for written in curves:
            x = written.columns.index("power_ratio") + 1
            y = written.columns.index("min_delta0_over_gamma0") + 1
            plots.append(f"'{written.name}' using {x}:{y} with lines title '{Path(written.name).stem}'")
        body = [
            "set logscale xy",
            "set xlabel 'P/P_0'",
            "set ylabel 'delta_0 / gamma_0 (SNR = 1)'",
            "plot " + ", \\\n     ".join(plots),
        ]
        return "\n".join(header + body) + "\n"

    plots = []
    for written in files:
        if len(written.columns) < 2 or written.columns[0] in ("quantity", "eta"):
            continue
        plots.append(f"'{written.name}' using 1:2 with lines title '{Path(written.name).stem}'")
    if not plots:
        return ""
    return "\n".join(header + ["plot " + ", \\\n     ".join(plots)]) + "\n"


__all__ = [
    "COLUMN_DESCRIPTIONS",
    "version_string",
    "header_lines",
    "write_csv",
    "read_csv_header",
    "read_csv_body",
    "csv_body_text",
    "OutputWriter",
    "gnuplot_script",
]
