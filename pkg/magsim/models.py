# ============================================================================
# 文件：magsim/models.py
# 功能：运行配置数据模型
# 技术：Pydantic v2 数据模型、扁平键值配置互转
# ============================================================================

"""
magsim 运行配置模型

配置分为五个部分：
1. physics   - 原子参数（以 γ 为单位的无量纲比值）
2. geometry  - 透射率目标、网格尺寸、吸收剖面
3. detection - γ₀t_m、λ²/A、功率网格
4. mc        - 蒙特卡洛样本数与种子
5. output    - 输出目录与附加文件

扁平形式使用带点的键，例如 physics.gamma0 = 1e-4。
"""

from enum import Enum
from typing import Any, Dict, List, Mapping, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .atomic import AtomicParams
from .config import get_mc_config, get_numerics_config, get_output_config
from .exceptions import ConfigError, PreconditionError
from .propagation import AbsorptionModel
from .sensitivity import RegimeTag

# ============================================================================
# 枚举类型定义
# ============================================================================

class RunMode(str, Enum):
    """运行模式枚举"""
    FIGURE4 = "figure4"
    LINESHAPE = "lineshape"
    SNR_POINT = "snr_point"
    SQL_TABLE = "sql_table"
    MC_VALIDATE = "mc_validate"
    QUANTUM_LIMIT = "quantum_limit"
    SUSCEPTIBILITY = "susceptibility"

# ============================================================================
# 基础数据模型
# ============================================================================

class BaseSection(BaseModel):
    """配置分组基类"""

    model_config = ConfigDict(extra="forbid", validate_assignment=True)


def _parse_float_list(value: Any) -> Any:
    if isinstance(value, str):
        items = [item.strip() for item in value.split(",") if item.strip()]
        return [float(item) for item in items]
    return value


def _parse_count(value: Any) -> Any:
    # 允许 1e6 这类科学计数法写法
    if isinstance(value, str):
        number = float(value)
        if not number.is_integer():
            raise ValueError(f"必须为整数: {value}")
        return int(number)
    return value

# ============================================================================
# 配置分组
# ============================================================================

class PhysicsSection(BaseSection):
    """原子参数，除 delta0_over_gamma0 外均以 γ 为单位"""

    gamma_r: float = Field(1.0, description="辐射衰减率 γ_r/γ")
    gamma0: float = Field(1e-4, description="基态退相干率 γ₀/γ")
    gamma0_r: float = Field(0.0, description="基态布居弛豫率 γ₀r/γ")
    delta_big: float = Field(0.0, description="单光子失谐 Δ/γ")
    delta0_over_gamma0: float = Field(1e-2, description="Zeeman 频移 δ₀/γ₀")
    delta_eff: float = Field(1e3, description="有效 ac-Stark 失谐 Δ₀/γ")
    alpha: float = Field(1.0, description="OPM 功率展宽系数")
    omega0_sq: float = Field(10.0, description="单点模式的入射光强 |Ω(0)|²/γ²")
    opm_stark: bool = Field(False, description="OPM 模型是否计入 ac-Stark 展宽")

    @field_validator("gamma_r", "gamma0", "delta_eff", "alpha", "omega0_sq")
    @classmethod
    def validate_positive(cls, v, info):
        """验证正值参数"""
        if not v > 0:
            raise ValueError(f"{info.field_name} 必须为正")
        return v

    @field_validator("gamma0_r")
    @classmethod
    def validate_gamma0_r(cls, v):
        if v < 0:
            raise ValueError("gamma0_r 不能为负")
        return v

    def to_atomic_params(self) -> AtomicParams:
        return AtomicParams(
            gamma=1.0,
            gamma_r=self.gamma_r,
            gamma0=self.gamma0,
            gamma0_r=self.gamma0_r,
            delta_big=self.delta_big,
            delta0=self.delta0_over_gamma0 * self.gamma0,
            delta_eff=self.delta_eff,
        )


class GeometrySection(BaseSection):
    """透射率目标与网格"""

    eta_list: List[float] = Field(default_factory=lambda: [0.8, 0.1, 0.01], description="透射率列表")
    z_steps: int = Field(default_factory=lambda: get_numerics_config().z_steps, description="z 方向 RK4 步数")
    detuning_steps: int = Field(default_factory=lambda: get_numerics_config().detuning_steps,
                                description="失谐网格点数")
    absorption_model: AbsorptionModel = Field(AbsorptionModel.LINEAR, description="线型计算的吸收剖面")
    optical_depth: float = Field(2.0, description="指数吸收模型的光学厚度")
    eta_lineshape: float = Field(0.5, description="线型计算的透射率")

    @field_validator("eta_list", mode="before")
    @classmethod
    def parse_eta_list(cls, v):
        return _parse_float_list(v)

    @field_validator("eta_list")
    @classmethod
    def validate_eta_list(cls, v):
        """验证透射率列表"""
        if not v:
            raise ValueError("透射率列表不能为空")
        for eta in v:
            if not 0 < eta < 1:
                raise ValueError(f"透射率必须在 (0, 1) 内: {eta}")
        return v

    @field_validator("z_steps", "detuning_steps", mode="before")
    @classmethod
    def parse_steps(cls, v):
        return _parse_count(v)

    @field_validator("z_steps", "detuning_steps")
    @classmethod
    def validate_steps(cls, v, info):
        if v < 4:
            raise ValueError(f"{info.field_name} 至少为 4")
        return v

    @field_validator("optical_depth")
    @classmethod
    def validate_optical_depth(cls, v):
        if not v > 0:
            raise ValueError("光学厚度必须为正")
        return v

    @field_validator("eta_lineshape")
    @classmethod
    def validate_eta_lineshape(cls, v):
        if not 0 < v < 1:
            raise ValueError("透射率必须在 (0, 1) 内")
        return v


class DetectionSection(BaseSection):
    """探测参数"""

    gamma0_tm: float = Field(1e3, description="测量时间 γ₀t_m")
    lambda_sq_over_A: float = Field(1e-8, description="λ²/A")
    power_grid: str = Field("1e-2:1e8:201", description="对数等距 P/P₀ 网格 min:max:count")

    @field_validator("gamma0_tm", "lambda_sq_over_A")
    @classmethod
    def validate_positive(cls, v, info):
        if not v > 0:
            raise ValueError(f"{info.field_name} 必须为正")
        return v

    @field_validator("power_grid")
    @classmethod
    def validate_power_grid(cls, v):
        """验证功率网格格式"""
        parse_power_grid(v)
        return v

    def power_ratios(self) -> np.ndarray:
        return parse_power_grid(self.power_grid)


class MonteCarloSection(BaseSection):
    """蒙特卡洛参数"""

    samples: int = Field(default_factory=lambda: get_mc_config().samples, description="样本数")
    seed: int = Field(default_factory=lambda: get_mc_config().seed, description="随机种子")
    classical_noise_ratio: float = Field(10.0, description="共模经典噪声与散粒噪声的幅度比")
    cells: int = Field(default_factory=lambda: get_mc_config().cells, description="粗粒化单元数")

    @field_validator("samples", "seed", "cells", mode="before")
    @classmethod
    def parse_counts(cls, v):
        return _parse_count(v)

    @field_validator("samples")
    @classmethod
    def validate_samples(cls, v):
        if v < 2:
            raise ValueError("样本数至少为 2")
        return v

    @field_validator("seed")
    @classmethod
    def validate_seed(cls, v):
        if v < 0:
            raise ValueError("随机种子不能为负")
        return v

    @field_validator("cells")
    @classmethod
    def validate_cells(cls, v):
        if v < 1:
            raise ValueError("单元数至少为 1")
        return v

    @field_validator("classical_noise_ratio")
    @classmethod
    def validate_noise_ratio(cls, v):
        if v < 0:
            raise ValueError("经典噪声幅度比不能为负")
        return v


class OutputSection(BaseSection):
    """输出选项"""

    dir: str = Field(default_factory=lambda: get_output_config().output_dir, description="输出目录")
    gnuplot: bool = Field(default_factory=lambda: get_output_config().write_gnuplot,
                          description="生成 gnuplot 脚本")
    schema_doc: bool = Field(default_factory=lambda: get_output_config().write_schema,
                             alias="schema", description="生成 SCHEMA.md")

    model_config = ConfigDict(extra="forbid", validate_assignment=True, populate_by_name=True)

    @field_validator("dir")
    @classmethod
    def validate_dir(cls, v):
        if not v.strip():
            raise ValueError("输出目录不能为空")
        return v

# ============================================================================
# 运行配置
# ============================================================================

def parse_power_grid(text: str) -> np.ndarray:
    """解析 min:max:count 形式的对数等距功率网格"""
    parts = [part.strip() for part in str(text).split(":")]
    if len(parts) != 3 or not all(parts):
        raise ValueError("功率网格格式应为 min:max:count")
    low, high = float(parts[0]), float(parts[1])
    count = float(parts[2])
    if not count.is_integer() or count < 1:
        raise ValueError("功率网格点数必须为正整数")
    if not (low > 0 and high > 0):
        raise ValueError("功率网格端点必须为正")
    if high < low or (count > 1 and high == low):
        raise ValueError("功率网格上限必须大于下限")
    return np.logspace(np.log10(low), np.log10(high), int(count))


SECTIONS = ("physics", "geometry", "detection", "mc", "output")


class RunConfig(BaseModel):
    """完整的运行配置"""

    model_config = ConfigDict(extra="forbid", validate_assignment=True)

    mode: RunMode = Field(RunMode.FIGURE4, description="运行模式")
    physics: PhysicsSection = Field(default_factory=PhysicsSection)
    geometry: GeometrySection = Field(default_factory=GeometrySection)
    detection: DetectionSection = Field(default_factory=DetectionSection)
    mc: MonteCarloSection = Field(default_factory=MonteCarloSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @property
    def atomic_params(self) -> AtomicParams:
        """物理参数组装为 AtomicParams；越界参数按配置错误报告"""
        try:
            return self.physics.to_atomic_params()
        except PreconditionError as e:
            raise ConfigError(e.message, key="physics") from e

    @property
    def seed(self) -> int:
        return self.mc.seed

    @classmethod
    def from_flat(cls, mapping: Mapping[str, Optional[str]], mode: Optional[str] = None) -> "RunConfig":
        """由带点的扁平键构造配置

        Raises:
            ConfigError: 未知键、缺失值或校验失败，key 指向出错的配置项
        """
        nested: Dict[str, Any] = {}
        for key, value in mapping.items():
            if value is None:
                raise ConfigError("缺少配置值", key=key)
            if key == "mode":
                nested["mode"] = value
                continue
            section, _, name = key.partition(".")
            if section not in SECTIONS or not name:
                raise ConfigError("未知配置项", key=key)
            section_model = cls.model_fields[section].annotation
            fields = {n: f.alias or n for n, f in section_model.model_fields.items()}
            if name not in fields.values():
                raise ConfigError("未知配置项", key=key)
            nested.setdefault(section, {})[name] = value
        if mode is not None:
            nested["mode"] = mode

        try:
            return cls.model_validate(nested)
        except ValidationError as e:
            error = e.errors()[0]
            location = ".".join(str(part) for part in error["loc"])
            raise ConfigError(error["msg"], key=location) from e

    def to_flat(self) -> Dict[str, str]:
        """导出带点的扁平键，from_flat(to_flat()) 与原配置相等"""
        flat = {"mode": self.mode.value}
        for section in SECTIONS:
            model = getattr(self, section)
            for name, info in type(model).model_fields.items():
                flat[f"{section}.{info.alias or name}"] = _format_value(getattr(model, name))
        return flat


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ",".join(_format_value(item) for item in value)
    return str(value)


__all__ = [
    "RunMode",
    "RegimeTag",
    "AbsorptionModel",
    "PhysicsSection",
    "GeometrySection",
    "DetectionSection",
    "MonteCarloSection",
    "OutputSection",
    "RunConfig",
    "parse_power_grid",
    "SECTIONS",
]
