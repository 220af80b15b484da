#!/usr/bin/env python3
"""
magsim - 系统配置文件
统一管理数值计算、日志、蒙特卡洛和输出的默认参数

功能职责：
1. 数值积分与求根参数
2. 日志配置
3. 蒙特卡洛抽样配置
4. 输出文件配置

核心函数的显式参数始终优先于这里的默认值。

Version: 1.0.0
"""

import os
from dataclasses import dataclass, asdict, fields
from typing import Dict, Any

# ================================
# 1. 数值计算配置
# ================================

@dataclass
class NumericsConfig:
    """数值计算配置"""

    # 网格
    z_steps: int = 2048  # 传播方向采样点数
    detuning_steps: int = 4096  # 失谐网格点数

    # 容差
    richardson_tolerance: float = 1e-6  # N 步与 2N 步相对差
    singular_condition: float = 1e12  # 条件数阈值
    root_rtol: float = 1e-9  # 求根相对容差
    golden_tolerance: float = 1e-10  # 黄金分割搜索容差（对数空间）
    fwhm_min_points: int = 4  # 半高宽内最少网格点数

    # 模型有效性判据中 "≫" 的倍数
    validity_margin: float = 10.0

# ================================
# 2. 日志配置
# ================================

@dataclass
class LoggingConfig:
    """日志配置"""

    # 基础配置
    log_level: str = os.getenv("MAGSIM_LOG_LEVEL", "INFO")  # DEBUG, INFO, WARNING, ERROR
    log_format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    # 文件配置
    enable_file_logging: bool = False
    log_file_path: str = "logs/magsim.log"
    max_file_size: int = 10 * 1024 * 1024  # 10MB
    backup_count: int = 5

    # 控制台配置
    enable_console_logging: bool = True
    console_log_level: str = "INFO"

    # structlog 键值对输出
    structured: bool = True

# ================================
# 3. 蒙特卡洛配置
# ================================

@dataclass
class MonteCarloConfig:
    """蒙特卡洛抽样配置"""

    samples: int = 1_000_000
    seed: int = 20240601
    block_size: int = 16384  # 每个子流的样本数
    max_workers: int = 4
    cells: int = 64  # z 方向粗粒化单元数

# ================================
# 4. 输出配置
# ================================

@dataclass
class OutputConfig:
    """输出文件配置"""

    output_dir: str = "results"
    float_format: str = "%.17g"  # 17 位有效数字
    write_schema: bool = True
    write_gnuplot: bool = True

# ================================
# 5. 配置管理器
# ================================

class ConfigManager:
    """配置管理器

    统一管理所有默认配置
    """

    def __init__(self):
        """初始化配置管理器"""
        self.numerics_config = NumericsConfig()
        self.logging_config = LoggingConfig()
        self.mc_config = MonteCarloConfig()
        self.output_config = OutputConfig()

    def _sections(self) -> Dict[str, Any]:
        return {
            "numerics": self.numerics_config,
            "logging": self.logging_config,
            "mc": self.mc_config,
            "output": self.output_config,
        }

    def get_numerics_config(self) -> Dict[str, Any]:
        """获取数值计算配置"""
        return asdict(self.numerics_config)

    def get_logging_config(self) -> Dict[str, Any]:
        """获取日志配置"""
        return asdict(self.logging_config)

    def get_mc_config(self) -> Dict[str, Any]:
        """获取蒙特卡洛配置"""
        return asdict(self.mc_config)

    def get_output_config(self) -> Dict[str, Any]:
        """获取输出配置"""
        return asdict(self.output_config)

    def update_config(self, config_type: str, updates: Dict[str, Any]):
        """更新配置

        Args:
            config_type: 配置分组名（numerics, logging, mc, output）
            updates: 需要更新的字段

        Raises:
            ValueError: 分组或字段不存在
        """
        sections = self._sections()
        if config_type not in sections:
            raise ValueError(f"未知的配置类型: {config_type}")

        target = sections[config_type]
        known = {f.name for f in fields(target)}
        for key, value in updates.items():
            if key not in known:
                raise ValueError(f"未知的配置项: {config_type}.{key}")
            setattr(target, key, value)

    def export_config(self) -> Dict[str, Any]:
        """导出配置"""
        return {name: asdict(section) for name, section in self._sections().items()}

# ================================
# 6. 全局配置实例
# ================================

config_manager = ConfigManager()

# 便捷函数
def get_numerics_config() -> NumericsConfig:
    """获取数值计算配置对象"""
    return config_manager.numerics_config

def get_mc_config() -> MonteCarloConfig:
    """获取蒙特卡洛配置对象"""
    return config_manager.mc_config

def get_output_config() -> OutputConfig:
    """获取输出配置对象"""
    return config_manager.output_config

__all__ = [
    "NumericsConfig",
    "LoggingConfig",
    "MonteCarloConfig",
    "OutputConfig",
    "ConfigManager",
    "config_manager",
    "get_numerics_config",
    "get_mc_config",
    "get_output_config",
]
