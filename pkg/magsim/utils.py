# ============================================================================
# 文件：magsim/utils.py
# 功能：日志初始化、模型有效性告警和通用数值工具
# 技术：logging + structlog、numpy 定步长 RK4、黄金分割搜索
# ============================================================================

"""
magsim 工具函数模块
- 配置标准库日志与 structlog 结构化日志
- 模型有效性告警（warnings + 日志）
- 定步长 RK4 积分器和黄金分割搜索
- 版本 / git describe 信息
"""

import math
import logging
import subprocess
import warnings
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Any, Callable, Optional, Tuple

import numpy as np
import structlog

from .config import LoggingConfig, config_manager
from .exceptions import ModelValidityWarning

# ================================
# 1. 日志配置
# ================================

def _configure_structlog(structured: bool = True):
    """structlog 统一走标准库 logging，由根日志器的处理器负责输出"""
    renderer = (
        structlog.processors.KeyValueRenderer(key_order=["event"], drop_missing=True)
        if structured
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.processors.format_exc_info,
            renderer,
        ],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=False,
    )


_configure_structlog()


def get_logger(name: str):
    """获取结构化日志器"""
    return structlog.get_logger(name)


def setup_logging(logging_config: Optional[LoggingConfig] = None, verbose: bool = False) -> logging.Logger:
    """配置系统日志

    Args:
        logging_config: 日志配置，缺省使用全局配置
        verbose: 详细模式，日志级别降为 DEBUG

    Returns:
        logging.Logger: 命令行使用的日志器
    """
    logging_config = logging_config or config_manager.logging_config
    formatter = logging.Formatter(logging_config.log_format)

    root_logger = logging.getLogger()
    level = "DEBUG" if verbose else logging_config.log_level
    root_logger.setLevel(getattr(logging, level.upper(), logging.INFO))
    root_logger.handlers.clear()

    # 文件日志处理器
    if logging_config.enable_file_logging:
        log_path = Path(logging_config.log_file_path)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = RotatingFileHandler(
            log_path,
            maxBytes=logging_config.max_file_size,
            backupCount=logging_config.backup_count,
            encoding="utf-8",
        )
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)

    # 控制台日志处理器（stderr，不污染数据输出）
    if logging_config.enable_console_logging:
        console_handler = logging.StreamHandler()
        console_level = "DEBUG" if verbose else logging_config.console_log_level
        console_handler.setLevel(getattr(logging, console_level.upper(), logging.INFO))
        console_handler.setFormatter(formatter)
        root_logger.addHandler(console_handler)

    _configure_structlog(logging_config.structured)
    return logging.getLogger("magsim")


logger = get_logger(__name__)

# ================================
# 2. 模型有效性告警
# ================================

def warn_validity(message: str, **context: Any):
    """发出模型有效性告警，同时记录日志"""
    warnings.warn(message, ModelValidityWarning, stacklevel=3)
    logger.warning(message, **context)

# ================================
# 3. 数值工具
# ================================

INV_PHI = (math.sqrt(5) - 1) / 2  # 1 / phi
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2  # 1 / phi^2


def rk4_integrate(fun: Callable[[float, np.ndarray], np.ndarray], y0: np.ndarray,
                  t_end: float, steps: int) -> Tuple[np.ndarray, np.ndarray]:
    """定步长经典 RK4 积分

    Args:
        fun: 右端函数 f(t, y)
        y0: 初值
        t_end: 积分终点（起点为 0）
        steps: 步数

    Returns:
        Tuple: (网格 t, 解数组 y[t, :])
    """
    t = np.linspace(0.0, t_end, steps + 1)
    dt = t[1] - t[0]
    y = np.zeros((steps + 1, len(y0)))
    y[0, :] = y0
    for i in range(steps):
        k1 = fun(t[i], y[i, :])
        k2 = fun(t[i] + dt / 2, y[i, :] + 0.5 * dt * k1)
        k3 = fun(t[i] + dt / 2, y[i, :] + 0.5 * dt * k2)
        k4 = fun(t[i] + dt, y[i, :] + dt * k3)
        y[i + 1, :] = y[i, :] + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return t, y


def golden_section_minimize(f: Callable[[float], float], a: float, b: float,
                            tol: float = 1e-10) -> Tuple[float, float]:
    """黄金分割搜索

    f 在 [a, b] 内只有一个局部极小值，迭代次数由容差直接算出。

    Returns:
        Tuple: (极小点, 极小值)
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, f(x)

    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))

    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)

    for _ in range(n - 1):
        if yc < yd:
            b = d
            d = c
            yd = yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
        else:
            a = c
            c = d
            yc = yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)

    if yc < yd:
        return c, yc
    return d, yd

# ================================
# 4. 版本信息
# ================================

def git_describe() -> str:
    """返回 git describe 字符串，不在仓库中时返回 unknown"""
    try:
        result = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            text=True,
            timeout=5,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    described = result.stdout.strip()
    return described if result.returncode == 0 and described else "unknown"


__all__ = [
    "get_logger",
    "setup_logging",
    "warn_validity",
    "rk4_integrate",
    "golden_section_minimize",
    "git_describe",
]
