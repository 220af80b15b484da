#!/usr/bin/env python3
"""
magsim - 异常定义
所有数值计算和配置错误的统一异常层次

错误分类：
1. MagSimError 及其子类 - 数值/模型错误（命令行退出码 2）
2. ConfigError - 配置错误（命令行退出码 1）

Version: 1.0.0
"""

from typing import Any, Dict, Optional

# ================================
# 1. 数值与模型错误
# ================================

class MagSimError(Exception):
    """数值计算错误基类

    context 中保存出错时的关键参数，附加在错误信息后面，
    便于命令行直接打印诊断信息。
    """

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context: Dict[str, Any] = context

    def __str__(self) -> str:
        if not self.context:
            return self.message
        details = ", ".join(f"{key}={value!r}" for key, value in self.context.items())
        return f"{self.message} ({details})"


class SingularSystem(MagSimError):
    """稳态线性方程组奇异（条件数超过阈值）"""


class StepTooCoarse(MagSimError):
    """RK4 步长过大：N 步与 2N 步结果之差超过容差"""


class IntensityUnderflow(MagSimError):
    """光强在传播中降到零以下（吸收长度超过介质允许范围）"""


class GridTooCoarse(MagSimError):
    """失谐网格过粗，共振宽度不足 4 个网格间距"""


class ProfileNonPositive(MagSimError):
    """光强剖面中存在非正的采样点"""


class DegenerateEta(MagSimError):
    """透射系数取退化值 0 或 1"""


class PreconditionError(MagSimError, ValueError):
    """输入参数不满足前置条件"""


class ZeroFieldError(MagSimError, ZeroDivisionError):
    """总 Rabi 频率为零，微扰解无定义"""


class ModelValidityWarning(UserWarning):
    """参数超出模型有效范围（例如 γ₀ 不远小于 γ）"""


# ================================
# 2. 配置错误
# ================================

class ConfigError(Exception):
    """配置错误，key 为出错的点分配置键（例如 detection.power_grid）"""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.key = key

    def __str__(self) -> str:
        if self.key:
            return f"{self.key}: {self.message}"
        return self.message


# ================================
# 3. 错误格式化
# ================================

def format_error_result(exc: BaseException) -> Dict[str, Any]:
    """格式化错误结果

    Args:
        exc: 捕获到的异常

    Returns:
        Dict: 包含错误类型、信息和上下文的字典
    """
    result: Dict[str, Any] = {
        "status": "error",
        "error_type": type(exc).__name__,
        "error_message": getattr(exc, "message", str(exc)),
    }
    if isinstance(exc, MagSimError) and exc.context:
        result["context"] = dict(exc.context)
    if isinstance(exc, ConfigError) and exc.key:
        result["key"] = exc.key
    return result


__all__ = [
    "MagSimError",
    "SingularSystem",
    "StepTooCoarse",
    "IntensityUnderflow",
    "GridTooCoarse",
    "ProfileNonPositive",
    "DegenerateEta",
    "PreconditionError",
    "ZeroFieldError",
    "ModelValidityWarning",
    "ConfigError",
    "format_error_result",
]
