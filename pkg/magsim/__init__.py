# ============================================================================
# 文件：magsim/__init__.py
# 功能：EIT 法拉第磁强计模拟包
# ============================================================================

"""
magsim - 基于电磁感应透明（EIT）的法拉第磁强计模拟

功能模块：
1. atomic       - 三能级 Λ 系统稳态、EIT 极化率
2. propagation  - 光强与相位传播、透射系数、展宽线型
3. stark_noise  - ac-Stark 频移噪声与蒙特卡洛校验
4. sensitivity  - 信噪比、最佳工作点、标准量子极限、OPM 对比
5. cli          - 命令行实验与结果输出

单位约定：速率以 γ 为单位，长度以 1/κ 为单位。
"""

__version__ = "0.1.0"

from .atomic import (
    AtomicParams,
    ComplexCoherences,
    eit_susceptibility,
    solve_bloch_exact,
    solve_bloch_perturbative,
)
from .exceptions import ConfigError, MagSimError, ModelValidityWarning
from .models import RunConfig, RunMode
from .propagation import (
    IntensityProfile,
    PropagationSolution,
    propagate,
    propagate_intensity_ode,
    transmission,
)
from .sensitivity import (
    figure4_sweep,
    optimal_rabi_sq,
    snr,
    sql_factor_f,
    sql_min_shift,
)
from .stark_noise import StarkModel, montecarlo_stark_oracle, phase_variance

__all__ = [
    "__version__",
    "AtomicParams",
    "ComplexCoherences",
    "eit_susceptibility",
    "solve_bloch_exact",
    "solve_bloch_perturbative",
    "ConfigError",
    "MagSimError",
    "ModelValidityWarning",
    "RunConfig",
    "RunMode",
    "IntensityProfile",
    "PropagationSolution",
    "propagate",
    "propagate_intensity_ode",
    "transmission",
    "figure4_sweep",
    "optimal_rabi_sq",
    "snr",
    "sql_factor_f",
    "sql_min_shift",
    "StarkModel",
    "montecarlo_stark_oracle",
    "phase_variance",
]
