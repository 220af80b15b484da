# ============================================================================
# 文件：magsim/sensitivity.py
# 功能：探测统计、信噪比、最佳工作点与标准量子极限
# 技术：numpy 向量化扫描、scipy brentq 求根、黄金分割搜索、pandas 曲线输出
# ============================================================================

"""
灵敏度分析模块
- 平衡探测计数与计数方差（散粒噪声 + ac-Stark 相位噪声）
- 信噪比闭式解、最佳光强、标准量子极限 δ₀^SQL
- 相位压缩输入的修正因子 f̃
- 广义量子极限计算（相位 / 光子数不确定关系）
- 光泵磁强计（OPM）示意性对比模型与 P/P₀ 扫描

功率归一化：P₀ = ℏν₀·8πAγ₀/λ²，对应
    n_in = (P/P₀)·8π·(A/λ²)·γ₀t_m,   |Ω(0)|² = 3γ_rγ₀·(P/P₀)
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from .atomic import AtomicParams
from .config import get_numerics_config
from .exceptions import DegenerateEta, PreconditionError
from .stark_noise import noise_budget
from .utils import get_logger, golden_section_minimize

logger = get_logger(__name__)

OPM_MODEL_LABEL = "schematic comparison"

# ================================
# 1. 数据结构定义
# ================================

class RegimeTag(str, Enum):
    """噪声区间标签"""
    SHOT_LIMITED = "shot_limited"
    STARK_LIMITED = "stark_limited"
    OPTIMUM = "optimum"
    BROADENING_LIMITED = "broadening_limited"  # OPM 功率展宽平台


@dataclass(frozen=True)
class DetectionResult:
    """平衡探测的计数统计"""

    mean_counts: float
    count_variance: float
    shot_noise: float

    def __post_init__(self):
        if self.count_variance < self.shot_noise * (1 - 1e-12):
            raise PreconditionError("计数方差低于真空噪声水平",
                                    count_variance=self.count_variance, shot_noise=self.shot_noise)

    @property
    def snr(self) -> float:
        if self.count_variance == 0:
            return 0.0
        return self.mean_counts / math.sqrt(self.count_variance)

    def to_dict(self) -> Dict[str, float]:
        return {
            "mean_counts": self.mean_counts,
            "count_variance": self.count_variance,
            "shot_noise": self.shot_noise,
            "snr": self.snr,
        }


@dataclass(frozen=True)
class SensitivityPoint:
    power_ratio: float
    min_delta0: float
    regime_tag: RegimeTag


@dataclass
class SensitivityCurve:
    """一条 δ_min(P/P₀) 曲线"""

    label: str
    eta: Optional[float]
    frame: pd.DataFrame = field(repr=False)
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def points(self) -> List[SensitivityPoint]:
        return [
            SensitivityPoint(float(p), float(d), RegimeTag(tag))
            for p, d, tag in zip(self.frame["power_ratio"], self.frame["min_delta0"], self.frame["regime"])
        ]

    @property
    def optimum(self) -> pd.Series:
        return self.frame.loc[self.frame["min_delta0"].idxmin()]


@dataclass(frozen=True)
class QuantumLimitResult:
    """广义量子极限的最优化结果"""

    chi_ratio: float
    beta: float
    n_var_opt: float
    delta_omega_min: float
    n_var_opt_closed_form: float
    delta_omega_min_closed_form: float
    regime: str

    def to_dict(self) -> Dict[str, Any]:
        return {
            "chi_ratio": self.chi_ratio,
            "beta": self.beta,
            "n_var_opt": self.n_var_opt,
            "delta_omega_min": self.delta_omega_min,
            "n_var_opt_closed_form": self.n_var_opt_closed_form,
            "delta_omega_min_closed_form": self.delta_omega_min_closed_form,
            "regime": self.regime,
        }

# ================================
# 2. 计数统计
# ================================

def _check_eta(eta: float, allow_one: bool = False):
    upper_ok = eta <= 1 if allow_one else eta < 1
    if not (eta > 0 and upper_ok):
        raise DegenerateEta("透射率必须在 (0, 1) 内", eta=eta)


def _log_inverse(eta: float) -> float:
    return math.log(1.0 / eta)


def faraday_counts(eta: float, n_in: float, phi_sig: float, small_angle: bool = False) -> float:
    """平衡探测器的平均计数 η·n_in·sin φ_sig"""
    if not 0 < eta <= 1:
        raise PreconditionError("透射率必须在 (0, 1] 内", eta=eta)
    if n_in < 0:
        raise PreconditionError("入射光子数不能为负", n_in=n_in)
    angle = phi_sig if small_angle else math.sin(phi_sig)
    return eta * n_in * angle


def count_variance(eta: float, n_in: float, phase_var: float) -> float:
    """计数方差 η·n_in + η²·n_in²·⟨δφ²⟩"""
    if phase_var < 0:
        raise PreconditionError("相位方差不能为负", phase_var=phase_var)
    return noise_budget(eta, n_in, phase_var).total


def stark_bracket(params: AtomicParams, omega0_sq: float, eta: float, squeezed: bool = False) -> float:
    """噪声因子 1 + (|Ω(0)|⁴/Δ₀²γ₀²)·η(1−η)·g(η)

    g = ln(1/η)；相位压缩输入时 g = ln(1/η) + η − 1。
    """
    _check_eta(eta, allow_one=True)
    log_inv = _log_inverse(eta)
    geometry = log_inv + eta - 1 if squeezed else log_inv
    x = omega0_sq / (params.delta_eff * params.gamma0)
    return 1.0 + x * x * eta * (1 - eta) * geometry


def stark_phase_variance(params: AtomicParams, omega0_sq: float, eta: float, n_in: float,
                         squeezed: bool = False) -> float:
    """线性吸收剖面上的 ⟨δφ²⟩ 闭式解，与 stark_noise.phase_variance 一致"""
    if n_in <= 0:
        raise PreconditionError("入射光子数必须为正", n_in=n_in)
    return (stark_bracket(params, omega0_sq, eta, squeezed) - 1.0) / (eta * n_in)


def detection(params: AtomicParams, omega0_sq: float, eta: float, n_in: float,
              delta0: Optional[float] = None, squeezed: bool = False) -> DetectionResult:
    """线性吸收剖面上的计数统计

    探测器取向使 δ₀ > 0 时计数为正，即信号相位取 (δ₀/γ₀)·ln(1/η)。
    """
    delta0 = params.delta0 if delta0 is None else delta0
    phi = delta0 / params.gamma0 * _log_inverse(eta)
    phase_var = stark_phase_variance(params, omega0_sq, eta, n_in, squeezed)
    budget = noise_budget(eta, n_in, phase_var)
    return DetectionResult(
        mean_counts=faraday_counts(eta, n_in, phi, small_angle=True),
        count_variance=budget.total,
        shot_noise=budget.shot_term,
    )

# ================================
# 3. 信噪比与最佳工作点
# ================================

def snr(params: AtomicParams, omega0_sq: float, eta: float, n_in: float,
        delta0: Optional[float] = None) -> float:
    """信噪比

    SNR = (δ₀/γ₀)·ln(1/η)·[n_in·η / (1 + (|Ω(0)|⁴/Δ₀²γ₀²)·η(1−η)·ln(1/η))]^{1/2}

    符号跟随 δ₀，对 |δ₀| 严格线性。
    """
    delta0 = params.delta0 if delta0 is None else delta0
    _check_eta(eta, allow_one=True)
    if n_in < 0:
        raise PreconditionError("入射光子数不能为负", n_in=n_in)
    bracket = stark_bracket(params, omega0_sq, eta)
    return delta0 / params.gamma0 * _log_inverse(eta) * math.sqrt(n_in * eta / bracket)


def snr_squeezed(params: AtomicParams, omega0_sq: float, eta: float, n_in: float,
                 delta0: Optional[float] = None) -> float:
    """相位压缩输入的信噪比"""
    delta0 = params.delta0 if delta0 is None else delta0
    _check_eta(eta, allow_one=True)
    if n_in < 0:
        raise PreconditionError("入射光子数不能为负", n_in=n_in)
    bracket = stark_bracket(params, omega0_sq, eta, squeezed=True)
    return delta0 / params.gamma0 * _log_inverse(eta) * math.sqrt(n_in * eta / bracket)


def min_detectable_shift(params: AtomicParams, omega0_sq: float, eta: float, n_in: float,
                         squeezed: bool = False) -> float:
    """SNR = 1 对应的最小可探测 Zeeman 频移"""
    _check_eta(eta)
    if n_in <= 0:
        raise PreconditionError("入射光子数必须为正", n_in=n_in)
    bracket = stark_bracket(params, omega0_sq, eta, squeezed)
    return params.gamma0 / _log_inverse(eta) * math.sqrt(bracket / (eta * n_in))


def optimal_rabi_sq(params: AtomicParams, eta: float, squeezed: bool = False) -> float:
    """最佳入射光强 |Ω(0)|²_opt = Δ₀γ₀/√(η(1−η)ln(1/η))

    Raises:
        DegenerateEta: η ∉ (0, 1)
    """
    _check_eta(eta)
    log_inv = _log_inverse(eta)
    geometry = log_inv + eta - 1 if squeezed else log_inv
    return abs(params.delta_eff) * params.gamma0 / math.sqrt(eta * (1 - eta) * geometry)


def numeric_optimal_rabi_sq(params: AtomicParams, eta: float, photons_per_omega_sq: float = 1.0,
                            squeezed: bool = False) -> float:
    """数值最大化 SNR(|Ω(0)|²)，入射光子数 n_in = photons_per_omega_sq·|Ω(0)|²

    在 log|Ω(0)|² 上做黄金分割搜索，用作 optimal_rabi_sq 的校验。
    """
    _check_eta(eta)
    numerics = get_numerics_config()
    center = math.log(abs(params.delta_eff) * params.gamma0)
    shift = 1.0 if params.delta0 == 0 else params.delta0

    def negative_snr(u: float) -> float:
        omega0_sq = math.exp(u)
        n_in = photons_per_omega_sq * omega0_sq
        bracket = stark_bracket(params, omega0_sq, eta, squeezed)
        return -abs(shift) / params.gamma0 * _log_inverse(eta) * math.sqrt(n_in * eta / bracket)

    u_opt, _ = golden_section_minimize(negative_snr, center - 20.0, center + 20.0,
                                       tol=numerics.golden_tolerance)
    return math.exp(u_opt)

# ================================
# 4. 标准量子极限
# ================================

def sql_factor_f(eta: float) -> float:
    """f(η) = [(1−η)/(η·ln³(1/η))]^{1/4}"""
    _check_eta(eta)
    log_inv = _log_inverse(eta)
    return ((1 - eta) / (eta * log_inv ** 3)) ** 0.25


def sql_factor_f_tilde(eta: float) -> float:
    """相位压缩输入的因子 f̃(η) = [(1−η)(ln(1/η)+η−1)/(η·ln⁴(1/η))]^{1/4}"""
    _check_eta(eta)
    log_inv = _log_inverse(eta)
    return ((1 - eta) * (log_inv + eta - 1) / (eta * log_inv ** 4)) ** 0.25


def optimal_eta() -> float:
    """使 f(η) 最小的透射率，ln(1/η) = 3(1−η) 在 (0, 1) 内的非平凡根"""
    numerics = get_numerics_config()
    return brentq(lambda eta: _log_inverse(eta) - 3 * (1 - eta), 1e-4, 0.5,
                  xtol=1e-14, rtol=numerics.root_rtol)


def _sql_scale(params: AtomicParams, lambda_sq_over_A: float, gamma0_tm: float) -> float:
    if lambda_sq_over_A <= 0 or gamma0_tm <= 0:
        raise PreconditionError("λ²/A 与 γ₀t_m 必须为正",
                                lambda_sq_over_A=lambda_sq_over_A, gamma0_tm=gamma0_tm)
    if params.delta_eff <= 0:
        raise PreconditionError("Δ₀ 必须为正", delta_eff=params.delta_eff)
    return params.gamma0 * math.sqrt(
        params.gamma_r / params.delta_eff * 3 / (8 * math.pi) * lambda_sq_over_A / gamma0_tm
    )


def sql_min_shift(params: AtomicParams, eta: float, lambda_sq_over_A: float, gamma0_tm: float) -> float:
    """δ₀^SQL = γ₀·f(η)·[(γ_r/Δ₀)(3/8π)(λ²/A)/(γ₀t_m)]^{1/2}

    在最佳光强处直接令 SNR = 1 得到的频移比此值大 √2（噪声因子在最佳点等于 2）。
    """
    return sql_factor_f(eta) * _sql_scale(params, lambda_sq_over_A, gamma0_tm)


def sql_min_shift_squeezed(params: AtomicParams, eta: float, lambda_sq_over_A: float,
                           gamma0_tm: float) -> float:
    return sql_factor_f_tilde(eta) * _sql_scale(params, lambda_sq_over_A, gamma0_tm)


def heisenberg_limit_note() -> str:
    """SU(2) 干涉仪 Heisenberg 极限说明（不做模拟）"""
    return (
        "SU(2) 干涉仪在输入态经过特殊制备时可达到 Heisenberg 极限 Δφ ≃ 1/⟨n⟩，"
        "而相干态输入只能达到散粒噪声极限 Δφ ≃ 1/√⟨n⟩。"
        "本程序只计算相干态与相位压缩输入的结果。"
    )

# ================================
# 5. 功率归一化
# ================================

def photon_number(power_ratio, gamma0_tm: float, lambda_sq_over_A: float):
    """入射光子数 n_in = (P/P₀)·8π·(A/λ²)·γ₀t_m，支持数组输入"""
    if gamma0_tm <= 0 or lambda_sq_over_A <= 0:
        raise PreconditionError("λ²/A 与 γ₀t_m 必须为正",
                                lambda_sq_over_A=lambda_sq_over_A, gamma0_tm=gamma0_tm)
    scale = 8 * math.pi * gamma0_tm / lambda_sq_over_A
    if np.ndim(power_ratio):
        return np.asarray(power_ratio, dtype=float) * scale
    return float(power_ratio) * scale


def omega_sq_from_power(params: AtomicParams, power_ratio):
    """|Ω(0)|² = 3γ_rγ₀·(P/P₀)"""
    scale = 3 * params.gamma_r * params.gamma0
    if np.ndim(power_ratio):
        return np.asarray(power_ratio, dtype=float) * scale
    return float(power_ratio) * scale


def power_from_omega_sq(params: AtomicParams, omega0_sq: float) -> float:
    return omega0_sq / (3 * params.gamma_r * params.gamma0)

# ================================
# 6. 广义量子极限
# ================================

def generic_quantum_limit(chi_ratio: float, beta: float, n_var: float) -> float:
    """Δω_min(⟨Δn²⟩) = chi_ratio⁻¹·[1/⟨Δn²⟩ + β²⟨Δn²⟩]^{1/2}

    chi_ratio = (1/χ″)(dχ′/dω)，β 为光强到相位的耦合系数。
    """
    if chi_ratio <= 0:
        raise PreconditionError("色散 / 吸收比必须为正", chi_ratio=chi_ratio)
    if beta < 0:
        raise PreconditionError("耦合系数不能为负", beta=beta)
    if n_var <= 0:
        raise PreconditionError("光子数方差必须为正", n_var=n_var)
    return math.sqrt(1.0 / n_var + beta ** 2 * n_var) / chi_ratio


def optimize_quantum_limit(chi_ratio: float, beta: float, span_decades: float = 6.0) -> QuantumLimitResult:
    """对 ⟨Δn²⟩ 最小化 Δω_min，同时给出闭式解 ⟨Δn²⟩ = 1/β、Δω = chi_ratio⁻¹·√(2β)

    β = 0 时不存在内部极小值，返回散粒噪声区间标记。
    """
    if chi_ratio <= 0:
        raise PreconditionError("色散 / 吸收比必须为正", chi_ratio=chi_ratio)
    if beta < 0:
        raise PreconditionError("耦合系数不能为负", beta=beta)
    if beta == 0:
        logger.info("β = 0，只有散粒噪声，无内部最优点", chi_ratio=chi_ratio)
        return QuantumLimitResult(
            chi_ratio=chi_ratio, beta=0.0,
            n_var_opt=math.inf, delta_omega_min=0.0,
            n_var_opt_closed_form=math.inf, delta_omega_min_closed_form=0.0,
            regime=RegimeTag.SHOT_LIMITED.value,
        )

    numerics = get_numerics_config()
    center = math.log(1.0 / beta)
    span = span_decades * math.log(10.0)
    u_opt, _ = golden_section_minimize(
        lambda u: generic_quantum_limit(chi_ratio, beta, math.exp(u)),
        center - span, center + span, tol=numerics.golden_tolerance,
    )
    n_opt = math.exp(u_opt)
    return QuantumLimitResult(
        chi_ratio=chi_ratio,
        beta=beta,
        n_var_opt=n_opt,
        delta_omega_min=generic_quantum_limit(chi_ratio, beta, n_opt),
        n_var_opt_closed_form=1.0 / beta,
        delta_omega_min_closed_form=math.sqrt(2 * beta) / chi_ratio,
        regime=RegimeTag.OPTIMUM.value,
    )


def eit_quantum_limit_consistency(params: AtomicParams, eta: float, omega0_sq: float,
                                  n_in: float) -> Dict[str, float]:
    """用 EIT 模型参数代入广义量子极限

    chi_ratio 取整个介质的相位 / 频移比 ln(1/η)/γ₀，β² = ⟨δφ²⟩_Stark/n_in。
    结果与 SNR = 1 的频移相差 f(η) 量级的几何因子，只做报告。
    """
    _check_eta(eta)
    chi_ratio = _log_inverse(eta) / params.gamma0
    beta = math.sqrt(stark_phase_variance(params, omega0_sq, eta, n_in) / n_in)
    limit = optimize_quantum_limit(chi_ratio, beta)
    eit_min = min_detectable_shift(params, optimal_rabi_sq(params, eta), eta, n_in)
    return {
        "eta": eta,
        "chi_ratio": chi_ratio,
        "beta": beta,
        "generic_limit": limit.delta_omega_min_closed_form,
        "eit_min_shift_at_optimum": eit_min,
        "ratio": eit_min / limit.delta_omega_min_closed_form,
    }

# ================================
# 7. 功率扫描
# ================================

def _regime_tags(stark_over_shot: np.ndarray, values: np.ndarray,
                 optimum_index: Optional[int]) -> List[str]:
    tags = np.where(stark_over_shot > 1.0, RegimeTag.STARK_LIMITED.value, RegimeTag.SHOT_LIMITED.value)
    tags = tags.astype(object)
    if optimum_index is not None and 0 <= optimum_index < len(values):
        tags[optimum_index] = RegimeTag.OPTIMUM.value
    return list(tags)


def eit_sensitivity_curve(params: AtomicParams, eta: float, power_grid: Sequence[float],
                          gamma0_tm: float, lambda_sq_over_A: float) -> SensitivityCurve:
    """单个 η 的 EIT 最小可探测频移曲线"""
    _check_eta(eta)
    power = np.asarray(power_grid, dtype=float)
    if power.size == 0 or np.any(power <= 0):
        raise PreconditionError("功率网格必须非空且为正", size=int(power.size))

    numerics = get_numerics_config()
    omega0_sq = omega_sq_from_power(params, power)
    n_in = photon_number(power, gamma0_tm, lambda_sq_over_A)
    log_inv = _log_inverse(eta)
    x = omega0_sq / (params.delta_eff * params.gamma0)
    stark_over_shot = x ** 2 * eta * (1 - eta) * log_inv
    min_delta0 = params.gamma0 / log_inv * np.sqrt((1 + stark_over_shot) / (eta * n_in))

    omega_opt = optimal_rabi_sq(params, eta)
    optimum_index = int(np.argmin(np.abs(np.log(omega0_sq / omega_opt))))
    # 线性吸收解要求出射端光强远大于 2γγ₀
    linear_valid = eta * omega0_sq >= numerics.validity_margin * 2 * params.gamma * params.gamma0

    frame = pd.DataFrame({
        "eta": eta,
        "power_ratio": power,
        "omega0_sq": omega0_sq,
        "n_in": n_in,
        "min_delta0": min_delta0,
        "min_delta0_over_gamma0": min_delta0 / params.gamma0,
        "log10_power_ratio": np.log10(power),
        "log10_min_delta0_over_gamma0": np.log10(min_delta0 / params.gamma0),
        "regime": _regime_tags(stark_over_shot, min_delta0, optimum_index),
        "linear_valid": linear_valid,
    })
    return SensitivityCurve(
        label=f"eit_eta_{eta:g}",
        eta=eta,
        frame=frame,
        metadata={
            "model": "eit",
            "eta": eta,
            "omega_opt_sq": omega_opt,
            "sql_factor_f": sql_factor_f(eta),
            "invalid_points": int(np.count_nonzero(~linear_valid)),
        },
    )


def opm_sensitivity_curve(params: AtomicParams, alpha: float, power_grid: Sequence[float],
                          gamma0_tm: float, lambda_sq_over_A: float,
                          include_stark: bool = False) -> SensitivityCurve:
    """光泵磁强计的示意性灵敏度曲线

    δ_min = Γ_eff/√n_in，Γ_eff = γ₀ + α√(γ₀/γ)|Ω|（可选再加 |Ω|²/Δ₀）。
    高功率下 n_in ∝ |Ω|²，灵敏度饱和为常数。
    """
    if alpha <= 0:
        raise PreconditionError("功率展宽系数必须为正", alpha=alpha)
    power = np.asarray(power_grid, dtype=float)
    if power.size == 0 or np.any(power <= 0):
        raise PreconditionError("功率网格必须非空且为正", size=int(power.size))

    omega_sq = omega_sq_from_power(params, power)
    omega = np.sqrt(omega_sq)
    broadening = alpha * np.sqrt(params.gamma0 / params.gamma) * omega
    width = params.gamma0 + broadening
    if include_stark:
        width = width + omega_sq / abs(params.delta_eff)
    n_in = photon_number(power, gamma0_tm, lambda_sq_over_A)
    min_delta0 = width / np.sqrt(n_in)

    tags = np.where(broadening > params.gamma0, RegimeTag.BROADENING_LIMITED.value,
                    RegimeTag.SHOT_LIMITED.value).astype(object)
    if include_stark:
        tags[omega_sq / abs(params.delta_eff) > broadening] = RegimeTag.STARK_LIMITED.value
    tags[int(np.argmin(min_delta0))] = RegimeTag.OPTIMUM.value

    frame = pd.DataFrame({
        "power_ratio": power,
        "omega_sq": omega_sq,
        "n_in": n_in,
        "effective_width": width,
        "min_delta0": min_delta0,
        "min_delta0_over_gamma0": min_delta0 / params.gamma0,
        "log10_power_ratio": np.log10(power),
        "log10_min_delta0_over_gamma0": np.log10(min_delta0 / params.gamma0),
        "regime": list(tags),
    })
    return SensitivityCurve(
        label="opm",
        eta=None,
        frame=frame,
        metadata={"model": OPM_MODEL_LABEL, "alpha": alpha, "include_stark": include_stark},
    )


def figure4_sweep(params: AtomicParams, eta_list: Sequence[float], power_grid: Sequence[float],
                  gamma0_tm: float, lambda_sq_over_A: float, alpha: float = 1.0,
                  opm_stark: bool = False) -> Tuple[List[SensitivityCurve], SensitivityCurve]:
    """最小可探测 Zeeman 频移对 P/P₀ 的扫描：每个 η 一条 EIT 曲线，外加 OPM 对比曲线

    Returns:
        Tuple: (EIT 曲线列表, OPM 曲线)
    """
    if not eta_list:
        raise PreconditionError("透射率列表不能为空")
    curves = [eit_sensitivity_curve(params, eta, power_grid, gamma0_tm, lambda_sq_over_A)
              for eta in eta_list]
    opm = opm_sensitivity_curve(params, alpha, power_grid, gamma0_tm, lambda_sq_over_A, opm_stark)

    opm_best = float(opm.frame["min_delta0"].min())
    for curve in curves:
        eit_best = float(curve.frame["min_delta0"].min())
        curve.metadata["opm_advantage"] = opm_best / eit_best
        invalid = curve.metadata["invalid_points"]
        if invalid:
            logger.info("部分功率点超出线性吸收解的适用范围", eta=curve.eta, invalid_points=invalid)
    logger.info("功率扫描完成", etas=list(eta_list), points=len(opm.frame))
    return curves, opm


def sql_table(params: AtomicParams, eta_list: Sequence[float], lambda_sq_over_A: float,
              gamma0_tm: float) -> pd.DataFrame:
    """各透射率下的 f、f̃、最佳光强与 δ^SQL"""
    rows = []
    for eta in eta_list:
        omega_opt = optimal_rabi_sq(params, eta)
        n_opt = photon_number(power_from_omega_sq(params, omega_opt), gamma0_tm, lambda_sq_over_A)
        sql = sql_min_shift(params, eta, lambda_sq_over_A, gamma0_tm)
        rows.append({
            "eta": eta,
            "f": sql_factor_f(eta),
            "f_tilde": sql_factor_f_tilde(eta),
            "omega_opt_sq_over_delta_gamma0": omega_opt / (params.delta_eff * params.gamma0),
            "omega_opt_sq_numeric_over_delta_gamma0":
                numeric_optimal_rabi_sq(params, eta) / (params.delta_eff * params.gamma0),
            "sql_over_gamma0": sql / params.gamma0,
            "sql_squeezed_over_gamma0":
                sql_min_shift_squeezed(params, eta, lambda_sq_over_A, gamma0_tm) / params.gamma0,
            "snr_unit_shift_over_sql": min_detectable_shift(params, omega_opt, eta, n_opt) / sql,
        })
    return pd.DataFrame(rows)


__all__ = [
    "RegimeTag",
    "DetectionResult",
    "SensitivityPoint",
    "SensitivityCurve",
    "QuantumLimitResult",
    "OPM_MODEL_LABEL",
    "faraday_counts",
    "count_variance",
    "stark_bracket",
    "stark_phase_variance",
    "detection",
    "snr",
    "snr_squeezed",
    "min_detectable_shift",
    "optimal_rabi_sq",
    "numeric_optimal_rabi_sq",
    "sql_factor_f",
    "sql_factor_f_tilde",
    "optimal_eta",
    "sql_min_shift",
    "sql_min_shift_squeezed",
    "heisenberg_limit_note",
    "photon_number",
    "omega_sq_from_power",
    "power_from_omega_sq",
    "generic_quantum_limit",
    "optimize_quantum_limit",
    "eit_quantum_limit_consistency",
    "eit_sensitivity_curve",
    "opm_sensitivity_curve",
    "figure4_sweep",
    "sql_table",
]
