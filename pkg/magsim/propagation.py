# ============================================================================
# 文件：magsim/propagation.py
# 功能：两圆偏振分量在原子气室中的传播
# 技术：定步长 RK4 + Richardson 误差控制、scipy 梯形求积、brentq 求根
# ============================================================================

"""
场传播模块

功能模块：
1. 光强传播方程（RK4）及其隐式精确解、线性吸收解
2. 透射系数 η（解析值与数值值）
3. 相位方程求积、信号相位 φ_sig、ac-Stark 偏置相位
4. 非均匀 ac-Stark 展宽线型及其半高宽

强度以 |Ω|²（γ² 为单位）表示，z 以 1/κ 为单位。
光强剖面构造后只读，可在并发扫描中复用。
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy.integrate import cumulative_trapezoid, trapezoid
from scipy.optimize import brentq

from .atomic import AtomicParams
from .config import get_numerics_config
from .exceptions import (
    GridTooCoarse,
    IntensityUnderflow,
    PreconditionError,
    StepTooCoarse,
)
from .utils import get_logger, rk4_integrate, warn_validity

logger = get_logger(__name__)

ShiftLike = Union[float, np.ndarray, Callable[[np.ndarray], np.ndarray]]

# ================================
# 1. 数据结构定义
# ================================

class Configuration(str, Enum):
    """测量构型"""
    FARADAY = "faraday"
    DRIVE_PROBE = "drive_probe"


class AbsorptionModel(str, Enum):
    """展宽线型使用的吸收剖面"""
    CONSTANT = "constant"
    LINEAR = "linear"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class FieldState:
    """z 处两圆偏振分量的复 Rabi 振幅"""

    omega_plus: complex
    omega_minus: complex
    z: float = 0.0

    @property
    def intensity(self) -> float:
        """|Ω|² = |Ω₊|² + |Ω₋|²"""
        return abs(self.omega_plus) ** 2 + abs(self.omega_minus) ** 2

    @classmethod
    def faraday(cls, omega0_sq: float) -> "FieldState":
        """线偏振入射：|Ω±(0)| = |Ω(0)|/√2"""
        amplitude = np.sqrt(omega0_sq / 2)
        return cls(complex(amplitude), complex(amplitude), 0.0)


@dataclass(frozen=True)
class IntensityProfile:
    """沿 z 采样的两分量光强"""

    z: np.ndarray
    intensity_plus: np.ndarray
    intensity_minus: np.ndarray

    def __post_init__(self):
        for array in (self.z, self.intensity_plus, self.intensity_minus):
            array.setflags(write=False)

    @property
    def total(self) -> np.ndarray:
        return self.intensity_plus + self.intensity_minus

    @property
    def length(self) -> float:
        return float(self.z[-1])

    @property
    def eta(self) -> float:
        total = self.total
        return float(total[-1] / total[0])

    @classmethod
    def from_total(cls, z: np.ndarray, total: np.ndarray) -> "IntensityProfile":
        """法拉第构型下两分量各占一半"""
        half = np.asarray(total, dtype=float) / 2
        return cls(np.array(z, dtype=float), half.copy(), half.copy())


@dataclass(frozen=True)
class TransmissionResult:
    """透射系数：解析值、RK4 数值值和最终采用值"""

    eta_analytic: float
    eta_ode: float
    eta: float
    alpha0: float
    valid: bool


@dataclass(frozen=True)
class PropagationSolution:
    """一次传播计算的完整结果"""

    eta: float
    phi_sig: float
    phi_bias: float
    profile: IntensityProfile
    phi_plus: np.ndarray = field(repr=False)
    phi_minus: np.ndarray = field(repr=False)
    transmission: Optional[TransmissionResult] = None

    def field_state(self, index: int) -> FieldState:
        """第 index 个采样点的 FieldState"""
        return FieldState(
            np.sqrt(self.profile.intensity_plus[index]) * np.exp(1j * self.phi_plus[index]),
            np.sqrt(self.profile.intensity_minus[index]) * np.exp(1j * self.phi_minus[index]),
            float(self.profile.z[index]),
        )

    def to_frame(self) -> pd.DataFrame:
        """导出剖面表格（z, |Ω|², |Ω₊|², |Ω₋|², φ₊, φ₋, φ）"""
        return pd.DataFrame({
            "z": self.profile.z,
            "omega_sq": self.profile.total,
            "omega_plus_sq": self.profile.intensity_plus,
            "omega_minus_sq": self.profile.intensity_minus,
            "phi_plus": self.phi_plus,
            "phi_minus": self.phi_minus,
            "phi_relative": self.phi_plus - self.phi_minus,
        })

# ================================
# 2. 光强传播
# ================================

def absorption_coefficient(params: AtomicParams, omega0_sq: float) -> float:
    """线性剩余吸收系数 α₀ = γ₀γ_rκ/(2|Ω(0)|²)"""
    if omega0_sq <= 0:
        raise PreconditionError("入射光强必须为正", omega0_sq=omega0_sq)
    return params.gamma0 * params.gamma_r * params.kappa / (2 * omega0_sq)


def _intensity_rhs(params: AtomicParams) -> Callable[[float, np.ndarray], np.ndarray]:
    rate = params.kappa * params.gamma0 * params.gamma_r
    saturation = 2 * params.gamma0 * params.gamma

    def rhs(_z: float, y: np.ndarray) -> np.ndarray:
        total = y[0] + y[1]
        loss = -rate * y[0] * y[1] / (total * (saturation + total))
        return np.array([loss, loss])

    return rhs


def _integrate(params: AtomicParams, start: Tuple[float, float], L: float, steps: int):
    with np.errstate(all="ignore"):
        z, y = rk4_integrate(_intensity_rhs(params), np.array(start, dtype=float), L, steps)
    if not np.all(np.isfinite(y)) or np.any(y[:, 0] + y[:, 1] <= 0):
        raise IntensityUnderflow(
            "光强在气室内降到零以下",
            length=L,
            steps=steps,
            gamma0=params.gamma0,
        )
    return z, y


def propagate_intensity_ode(params: AtomicParams, omega0_sq: float, L: float,
                            steps: Optional[int] = None,
                            split: float = 0.5,
                            check_convergence: bool = True) -> IntensityProfile:
    """RK4 积分光强传播方程

    d|Ω±|²/dz = −κ(γ₀γ_r/|Ω|²)·|Ω₊|²|Ω₋|²/(2γ₀γ + |Ω|²)

    Args:
        params: 原子参数
        omega0_sq: 入射总光强 |Ω(0)|²
        L: 气室长度
        steps: RK4 步数，缺省取数值配置
        split: 入射光强中 σ+ 分量所占比例（法拉第构型为 0.5）
        check_convergence: 是否与 2N 步结果比较（Richardson）

    Raises:
        PreconditionError: 入射光强或长度非正
        IntensityUnderflow: 光强降到零以下
        StepTooCoarse: N 步与 2N 步相对差超过容差
    """
    if omega0_sq <= 0:
        raise PreconditionError("没有入射场可供传播", omega0_sq=omega0_sq)
    if L <= 0:
        raise PreconditionError("气室长度必须为正", length=L)
    if not 0.0 <= split <= 1.0:
        raise PreconditionError("split 必须在 [0, 1] 内", split=split)

    numerics = get_numerics_config()
    steps = steps or numerics.z_steps
    start = (split * omega0_sq, (1 - split) * omega0_sq)

    z, y = _integrate(params, start, L, steps)

    if check_convergence:
        _, y_fine = _integrate(params, start, L, 2 * steps)
        coarse_end = y[-1, 0] + y[-1, 1]
        fine_end = y_fine[-1, 0] + y_fine[-1, 1]
        difference = abs(coarse_end - fine_end) / abs(fine_end)
        logger.debug("RK4 Richardson 比较", steps=steps, relative_difference=float(difference))
        if difference > numerics.richardson_tolerance:
            raise StepTooCoarse(
                "RK4 步长过大",
                steps=steps,
                relative_difference=float(difference),
                tolerance=numerics.richardson_tolerance,
            )

    return IntensityProfile(z, y[:, 0].copy(), y[:, 1].copy())


def implicit_intensity(params: AtomicParams, omega0_sq: float, z: float) -> float:
    """法拉第构型下传播方程的精确解

    I − I₀ + 2γγ₀ ln(I/I₀) = −(κγ₀γ_r/2) z，用 brentq 在对数变量上求解。
    """
    if omega0_sq <= 0:
        raise PreconditionError("入射光强必须为正", omega0_sq=omega0_sq)
    if params.gamma0 == 0 or z == 0:
        return float(omega0_sq)

    saturation = 2 * params.gamma * params.gamma0
    drop = params.kappa * params.gamma0 * params.gamma_r * z / 2

    def residual(u: float) -> float:
        return omega0_sq * np.expm1(u) + saturation * u + drop

    lower = -(drop + omega0_sq) / saturation - 1.0
    rtol = get_numerics_config().root_rtol
    u = brentq(residual, lower, 0.0, xtol=1e-300, rtol=max(rtol, 4 * np.finfo(float).eps), maxiter=500)
    return float(omega0_sq * np.exp(u))


def linear_profile(params: AtomicParams, omega0_sq: float, z: np.ndarray) -> np.ndarray:
    """线性剩余吸收解 |Ω(z)|² = |Ω(0)|²(1 − α₀z)"""
    return omega0_sq * (1 - absorption_coefficient(params, omega0_sq) * np.asarray(z, dtype=float))


def cell_length_for_transmission(params: AtomicParams, omega0_sq: float, eta: float) -> float:
    """线性吸收解下给出透射系数 η 的气室长度 L = (1 − η)/α₀"""
    if not 0 < eta <= 1:
        raise PreconditionError("η 必须在 (0, 1] 内", eta=eta)
    alpha0 = absorption_coefficient(params, omega0_sq)
    if alpha0 == 0:
        raise PreconditionError("γ₀ = 0 时不存在剩余吸收", gamma0=params.gamma0)
    return (1 - eta) / alpha0


def transmission(params: AtomicParams, omega0_sq: float, L: float,
                 steps: Optional[int] = None,
                 profile: Optional[IntensityProfile] = None) -> TransmissionResult:
    """透射系数 η = 1 − α₀L 及 RK4 数值值

    要求 |Ω(L)|² ≫ 2γγ₀；不满足时发出告警并采用数值值。
    已有同参数的光强剖面时可通过 profile 传入，避免重复积分。
    """
    alpha0 = absorption_coefficient(params, omega0_sq)
    if L == 0:
        return TransmissionResult(1.0, 1.0, 1.0, alpha0, True)

    eta_analytic = 1 - alpha0 * L
    if profile is None:
        profile = propagate_intensity_ode(params, omega0_sq, L, steps)
    eta_ode = profile.eta

    margin = get_numerics_config().validity_margin
    saturation = 2 * params.gamma * params.gamma0
    valid = eta_analytic > 0 and eta_ode * omega0_sq >= margin * saturation
    if not valid:
        warn_validity(
            "|Ω(L)|² 不远大于 2γγ₀，线性吸收解失效，改用数值透射系数",
            omega_end_sq=eta_ode * omega0_sq,
            saturation=saturation,
        )

    return TransmissionResult(
        eta_analytic=float(eta_analytic),
        eta_ode=float(eta_ode),
        eta=float(eta_analytic if valid else eta_ode),
        alpha0=float(alpha0),
        valid=bool(valid),
    )

# ================================
# 3. 相位
# ================================

def _sample_shift(shift: Optional[ShiftLike], z: np.ndarray) -> np.ndarray:
    if shift is None:
        return np.zeros_like(z)
    if callable(shift):
        return np.broadcast_to(np.asarray(shift(z), dtype=float), z.shape)
    return np.broadcast_to(np.asarray(shift, dtype=float), z.shape)


def propagate_phases(params: AtomicParams, profile: IntensityProfile,
                     delta0: Optional[float] = None,
                     stark_plus: Optional[ShiftLike] = None,
                     stark_minus: Optional[ShiftLike] = None) -> Tuple[np.ndarray, np.ndarray]:
    """在光强剖面上求积相位方程

    dφ±/dz = (κγ_r/2γ)[Δγ₀ ∓ γ(δ₀/2 ± δ±)]/(2γ₀γ + |Ω|²)

    Args:
        delta0: 塞曼分裂，缺省取 params.delta0
        stark_plus, stark_minus: δ±(z)，可为常数、数组或 z 的函数

    Returns:
        Tuple: (φ₊(z), φ₋(z))
    """
    delta0 = params.delta0 if delta0 is None else delta0
    z = profile.z
    shift_plus = _sample_shift(stark_plus, z)
    shift_minus = _sample_shift(stark_minus, z)

    prefactor = params.kappa * params.gamma_r / (2 * params.gamma)
    denominator = 2 * params.gamma0 * params.gamma + profile.total
    common = params.delta_big * params.gamma0

    rate_plus = prefactor * (common - params.gamma * (delta0 / 2 + shift_plus)) / denominator
    rate_minus = prefactor * (common + params.gamma * (delta0 / 2 - shift_minus)) / denominator

    phi_plus = cumulative_trapezoid(rate_plus, z, initial=0.0)
    phi_minus = cumulative_trapezoid(rate_minus, z, initial=0.0)
    return phi_plus, phi_minus


def signal_phase(params: AtomicParams, omega0_sq: float, L: float,
                 delta0: Optional[float] = None, eta: Optional[float] = None) -> float:
    """信号相位闭式解 φ_sig = −(δ₀/γ₀)·ln(η⁻¹)

    eta 缺省取线性吸收解 1 − α₀L；传入 RK4 透射系数时该式对传播方程严格成立。
    """
    delta0 = params.delta0 if delta0 is None else delta0
    if delta0 == 0:
        return 0.0
    if eta is None:
        eta = 1 - absorption_coefficient(params, omega0_sq) * L
    if not 0 < eta <= 1:
        raise PreconditionError("η 超出 (0, 1]，线性吸收解失效", eta=eta)
    return float(-(delta0 / params.gamma0) * np.log(1 / eta))


def bias_stark_phase(profile: IntensityProfile, delta_eff: float,
                     configuration: Union[Configuration, str] = Configuration.FARADAY) -> float:
    """ac-Stark 偏置相位 ∫₀ᴸ dz |Ω(z)|²/Δ₀

    法拉第构型下两能级频移大小相等、符号相反，偏置相位为 0。
    """
    if Configuration(configuration) is Configuration.FARADAY:
        return 0.0
    return float(trapezoid(profile.total / delta_eff, profile.z))


def propagate(params: AtomicParams, omega0_sq: float, L: float,
              steps: Optional[int] = None,
              stark_plus: Optional[ShiftLike] = None,
              stark_minus: Optional[ShiftLike] = None,
              configuration: Union[Configuration, str] = Configuration.FARADAY) -> PropagationSolution:
    """完整传播：光强、相位、透射系数、信号相位和偏置相位"""
    profile = propagate_intensity_ode(params, omega0_sq, L, steps)
    result = transmission(params, omega0_sq, L, steps, profile=profile)
    phi_plus, phi_minus = propagate_phases(params, profile, None, stark_plus, stark_minus)

    solution = PropagationSolution(
        eta=result.eta,
        phi_sig=float(phi_plus[-1] - phi_minus[-1]),
        phi_bias=bias_stark_phase(profile, params.delta_eff, configuration),
        profile=profile,
        phi_plus=phi_plus,
        phi_minus=phi_minus,
        transmission=result,
    )
    logger.info("传播计算完成", eta=solution.eta, phi_sig=solution.phi_sig, steps=len(profile.z) - 1)
    return solution

# ================================
# 4. 非均匀展宽线型
# ================================

def absorption_profile(model: Union[AbsorptionModel, str], omega0_sq: float, z: np.ndarray,
                       L: float = 1.0, eta: float = 0.5, optical_depth: float = 2.0) -> np.ndarray:
    """展宽线型使用的光强剖面

    constant: |Ω|² = |Ω(0)|²
    linear: |Ω|² = |Ω(0)|²(1 − (1 − η)z/L)
    exponential: |Ω|² = |Ω(0)|² exp(−OD·z/L)
    """
    model = AbsorptionModel(model)
    z = np.asarray(z, dtype=float)
    if model is AbsorptionModel.CONSTANT:
        return np.full_like(z, omega0_sq)
    if model is AbsorptionModel.LINEAR:
        return omega0_sq * (1 - (1 - eta) * z / L)
    return omega0_sq * np.exp(-optical_depth * z / L)


def lineshape_detuning_grid(params: AtomicParams, omega0_sq: float, steps: Optional[int] = None,
                            absorption_model: Union[AbsorptionModel, str] = AbsorptionModel.LINEAR,
                            eta: float = 0.5, optical_depth: float = 2.0,
                            margin: float = 10.0) -> np.ndarray:
    """覆盖整条展宽线的失谐网格

    线心分布在 −|Ω(z)|²/Δ₀ 之间，两侧各留 margin·γ₀。
    """
    z = np.linspace(0.0, 1.0, 65)
    shift = absorption_profile(absorption_model, omega0_sq, z, 1.0, eta, optical_depth) / params.delta_eff
    low = -float(np.max(shift)) - margin * params.gamma0
    high = -float(np.min(shift)) + margin * params.gamma0
    return np.linspace(low, high, steps or get_numerics_config().detuning_steps)


def broadened_lineshape(params: AtomicParams, omega0_sq: float, detuning_grid: np.ndarray,
                        absorption_model: Union[AbsorptionModel, str] = AbsorptionModel.LINEAR,
                        L: float = 1.0, eta: float = 0.5, optical_depth: float = 2.0,
                        z_steps: Optional[int] = None, chunk: int = 256) -> np.ndarray:
    """沿气室积分的极化率虚部

    对每个失谐 Δ 计算 ∫₀ᴸ dz γ₀/(γ₀² + (Δ + |Ω(z)|²/Δ₀)²)。

    Raises:
        GridTooCoarse: 失谐网格间距大于本征宽度 2γ₀ 的 1/4
    """
    detuning_grid = np.asarray(detuning_grid, dtype=float)
    numerics = get_numerics_config()
    spacing = float(np.min(np.diff(detuning_grid))) if detuning_grid.size > 1 else np.inf
    if 2 * params.gamma0 < numerics.fwhm_min_points * spacing:
        raise GridTooCoarse(
            "失谐网格过粗",
            spacing=spacing,
            width=2 * params.gamma0,
            min_points=numerics.fwhm_min_points,
        )

    z = np.linspace(0.0, L, (z_steps or numerics.z_steps) + 1)
    shift = absorption_profile(absorption_model, omega0_sq, z, L, eta, optical_depth) / params.delta_eff
    g0 = params.gamma0

    values = np.empty_like(detuning_grid)
    for start in range(0, detuning_grid.size, chunk):
        block = detuning_grid[start:start + chunk, None]
        integrand = g0 / (g0 ** 2 + (block + shift[None, :]) ** 2)
        values[start:start + chunk] = trapezoid(integrand, z, axis=1)
    return values


def lineshape_fwhm(detuning_grid: np.ndarray, values: np.ndarray) -> Tuple[float, float]:
    """数值半高宽及中心

    在半高处左右两个交叉区间内对线性插值做二分求根（brentq）。

    Returns:
        Tuple: (FWHM, 中心位置)

    Raises:
        GridTooCoarse: 半高宽不足 4 个网格间距
        PreconditionError: 共振线未被网格完整包含
    """
    x = np.asarray(detuning_grid, dtype=float)
    y = np.asarray(values, dtype=float)
    peak = int(np.argmax(y))
    half = y[peak] / 2

    below_left = np.nonzero(y[:peak] < half)[0]
    below_right = np.nonzero(y[peak:] < half)[0]
    if below_left.size == 0 or below_right.size == 0:
        raise PreconditionError("共振线未被失谐网格完整包含", grid_min=float(x[0]), grid_max=float(x[-1]))

    i_left = int(below_left[-1])
    i_right = peak + int(below_right[0]) - 1

    def crossing(i: int) -> float:
        return brentq(lambda t: np.interp(t, x[i:i + 2], y[i:i + 2]) - half, x[i], x[i + 1])

    left = crossing(i_left)
    right = crossing(i_right)
    width = right - left

    spacing = float(np.mean(np.diff(x)))
    min_points = get_numerics_config().fwhm_min_points
    if width < min_points * spacing:
        raise GridTooCoarse("共振线窄于网格分辨率", fwhm=width, spacing=spacing, min_points=min_points)
    return float(width), float(0.5 * (left + right))


__all__ = [
    "Configuration",
    "AbsorptionModel",
    "FieldState",
    "IntensityProfile",
    "TransmissionResult",
    "PropagationSolution",
    "absorption_coefficient",
    "propagate_intensity_ode",
    "implicit_intensity",
    "linear_profile",
    "cell_length_for_transmission",
    "transmission",
    "propagate_phases",
    "signal_phase",
    "bias_stark_phase",
    "propagate",
    "absorption_profile",
    "lineshape_detuning_grid",
    "broadened_lineshape",
    "lineshape_fwhm",
]
