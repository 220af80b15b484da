# ============================================================================
# 文件：magsim/stark_noise.py
# 功能：ac-Stark 频移统计与相位噪声
# 技术：scipy Simpson 求积、numpy Philox 计数器随机数、线程池分块蒙特卡洛
# ============================================================================

"""
ac-Stark 噪声模块
- 平均 ac-Stark 频移（单分量与总场两种约定）
- 相对频移的白噪声谱密度（只有真空项，经典噪声在差分中抵消）
- 相位方差积分（相干态输入与相位压缩输入）
- 蒙特卡洛抽样校验解析公式

偶极矩、量子化常数等量纲组合 ℘²L/(ℏ²C) 不直接暴露，
通过光子数映射 ℘²|Ω(0)|²/(ℏ²C t_m) = |Ω(0)|⁴/n_in 消去。
交叉矩 Σ_j ℘_{j+}℘_{j−}/Δ_j 取零，不建模 b₊↔b₋ 交叉耦合。
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.integrate import simpson, trapezoid

from .atomic import AtomicParams
from .config import get_mc_config
from .exceptions import PreconditionError, ProfileNonPositive
from .propagation import IntensityProfile
from .utils import get_logger

logger = get_logger(__name__)

# ================================
# 1. 数据结构定义
# ================================

@dataclass(frozen=True)
class StarkModel:
    """ac-Stark 耦合模型

    coupling_ratio 对应 ℘²L/(ℏ²C)，在无量纲单位下等于 |Ω(0)|²·L·t_m/n_in。
    """

    delta_eff: float
    coupling_ratio: float = 0.0

    def __post_init__(self):
        if self.delta_eff == 0:
            raise PreconditionError("Δ₀ 不能为零", delta_eff=self.delta_eff)
        if self.coupling_ratio < 0:
            raise PreconditionError("耦合系数不能为负", coupling_ratio=self.coupling_ratio)

    @classmethod
    def from_photon_number(cls, delta_eff: float, omega0_sq: float, L: float,
                           t_m: float, n_in: float) -> "StarkModel":
        """由入射光子数构造模型：℘²L/(ℏ²C) = |Ω(0)|²·L·t_m/n_in"""
        if n_in <= 0:
            raise PreconditionError("入射光子数必须为正", n_in=n_in)
        return cls(delta_eff, coupling_from_photon_number(omega0_sq, L, t_m, n_in))


def coupling_from_photon_number(omega0_sq: float, L: float, t_m: float, n_in: float) -> float:
    return omega0_sq * L * t_m / n_in


@dataclass(frozen=True)
class NoiseBudget:
    """计数方差分解"""

    shot_term: float  # η⟨n_x⟩
    stark_term: float  # η²⟨n_x⟩²⟨δφ²⟩
    phase_variance: float  # ⟨δφ²⟩

    def __post_init__(self):
        if min(self.shot_term, self.stark_term, self.phase_variance) < 0:
            raise PreconditionError("噪声项不能为负", shot_term=self.shot_term,
                                    stark_term=self.stark_term, phase_variance=self.phase_variance)

    @property
    def total(self) -> float:
        return self.shot_term + self.stark_term

    @property
    def stark_limited(self) -> bool:
        return self.stark_term > self.shot_term

    def to_dict(self) -> Dict[str, float]:
        return {
            "shot_term": self.shot_term,
            "stark_term": self.stark_term,
            "phase_variance": self.phase_variance,
            "total": self.total,
        }


@dataclass
class MonteCarloResult:
    """蒙特卡洛经验矩"""

    mean: float
    variance: float
    mean_stderr: float
    variance_stderr: float
    analytic_variance: float
    relative_shift_variance: float
    common_mode_variance: float
    cell_relative_variance: np.ndarray = field(repr=False)
    cell_relative_variance_analytic: np.ndarray = field(repr=False)
    samples: int = 0
    seed: int = 0
    classical_noise_ratio: float = 0.0

    @property
    def relative_error(self) -> float:
        return abs(self.variance - self.analytic_variance) / self.analytic_variance

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mean": self.mean,
            "variance": self.variance,
            "mean_stderr": self.mean_stderr,
            "variance_stderr": self.variance_stderr,
            "analytic_variance": self.analytic_variance,
            "relative_error": self.relative_error,
            "relative_shift_variance": self.relative_shift_variance,
            "common_mode_variance": self.common_mode_variance,
            "samples": self.samples,
            "seed": self.seed,
            "classical_noise_ratio": self.classical_noise_ratio,
        }

# ================================
# 2. 平均频移与谱密度
# ================================

def mean_stark_shift(model: StarkModel, omega_sq: float) -> float:
    """等分光强下每个圆偏振分量的平均频移 |Ω|²/(2Δ₀)"""
    return omega_sq / (2 * model.delta_eff)


def stark_shift_total(model: StarkModel, omega_sq: float) -> float:
    """总场约定下磁共振的频移 |Ω|²/Δ₀（为单分量频移的 2 倍）"""
    return omega_sq / model.delta_eff


def relative_shift_variance_density(model: StarkModel, omega_sq_at_z: float) -> float:
    """对称化相对频移 (δ₊ − δ₋)/(2|Ω|²) 的 δ 关联谱密度

    S(z) = ℘²L/(4ℏ²CΔ₀²|Ω(z)|²)；共模经典噪声在差分中严格抵消，只剩真空项。
    系数取 1/4 而非 1/2：两个圆偏振分量各携带一半光子，按此密度积分再乘 (κγ_r)²/t_m
    即得 phase_variance 的 κ²γ_r²/(4Δ₀²) 前因子；蒙特卡洛逐单元方差也按此归一。
    """
    if omega_sq_at_z <= 0:
        raise ProfileNonPositive("局部光强必须为正", omega_sq=omega_sq_at_z)
    return model.coupling_ratio / (4 * model.delta_eff ** 2 * omega_sq_at_z)

# ================================
# 3. 相位方差
# ================================

def _checked_profile(profile: IntensityProfile, t_m: float) -> np.ndarray:
    if t_m <= 0:
        raise PreconditionError("测量时间必须为正", t_m=t_m)
    total = profile.total
    if np.any(total <= 0):
        raise ProfileNonPositive("光强剖面存在非正采样点", min_value=float(np.min(total)))
    return total


def _resolve_coupling(model: StarkModel, profile: IntensityProfile, t_m: float,
                      n_in: Optional[float]) -> float:
    if n_in is None:
        return model.coupling_ratio
    if n_in <= 0:
        raise PreconditionError("入射光子数必须为正", n_in=n_in)
    return coupling_from_photon_number(float(profile.total[0]), profile.length, t_m, n_in)


def _phase_variance(model: StarkModel, params: AtomicParams, profile: IntensityProfile,
                    t_m: float, n_in: Optional[float], weight: np.ndarray) -> float:
    total = _checked_profile(profile, t_m)
    coupling = _resolve_coupling(model, profile, t_m, n_in)
    integral = simpson(weight / total, x=profile.z)
    prefactor = (params.kappa * params.gamma_r) ** 2 / (4 * model.delta_eff ** 2)
    return float(prefactor * coupling * integral / t_m)


def phase_variance(model: StarkModel, params: AtomicParams, profile: IntensityProfile,
                   t_m: float, n_in: Optional[float] = None) -> float:
    """ac-Stark 相位方差

    ⟨δφ²⟩ = (1/t_m)(κ²γ_r²/4Δ₀²)(℘²L/ℏ²C)∫₀ᴸ dz/|Ω(z)|²

    Args:
        model: ac-Stark 模型
        params: 原子参数（提供 κ、γ_r）
        profile: 光强剖面
        t_m: 测量时间
        n_in: 入射光子数；给出时按光子数映射覆盖 model.coupling_ratio

    Raises:
        ProfileNonPositive: 剖面存在 |Ω(z)|² ≤ 0
    """
    return _phase_variance(model, params, profile, t_m, n_in, np.ones_like(profile.z))


def phase_variance_squeezed(model: StarkModel, params: AtomicParams, profile: IntensityProfile,
                            t_m: float, n_in: Optional[float] = None) -> float:
    """相位压缩输入下的剩余相位方差

    被积函数乘以 1 − η(z)，η(z) = |Ω(z)|²/|Ω(0)|²；无损介质中完全补偿。
    """
    total = _checked_profile(profile, t_m)
    weight = 1.0 - total / total[0]
    return _phase_variance(model, params, profile, t_m, n_in, weight)


def noise_budget(eta: float, n_in: float, phase_var: float) -> NoiseBudget:
    """计数方差 η·n_in + η²·n_in²·⟨δφ²⟩ 的分解"""
    return NoiseBudget(
        shot_term=eta * n_in,
        stark_term=(eta * n_in) ** 2 * phase_var,
        phase_variance=phase_var,
    )

# ================================
# 4. 蒙特卡洛校验
# ================================

def _coarse_cells(profile: IntensityProfile, cells: int) -> Tuple[np.ndarray, np.ndarray]:
    """把剖面粗粒化为若干单元，返回单元长度 ℓ_j 与 w_j = ∫_cell dz/|Ω|²"""
    z = profile.z
    inverse = 1.0 / profile.total
    edges = np.linspace(0, len(z) - 1, min(cells, len(z) - 1) + 1).round().astype(int)
    lengths = np.diff(z[edges])
    weights = np.array([
        simpson(inverse[a:b + 1], x=z[a:b + 1]) if b - a >= 2 else trapezoid(inverse[a:b + 1], x=z[a:b + 1])
        for a, b in zip(edges[:-1], edges[1:])
    ])
    return lengths, weights


@dataclass
class _BlockMoments:
    count: int
    mean: float
    m2: float
    relative_mean: float
    relative_m2: float
    common_mean: float
    common_m2: float
    cell_sq: np.ndarray


def _run_block(seed_seq: np.random.SeedSequence, size: int, photons: np.ndarray,
               shift_scale: np.ndarray, weights: np.ndarray, phase_scale: float,
               classical_ratio: float) -> _BlockMoments:
    shot_seq, classical_seq = seed_seq.spawn(2)
    shot_rng = np.random.Generator(np.random.Philox(shot_seq))
    classical_rng = np.random.Generator(np.random.Philox(classical_seq))

    # 两个圆偏振分量各自独立的真空（散粒）涨落
    sigma = np.sqrt(photons)
    dn_plus = shot_rng.standard_normal((size, photons.size)) * sigma
    dn_minus = shot_rng.standard_normal((size, photons.size)) * sigma

    if classical_ratio > 0:
        common = classical_rng.standard_normal((size, photons.size)) * (classical_ratio * sigma)
        dn_plus = dn_plus + common
        dn_minus = dn_minus + common

    # δ±_j = ⟨δ±⟩_j·δN±/N̄，a±_j = w_j·δ±_j/2
    a_plus = 0.5 * weights * shift_scale * dn_plus / photons
    a_minus = 0.5 * weights * shift_scale * dn_minus / photons

    relative = a_plus - a_minus
    relative_total = relative.sum(axis=1)
    common_total = (a_plus + a_minus).sum(axis=1)
    phase = -phase_scale * relative_total

    mean = float(phase.mean())
    relative_mean = float(relative_total.mean())
    common_mean = float(common_total.mean())
    return _BlockMoments(
        count=size,
        mean=mean,
        m2=float(np.sum((phase - mean) ** 2)),
        relative_mean=relative_mean,
        relative_m2=float(np.sum((relative_total - relative_mean) ** 2)),
        common_mean=common_mean,
        common_m2=float(np.sum((common_total - common_mean) ** 2)),
        cell_sq=np.sum(relative ** 2, axis=0),
    )


def _merge(blocks: List[_BlockMoments], statistic: str = "") -> Tuple[int, float, float]:
    """按块合并某个统计量的均值与二阶中心矩（Chan 并行算法）

    statistic 为空时合并相位本身，否则合并 "relative" 或 "common" 对应的字段。
    """
    prefix = f"{statistic}_" if statistic else ""
    count, mean, m2 = 0, 0.0, 0.0
    for block in blocks:
        block_mean = getattr(block, f"{prefix}mean")
        total = count + block.count
        delta = block_mean - mean
        mean += delta * block.count / total
        m2 += getattr(block, f"{prefix}m2") + delta ** 2 * count * block.count / total
        count = total
    return count, mean, m2


def montecarlo_stark_oracle(model: StarkModel, params: AtomicParams, profile: IntensityProfile,
                            samples: Optional[int] = None, seed: Optional[int] = None,
                            t_m: float = 1.0, classical_noise_ratio: float = 0.0,
                            cells: Optional[int] = None, block_size: Optional[int] = None,
                            max_workers: Optional[int] = None) -> MonteCarloResult:
    """蒙特卡洛抽样校验相位方差

    剖面粗粒化为 cells 个单元，单元 j 内每个圆偏振分量在 t_m 内的平均光子数
    N̄_j = ℓ_j·Ī_j·t_m/(2·coupling)，Ī_j = ℓ_j/w_j。两个分量的散粒涨落相互独立，
    可选的共模经典涨落对两个分量取同一样本（幅度为散粒涨落的 classical_noise_ratio 倍），
    来自独立子流，因此不改变相对频移的样本。

    样本按 block_size 分块，每块使用 SeedSequence 派生的 Philox 子流并行计算，
    结果按矩合并，与线程调度无关。

    Returns:
        MonteCarloResult: 经验均值、方差、标准误差及解析值
    """
    mc = get_mc_config()
    samples = samples or mc.samples
    seed = mc.seed if seed is None else seed
    cells = cells or mc.cells
    block_size = block_size or mc.block_size
    max_workers = max_workers or mc.max_workers

    if samples < 2:
        raise PreconditionError("样本数过少", samples=samples)
    if model.coupling_ratio <= 0:
        raise PreconditionError("耦合系数必须为正", coupling_ratio=model.coupling_ratio)
    _checked_profile(profile, t_m)

    lengths, weights = _coarse_cells(profile, cells)
    harmonic_intensity = lengths / weights
    photons = lengths * harmonic_intensity * t_m / (2 * model.coupling_ratio)
    shift_scale = harmonic_intensity / (2 * model.delta_eff)
    phase_scale = params.kappa * params.gamma_r

    sizes = [block_size] * (samples // block_size)
    if samples % block_size:
        sizes.append(samples % block_size)
    children = np.random.SeedSequence(seed).spawn(len(sizes))

    logger.info("蒙特卡洛抽样开始", samples=samples, blocks=len(sizes), cells=len(weights), seed=seed)
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        blocks = list(executor.map(
            lambda args: _run_block(args[0], args[1], photons, shift_scale, weights,
                                    phase_scale, classical_noise_ratio),
            zip(children, sizes),
        ))

    count, mean, m2 = _merge(blocks)
    variance = m2 / (count - 1)
    relative_variance = _merge(blocks, "relative")[2] / (count - 1)
    common_variance = _merge(blocks, "common")[2] / (count - 1)
    cell_variance = sum(b.cell_sq for b in blocks) / count

    analytic = phase_variance(model, params, profile, t_m)
    # 与 relative_shift_variance_density 同一 1/4 归一
    density_scale = model.coupling_ratio / (4 * model.delta_eff ** 2 * t_m)

    result = MonteCarloResult(
        mean=mean,
        variance=variance,
        mean_stderr=float(np.sqrt(variance / count)),
        variance_stderr=float(variance * np.sqrt(2.0 / (count - 1))),
        analytic_variance=analytic,
        relative_shift_variance=relative_variance,
        common_mode_variance=common_variance,
        cell_relative_variance=cell_variance,
        cell_relative_variance_analytic=density_scale * weights,
        samples=count,
        seed=seed,
        classical_noise_ratio=classical_noise_ratio,
    )
    logger.info("蒙特卡洛抽样完成", variance=variance, analytic=analytic,
                relative_error=result.relative_error)
    return result


__all__ = [
    "StarkModel",
    "NoiseBudget",
    "MonteCarloResult",
    "coupling_from_photon_number",
    "mean_stark_shift",
    "stark_shift_total",
    "relative_shift_variance_density",
    "phase_variance",
    "phase_variance_squeezed",
    "noise_budget",
    "montecarlo_stark_oracle",
]
