# ============================================================================
# 文件：magsim/atomic.py
# 功能：Λ 型三能级原子的稳态响应
# 技术：numpy 实线性方程组直接求解、微扰闭式解、EIT 极化率
# ============================================================================

"""
Λ 型三能级原子模块

功能模块：
1. 原子参数（AtomicParams）与弛豫率 Γ_ab±、Γ_b−b+
2. c-number Bloch 方程稳态的精确解（8 个实未知量的线性方程组）
3. 最低阶微扰闭式解
4. EIT 极化率（近似式与完整三能级式）及功率展宽

单位约定：所有速率和 Rabi 频率以 γ 为单位，长度以 1/κ 为单位。
基矢顺序为 (b−, b+, a)，对应密度矩阵下标 0、1、2。
所有函数都是输入的纯函数，可在任意线程中并发调用。
"""

from dataclasses import dataclass, field, replace, asdict
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .config import get_numerics_config
from .exceptions import PreconditionError, SingularSystem, ZeroFieldError
from .utils import get_logger, warn_validity

logger = get_logger(__name__)

# ================================
# 1. 数据结构定义
# ================================

@dataclass(frozen=True)
class AtomicParams:
    """Λ 系统参数（以 γ 为单位的无量纲量）"""

    gamma: float = 1.0  # 光学跃迁横向线宽 γ
    gamma_r: float = 1.0  # 单支辐射线宽 γ_r（a→b+ 与 a→b− 各一支）
    gamma0: float = 1e-4  # 基态相干衰减 γ₀
    gamma0_r: float = 0.0  # 基态布居交换 γ₀r
    delta_big: float = 0.0  # 单光子失谐 Δ
    delta0: float = 0.0  # 塞曼双光子失谐 δ₀
    delta_eff: float = 1e3  # 非共振能级等效失谐 Δ₀
    kappa: float = 1.0  # 吸收尺度 κ = (3/4π)Nλ²

    def __post_init__(self):
        if not self.gamma > 0:
            raise PreconditionError("gamma 必须为正", gamma=self.gamma)
        if not self.gamma_r > 0:
            raise PreconditionError("gamma_r 必须为正", gamma_r=self.gamma_r)
        for name in ("gamma0", "gamma0_r", "kappa"):
            if getattr(self, name) < 0:
                raise PreconditionError(f"{name} 不能为负", **{name: getattr(self, name)})

        margin = get_numerics_config().validity_margin
        if self.gamma0 >= self.gamma:
            warn_validity("γ₀ 不小于 γ，超出 EIT 模型有效范围", gamma0=self.gamma0, gamma=self.gamma)
        if abs(self.delta_eff) < margin * self.gamma:
            warn_validity("Δ₀ 不远大于 γ，非共振能级近似失效", delta_eff=self.delta_eff, gamma=self.gamma)

    def with_(self, **changes: Any) -> "AtomicParams":
        """返回修改部分字段后的新参数"""
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class ComplexCoherences:
    """稳态密度矩阵元"""

    sigma_ab_plus: complex
    sigma_ab_minus: complex
    sigma_bmbp: complex
    populations: Tuple[float, float, float]  # (σ_b−b−, σ_b+b+, σ_aa)
    method: str = field(default="exact", compare=False)

    def density_matrix(self) -> np.ndarray:
        """按 (b−, b+, a) 基矢组装 3×3 厄米密度矩阵"""
        p_minus, p_plus, p_a = self.populations
        rho = np.diag(np.array([p_minus, p_plus, p_a], dtype=complex))
        rho[2, 1] = self.sigma_ab_plus
        rho[1, 2] = np.conj(self.sigma_ab_plus)
        rho[2, 0] = self.sigma_ab_minus
        rho[0, 2] = np.conj(self.sigma_ab_minus)
        rho[0, 1] = self.sigma_bmbp
        rho[1, 0] = np.conj(self.sigma_bmbp)
        return rho

    @property
    def trace(self) -> float:
        return float(sum(self.populations))

    def is_physical(self, tol: float = 1e-9) -> bool:
        """单位迹且半正定（容差内）"""
        eigenvalues = np.linalg.eigvalsh(self.density_matrix())
        return abs(self.trace - 1.0) < tol and bool(np.all(eigenvalues > -tol))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sigma_ab_plus": self.sigma_ab_plus,
            "sigma_ab_minus": self.sigma_ab_minus,
            "sigma_bmbp": self.sigma_bmbp,
            "populations": list(self.populations),
            "method": self.method,
        }

# ================================
# 2. 弛豫率
# ================================

def gamma_ab(params: AtomicParams, sign: int, stark_shift: float = 0.0) -> complex:
    """光学相干衰减率 Γ_ab± = γ + γ₀r/2 + i(Δ + δ± ± δ₀/2)

    Args:
        params: 原子参数
        sign: +1 对应 b+，−1 对应 b−
        stark_shift: 对应能级的 ac-Stark 频移 δ±
    """
    if sign not in (1, -1):
        raise PreconditionError("sign 只能取 ±1", sign=sign)
    return complex(
        params.gamma + params.gamma0_r / 2,
        params.delta_big + stark_shift + sign * params.delta0 / 2,
    )


def gamma_bb(params: AtomicParams, stark_plus: float = 0.0, stark_minus: float = 0.0) -> complex:
    """基态相干衰减率 Γ_b−b+ = γ₀ + γ₀r + i(δ₀ + δ₊ − δ₋)"""
    return complex(
        params.gamma0 + params.gamma0_r,
        params.delta0 + stark_plus - stark_minus,
    )

# ================================
# 3. 精确稳态解
# ================================

# 实未知量 v = [σ_b−b−, σ_b+b+, Re σ_ab+, Im σ_ab+, Re σ_ab−, Im σ_ab−, Re σ_b−b+, Im σ_b−b+]
# σ_aa 由迹守恒消去
_N_UNKNOWNS = 8


def _bloch_rhs(params: AtomicParams, omega_plus: complex, omega_minus: complex,
               g_plus: complex, g_minus: complex, g_ground: complex,
               v: np.ndarray) -> np.ndarray:
    p_minus, p_plus = v[0], v[1]
    x_plus = complex(v[2], v[3])
    x_minus = complex(v[4], v[5])
    s = complex(v[6], v[7])
    p_a = 1.0 - p_minus - p_plus

    dx_plus = -g_plus * x_plus + 1j * omega_plus * (p_plus - p_a) + 1j * omega_minus * s
    dx_minus = -g_minus * x_minus + 1j * omega_minus * (p_minus - p_a) + 1j * omega_plus * np.conj(s)
    ds = -g_ground * s + 1j * np.conj(omega_minus) * x_plus - 1j * omega_plus * np.conj(x_minus)

    exchange = params.gamma0_r * (p_minus - p_plus)
    transfer_plus = (1j * (np.conj(omega_plus) * x_plus - omega_plus * np.conj(x_plus))).real
    transfer_minus = (1j * (np.conj(omega_minus) * x_minus - omega_minus * np.conj(x_minus))).real
    dp_plus = exchange + params.gamma_r * p_a + transfer_plus
    dp_minus = -exchange + params.gamma_r * p_a + transfer_minus

    return np.array([
        dp_minus, dp_plus,
        dx_plus.real, dx_plus.imag,
        dx_minus.real, dx_minus.imag,
        ds.real, ds.imag,
    ])


def solve_bloch_exact(params: AtomicParams, omega_plus: complex, omega_minus: complex,
                      stark_plus: float = 0.0, stark_minus: float = 0.0) -> ComplexCoherences:
    """直接线性代数求 Bloch 方程稳态

    右端对实未知量是仿射的：rhs(v) = M v + c。逐列求出 M 后解 M v = −c。
    激发态布居方程由迹守恒闭合：σ̇_aa = −2γ_r σ_aa − Σ± i(Ω±* σ_ab± − c.c.)。

    Raises:
        SingularSystem: 条件数超过阈值（例如 Ω₊=Ω₋=0 且 γ₀r=0）
    """
    g_plus = gamma_ab(params, +1, stark_plus)
    g_minus = gamma_ab(params, -1, stark_minus)
    g_ground = gamma_bb(params, stark_plus, stark_minus)

    def rhs(v: np.ndarray) -> np.ndarray:
        return _bloch_rhs(params, complex(omega_plus), complex(omega_minus),
                          g_plus, g_minus, g_ground, v)

    offset = rhs(np.zeros(_N_UNKNOWNS))
    matrix = np.empty((_N_UNKNOWNS, _N_UNKNOWNS))
    for k, unit in enumerate(np.eye(_N_UNKNOWNS)):
        matrix[:, k] = rhs(unit) - offset

    condition = np.linalg.cond(matrix)
    threshold = get_numerics_config().singular_condition
    logger.debug("Bloch 稳态方程组", condition=float(condition))
    if not np.isfinite(condition) or condition > threshold:
        raise SingularSystem(
            "Bloch 稳态方程组奇异",
            condition=float(condition),
            omega_plus=omega_plus,
            omega_minus=omega_minus,
            gamma0_r=params.gamma0_r,
        )

    v = np.linalg.solve(matrix, -offset)
    p_minus, p_plus = float(v[0]), float(v[1])
    return ComplexCoherences(
        sigma_ab_plus=complex(v[2], v[3]),
        sigma_ab_minus=complex(v[4], v[5]),
        sigma_bmbp=complex(v[6], v[7]),
        populations=(p_minus, p_plus, 1.0 - p_minus - p_plus),
        method="exact",
    )

# ================================
# 4. 微扰闭式解
# ================================

def _dark_bloch_vector(c_plus: complex, c_minus: complex) -> np.ndarray:
    """暗态 |D⟩ = c₊|b−⟩ − c₋|b+⟩ 在 (b−, b+) 子空间的 Bloch 矢量"""
    product = c_plus * np.conj(c_minus)
    return np.array([-2 * product.real, 2 * product.imag, abs(c_plus) ** 2 - abs(c_minus) ** 2])


def _cross_matrix(n: np.ndarray) -> np.ndarray:
    """叉乘矩阵：_cross_matrix(n) @ v == n × v"""
    return np.array([
        [0.0, -n[2], n[1]],
        [n[2], 0.0, -n[0]],
        [-n[1], n[0], 0.0],
    ])


def solve_bloch_perturbative(params: AtomicParams, omega_plus: complex, omega_minus: complex,
                             stark_plus: float = 0.0, stark_minus: float = 0.0) -> ComplexCoherences:
    """γ₀、γ₀r、δ₀、δ± 最低阶的闭式解

    以公共光学衰减 Γ = γ + γ₀r/2 + i(Δ + (δ₊ + δ₋)/2) 绝热消去光学相干，
    基态 Bloch 矢量偏离暗态的部分 e 满足 3×3 方程
    [K + Re R + Im R·(n×)] e = K n，R = |Ω|²/Γ，n 为暗态 Bloch 矢量，
    K 含基态弛豫 γ₀ + γ₀r、进动 δ₀ + δ₊ − δ₋ 与布居交换 2γ₀r。
    两支光学失谐相同（δ₀ + δ₊ − δ₋ = 0）时结果与精确解一致，一般情况下相对误差为 O((δ₀ + δ₊ − δ₋)/γ)。

    布居与 σ_b−b+ 取暗态零阶值，σ_aa = 0。

    Raises:
        ZeroFieldError: |Ω|² = 0
    """
    op, om = complex(omega_plus), complex(omega_minus)
    total = abs(op) ** 2 + abs(om) ** 2
    if total == 0.0:
        raise ZeroFieldError("|Ω|² = 0，微扰解无定义")

    norm = np.sqrt(total)
    n = _dark_bloch_vector(op / norm, om / norm)
    optical = complex(params.gamma + params.gamma0_r / 2,
                      params.delta_big + (stark_plus + stark_minus) / 2)
    pumping = total / optical

    dephasing = params.gamma0 + params.gamma0_r
    precession = params.delta0 + stark_plus - stark_minus
    relaxation = np.array([
        [dephasing, precession, 0.0],
        [-precession, dephasing, 0.0],
        [0.0, 0.0, 2 * params.gamma0_r],
    ])
    system = relaxation + pumping.real * np.eye(3) + pumping.imag * _cross_matrix(n)
    e = np.linalg.solve(system, relaxation @ n)

    # 泄漏到亮态的份额决定激发态布居
    leak = float(n @ e)
    p_a = pumping.real * leak / (3 * pumping.real * leak + 2 * params.gamma_r)
    scale = -0.5j * (1 - 3 * p_a) / optical
    sigma_plus = scale * (om * complex(e[0], -e[1]) - op * e[2])
    sigma_minus = scale * (om * e[2] + op * complex(e[0], e[1]))
    logger.debug("微扰稳态", leak=leak, excited=p_a)

    # 暗态 |D⟩ ∝ Ω₊|b−⟩ − Ω₋|b+⟩
    return ComplexCoherences(
        sigma_ab_plus=sigma_plus,
        sigma_ab_minus=sigma_minus,
        sigma_bmbp=-op * np.conj(om) / total,
        populations=(abs(op) ** 2 / total, abs(om) ** 2 / total, 0.0),
        method="perturbative",
    )

# ================================
# 5. EIT 极化率与线宽
# ================================

def eit_susceptibility(params: AtomicParams, omega_drive: complex, two_photon_detuning: float) -> complex:
    """单光子共振下探测场的 EIT 极化率（双光子失谐的一阶近似）

    χ = (κγ_r/2)(−δ + iγ₀)/(|Ω_d|² + γγ₀)

    归一化使 χ″ 为振幅吸收系数（光强衰减系数为 2χ″），χ′ 为单位长度相移，
    与传播方程中强驱动场极限下的探测场衰减一致。
    """
    scale = params.kappa * params.gamma_r / 2
    denominator = abs(omega_drive) ** 2 + params.gamma * params.gamma0
    return scale * complex(-two_photon_detuning, params.gamma0) / denominator


def eit_susceptibility_full(params: AtomicParams, omega_drive: complex, two_photon_detuning: float) -> complex:
    """完整三能级驱动-探测极化率（Δ = 0）

    χ = (κγ_r/2)·i(γ₀ + iδ)/[(γ + iδ)(γ₀ + iδ) + |Ω_d|²]

    |δ| ≪ γ 时退化为 eit_susceptibility；Ω_d = 0 时为半宽 γ 的洛伦兹吸收线。
    """
    delta = two_photon_detuning
    scale = params.kappa * params.gamma_r / 2
    numerator = 1j * complex(params.gamma0, delta)
    denominator = complex(params.gamma, delta) * complex(params.gamma0, delta) + abs(omega_drive) ** 2
    return scale * numerator / denominator


def dispersion_absorption_ratio(params: AtomicParams, omega_drive: complex,
                                full: bool = False, step: Optional[float] = None) -> float:
    """δ = 0 处的色散-吸收比 (1/χ″)·dχ′/dδ，中心差分

    近似式给出严格的 −1/γ₀；完整式的偏差约为 (γ+γ₀)/(γγ₀+|Ω_d|²)。
    """
    susceptibility = eit_susceptibility_full if full else eit_susceptibility
    h = step if step is not None else 1e-3 * max(params.gamma0, 1e-12)
    slope = (susceptibility(params, omega_drive, h).real
             - susceptibility(params, omega_drive, -h).real) / (2 * h)
    return slope / susceptibility(params, omega_drive, 0.0).imag


def power_broadened_width(params: AtomicParams, omega: float, alpha: float) -> float:
    """功率展宽后的有效线宽 Γ_eff = γ₀ + α√(γ₀/γ)|Ω|

    Args:
        alpha: 量级为 1 的模型系数，由调用方给出
    """
    return params.gamma0 + alpha * np.sqrt(params.gamma0 / params.gamma) * abs(omega)


def critical_rabi_sq(params: AtomicParams, kind: str = "power") -> float:
    """临界 Rabi 频率平方

    kind="power": γγ₀（功率展宽开始）
    kind="stark": Δ₀γ₀（ac-Stark 展宽开始）
    """
    if kind == "power":
        return params.gamma * params.gamma0
    if kind == "stark":
        return abs(params.delta_eff) * params.gamma0
    raise ValueError(f"未知的临界频率类型: {kind}")


__all__ = [
    "AtomicParams",
    "ComplexCoherences",
    "gamma_ab",
    "gamma_bb",
    "solve_bloch_exact",
    "solve_bloch_perturbative",
    "eit_susceptibility",
    "eit_susceptibility_full",
    "dispersion_absorption_ratio",
    "power_broadened_width",
    "critical_rabi_sq",
]
