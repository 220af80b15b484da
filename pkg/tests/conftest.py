"""
magsim 测试公共夹具
"""

import copy
import logging

import numpy as np
import pytest

from magsim.atomic import AtomicParams
from magsim.config import config_manager
from magsim.propagation import IntensityProfile, cell_length_for_transmission, linear_profile


@pytest.fixture(autouse=True)
def restore_config():
    """每个测试结束后恢复全局配置"""
    snapshot = copy.deepcopy(config_manager.__dict__)
    yield
    config_manager.__dict__.update(snapshot)


@pytest.fixture
def params():
    """默认参数：γ₀ = 10⁻⁴γ，Δ₀ = 10³γ"""
    return AtomicParams()


@pytest.fixture
def linear_cell(params):
    """η = 0.1 的线性吸收剖面"""
    omega0_sq = 100.0
    eta = 0.1
    L = cell_length_for_transmission(params, omega0_sq, eta)
    z = np.linspace(0.0, L, 2049)
    profile = IntensityProfile.from_total(z, linear_profile(params, omega0_sq, z))
    return {"omega0_sq": omega0_sq, "eta": eta, "length": L, "profile": profile}


@pytest.fixture(autouse=True)
def restore_root_logger():
    """命令行入口会重置根日志器，测试结束后还原"""
    root = logging.getLogger()
    level, handlers = root.level, list(root.handlers)
    yield
    root.setLevel(level)
    root.handlers[:] = handlers
