"""
ac-Stark 噪声模型测试：谱密度、相位方差、蒙特卡洛校验
"""

import math

import numpy as np
import pytest

from magsim.atomic import AtomicParams
from magsim.exceptions import PreconditionError, ProfileNonPositive
from magsim.propagation import IntensityProfile, cell_length_for_transmission, linear_profile
from magsim.stark_noise import (
    StarkModel,
    _BlockMoments,
    _merge,
    mean_stark_shift,
    montecarlo_stark_oracle,
    noise_budget,
    phase_variance,
    phase_variance_squeezed,
    relative_shift_variance_density,
    stark_shift_total,
)

N_IN = 1e12
T_M = 1.0


def _closed_form_variance(params, omega0_sq, eta, n_in):
    return (omega0_sq ** 2 * (1 - eta) * math.log(1 / eta)
            / (params.delta_eff ** 2 * params.gamma0 ** 2 * n_in))


def _linear_cell_variance(gamma0, delta_eff, omega0_sq, eta=0.1):
    params = AtomicParams(gamma0=gamma0, delta_eff=delta_eff)
    L = cell_length_for_transmission(params, omega0_sq, eta)
    z = np.linspace(0.0, L, 2049)
    profile = IntensityProfile.from_total(z, linear_profile(params, omega0_sq, z))
    return phase_variance(StarkModel(delta_eff=delta_eff), params, profile, T_M, n_in=N_IN)


@pytest.fixture
def stark_model(params, linear_cell):
    return StarkModel.from_photon_number(
        params.delta_eff, linear_cell["omega0_sq"], linear_cell["length"], T_M, N_IN,
    )


class TestStarkModel:
    """模型构造与频移"""

    def test_mean_shift(self):
        model = StarkModel(delta_eff=1e3)
        assert mean_stark_shift(model, 2.0) == pytest.approx(1e-3)
        assert stark_shift_total(model, 2.0) == pytest.approx(2e-3)

    def test_zero_delta_rejected(self):
        with pytest.raises(PreconditionError):
            StarkModel(delta_eff=0.0)

    def test_negative_coupling_rejected(self):
        with pytest.raises(PreconditionError):
            StarkModel(delta_eff=1e3, coupling_ratio=-1.0)

    def test_coupling_from_photon_number(self):
        model = StarkModel.from_photon_number(1e3, 10.0, 2.0, 3.0, 60.0)
        assert model.coupling_ratio == pytest.approx(1.0)

    def test_spectral_density(self):
        model = StarkModel(delta_eff=10.0, coupling_ratio=8.0)
        assert relative_shift_variance_density(model, 0.5) == pytest.approx(8.0 / (4 * 100.0 * 0.5))
        with pytest.raises(ProfileNonPositive):
            relative_shift_variance_density(model, 0.0)


class TestPhaseVariance:
    """相位方差求积"""

    def test_linear_profile_closed_form(self, params, linear_cell, stark_model):
        expected = _closed_form_variance(params, linear_cell["omega0_sq"], linear_cell["eta"], N_IN)
        variance = phase_variance(stark_model, params, linear_cell["profile"], T_M)
        assert variance == pytest.approx(expected, rel=1e-6)

    def test_photon_number_override(self, params, linear_cell):
        model = StarkModel(delta_eff=params.delta_eff)
        variance = phase_variance(model, params, linear_cell["profile"], T_M, n_in=N_IN)
        expected = _closed_form_variance(params, linear_cell["omega0_sq"], linear_cell["eta"], N_IN)
        assert variance == pytest.approx(expected, rel=1e-6)

    def test_variance_scales_inversely_with_photons(self, params, linear_cell):
        model = StarkModel(delta_eff=params.delta_eff)
        low = phase_variance(model, params, linear_cell["profile"], T_M, n_in=1e10)
        high = phase_variance(model, params, linear_cell["profile"], T_M, n_in=1e12)
        assert low == pytest.approx(100 * high, rel=1e-12)

    def test_variance_scales_inversely_with_measurement_time(self, params, linear_cell):
        model = StarkModel(delta_eff=params.delta_eff, coupling_ratio=1.0)
        short = phase_variance(model, params, linear_cell["profile"], 1.0)
        long = phase_variance(model, params, linear_cell["profile"], 2.0)
        assert short == pytest.approx(2 * long, rel=1e-12)

    def test_variance_scales_inversely_with_delta_squared(self, params, linear_cell):
        near = phase_variance(StarkModel(delta_eff=1e3, coupling_ratio=1.0), params,
                              linear_cell["profile"], T_M)
        far = phase_variance(StarkModel(delta_eff=2e3, coupling_ratio=1.0), params,
                             linear_cell["profile"], T_M)
        assert near == pytest.approx(4 * far, rel=1e-12)

    @pytest.mark.parametrize("gamma0,delta_eff,omega0_sq", [
        (5e-5, 2e3, 100.0),
        (1e-4, 3e3, 300.0),
    ])
    def test_dimensionless_invariance(self, gamma0, delta_eff, omega0_sq):
        # |Ω(0)|²/(Δ₀γ₀) = 10³，η = 0.1
        reference = _linear_cell_variance(1e-4, 1e3, 100.0)
        assert _linear_cell_variance(gamma0, delta_eff, omega0_sq) == pytest.approx(reference, rel=1e-9)

    def test_squeezed_reduction(self, params, linear_cell, stark_model):
        eta = linear_cell["eta"]
        plain = phase_variance(stark_model, params, linear_cell["profile"], T_M)
        squeezed = phase_variance_squeezed(stark_model, params, linear_cell["profile"], T_M)
        log_inv = math.log(1 / eta)
        assert squeezed / plain == pytest.approx((log_inv + eta - 1) / log_inv, rel=1e-6)

    def test_lossless_cell_fully_compensated(self, params, stark_model):
        profile = IntensityProfile.from_total(np.linspace(0.0, 10.0, 65), np.full(65, 2.0))
        assert phase_variance(stark_model, params, profile, T_M) > 0
        assert phase_variance_squeezed(stark_model, params, profile, T_M) == 0.0

    @pytest.mark.parametrize("eta", [0.02, 0.3, 0.9])
    def test_squeezed_never_exceeds_plain(self, params, eta):
        L = cell_length_for_transmission(params, 100.0, eta)
        z = np.linspace(0.0, L, 513)
        profile = IntensityProfile.from_total(z, linear_profile(params, 100.0, z))
        model = StarkModel(delta_eff=params.delta_eff)
        plain = phase_variance(model, params, profile, T_M, n_in=N_IN)
        squeezed = phase_variance_squeezed(model, params, profile, T_M, n_in=N_IN)
        assert 0 < squeezed <= plain

    def test_nonpositive_profile_rejected(self, params, stark_model):
        profile = IntensityProfile.from_total(np.linspace(0, 1, 5), np.array([1.0, 0.5, 0.0, 0.5, 1.0]))
        with pytest.raises(ProfileNonPositive):
            phase_variance(stark_model, params, profile, T_M)

    def test_nonpositive_measurement_time_rejected(self, params, linear_cell, stark_model):
        with pytest.raises(PreconditionError):
            phase_variance(stark_model, params, linear_cell["profile"], 0.0)


class TestNoiseBudget:
    """计数方差分解"""

    def test_budget_terms(self):
        budget = noise_budget(0.5, 100.0, 1e-3)
        assert budget.shot_term == pytest.approx(50.0)
        assert budget.stark_term == pytest.approx(2.5)
        assert budget.total == pytest.approx(52.5)
        assert not budget.stark_limited

    def test_stark_limited(self):
        assert noise_budget(0.5, 100.0, 1.0).stark_limited

    def test_negative_variance_rejected(self):
        with pytest.raises(PreconditionError):
            noise_budget(0.5, 100.0, -1.0)


class TestMonteCarlo:
    """蒙特卡洛抽样"""

    def test_matches_analytic_variance(self, params, linear_cell, stark_model):
        result = montecarlo_stark_oracle(stark_model, params, linear_cell["profile"],
                                         samples=200_000, seed=7, t_m=T_M, cells=32)
        assert result.samples == 200_000
        assert result.relative_error < 0.05
        assert abs(result.variance - result.analytic_variance) < 5 * result.variance_stderr \
            + 1e-3 * result.analytic_variance
        assert abs(result.mean) < 5 * result.mean_stderr
        assert np.allclose(result.cell_relative_variance, result.cell_relative_variance_analytic, rtol=0.05)

    def test_deterministic_for_fixed_seed(self, params, linear_cell, stark_model):
        first = montecarlo_stark_oracle(stark_model, params, linear_cell["profile"],
                                        samples=40_000, seed=11, t_m=T_M, cells=16)
        second = montecarlo_stark_oracle(stark_model, params, linear_cell["profile"],
                                         samples=40_000, seed=11, t_m=T_M, cells=16, max_workers=1)
        assert first.variance == second.variance
        assert first.mean == second.mean

    def test_common_mode_noise_cancels(self, params, linear_cell, stark_model):
        shot_only = montecarlo_stark_oracle(stark_model, params, linear_cell["profile"],
                                            samples=40_000, seed=3, t_m=T_M, cells=16)
        classical = montecarlo_stark_oracle(stark_model, params, linear_cell["profile"],
                                            samples=40_000, seed=3, t_m=T_M, cells=16,
                                            classical_noise_ratio=10.0)
        assert classical.relative_shift_variance == pytest.approx(shot_only.relative_shift_variance, rel=1e-9)
        assert classical.variance == pytest.approx(shot_only.variance, rel=1e-9)
        assert classical.common_mode_variance > 50 * shot_only.common_mode_variance

    def test_block_means_are_pooled(self, params, linear_cell, stark_model):
        result = montecarlo_stark_oracle(stark_model, params, linear_cell["profile"],
                                         samples=20_000, seed=5, t_m=T_M, cells=8, block_size=500)
        phase_scale = params.kappa * params.gamma_r
        assert result.variance == pytest.approx(phase_scale ** 2 * result.relative_shift_variance, rel=1e-9)

    def test_merge_matches_concatenated_samples(self):
        rng = np.random.default_rng(9)
        chunks = [rng.normal(loc, 1.0, size) for loc, size in ((0.0, 50), (3.0, 70), (-2.0, 31))]

        def moments(values):
            return float(values.mean()), float(np.sum((values - values.mean()) ** 2))

        blocks = []
        for chunk in chunks:
            mean, m2 = moments(chunk)
            relative_mean, relative_m2 = moments(2 * chunk)
            common_mean, common_m2 = moments(chunk + 5)
            blocks.append(_BlockMoments(chunk.size, mean, m2, relative_mean, relative_m2,
                                        common_mean, common_m2, np.zeros(1)))
        pooled = np.concatenate(chunks)

        count, mean, m2 = _merge(blocks)
        assert count == pooled.size
        assert mean == pytest.approx(pooled.mean(), rel=1e-12)
        assert m2 / (count - 1) == pytest.approx(np.var(pooled, ddof=1), rel=1e-12)
        assert _merge(blocks, "relative")[2] / (count - 1) == pytest.approx(np.var(2 * pooled, ddof=1), rel=1e-12)
        assert _merge(blocks, "common")[2] / (count - 1) == pytest.approx(np.var(pooled, ddof=1), rel=1e-12)

    def test_requires_coupling(self, params, linear_cell):
        with pytest.raises(PreconditionError):
            montecarlo_stark_oracle(StarkModel(delta_eff=params.delta_eff), params,
                                    linear_cell["profile"], samples=100)

    def test_result_dict(self, params, linear_cell, stark_model):
        result = montecarlo_stark_oracle(stark_model, params, linear_cell["profile"],
                                         samples=1_000, seed=1, t_m=T_M, cells=8)
        record = result.to_dict()
        assert record["samples"] == 1_000
        assert record["seed"] == 1
        assert "relative_error" in record

    @pytest.mark.slow
    def test_full_sample_count(self, params, linear_cell, stark_model):
        result = montecarlo_stark_oracle(stark_model, params, linear_cell["profile"],
                                         samples=1_000_000, seed=20240601, t_m=T_M)
        assert result.relative_error < 0.01
