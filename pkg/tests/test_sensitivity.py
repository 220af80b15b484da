"""
灵敏度模块测试：计数统计、信噪比、最佳工作点、SQL、功率扫描、广义量子极限
"""

import math

import numpy as np
import pytest

from magsim.atomic import AtomicParams
from magsim.exceptions import DegenerateEta, PreconditionError
from magsim.sensitivity import (
    DetectionResult,
    RegimeTag,
    count_variance,
    detection,
    eit_quantum_limit_consistency,
    eit_sensitivity_curve,
    faraday_counts,
    figure4_sweep,
    generic_quantum_limit,
    heisenberg_limit_note,
    min_detectable_shift,
    numeric_optimal_rabi_sq,
    omega_sq_from_power,
    opm_sensitivity_curve,
    optimal_eta,
    optimal_rabi_sq,
    optimize_quantum_limit,
    photon_number,
    power_from_omega_sq,
    snr,
    snr_squeezed,
    sql_factor_f,
    sql_factor_f_tilde,
    sql_min_shift,
    sql_table,
    stark_bracket,
    stark_phase_variance,
)

GAMMA0_TM = 1e3
LAMBDA_SQ_OVER_A = 1e-8
ETAS = [0.8, 0.1, 0.01]


def _loglog_slope(frame, first, second):
    x = frame["log10_power_ratio"].to_numpy()
    y = frame["log10_min_delta0_over_gamma0"].to_numpy()
    return (y[second] - y[first]) / (x[second] - x[first])


class TestCounting:
    """平衡探测计数"""

    def test_faraday_counts(self):
        assert faraday_counts(0.5, 100.0, 0.0) == 0.0
        assert faraday_counts(0.5, 100.0, math.pi / 2) == pytest.approx(50.0)
        assert faraday_counts(0.5, 100.0, 1e-3, small_angle=True) == pytest.approx(0.05)

    def test_faraday_counts_preconditions(self):
        with pytest.raises(PreconditionError):
            faraday_counts(0.0, 100.0, 0.1)
        with pytest.raises(PreconditionError):
            faraday_counts(0.5, -1.0, 0.1)

    def test_count_variance_shot_only(self):
        assert count_variance(0.5, 100.0, 0.0) == pytest.approx(50.0)

    def test_detection_variance_above_shot_noise(self, params):
        result = detection(params, 1.0, 0.1, 1e12, delta0=1e-6)
        assert result.count_variance >= result.shot_noise
        assert result.shot_noise == pytest.approx(1e11)

    def test_detection_matches_snr(self, params):
        result = detection(params, 1.0, 0.1, 1e12, delta0=1e-6)
        assert result.snr == pytest.approx(snr(params, 1.0, 0.1, 1e12, delta0=1e-6), rel=1e-12)

    def test_detection_result_rejects_sub_shot_variance(self):
        with pytest.raises(PreconditionError):
            DetectionResult(mean_counts=1.0, count_variance=1.0, shot_noise=2.0)


class TestSignalToNoise:
    """信噪比闭式解"""

    def test_linear_in_delta0(self, params):
        single = snr(params, 1.0, 0.1, 1e12, delta0=1e-6)
        double = snr(params, 1.0, 0.1, 1e12, delta0=2e-6)
        assert double == pytest.approx(2 * single, rel=1e-12)
        assert snr(params, 1.0, 0.1, 1e12, delta0=0.0) == 0.0

    def test_sign_follows_delta0(self, params):
        assert snr(params, 1.0, 0.1, 1e12, delta0=-1e-6) < 0
        assert snr(params, 1.0, 0.1, 1e12, delta0=1e-6) > 0

    def test_shot_limited_value(self, params):
        # |Ω(0)|² ≪ Δ₀γ₀ 时 SNR → (δ₀/γ₀)ln(1/η)√(ηn)
        value = snr(params, 1e-6, 0.1, 1e12, delta0=1e-6)
        expected = 1e-2 * math.log(10.0) * math.sqrt(0.1 * 1e12)
        assert value == pytest.approx(expected, rel=1e-6)

    def test_scale_invariance(self, params):
        scaled = params.with_(delta_eff=10 * params.delta_eff)
        assert snr(scaled, 10.0, 0.1, 1e12, delta0=1e-6) == pytest.approx(
            snr(params, 1.0, 0.1, 1e12, delta0=1e-6), rel=1e-12)

    def test_min_shift_gives_unit_snr(self, params):
        shift = min_detectable_shift(params, 1.0, 0.1, 1e12)
        assert snr(params, 1.0, 0.1, 1e12, delta0=shift) == pytest.approx(1.0, rel=1e-12)

    def test_squeezed_snr_not_worse(self, params):
        for eta in ETAS:
            omega0_sq = optimal_rabi_sq(params, eta)
            assert snr_squeezed(params, omega0_sq, eta, 1e12, delta0=1e-6) >= \
                snr(params, omega0_sq, eta, 1e12, delta0=1e-6)

    def test_stark_phase_variance(self, params):
        eta, n_in, omega0_sq = 0.1, 1e12, 100.0
        expected = omega0_sq ** 2 * (1 - eta) * math.log(1 / eta) / (1e6 * 1e-8 * n_in)
        assert stark_phase_variance(params, omega0_sq, eta, n_in) == pytest.approx(expected, rel=1e-12)

    def test_degenerate_eta(self, params):
        with pytest.raises(DegenerateEta):
            optimal_rabi_sq(params, 0.0)
        with pytest.raises(DegenerateEta):
            optimal_rabi_sq(params, 1.0)
        with pytest.raises(DegenerateEta):
            sql_factor_f(1.0)


class TestOptimum:
    """最佳入射光强"""

    def test_closed_form_value(self, params):
        assert optimal_rabi_sq(params, 0.06) / (params.delta_eff * params.gamma0) == pytest.approx(2.5104, rel=1e-4)

    @pytest.mark.parametrize("eta", ETAS)
    def test_bracket_equals_two_at_optimum(self, params, eta):
        assert stark_bracket(params, optimal_rabi_sq(params, eta), eta) == pytest.approx(2.0, rel=1e-12)
        squeezed = optimal_rabi_sq(params, eta, squeezed=True)
        assert stark_bracket(params, squeezed, eta, squeezed=True) == pytest.approx(2.0, rel=1e-12)

    @pytest.mark.parametrize("eta", ETAS)
    def test_numeric_optimum_matches_closed_form(self, params, eta):
        numeric = numeric_optimal_rabi_sq(params, eta, photons_per_omega_sq=1e12)
        assert numeric == pytest.approx(optimal_rabi_sq(params, eta), rel=1e-3)


class TestStandardQuantumLimit:
    """SQL 因子与 δ₀^SQL"""

    def test_factor_values(self):
        assert sql_factor_f(0.01) == pytest.approx(1.00340, rel=1e-4)
        assert sql_factor_f(0.8) == pytest.approx(2.17794, rel=1e-4)

    def test_optimal_eta(self):
        eta_star = optimal_eta()
        assert 0.059 <= eta_star <= 0.060
        assert sql_factor_f(eta_star) < 1.0
        assert sql_factor_f(eta_star) <= sql_factor_f(0.05)
        assert sql_factor_f(eta_star) <= sql_factor_f(0.07)

    def test_squeezed_factor_bounds(self):
        etas = np.logspace(-6, np.log10(0.8), 40)
        ratios = np.array([sql_factor_f_tilde(eta) / sql_factor_f(eta) for eta in etas])
        assert np.all(ratios <= 1.0)
        # 比值随 η → 0 单调趋于 1
        assert np.all(np.diff(ratios) < 0)
        assert sql_factor_f_tilde(0.1) / sql_factor_f(0.1) >= 0.85
        assert sql_factor_f_tilde(0.01) / sql_factor_f(0.01) >= 0.85

    def test_sql_scaling(self, params):
        base = sql_min_shift(params, 0.1, LAMBDA_SQ_OVER_A, GAMMA0_TM)
        longer = sql_min_shift(params, 0.1, LAMBDA_SQ_OVER_A, 4 * GAMMA0_TM)
        detuned = sql_min_shift(params.with_(delta_eff=4 * params.delta_eff), 0.1, LAMBDA_SQ_OVER_A, GAMMA0_TM)
        assert longer == pytest.approx(base / 2, rel=1e-12)
        assert detuned == pytest.approx(base / 2, rel=1e-12)

    def test_sql_preconditions(self, params):
        with pytest.raises(PreconditionError):
            sql_min_shift(params, 0.1, 0.0, GAMMA0_TM)
        with pytest.raises(PreconditionError):
            sql_min_shift(params, 0.1, LAMBDA_SQ_OVER_A, -1.0)

    @pytest.mark.parametrize("eta", ETAS)
    def test_unit_snr_at_optimum_is_sqrt2_times_sql(self, params, eta):
        omega_opt = optimal_rabi_sq(params, eta)
        n_opt = photon_number(power_from_omega_sq(params, omega_opt), GAMMA0_TM, LAMBDA_SQ_OVER_A)
        ratio = min_detectable_shift(params, omega_opt, eta, n_opt) / sql_min_shift(
            params, eta, LAMBDA_SQ_OVER_A, GAMMA0_TM)
        assert ratio == pytest.approx(math.sqrt(2.0), rel=1e-9)

    def test_sql_table(self, params):
        table = sql_table(params, ETAS, LAMBDA_SQ_OVER_A, GAMMA0_TM)
        assert list(table["eta"]) == ETAS
        assert np.allclose(table["snr_unit_shift_over_sql"], math.sqrt(2.0), rtol=1e-9)
        assert np.allclose(table["omega_opt_sq_numeric_over_delta_gamma0"],
                           table["omega_opt_sq_over_delta_gamma0"], rtol=1e-3)
        assert np.all(table["sql_squeezed_over_gamma0"] <= table["sql_over_gamma0"])

    def test_heisenberg_note(self):
        assert "Heisenberg" in heisenberg_limit_note()


class TestPowerMapping:
    """功率归一化"""

    def test_photon_number(self):
        assert photon_number(1.0, GAMMA0_TM, LAMBDA_SQ_OVER_A) == pytest.approx(8 * math.pi * 1e11)
        values = photon_number(np.array([1.0, 2.0]), GAMMA0_TM, LAMBDA_SQ_OVER_A)
        assert values.shape == (2,)
        assert values[1] == pytest.approx(2 * values[0])

    def test_omega_round_trip(self, params):
        omega0_sq = omega_sq_from_power(params, 5.0)
        assert omega0_sq == pytest.approx(1.5e-3)
        assert power_from_omega_sq(params, omega0_sq) == pytest.approx(5.0)

    def test_photon_number_preconditions(self):
        with pytest.raises(PreconditionError):
            photon_number(1.0, 0.0, LAMBDA_SQ_OVER_A)


class TestSensitivityCurves:
    """P/P₀ 扫描"""

    @pytest.fixture
    def sweep(self, params):
        power_grid = np.logspace(-2, 8, 201)
        return figure4_sweep(params, ETAS, power_grid, GAMMA0_TM, LAMBDA_SQ_OVER_A)

    def test_curve_columns(self, sweep):
        curves, opm = sweep
        assert [curve.eta for curve in curves] == ETAS
        assert {"power_ratio", "min_delta0", "regime", "linear_valid"} <= set(curves[0].frame.columns)
        assert opm.metadata["model"] == "schematic comparison"

    def test_asymptotic_slopes(self, sweep):
        curves, _ = sweep
        for curve in curves:
            assert _loglog_slope(curve.frame, 0, 1) == pytest.approx(-0.5, abs=0.05)
            assert _loglog_slope(curve.frame, -2, -1) == pytest.approx(0.5, abs=0.05)

    def test_single_interior_minimum(self, sweep):
        curves, _ = sweep
        for curve in curves:
            signs = np.sign(np.diff(curve.frame["min_delta0"].to_numpy()))
            assert np.count_nonzero(np.diff(signs) != 0) == 1
            best = curve.optimum["power_ratio"]
            assert 1e2 < best < 1e4

    def test_minimum_tracks_sql(self, params, sweep):
        curves, _ = sweep
        for curve in curves:
            sql = sql_min_shift(params, curve.eta, LAMBDA_SQ_OVER_A, GAMMA0_TM)
            assert curve.frame["min_delta0"].min() == pytest.approx(math.sqrt(2.0) * sql, rel=2e-3)

    def test_ordering_follows_sql_factor(self, sweep):
        curves, _ = sweep
        minima = [curve.frame["min_delta0"].min() for curve in curves]
        factors = [sql_factor_f(curve.eta) for curve in curves]
        assert list(np.argsort(minima)) == list(np.argsort(factors))

    def test_regime_tags(self, sweep):
        curves, _ = sweep
        for curve in curves:
            tags = [point.regime_tag for point in curve.points]
            assert tags[0] is RegimeTag.SHOT_LIMITED
            assert tags[-1] is RegimeTag.STARK_LIMITED
            assert tags.count(RegimeTag.OPTIMUM) == 1

    def test_low_power_flagged_invalid(self, sweep):
        curves, _ = sweep
        for curve in curves:
            assert not curve.frame["linear_valid"].iloc[0]
            assert curve.frame["linear_valid"].iloc[-1]
            assert curve.metadata["invalid_points"] > 0

    def test_opm_plateau(self, sweep):
        _, opm = sweep
        assert _loglog_slope(opm.frame, -2, -1) == pytest.approx(0.0, abs=0.05)
        assert opm.points[-1].regime_tag in (RegimeTag.BROADENING_LIMITED, RegimeTag.OPTIMUM)

    def test_opm_low_power_slope(self, params):
        grid = np.logspace(-8, -7, 11)
        opm = opm_sensitivity_curve(params, 1.0, grid, GAMMA0_TM, LAMBDA_SQ_OVER_A)
        assert _loglog_slope(opm.frame, 0, -1) == pytest.approx(-0.5, abs=0.01)

    def test_opm_advantage(self, sweep):
        curves, _ = sweep
        for curve in curves:
            assert curve.metadata["opm_advantage"] >= 3.0

    def test_opm_stark_broadening(self, params):
        grid = np.logspace(-2, 8, 51)
        plain = opm_sensitivity_curve(params, 1.0, grid, GAMMA0_TM, LAMBDA_SQ_OVER_A)
        stark = opm_sensitivity_curve(params, 1.0, grid, GAMMA0_TM, LAMBDA_SQ_OVER_A, include_stark=True)
        assert np.all(stark.frame["min_delta0"] >= plain.frame["min_delta0"])

    def test_empty_grid_rejected(self, params):
        with pytest.raises(PreconditionError):
            eit_sensitivity_curve(params, 0.1, [], GAMMA0_TM, LAMBDA_SQ_OVER_A)

    def test_empty_eta_list_rejected(self, params):
        with pytest.raises(PreconditionError):
            figure4_sweep(params, [], np.logspace(0, 1, 3), GAMMA0_TM, LAMBDA_SQ_OVER_A)


class TestQuantumLimit:
    """广义量子极限"""

    def test_shot_noise_only(self):
        assert generic_quantum_limit(2.0, 0.0, 100.0) == pytest.approx(0.05)

    @pytest.mark.parametrize("beta", [1e-6, 1e-3, 1e-1])
    def test_numeric_optimum_matches_closed_form(self, beta):
        result = optimize_quantum_limit(3.0, beta)
        assert result.n_var_opt == pytest.approx(1 / beta, rel=1e-6)
        assert result.delta_omega_min == pytest.approx(math.sqrt(2 * beta) / 3.0, rel=1e-6)
        assert result.regime == RegimeTag.OPTIMUM.value

    def test_zero_beta_has_no_optimum(self):
        result = optimize_quantum_limit(3.0, 0.0)
        assert result.n_var_opt == math.inf
        assert result.delta_omega_min == 0.0
        assert result.regime == RegimeTag.SHOT_LIMITED.value

    def test_preconditions(self):
        with pytest.raises(PreconditionError):
            optimize_quantum_limit(3.0, -1.0)
        with pytest.raises(PreconditionError):
            optimize_quantum_limit(0.0, 1e-3)
        with pytest.raises(PreconditionError):
            generic_quantum_limit(1.0, 1e-3, 0.0)

    def test_eit_consistency_report(self, params):
        omega_opt = optimal_rabi_sq(params, 0.1)
        n_in = photon_number(power_from_omega_sq(params, omega_opt), GAMMA0_TM, LAMBDA_SQ_OVER_A)
        report = eit_quantum_limit_consistency(params, 0.1, omega_opt, n_in)
        assert report["chi_ratio"] == pytest.approx(math.log(10.0) / params.gamma0)
        assert report["generic_limit"] > 0
        assert math.isfinite(report["ratio"]) and report["ratio"] > 0


def test_delta0_defaults_to_params(params):
    shifted = AtomicParams(delta0=1e-6)
    assert snr(shifted, 1.0, 0.1, 1e12) == pytest.approx(snr(params, 1.0, 0.1, 1e12, delta0=1e-6))
