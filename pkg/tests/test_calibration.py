import math

import numpy as np
import pytest
from scipy.stats import norm

from calibration import (
    TW1_TABLE,
    calib_R,
    calib_U,
    calib_V,
    calib_W,
    calibrate_all,
    critical_value,
    kappa_panel,
    power_R,
    power_U,
    power_V,
    power_W,
    quantile_interpolator,
    rlrt_constants,
    spike_terms,
    test_statistic,
    tw1_cdf,
    tw_pvalue,
    tw_quantile,
    tw_table_check,
)
from mpcore import ct_value, phi, phi_inverse, series_constants_U, theta_nu, v_center
from schemas.errors import DomainError
from schemas.types import AspectRatio, MomentProfile, SpikeSpec, TestCalibration

RATIOS = AspectRatio(p=200, n=600)
GAMMA = MomentProfile(alpha_x=1.0, beta_x=1.5)


class TestNullCalibration:
    def test_W_null(self):
        calib = calib_W(RATIOS)
        assert calib.center == 200.0
        assert calib.mu == 0.0
        assert calib.sigma == pytest.approx(math.sqrt(2.0 / 3.0))
        assert calib_W(RATIOS, moments=GAMMA).sigma == pytest.approx(math.sqrt(3.5 / 3.0))

    def test_U_null(self):
        calib = calib_U(RATIOS)
        sc = series_constants_U(1.0 / 3.0)
        assert calib.center == pytest.approx(200 * ct_value(1.0 / 3.0))
        assert calib.mu == pytest.approx(sc.i1)
        assert calib.sigma == pytest.approx(math.sqrt(2.0 * sc.j1))
        assert calib.hypothesis == "H0"
        assert calib.reference == "normal"

    def test_V_null_center(self):
        assert calib_V(RATIOS).center == pytest.approx(200 * v_center(1.0 / 3.0))

    def test_beta_shifts_mean_by_I2(self):
        gauss = calib_U(RATIOS)
        gamma = calib_U(RATIOS, moments=GAMMA)
        assert gamma.mu - gauss.mu == pytest.approx(1.5 * series_constants_U(1.0 / 3.0).i2)

    def test_R_null(self):
        calib = calib_R(RATIOS)
        assert calib.center == pytest.approx(2.48803, abs=1e-5)
        root = math.sqrt(1.0 / 3.0)
        expected = 600 ** (-2.0 / 3.0) * (1 + root) * (1 + 1 / root) ** (1.0 / 3.0)
        assert calib.sigma == pytest.approx(expected)
        assert calib.reference == "tracy_widom"

    def test_rlrt_constants_domain(self):
        with pytest.raises(DomainError):
            rlrt_constants(0.0, 100)

    def test_calibrate_all_has_R_only_under_null(self):
        assert sorted(calibrate_all(RATIOS)) == ["R", "U", "V", "W"]
        assert sorted(calibrate_all(RATIOS, SpikeSpec.single(5.0))) == ["U", "V", "W"]


class TestSpikedCalibration:
    def test_W_single_spike(self):
        alpha = 5.0
        c = 199 / 600
        calib = calib_W(RATIOS, SpikeSpec.single(alpha))
        lam = phi(alpha, c)
        theta, _ = theta_nu(alpha, c)
        assert calib.center == 199.0
        assert calib.mu == pytest.approx(lam - c)
        assert calib.sigma == pytest.approx(math.sqrt(lam**2 * (2.0 / theta) / 600 + 2.0 * c))
        assert calib.hypothesis == "H1"

    def test_U_bulk_uses_p_minus_M(self):
        spikes = SpikeSpec(groups=((20.0, 2), (8.0, 1)))
        calib = calib_U(RATIOS, spikes)
        assert calib.center == pytest.approx(197 * ct_value(197 / 600))

    def test_spike_terms_follow_groups(self):
        spikes = SpikeSpec(groups=((20.0, 2), (8.0, 1)))
        terms = spike_terms(RATIOS, spikes, MomentProfile())
        assert [(t.alpha, t.d) for t in terms] == [(20.0, 2), (8.0, 1)]
        assert terms[0].phi == pytest.approx(phi(20.0, 197 / 600))

    def test_subcritical_spike_rejected(self):
        with pytest.raises(DomainError, match="supercritical"):
            calib_V(RATIOS, SpikeSpec.single(1.2))

    def test_rotation_invariant_for_gaussian(self):
        rng = np.random.default_rng(2)
        q, _ = np.linalg.qr(rng.standard_normal((200, 200)))
        rotated = SpikeSpec(groups=((5.0, 1),), basis=q[:, :1])
        a = calib_V(RATIOS, SpikeSpec.single(5.0))
        b = calib_V(RATIOS, rotated)
        assert a.sigma == pytest.approx(b.sigma, rel=1e-12)
        assert a.mu == pytest.approx(b.mu, rel=1e-12)

    def test_no_spikes_reduces_to_the_null(self):
        empty = SpikeSpec(groups=())
        for calib in (calib_U, calib_W, calib_V):
            null = calib(RATIOS)
            alt = calib(RATIOS, empty)
            assert alt.hypothesis == "H1"
            assert (alt.center, alt.mu, alt.sigma) == (null.center, null.mu, null.sigma)

    def test_spike_sign_of_shift(self):
        for calib in (calib_U, calib_W, calib_V):
            null = calib(RATIOS)
            alt = calib(RATIOS, SpikeSpec.single(601.0))
            assert alt.center + alt.mu > null.center + null.mu


class TestTracyWidom:
    def test_table_nodes_are_reproduced(self):
        for xi, t in TW1_TABLE:
            assert tw_quantile(xi) == pytest.approx(t, abs=1e-12)

    def test_quantile_is_decreasing_in_level(self):
        levels = np.linspace(0.001, 0.99, 60)
        values = [tw_quantile(x) for x in levels]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_out_of_table_level_rejected(self):
        with pytest.raises(DomainError):
            tw_quantile(0.0005)
        with pytest.raises(DomainError):
            tw_quantile(0.995)

    def test_interpolation_between_nodes(self):
        left = [row for row in TW1_TABLE if row[0] != 0.025]
        interp = quantile_interpolator(tuple(left))
        assert float(interp(norm.isf(0.025))) == pytest.approx(1.4537, abs=1e-2)

    def test_table_agrees_with_fredholm_determinant(self):
        rows = tw_table_check()
        assert len(rows) == len(TW1_TABLE)
        assert all(row["pass"] for row in rows), rows

    def test_cdf_is_monotone(self):
        values = [tw1_cdf(s) for s in (-4.0, -2.0, 0.0, 2.0, 4.0)]
        assert all(a < b for a, b in zip(values, values[1:]))
        assert values[0] < 0.01
        assert values[-1] > 0.999

    def test_pvalue_inside_and_outside_table(self):
        assert tw_pvalue(0.9793) == pytest.approx(0.05, abs=1e-6)
        assert tw_pvalue(-1.2686) == pytest.approx(0.5, abs=1e-6)
        far = tw_pvalue(5.0)
        assert 0.0 <= far < 1e-3
        assert far == pytest.approx(1.0 - tw1_cdf(5.0))
        assert tw_pvalue(-5.0) > 0.99


class TestDecision:
    def test_tie_at_threshold_does_not_reject(self):
        calib = TestCalibration(statistic_kind="W", center=0.0, mu=0.0, sigma=1.0)
        report = test_statistic(float(norm.isf(0.05)), calib, 0.05)
        assert report.reject is False
        assert report.p_value == pytest.approx(0.05)

    def test_W_at_its_center(self):
        report = test_statistic(200.0, calib_W(RATIOS), 0.05)
        assert report.z == 0.0
        assert report.p_value == pytest.approx(0.5)
        assert not report.reject

    def test_R_far_above_edge_rejects(self):
        calib = calib_R(RATIOS)
        report = test_statistic(calib.center + 10 * calib.sigma, calib, 0.05)
        assert report.reject
        assert report.p_value < 0.01

    def test_critical_values(self):
        assert critical_value(calib_W(RATIOS), 0.05) == pytest.approx(1.6448536, abs=1e-6)
        assert critical_value(calib_R(RATIOS), 0.05) == pytest.approx(0.9793)

    def test_H1_calibration_rejected(self):
        with pytest.raises(DomainError, match="H0"):
            test_statistic(1.0, calib_W(RATIOS, SpikeSpec.single(5.0)), 0.05)

    def test_bad_level_rejected(self):
        with pytest.raises(DomainError):
            test_statistic(1.0, calib_W(RATIOS), 1.0)

    @pytest.mark.parametrize("calib", [calib_U, calib_W, calib_V, calib_R])
    @pytest.mark.parametrize("delta", [-3.0, 0.25, 40.0])
    def test_shifting_raw_shifts_z_by_delta_over_sigma(self, calib, delta):
        null = calib(RATIOS)
        raw = null.center + null.mu + 0.1
        base = test_statistic(raw, null, 0.05).z
        shifted = test_statistic(raw + delta, null, 0.05).z
        assert shifted - base == pytest.approx(delta / null.sigma, rel=1e-9)


class TestPower:
    @pytest.mark.parametrize("fn", [power_U, power_W, power_V])
    def test_no_spikes_gives_size(self, fn):
        pred = fn(RATIOS, None, xi=0.05)
        assert pred.power == pytest.approx(0.05)
        assert pred.kappa == pytest.approx(-norm.isf(0.05))

    def test_R_without_spike_gives_size(self):
        assert power_R(RATIOS, None, xi=0.1).power == pytest.approx(0.1)

    def test_R_needs_simple_spike(self):
        with pytest.raises(DomainError, match="d1 = 1"):
            power_R(RATIOS, (5.0, 2))

    def test_R_half_power_at_the_threshold(self):
        mu_r, sigma_r = rlrt_constants(RATIOS.c_n, RATIOS.n)
        lam = mu_r + tw_quantile(0.05) * sigma_r
        alpha = phi_inverse(lam, RATIOS.with_spikes(1).c_nM)
        pred = power_R(RATIOS, (alpha, 1), s1_squared=2.0, xi=0.05)
        assert pred.kappa == pytest.approx(0.0, abs=1e-9)
        assert pred.power == pytest.approx(0.5, abs=1e-9)

    def test_power_grows_with_spike(self):
        preds = [power_W(RATIOS, SpikeSpec.single(a)) for a in (3.0, 5.0, 10.0, 20.0)]
        assert all(a.kappa < b.kappa for a, b in zip(preds, preds[1:]))
        assert all(a.power <= b.power for a, b in zip(preds, preds[1:]))
        assert preds[0].power > 0.05

    def test_huge_spike_has_full_power(self):
        spikes = SpikeSpec.single(601.0)
        assert power_U(RATIOS, spikes).power >= 0.99
        assert power_W(RATIOS, spikes).power >= 0.99
        assert power_R(RATIOS, (601.0, 1)).power >= 0.99
        assert power_V(RATIOS, spikes).power > 0.5

    def test_R_uses_the_spike_count_of_the_alternative(self):
        spikes = SpikeSpec(groups=((601.0, 1), (481.0, 1)))
        lead = spike_terms(RATIOS, spikes, MomentProfile())[0]
        pred = power_R(RATIOS, (601.0, 1), lead.s2, M=2)
        assert pred.kappa == pytest.approx(kappa_panel(RATIOS, spikes).kappa_R, rel=1e-12)
        assert power_R(RATIOS, (601.0, 1), M=2).kappa == pytest.approx(pred.kappa, rel=1e-12)
        with pytest.raises(DomainError):
            power_R(RATIOS, (601.0, 1), M=0)

    def test_subcritical_spike_rejected(self):
        with pytest.raises(DomainError):
            power_U(RATIOS, SpikeSpec.single(1.1))


class TestKappaPanel:
    def test_moderate_spike_ordering(self):
        panel = kappa_panel(RATIOS, SpikeSpec.single(5.0))
        assert panel.ordering() == ["V", "U", "W", "R"]
        assert panel.label == "R"
        assert panel.w_can_beat_r is None

    def test_large_spike_label(self):
        panel = kappa_panel(RATIOS, SpikeSpec.single(601.0))
        assert panel.label == "W"
        assert set(panel.ordering()[-2:]) == {"W", "R"}

    def test_empty_panel(self):
        panel = kappa_panel(RATIOS, None)
        z = norm.isf(0.05)
        assert panel.label == "none"
        assert panel.kappa_U == pytest.approx(-z)
        assert panel.kappa_R == pytest.approx(-z)

    def test_two_spike_scales(self):
        panel = kappa_panel(RATIOS, SpikeSpec(groups=((100.0, 1), (80.0, 1))))
        assert panel.w_scale is not None and panel.r_scale is not None
        assert panel.w_can_beat_r == (panel.w_scale < panel.r_scale)
        assert panel.kappa_R is not None

    def test_multiple_leading_spike_omits_R(self):
        panel = kappa_panel(RATIOS, SpikeSpec(groups=((20.0, 2),)))
        assert panel.kappa_R is None
        assert "R" not in panel.ordering()
