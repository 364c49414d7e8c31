import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from skreflect.gauss import build_conditional_covariance
from skreflect.model import (OBSERVATIONS, ModelParams, SampleBatch, derived_snrs,
                             sample_channels, sample_observations,
                             sample_observations_given_eve_csi, to_db)

from conftest import sample_cov_se

N = 100_000


class TestParams:
    def test_derived_snrs_examples(self):
        snr, snr_eve = derived_snrs(ModelParams(1.0, 1.0, alpha=0.05))
        # 0.05**2 is not exactly 0.0025 in binary floating point
        assert snr == 1.0 and snr_eve == 0.05**2 * 1.0 * 1.0
        assert snr_eve == pytest.approx(0.0025, rel=1e-15)
        assert derived_snrs(ModelParams(3.0, 7.0, alpha=0.0))[1] == 0.0
        assert derived_snrs(ModelParams(10.0, 4.0, alpha=0.5)) == (10.0, 10.0)

    @pytest.mark.parametrize("bad", [
        {"sigma2": -1.0}, {"sigma2_e": -0.1}, {"rho_ab": 1.01}, {"rho_e": -1.5},
        {"alpha": 1.0}, {"sigma2": float("nan")}, {"alpha": float("inf")},
    ])
    def test_rejects_invalid(self, bad):
        values = {"sigma2": 1.0, **bad}
        with pytest.raises(ValueError):
            ModelParams(**values)

    def test_from_db_round_trip(self):
        p = ModelParams.from_db(30.0, 20.0, alpha=0.05)
        snr, snr_eve = derived_snrs(p)
        assert to_db(snr) == pytest.approx(30.0, abs=1e-12)
        assert to_db(snr_eve) == pytest.approx(20.0, abs=1e-12)
        assert p.sigma2_e == pytest.approx(40.0)

    def test_from_db_needs_exactly_one_eve_axis(self):
        with pytest.raises(ValueError):
            ModelParams.from_db(10.0)
        with pytest.raises(ValueError):
            ModelParams.from_db(10.0, 0.0, sigma2_e=1.0)
        with pytest.raises(ValueError):
            ModelParams.from_db(10.0, 0.0, alpha=0.0)

    def test_to_db_of_zero(self):
        assert to_db(0.0) == -math.inf


class TestChannels:
    @pytest.mark.parametrize("rho", [1.0, 0.9, 0.0, -1.0])
    def test_legitimate_correlation(self, rho):
        ch = sample_channels(ModelParams(1.0, rho_ab=rho), N, seed=3)
        r = np.corrcoef(ch.h_ba, ch.h_ab)[0, 1]
        assert r == pytest.approx(rho, abs=0.01)

    def test_degenerate_pair_is_exact_multiple(self):
        ch = sample_channels(ModelParams(2.0, rho_ab=1.0, rho_e=-1.0), 1000, seed=0)
        np.testing.assert_array_equal(ch.h_ab, ch.h_ba)
        np.testing.assert_array_equal(ch.h_be, -ch.h_ae)

    def test_variances(self):
        ch = sample_channels(ModelParams(4.0, sigma2_e=0.25), N, seed=1)
        assert np.var(ch.h_ba) == pytest.approx(4.0, rel=0.02)
        assert np.var(ch.h_be) == pytest.approx(0.25, rel=0.02)

    def test_pairs_independent(self):
        ch = sample_channels(ModelParams(1.0, rho_ab=0.9, rho_e=0.9), N, seed=5)
        for a in (ch.h_ba, ch.h_ab):
            for b in (ch.h_ae, ch.h_be):
                x = np.column_stack([a, b])
                cov, se = sample_cov_se(x, 0, 1)
                assert abs(cov) < 4 * se

    def test_zero_eve_variance(self):
        ch = sample_channels(ModelParams(1.0, sigma2_e=0.0), 100, seed=0)
        assert not ch.h_ae.any() and not ch.h_be.any()

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            sample_channels(ModelParams(1.0), 0, seed=0)


class TestObservations:
    def test_seed_determinism(self, fig_params):
        a = sample_observations(fig_params, 500, seed=11)
        b = sample_observations(fig_params, 500, seed=11)
        c = sample_observations(fig_params, 500, seed=12)
        assert a.data.tobytes() == b.data.tobytes()
        assert a.data.tobytes() != c.data.tobytes()

    def test_batch_is_read_only(self, fig_params):
        batch = sample_observations(fig_params, 10, seed=0)
        with pytest.raises(ValueError):
            batch.data[0, 0] = 1.0

    def test_alpha_zero_eve_columns_are_noise(self):
        batch = sample_observations(ModelParams(10.0, alpha=0.0), N, seed=2)
        for col in ("y_E3", "y_E4"):
            assert np.var(batch.column(col)) == pytest.approx(1.0, abs=0.02)

    def test_legitimate_variance(self):
        batch = sample_observations(ModelParams(1.0), N, seed=2)
        assert np.var(batch.column("y_A")) == pytest.approx(2.0, abs=0.05)

    def test_moments_match_analytic(self):
        p = ModelParams(sigma2=4.0, sigma2_e=2.0, rho_ab=0.9, rho_e=0.4, alpha=0.5)
        x = sample_observations(p, N, seed=8).data
        s2, se2, a = p.sigma2, p.sigma2_e, p.alpha
        expected = np.diag([s2 + 1, s2 + 1, a * a * s2 * se2 + 1, a * a * s2 * se2 + 1])
        expected[0, 1] = expected[1, 0] = p.rho_ab * s2
        # E[h_ba^2 h_ae] = 0 etc.; only the E3/E4 pair couples through both correlations
        expected[2, 3] = expected[3, 2] = a * a * p.rho_ab * s2 * p.rho_e * se2
        for i in range(4):
            se_mean = x[:, i].std(ddof=1) / math.sqrt(N)
            assert abs(x[:, i].mean()) < 4 * se_mean
            for j in range(i, 4):
                cov, se = sample_cov_se(x, i, j)
                assert abs(cov - expected[i, j]) < 4 * se, (i, j, cov, expected[i, j])

    def test_eve_variance(self, fig_params):
        x = sample_observations(fig_params, N, seed=4).column("y_E3")
        expected = fig_params.alpha**2 * fig_params.sigma2 * fig_params.sigma2_e + 1
        se = np.std((x - x.mean()) ** 2, ddof=1) / math.sqrt(N)
        assert abs(np.var(x) - expected) < 3 * se


class TestGivenEveCsi:
    def test_zero_eve_channels(self):
        batch = sample_observations_given_eve_csi(ModelParams(1.0), 0.0, 0.0, N, seed=0)
        for col in ("y_E3", "y_E4"):
            assert np.var(batch.column(col)) == pytest.approx(1.0, abs=0.02)

    def test_examples(self):
        p = ModelParams(1.0, alpha=0.05)
        x = sample_observations_given_eve_csi(p, 1.0, 0.0, N, seed=6).data
        var, se = sample_cov_se(x, 2, 2)
        assert abs(var - 1.0025) < 3 * se
        cov, se = sample_cov_se(x, 0, 2)
        assert abs(cov - 0.05) < 3 * se

    def test_matches_conditional_covariance(self):
        p = ModelParams(sigma2=5.0, sigma2_e=1.0, rho_ab=0.8, rho_e=0.1, alpha=0.4)
        h_ae, h_be = 1.3, -0.7
        x = sample_observations_given_eve_csi(p, h_ae, h_be, N, seed=9).data
        exact = build_conditional_covariance(p, h_ae, h_be).m
        for i in range(4):
            for j in range(i, 4):
                cov, se = sample_cov_se(x, i, j)
                assert abs(cov - exact[i, j]) < 4 * se, (i, j)


class TestSampleBatch:
    def test_csv_round_trip(self, tmp_path, fig_params):
        batch = sample_observations(fig_params, 50, seed=1)
        path = tmp_path / "batch.csv"
        batch.to_csv(path)
        back = SampleBatch.from_csv(path)
        assert back.columns == OBSERVATIONS
        np.testing.assert_array_equal(back.data, batch.data)

    def test_select_and_unknown_column(self, fig_params):
        batch = sample_observations(fig_params, 20, seed=1)
        np.testing.assert_array_equal(batch.select(["y_B", "y_A"])[:, 1], batch.column("y_A"))
        with pytest.raises(KeyError):
            batch.column("y_C")

    def test_shape_checks(self):
        with pytest.raises(ValueError):
            SampleBatch(("a", "b"), np.zeros((3, 3)))
        with pytest.raises(ValueError):
            SampleBatch(("a", "a"), np.zeros((3, 2)))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**63 - 1), n=st.integers(1, 50),
       alpha=st.floats(-0.99, 0.99), rho=st.floats(-1, 1))
def test_determinism_property(seed, n, alpha, rho):
    p = ModelParams(2.0, 0.5, rho_ab=rho, alpha=alpha)
    a = sample_observations(p, n, seed)
    b = sample_observations(p, n, seed)
    assert a.data.tobytes() == b.data.tobytes()
    assert a.data.shape == (n, 4) and np.isfinite(a.data).all()
