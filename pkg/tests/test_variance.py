import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqzratio import (
    ChannelModel,
    SqueezeState,
    VarianceSample,
    apply_loss,
    db_from_linear,
    detected_variance,
    linear_from_db,
    mu_variance,
    r_from_squeeze_db,
    squeeze_db_from_r,
)


def series_cosh(x: float, terms: int = 40) -> float:
    """Independent Taylor-series evaluation of cosh, used as an oracle."""
    total, term = 0.0, 1.0
    for k in range(terms):
        total += term
        term *= x * x / ((2 * k + 1) * (2 * k + 2))
    return total


class TestSqueezeState:
    def test_vacuum_allowed(self):
        assert SqueezeState(r=0.0).r == 0.0

    def test_negative_r_rejected(self):
        with pytest.raises(ValueError):
            SqueezeState(r=-0.1)

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            SqueezeState(r=math.nan)

    def test_theta_s_normalized_to_half_turn(self):
        assert SqueezeState(r=1.0, theta_s=math.pi + 0.3).theta_s == pytest.approx(0.3)
        assert SqueezeState(r=1.0, theta_s=-0.2).theta_s == pytest.approx(math.pi - 0.2)
        assert 0.0 <= SqueezeState(r=1.0, theta_s=17.77).theta_s < math.pi


class TestChannelModel:
    def test_validation(self):
        with pytest.raises(ValueError):
            ChannelModel(eta=1.2)
        with pytest.raises(ValueError):
            ChannelModel(eta=0.5, qnl=0.0)
        with pytest.raises(ValueError):
            ChannelModel(eta=0.5, qnl=1.0, dark=1.0)

    def test_from_gap_db(self):
        chan = ChannelModel.from_gap_db(0.77, 10.6)
        assert chan.dark == pytest.approx(10.0 ** -1.06, rel=1e-12)
        assert ChannelModel.from_gap_db(0.5, math.inf).dark == 0.0
        with pytest.raises(ValueError):
            ChannelModel.from_gap_db(0.5, -3.0)


class TestMuVariance:
    def test_vacuum_is_qnl_everywhere(self):
        state = SqueezeState(r=0.0)
        for theta in np.linspace(-5, 5, 17):
            assert mu_variance(state, theta) == pytest.approx(1.0, abs=1e-15)

    def test_squeezed_quadrature_benchmark(self):
        # independent evaluation: exp(-2 * 0.948)
        assert mu_variance(SqueezeState(r=0.948), 0.0) == pytest.approx(
            math.exp(-1.896), rel=1e-12
        )
        assert mu_variance(SqueezeState(r=0.948), 0.0) == pytest.approx(
            0.150168091845475, rel=1e-12
        )
        assert float(db_from_linear(mu_variance(SqueezeState(r=0.948), 0.0))) == pytest.approx(
            -8.23, abs=0.01
        )

    def test_antisqueezed_quadrature_benchmark(self):
        v = mu_variance(SqueezeState(r=0.948), math.pi / 2)
        assert v == pytest.approx(math.exp(1.896), rel=1e-12)
        assert float(db_from_linear(v)) == pytest.approx(8.23, abs=0.01)

    def test_unit_r_diagonal_vs_series_cosh(self):
        # at theta = pi/4 the sinh term drops out and cosh(2) remains
        assert mu_variance(SqueezeState(r=1.0), math.pi / 4) == pytest.approx(
            series_cosh(2.0), rel=1e-12
        )

    @settings(max_examples=200, deadline=None)
    @given(
        r=st.floats(0.0, 5.0),
        theta_s=st.floats(-10.0, 10.0),
    )
    def test_minimum_uncertainty_product(self, r, theta_s):
        state = SqueezeState(r=r, theta_s=theta_s)
        prod = mu_variance(state, state.theta_s) * mu_variance(state, state.theta_s + math.pi / 2)
        assert prod == pytest.approx(1.0, rel=1e-10)

    @settings(max_examples=200, deadline=None)
    @given(
        r=st.floats(0.0, 5.0),
        theta=st.floats(-10.0, 10.0),
    )
    def test_pi_periodicity(self, r, theta):
        state = SqueezeState(r=r, theta_s=0.3)
        assert mu_variance(state, theta) == pytest.approx(
            mu_variance(state, theta + math.pi), abs=1e-12 * max(1.0, math.exp(2 * r))
        )

    def test_extremes_on_grid_through_the_extremal_angles(self):
        for r in (0.2, 0.948, 2.5):
            state = SqueezeState(r=r, theta_s=0.4)
            grid = state.theta_s + np.linspace(0.0, math.pi, 721)  # hits both extrema
            values = mu_variance(state, grid)
            assert values.min() == pytest.approx(math.exp(-2 * r), rel=1e-10)
            assert values.max() == pytest.approx(math.exp(2 * r), rel=1e-10)

    def test_always_positive(self):
        state = SqueezeState(r=6.0)
        assert np.all(mu_variance(state, np.linspace(0, math.pi, 10001)) > 0)


class TestApplyLoss:
    def test_full_loss_gives_qnl(self):
        assert apply_loss(123.4, 0.0) == 1.0
        assert apply_loss(0.01, 0.0) == 1.0

    def test_lossless_identity(self):
        assert apply_loss(6.653, 1.0) == pytest.approx(6.653, rel=1e-15)

    def test_partial_loss_benchmark(self):
        assert apply_loss(0.1503, 0.774) == pytest.approx(0.3423322, rel=1e-12)

    def test_out_of_range_eta_rejected(self):
        with pytest.raises(ValueError):
            apply_loss(2.0, 1.5)
        with pytest.raises(ValueError):
            apply_loss(2.0, -0.1)

    @settings(max_examples=100, deadline=None)
    @given(eta=st.floats(0.0, 1.0))
    def test_qnl_fixed_point(self, eta):
        assert apply_loss(1.0, eta) == pytest.approx(1.0, abs=1e-15)


class TestDetectedVariance:
    def test_collapses_to_mu_for_perfect_channel(self):
        state = SqueezeState(r=1.3, theta_s=0.2)
        chan = ChannelModel(eta=1.0, qnl=1.0, dark=0.0)
        thetas = np.linspace(-1, 4, 57)
        assert np.allclose(detected_variance(state, thetas, chan), mu_variance(state, thetas), rtol=1e-15)

    def test_squeezing_benchmark_with_dark_noise(self):
        # measured working point: eta 0.774, dark 10.6 dB below the QNL
        chan = ChannelModel.from_gap_db(0.774, 10.6)
        v = float(detected_variance(SqueezeState(r=0.948), 0.0, chan))
        assert v == pytest.approx(0.399519466166314, rel=1e-12)
        assert float(db_from_linear(v)) == pytest.approx(-3.98, abs=0.01)

    def test_antisqueezing_benchmark_with_dark_noise(self):
        chan = ChannelModel.from_gap_db(0.756, 10.6)
        v = float(detected_variance(SqueezeState(r=0.948), math.pi / 2, chan))
        assert v == pytest.approx(4.9057289937445, rel=1e-12)
        assert float(db_from_linear(v)) == pytest.approx(6.90, abs=0.01)

    def test_qnl_fixed_point_under_channel_sweeps(self):
        # the crossings do not move whatever the loss or dark level
        state = SqueezeState(r=1.0)
        theta_star = 0.5 * math.acos(math.tanh(1.0))
        for eta in (0.0, 0.25, 0.5, 0.77, 1.0):
            for gap_db in (math.inf, 20.0, 10.6, 3.0):
                chan = ChannelModel.from_gap_db(eta, gap_db)
                v = float(detected_variance(state, theta_star, chan))
                assert v == pytest.approx(chan.qnl, abs=1e-12)

    def test_strictly_monotone_in_eta_off_the_qnl(self):
        state = SqueezeState(r=0.948)
        etas = np.linspace(0.0, 1.0, 21)
        for theta in (0.0, 0.2, 1.0, math.pi / 2):
            values = [float(detected_variance(state, theta, ChannelModel(eta=e, dark=0.05))) for e in etas]
            diffs = np.diff(values)
            if mu_variance(state, theta) > 1.0:
                assert np.all(diffs > 0)
            else:
                assert np.all(diffs < 0)


class TestDbConversions:
    def test_identity(self):
        assert float(db_from_linear(1.0, 1.0)) == 0.0
        assert float(linear_from_db(0.0, 1.0)) == 1.0

    def test_benchmarks(self):
        assert float(db_from_linear(0.1503)) == pytest.approx(-8.23041019413092, rel=1e-12)
        assert float(linear_from_db(-4.0)) == pytest.approx(0.398107170553497, rel=1e-12)
        assert float(linear_from_db(10.6)) == pytest.approx(11.4815362149688, rel=1e-12)
        assert float(db_from_linear(4.898)) == pytest.approx(6.90018780788695, rel=1e-12)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            db_from_linear(0.0)
        with pytest.raises(ValueError):
            db_from_linear(1.0, ref=0.0)
        with pytest.raises(ValueError):
            db_from_linear(-2.0)

    @settings(max_examples=300, deadline=None)
    @given(exponent=st.floats(-6.0, 6.0), ref=st.floats(1e-3, 1e3))
    def test_round_trip_over_twelve_decades(self, exponent, ref):
        v = 10.0 ** exponent
        back = float(linear_from_db(db_from_linear(v, ref), ref))
        assert back == pytest.approx(v, rel=1e-12)


class TestSqueezeDbConversions:
    def test_benchmark(self):
        assert squeeze_db_from_r(0.948) == pytest.approx(-8.23422337688565, rel=1e-12)

    def test_round_trip(self):
        for r in (0.0, 0.2, 0.948, 3.0):
            assert r_from_squeeze_db(squeeze_db_from_r(r)) == pytest.approx(r, abs=1e-14)

    def test_domain(self):
        with pytest.raises(ValueError):
            squeeze_db_from_r(-1.0)
        with pytest.raises(ValueError):
            r_from_squeeze_db(+1.0)


def test_variance_sample_rejects_nonpositive():
    assert VarianceSample(theta=0.1, value=2.0).value == 2.0
    with pytest.raises(ValueError):
        VarianceSample(theta=0.0, value=0.0)
