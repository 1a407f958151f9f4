import math

import numpy as np
import pytest

from sqzratio import (
    ChannelModel,
    NoiseSpec,
    ScanSpec,
    SqueezeState,
    Trace,
    db_from_linear,
    detect_turning_points,
    detected_variance,
    segment_monotone,
    synthesize_trace,
    synthesize_trace_from_variance,
)
from sqzratio.synth import moving_average, robust_noise_db

from conftest import make_trace


class TestScanSpec:
    def test_defaults_are_valid(self):
        scan = ScanSpec()
        assert scan.total_samples == 2048
        assert scan.segment_bounds() == [(0, 1024), (1024, 2048)]

    def test_rejects_tiny_segments(self):
        with pytest.raises(ValueError):
            ScanSpec(n_samples=8)

    def test_rejects_degenerate_endpoints(self):
        with pytest.raises(ValueError):
            ScanSpec(theta_start=1.0, theta_end=1.0)

    def test_ramp_must_map_one_to_one(self):
        with pytest.raises(ValueError):
            ScanSpec(ramp_distortion=(0.9, 0.2))  # sums to 1.1

    def test_ramp_must_be_monotone(self):
        with pytest.raises(ValueError):
            ScanSpec(ramp_distortion=(-1.0, 2.0))  # derivative negative at 0

    def test_quadratic_ramp_endpoints_fixed(self):
        scan = ScanSpec(ramp_distortion=(0.9, 0.1))
        assert float(scan.phase_fraction(0.0)) == 0.0
        assert float(scan.phase_fraction(1.0)) == pytest.approx(1.0, abs=1e-12)

    def test_thetas_alternate_direction(self):
        scan = ScanSpec(n_samples=64, theta_start=0.0, theta_end=1.0, n_sweeps=3)
        th = scan.thetas()
        assert th[0] == 0.0 and th[63] == 1.0
        assert th[64] == 1.0 and th[127] == 0.0
        assert th[128] == 0.0


class TestSynthesize:
    def test_flat_trace_for_vacuum(self):
        trace = synthesize_trace(
            SqueezeState(r=0.0), ChannelModel(eta=0.9, dark=0.05), ScanSpec(), qnl_dbm=-59.4
        )
        assert np.allclose(trace.power_dbm, -59.4, atol=1e-12)

    def test_noiseless_matches_closed_form(self, bench_state, bench_channel):
        scan = ScanSpec(n_samples=512, theta_start=-0.6, theta_end=3.2, n_sweeps=2)
        trace = synthesize_trace(bench_state, bench_channel, scan, qnl_dbm=-59.4)
        expected = (
            db_from_linear(detected_variance(bench_state, scan.thetas(), bench_channel)) - 59.4
        )
        assert np.max(np.abs(trace.power_dbm - expected)) < 1e-9

    def test_fixed_seed_is_bit_identical(self, bench_state, bench_channel):
        a = synthesize_trace(bench_state, bench_channel, noise=NoiseSpec(0.3, 7))
        b = synthesize_trace(bench_state, bench_channel, noise=NoiseSpec(0.3, 7))
        assert np.array_equal(a.power_dbm, b.power_dbm)
        c = synthesize_trace(bench_state, bench_channel, noise=NoiseSpec(0.3, 8))
        assert not np.array_equal(a.power_dbm, c.power_dbm)

    def test_benchmark_channel_extremes(self):
        # benchmark channel: squeezing around -4 dB, anti-squeezing around +6.9 dB
        trace = make_trace(n_samples=4096, n_sweeps=1)
        rel = trace.power_dbm - trace.qnl_dbm
        assert rel.min() == pytest.approx(-4.0, abs=0.1)
        assert rel.max() == pytest.approx(6.9, abs=0.1)

    def test_unit_r_lossless_extremes(self):
        trace = make_trace(r=1.0, eta=1.0, gap_db=math.inf, n_samples=8192, n_sweeps=1)
        rel = trace.power_dbm - trace.qnl_dbm
        assert rel.min() == pytest.approx(-8.68588963806504, abs=5e-3)
        assert rel.max() == pytest.approx(+8.68588963806504, abs=5e-3)

    def test_ramp_distortion_moves_crossings_but_not_levels(self):
        straight = make_trace(n_samples=4096, n_sweeps=1)
        bent = make_trace(n_samples=4096, n_sweeps=1, ramp=(0.9, 0.1))
        assert bent.power_dbm.min() == pytest.approx(straight.power_dbm.min(), abs=1e-3)
        assert bent.power_dbm.max() == pytest.approx(straight.power_dbm.max(), abs=1e-3)
        # the same dB level is reached at different scan positions
        target = straight.qnl_dbm
        xs_straight = np.nonzero(np.diff(np.sign(straight.power_dbm - target)))[0]
        xs_bent = np.nonzero(np.diff(np.sign(bent.power_dbm - target)))[0]
        assert np.max(np.abs(xs_straight - xs_bent)) > 10

    def test_meta_carries_references(self, bench_state, bench_channel):
        trace = synthesize_trace(bench_state, bench_channel, qnl_dbm=-59.4)
        assert trace.qnl_dbm == -59.4
        assert trace.dark_dbm == pytest.approx(-70.0, abs=1e-12)
        assert trace.meta["r"] == 0.948

    def test_dark_free_channel_has_minus_inf_dark(self, bench_state):
        trace = synthesize_trace(bench_state, ChannelModel(eta=1.0), qnl_dbm=0.0)
        assert trace.dark_dbm == -math.inf

    def test_variance_callable_must_be_positive(self, bench_channel):
        scan = ScanSpec(n_samples=64, theta_start=0.0, theta_end=1.0, n_sweeps=1)
        with pytest.raises(ValueError):
            synthesize_trace_from_variance(
                lambda th: np.zeros_like(th), bench_channel, scan
            )


class TestTraceValidation:
    def test_requires_meta_keys(self):
        with pytest.raises(ValueError):
            Trace(x=np.arange(4.0), power_dbm=np.zeros(4), meta={"qnl_dbm": 0.0})

    def test_requires_qnl_above_dark(self):
        with pytest.raises(ValueError):
            Trace(
                x=np.arange(4.0),
                power_dbm=np.zeros(4),
                meta={"qnl_dbm": -60.0, "dark_dbm": -50.0},
            )

    def test_requires_finite_samples(self):
        with pytest.raises(ValueError):
            Trace(
                x=np.array([0.0, math.inf]),
                power_dbm=np.zeros(2),
                meta={"qnl_dbm": 0.0, "dark_dbm": -10.0},
            )

    def test_requires_increasing_scan_coordinate(self):
        with pytest.raises(ValueError):
            Trace(
                x=np.array([0.0, 2.0, 1.0]),
                power_dbm=np.zeros(3),
                meta={"qnl_dbm": 0.0, "dark_dbm": -10.0},
            )


class TestSegmentation:
    def test_exact_bounds_with_scan(self, bench_state, bench_channel):
        scan = ScanSpec(n_samples=512, theta_start=-0.6, theta_end=3.2, n_sweeps=2)
        trace = synthesize_trace(bench_state, bench_channel, scan)
        assert segment_monotone(trace, scan) == [(0, 512), (512, 1024)]

    def test_single_sweep_is_one_segment(self, bench_state, bench_channel):
        scan = ScanSpec(n_samples=256, theta_start=-0.6, theta_end=3.2, n_sweeps=1)
        trace = synthesize_trace(bench_state, bench_channel, scan)
        assert segment_monotone(trace, scan) == [(0, 256)]

    def test_bounds_from_metadata(self, bench_state, bench_channel):
        scan = ScanSpec(n_samples=512, theta_start=-0.6, theta_end=3.2, n_sweeps=2)
        trace = synthesize_trace(bench_state, bench_channel, scan)
        assert segment_monotone(trace) == [(0, 512), (512, 1024)]

    def test_scan_length_mismatch_rejected(self, bench_state, bench_channel):
        trace = synthesize_trace(bench_state, bench_channel, ScanSpec(n_samples=512))
        with pytest.raises(ValueError):
            segment_monotone(trace, ScanSpec(n_samples=100))

    def test_short_trace_rejected(self):
        trace = Trace(
            x=np.arange(8.0), power_dbm=np.zeros(8), meta={"qnl_dbm": 0.0, "dark_dbm": -10.0}
        )
        with pytest.raises(ValueError):
            segment_monotone(trace)

    def test_turning_points_on_noisy_three_sweep_trace(self):
        # reversal at a generic phase, noise 0.3 dB; boundaries within 2 samples
        n = 1024
        scan = ScanSpec(n_samples=n, theta_start=-0.6, theta_end=2.9, n_sweeps=3)
        trace = synthesize_trace(
            SqueezeState(r=0.948),
            ChannelModel.from_gap_db(0.77, 10.6),
            scan,
            NoiseSpec(0.3, 21),
        )
        stripped = Trace(
            x=trace.x,
            power_dbm=trace.power_dbm,
            meta={"qnl_dbm": trace.qnl_dbm, "dark_dbm": trace.dark_dbm},
        )
        segments = segment_monotone(stripped)
        boundaries = sorted({edge for seg in segments for edge in seg})
        assert boundaries[0] == 0 and boundaries[-1] == 3 * n
        interior = boundaries[1:-1]
        assert len(interior) == 2
        for found, true in zip(interior, (n, 2 * n)):
            assert abs(found - true) <= 2

    def test_detector_finds_nothing_on_single_sweep(self):
        trace = make_trace(n_samples=2048, n_sweeps=1)
        assert detect_turning_points(trace.power_dbm) == []


class TestSignalHelpers:
    def test_moving_average_preserves_constant(self):
        assert np.allclose(moving_average(np.full(100, 3.3), 9), 3.3)

    def test_moving_average_window_one_is_identity(self):
        y = np.random.default_rng(0).normal(size=50)
        assert np.array_equal(moving_average(y, 1), y)

    def test_robust_noise_recovers_sigma(self):
        rng = np.random.default_rng(3)
        theta = np.linspace(0, 10, 8192)
        smooth_part = 5.0 * np.sin(theta)
        noisy = smooth_part + rng.normal(0.0, 0.3, theta.size)
        est = robust_noise_db(noisy)
        assert est == pytest.approx(0.3, rel=0.1)

    def test_robust_noise_ignores_smooth_curvature(self):
        trace = make_trace(n_samples=2048, n_sweeps=1)
        assert robust_noise_db(trace.power_dbm) < 1e-3
