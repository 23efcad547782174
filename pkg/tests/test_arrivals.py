import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import chi2

from dealpacer.arrivals import (
    ConstantIntensity,
    DegenerateGridError,
    PiecewiseIntensity,
    SinusoidalIntensity,
    build_time_grid,
    cumulative_intensity,
    effective_arrival_prob,
    intensity_at,
    max_intensity,
    simulate_arrivals,
)


class TestIntensityAt:
    def test_constant(self):
        assert intensity_at(ConstantIntensity(12.0), 1.7) == 12.0

    def test_sinusoidal_zero_amplitude(self):
        model = SinusoidalIntensity(base=12.0, amplitude=0.0, period=1.0, phase=0.0)
        for t in [0.0, 0.33, 2.9]:
            assert intensity_at(model, t) == 12.0

    def test_piecewise_lookup(self):
        model = PiecewiseIntensity(breakpoints=(0.0, 1.0, 3.0), rates=(8.0, 16.0))
        assert intensity_at(model, 2.0) == 16.0
        assert intensity_at(model, 0.5) == 8.0
        assert intensity_at(model, 1.0) == 16.0  # left-closed

    def test_piecewise_out_of_coverage(self):
        model = PiecewiseIntensity(breakpoints=(0.0, 1.0, 3.0), rates=(8.0, 16.0))
        with pytest.raises(ValueError):
            intensity_at(model, 3.5)

    def test_sinusoidal_needs_nonnegative(self):
        with pytest.raises(ValueError):
            SinusoidalIntensity(base=4.0, amplitude=6.0, period=1.0)


class TestCumulativeIntensity:
    def test_constant(self):
        assert cumulative_intensity(ConstantIntensity(12.0), 0.0, 0.25) == 3.0

    def test_sinusoidal_full_period(self):
        model = SinusoidalIntensity(base=12.0, amplitude=4.0, period=1.0, phase=0.0)
        assert cumulative_intensity(model, 0.0, 1.0) == pytest.approx(12.0, abs=1e-12)

    def test_against_quadrature(self):
        model = SinusoidalIntensity(base=12.0, amplitude=4.0, period=1.0, phase=0.2)
        for t0, t1 in [(0.0, 1.0), (0.1, 0.7), (0.3, 2.9)]:
            expected, _ = quad(lambda t: intensity_at(model, t), t0, t1, epsabs=1e-12)
            assert cumulative_intensity(model, t0, t1) == pytest.approx(expected, abs=1e-9)

    def test_empty_interval(self):
        for model in [
            ConstantIntensity(5.0),
            SinusoidalIntensity(10.0, 3.0, 1.0),
            PiecewiseIntensity((0.0, 2.0), (4.0,)),
        ]:
            assert cumulative_intensity(model, 1.5, 1.5) == 0.0

    def test_piecewise_exact(self):
        model = PiecewiseIntensity(breakpoints=(0.0, 1.0, 3.0), rates=(8.0, 16.0))
        assert cumulative_intensity(model, 0.5, 2.0) == pytest.approx(0.5 * 8 + 1.0 * 16, abs=1e-12)

    def test_additivity(self):
        model = SinusoidalIntensity(base=12.0, amplitude=4.0, period=1.0, phase=0.1)
        cuts = np.linspace(0.0, 3.0, 101)
        pieces = sum(cumulative_intensity(model, a, b) for a, b in zip(cuts, cuts[1:]))
        assert pieces == pytest.approx(cumulative_intensity(model, 0.0, 3.0), abs=1e-12)

    def test_reversed_interval(self):
        with pytest.raises(ValueError):
            cumulative_intensity(ConstantIntensity(1.0), 2.0, 1.0)


class TestEffectiveArrivalProb:
    def test_target_increment(self):
        assert effective_arrival_prob(12.0, 0.05 / 12.0) == pytest.approx(0.05, abs=1e-15)

    def test_zero_rate(self):
        assert effective_arrival_prob(0.0, 123.0) == 0.0

    def test_large_increment_uses_exponential(self):
        assert effective_arrival_prob(12.0, 0.5) == pytest.approx(1.0 - math.exp(-6.0), abs=1e-12)

    def test_continuity_at_switch(self):
        below = effective_arrival_prob(1.0, 0.1)
        above = effective_arrival_prob(1.0, 0.1 + 1e-12)
        assert abs(below - above) < 0.1**2 / 2

    def test_monotone(self):
        rates = np.linspace(0.0, 30.0, 61)
        dts = np.linspace(0.0, 0.5, 41)
        for dt in dts:
            vals = [effective_arrival_prob(r, dt) for r in rates]
            assert all(b >= a for a, b in zip(vals, vals[1:]))
        for r in rates:
            vals = [effective_arrival_prob(r, dt) for dt in dts]
            assert all(b >= a for a, b in zip(vals, vals[1:]))
            assert all(0.0 <= v <= 1.0 for v in vals)


class TestBuildTimeGrid:
    def test_constant_uniform_grid(self):
        grid = build_time_grid(ConstantIntensity(12.0), 3.0, target=0.05)
        assert grid.n_steps == 720
        assert grid.times[0] == 0.0
        assert grid.times[-1] == 3.0
        dts = np.diff(grid.times)
        assert np.allclose(dts, 0.05 / 12.0, rtol=1e-9)
        assert np.allclose(grid.step_arrivals, 0.05, rtol=1e-9)

    def test_single_step(self):
        dt = 0.05 / 12.0
        grid = build_time_grid(ConstantIntensity(12.0), dt, target=0.05)
        assert grid.n_steps == 1
        assert grid.times[0] == 0.0 and grid.times[-1] == dt

    def test_adaptive_steps_track_intensity(self):
        model = SinusoidalIntensity(base=12.0, amplitude=6.0, period=1.0, phase=0.0)
        grid = build_time_grid(model, 3.0, target=0.05)
        rates = np.array([intensity_at(model, t) for t in grid.times[:-1]])
        raw = rates * np.diff(grid.times)
        assert np.all(raw[:-1] <= 0.05 + 1e-9)
        assert np.allclose(raw[:-1], 0.05, rtol=1e-9)
        # steps shrink where the intensity peaks
        dts = np.diff(grid.times)
        assert dts[np.argmax(rates)] < dts[np.argmin(rates)]

    def test_grid_consistency_with_cumulative(self):
        for model in [
            ConstantIntensity(12.0),
            SinusoidalIntensity(base=12.0, amplitude=6.0, period=1.0, phase=0.3),
        ]:
            grid = build_time_grid(model, 3.0, target=0.05)
            rates = np.array([intensity_at(model, t) for t in grid.times[:-1]])
            total = float(np.sum(rates * np.diff(grid.times)))
            exact = cumulative_intensity(model, 0.0, 3.0)
            assert abs(total - exact) <= 0.02 * exact

    def test_zero_stretch_advances(self):
        model = PiecewiseIntensity(breakpoints=(0.0, 1.0, 2.0), rates=(0.0, 10.0))
        grid = build_time_grid(model, 2.0, target=0.05)
        assert grid.times[-1] == 2.0
        # fallback steps cover the silent first year without arrivals
        silent = grid.step_arrivals[grid.times[:-1] < 1.0]
        assert np.all(silent == 0.0)

    def test_all_zero_intensity_rejected(self):
        with pytest.raises(DegenerateGridError):
            build_time_grid(ConstantIntensity(0.0), 3.0)


class TestSimulateArrivals:
    def test_mean_count(self):
        model = ConstantIntensity(12.0)
        counts = [len(simulate_arrivals(model, 3.0, seed=s)) for s in range(10_000)]
        assert abs(np.mean(counts) - 36.0) <= 0.2 * math.sqrt(36.0)

    def test_zero_intensity_empty(self):
        assert len(simulate_arrivals(ConstantIntensity(0.0), 3.0, seed=1)) == 0

    def test_determinism(self):
        model = SinusoidalIntensity(base=12.0, amplitude=4.0, period=1.0)
        a = simulate_arrivals(model, 3.0, seed=99)
        b = simulate_arrivals(model, 3.0, seed=99)
        np.testing.assert_array_equal(a, b)

    def test_arrivals_sorted_in_horizon(self):
        times = simulate_arrivals(ConstantIntensity(12.0), 3.0, seed=5)
        assert np.all(np.diff(times) > 0)
        assert np.all((times >= 0) & (times < 3.0))

    def test_thinning_shape_chi_square(self):
        model = SinusoidalIntensity(base=12.0, amplitude=4.0, period=1.0, phase=0.0)
        horizon = 1.0
        pooled = np.concatenate(
            [simulate_arrivals(model, horizon, seed=s) for s in range(100_000)]
        )
        n_bins = 20
        edges = np.linspace(0.0, horizon, n_bins + 1)
        observed, _ = np.histogram(pooled, bins=edges)
        total = cumulative_intensity(model, 0.0, horizon)
        probs = np.array(
            [cumulative_intensity(model, a, b) / total for a, b in zip(edges, edges[1:])]
        )
        expected = probs * len(pooled)
        stat = float(np.sum((observed - expected) ** 2 / expected))
        assert stat < chi2.ppf(0.95, df=n_bins - 1)


class TestMaxIntensity:
    def test_bounds_dominate(self):
        models = [
            ConstantIntensity(7.0),
            SinusoidalIntensity(base=10.0, amplitude=3.0, period=1.0, phase=0.4),
            PiecewiseIntensity(breakpoints=(0.0, 1.0, 3.0), rates=(8.0, 16.0)),
        ]
        for model in models:
            bound = max_intensity(model, 0.0, 3.0)
            ts = np.linspace(0.0, 3.0, 301)
            assert all(intensity_at(model, t) <= bound + 1e-12 for t in ts)
