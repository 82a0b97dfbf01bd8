import numpy as np
import pytest

from spinquench.evolve import TimeGrid, TimeSeries
from spinquench.scaling import (CollapseFamily, CollapseMember,
                                collapse_distance, estimate_nu,
                                kondo_scaling_window, low_pass, rescale_time,
                                tune_control_for_ratio)


def _series(values, t_max=None, dt=None, n_sites=10):
    values = np.asarray(values, dtype=float)
    if dt is None:
        dt = t_max / (len(values) - 1)
    grid = TimeGrid((len(values) - 1) * dt, dt)
    return TimeSeries(grid, values, {"n_sites": n_sites})


def _member_from_function(f, n, t_max_factor=2.0, dt=0.05, control=0.0):
    grid = TimeGrid(t_max_factor * n, dt)
    return CollapseMember(TimeSeries(grid, f(grid.times / n), {"n_sites": n}),
                          n, control)


class TestTuneControl:
    def test_tfic_paper_point(self):
        # N |lambda - 1| = 1 at nu = 1, N = 20 puts lambda at 0.95
        lam = tune_control_for_ratio("tfic", 20, 1.0, 1.0)
        assert lam == pytest.approx(0.95, abs=1e-12)

    def test_tfic_ratio_zero_is_critical(self):
        for n in (10, 14, 18):
            assert tune_control_for_ratio("tfic", n, 0.0, 1.0) == 1.0

    def test_tfic_unreachable_ratio(self):
        with pytest.raises(ValueError):
            tune_control_for_ratio("tfic", 4, 8.0, 1.0)

    def test_kondo_table_node_lookup(self):
        table = [(0.3, 10.0), (0.5, 4.0), (0.7, 2.5)]
        # target N/xi = 2 at N = 8 means xi = 4, an exact table node
        jp = tune_control_for_ratio("kondo", 8, 2.0, table)
        assert jp == pytest.approx(0.5, abs=1e-10)

    def test_kondo_interpolates_between_nodes(self):
        table = [(0.3, 10.0), (0.5, 4.0), (0.7, 2.5)]
        jp = tune_control_for_ratio("kondo", 12, 2.0, table)   # xi = 6
        assert 0.3 < jp < 0.5

    def test_kondo_extrapolates_with_fitted_law(self):
        # exact law xi = e^{0.5/J'}: inverting any target reproduces it
        table = [(jp, np.exp(0.5 / jp)) for jp in (0.4, 0.5, 0.6)]
        jp = tune_control_for_ratio("kondo", 20, 2.0, table)   # xi = 10 (outside)
        assert jp == pytest.approx(0.5 / np.log(10.0), abs=1e-6)

    def test_kondo_unreachable_target(self):
        table = [(0.5, 4.0), (0.7, 2.5), (0.9, 2.0)]
        with pytest.raises(ValueError):
            tune_control_for_ratio("kondo", 10, 8.0, table)  # xi = 1.25 -> J' > 1

    def test_unknown_model(self):
        with pytest.raises(ValueError):
            tune_control_for_ratio("xy", 10, 1.0, 1.0)


class TestRescaleTime:
    def test_abscissa_division(self):
        s = _series(np.zeros(51), t_max=50.0)
        curve = rescale_time(s, 10)
        assert curve.x[0] == 0.0
        assert curve.x[-1] == pytest.approx(5.0)

    def test_shared_scaling_function_collapses(self):
        f = lambda x: np.cos(3 * x) * np.exp(-x)
        fam = CollapseFamily([_member_from_function(f, n) for n in (8, 12, 16)], 1.0)
        # members sample x = t/N on different grids, so the metric is limited
        # by linear interpolation error, not exactly zero
        metric = collapse_distance(fam, (0.0, 2.0))
        assert metric.value < 1e-5

    def test_round_trip(self):
        s = _series(np.sin(np.linspace(0, 3, 31)), t_max=3.0)
        curve = rescale_time(s, 7)
        assert np.allclose(curve.x * 7, s.grid.times)
        assert np.allclose(curve.values, s.values)


class TestLowPass:
    def test_constant_unchanged(self):
        s = _series(np.full(101, 0.3), t_max=10.0)
        out = low_pass(s, 0.2)
        assert np.allclose(out.values, 0.3)

    def test_high_frequency_attenuated(self):
        t = np.linspace(0, 10, 1001)
        s = _series(np.cos(40 * t), dt=0.01)
        out = low_pass(s, 0.2)              # window 2.0 in t, period 0.157
        interior = out.values[150:-150]
        assert np.max(np.abs(interior)) < 0.1

    def test_window_too_long_rejected(self):
        s = _series(np.zeros(11), t_max=1.0)
        with pytest.raises(ValueError):
            low_pass(s, 5.0)

    def test_missing_n_sites_rejected(self):
        grid = TimeGrid(1.0, 0.1)
        s = TimeSeries(grid, np.zeros(11))
        with pytest.raises(ValueError):
            low_pass(s, 0.2)


class TestCollapseDistance:
    def test_identical_members_zero(self):
        f = lambda x: np.cos(x)
        fam = CollapseFamily([_member_from_function(f, 10)] * 3, 1.0)
        assert collapse_distance(fam, (0.0, 2.0)).value == 0.0

    def test_constant_offset(self):
        a = _member_from_function(lambda x: np.zeros_like(x), 10)
        b = _member_from_function(lambda x: np.full_like(x, 0.2), 10)
        metric = collapse_distance(CollapseFamily([a, b], 1.0), (0.0, 2.0))
        assert metric.value == pytest.approx(0.2, abs=1e-10)

    def test_permutation_symmetric(self):
        rng = np.random.default_rng(47)
        members = [_member_from_function(
            lambda x, s=s: np.cos(x) + 0.1 * np.sin(s * x), 10)
            for s in (1, 2, 3)]
        d1 = collapse_distance(CollapseFamily(members, 1.0), (0.0, 2.0)).value
        d2 = collapse_distance(CollapseFamily(members[::-1], 1.0), (0.0, 2.0)).value
        assert d1 == pytest.approx(d2, abs=1e-14)

    def test_noise_monotonicity(self):
        rng = np.random.default_rng(53)
        base = _member_from_function(np.cos, 10)
        prev = 0.0
        for a in (0.01, 0.05, 0.2):
            noisy_vals = base.series.values + a * rng.standard_normal(
                base.series.values.size)
            noisy = CollapseMember(
                TimeSeries(base.series.grid, noisy_vals, {"n_sites": 10}), 10, 0.0)
            d = collapse_distance(CollapseFamily([base, noisy], 1.0), (0.0, 2.0)).value
            assert d > prev
            assert 0.3 * a < d < 3 * a
            prev = d

    def test_empty_overlap_rejected(self):
        fam = CollapseFamily([_member_from_function(np.cos, 10)], 1.0)
        with pytest.raises(ValueError):
            collapse_distance(fam, (5.0, 6.0))


class TestEstimateNu:
    @staticmethod
    def _runner(n, lam):
        # synthetic scaling function of t * (1 - lambda): collapses in t/N
        # exactly when 1 - lambda is proportional to 1/N, i.e. at nu = 1
        grid = TimeGrid(2.0 * n, 0.1)
        arg = grid.times * (1.0 - lam)
        values = np.cos(5 * arg) * np.exp(-arg)
        return TimeSeries(grid, values, {"n_sites": n})

    def test_synthetic_family_recovers_nu(self):
        nu_grid = np.arange(0.6, 1.45, 0.05)
        nu_best, curve = estimate_nu(self._runner, [10, 14, 18], 1.0, nu_grid)
        assert nu_best == pytest.approx(1.0, abs=0.05)

    def test_flat_metric_warns(self):
        runner = lambda n, lam: self._runner(n, 1.0 - 1.0 / n)
        with pytest.warns(UserWarning):
            estimate_nu(runner, [10, 14, 18], 1.0, [0.5, 1.0, 2.0])

    def test_too_few_sizes_rejected(self):
        with pytest.raises(ValueError):
            estimate_nu(self._runner, [10, 14], 1.0, [1.0])


class TestKondoScalingWindow:
    def test_constructed_break(self):
        rng = np.random.default_rng(59)

        def member(n, phase):
            grid = TimeGrid(1.0 * n, 0.05)
            x = grid.times / n
            values = np.where(x < 0.5, np.cos(4 * x),
                              np.cos(4 * x) + 0.3 * np.sin(9 * x + phase))
            return CollapseMember(TimeSeries(grid, values, {"n_sites": n}), n, 0.5)

        fam = CollapseFamily([member(n, p) for n, p in
                              ((12, 0.0), (16, 2.0), (20, 4.0))], 2.0)
        x_break, pre, post = kondo_scaling_window(fam, 0.5, 1.0)
        assert x_break == 0.5
        assert post > 2 * pre

    def test_single_member_zeros(self):
        fam = CollapseFamily([_member_from_function(np.cos, 10)], 1.0)
        assert kondo_scaling_window(fam) == (0.5, 0.0, 0.0)
