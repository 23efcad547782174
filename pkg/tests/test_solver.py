import numpy as np
import pytest

from dealpacer.arrivals import ConstantIntensity, TimeGrid, build_time_grid
from dealpacer.solver import (
    CapitalGrid,
    InvariantViolation,
    SolverConfig,
    ValueTable,
    bellman_step,
    check_value_table,
    incremental_value,
    interpolate_value,
    load_value_table,
    save_value_table,
    solve,
    write_value_table_csv,
)
from dealpacer.stochastics import (
    DealModel,
    DealSample,
    LognormalParams,
    QmcSource,
    sample_deal_arrays,
)

from conftest import make_reference_model


def brute_force_backward(points, times, dlambdas, deals, moic_hurdle):
    """Independent reference recursion, plain loops and dicts, no vectorization.

    Assumes every f - size lands exactly on a grid point (discrete instance).
    """
    points = [float(p) for p in points]
    level = {p: 0.0 for p in points}  # terminal condition
    history = [dict(level)]
    for k in range(len(times) - 2, -1, -1):
        new_level = {}
        for f in points:
            total = 0.0
            for deal in deals:
                if deal.size <= f:
                    inc = (
                        deal.size * (deal.moic - moic_hurdle)
                        + level[f - deal.size]
                        - level[f]
                    )
                    if inc > 0:
                        total += inc
            new_level[f] = level[f] + dlambdas[k] * total / len(deals)
        history.append(dict(new_level))
        level = new_level
    history.reverse()
    return history


class TestInterpolateValue:
    @staticmethod
    def tiny_table(values):
        grid = CapitalGrid(points=np.array([0.0, 100.0]))
        tg = TimeGrid(times=np.array([0.0, 1.0]), step_arrivals=np.array([0.05]))
        return ValueTable(grid=grid, time_grid=tg, values=np.asarray(values),
                          moic_hurdle=2.0, exit_years=5.0)

    def test_exact_at_grid_points(self):
        table = self.tiny_table([[0.0, 10.0], [0.0, 0.0]])
        assert interpolate_value(table, 100.0, 0) == 10.0
        assert interpolate_value(table, 0.0, 0) == 0.0

    def test_linear_between(self):
        table = self.tiny_table([[0.0, 10.0], [0.0, 0.0]])
        assert interpolate_value(table, 25.0, 0) == 2.5

    def test_no_extrapolation(self):
        table = self.tiny_table([[0.0, 10.0], [0.0, 0.0]])
        with pytest.raises(ValueError):
            interpolate_value(table, -1.0, 0)
        with pytest.raises(ValueError):
            interpolate_value(table, 100.5, 0)


class TestIncrementalValue:
    grid = CapitalGrid(points=np.linspace(0.0, 100.0, 11))

    def test_profit_only_against_zero_continuation(self):
        zero = np.zeros(11)
        deal = DealSample(size=10.0, moic=2.5)
        assert incremental_value(50.0, deal, zero, self.grid, 2.0) == 5.0

    def test_unaffordable_is_zero(self):
        zero = np.zeros(11)
        deal = DealSample(size=60.0, moic=9.9)
        assert incremental_value(50.0, deal, zero, self.grid, 2.0) == 0.0

    def test_opportunity_cost_can_dominate(self):
        # hurdle-level deal consuming all capital gives up the continuation
        next_slice = np.zeros(11)
        next_slice[5] = 3.0  # V(50) = 3
        deal = DealSample(size=50.0, moic=2.0)
        assert incremental_value(50.0, deal, next_slice, self.grid, 2.0) == -3.0


class TestBellmanStep:
    grid = CapitalGrid(points=np.linspace(0.0, 100.0, 11))

    def test_single_deal_hand_value(self):
        next_slice = np.zeros(11)
        deals = [DealSample(size=10.0, moic=2.5)]
        out = bellman_step(next_slice, deals, 0.05, self.grid, 2.0)
        assert out[5] == pytest.approx(0.05 * 5.0, abs=1e-15)  # f = 50
        assert out[0] == 0.0  # unaffordable at zero capital

    def test_zero_dlambda_identity(self):
        next_slice = np.linspace(0.0, 7.0, 11)
        deals = [DealSample(size=10.0, moic=3.0)]
        out = bellman_step(next_slice, deals, 0.0, self.grid, 2.0)
        np.testing.assert_array_equal(out, next_slice)

    def test_requires_deals(self):
        with pytest.raises(ValueError):
            bellman_step(np.zeros(11), [], 0.05, self.grid, 2.0)


class TestSolve:
    def test_reference_solve_invariants(self, reference_solution):
        table = reference_solution.table
        v = table.values
        assert np.all(v[-1] == 0.0)
        assert np.all(v[:, 0] == 0.0)
        assert np.all(v[:-1] >= v[1:])
        assert np.all(np.diff(v, axis=1) >= -1e-9 * table.fund_size)
        assert v[0, -1] > 0.0

    def test_single_step_closed_reduction(self):
        model = make_reference_model()
        horizon = 0.05 / 12.0  # exactly one step at the default target
        config = SolverConfig(
            deal_model=model,
            intensity=ConstantIntensity(12.0),
            horizon=horizon,
            capital_grid=CapitalGrid.uniform(500.0, 101),
            n_qmc=1024,
        )
        result = solve(config)
        table = result.table
        assert result.n_time_steps == 1
        sizes, moics = sample_deal_arrays(model, 1024, QmcSource(skip=0))
        profit = sizes * (moics - model.moic_hurdle)
        for i, f in enumerate(table.grid.points):
            expected = table.time_grid.step_arrivals[0] * np.mean(
                np.maximum(profit, 0.0) * (sizes <= f)
            )
            assert table.values[0, i] == pytest.approx(expected, abs=1e-12)

    def test_all_deals_below_hurdle_gives_zero_table(self):
        model = DealModel(
            size=LognormalParams(mu=np.log(50.0), sigma=0.3),
            growth=LognormalParams(mu=np.log(1.08), sigma=0.0),  # MOIC 1.08^5 < 2
            rho_log=0.0,
            exit_years=5.0,
            moic_hurdle=2.0,
        )
        config = SolverConfig(
            deal_model=model,
            intensity=ConstantIntensity(12.0),
            horizon=0.5,
            capital_grid=CapitalGrid.uniform(500.0, 51),
            n_qmc=256,
        )
        table = solve(config).table
        assert np.all(table.values == 0.0)

    def test_discrete_instance_matches_brute_force(self):
        grid = CapitalGrid(points=np.linspace(0.0, 100.0, 11))
        deals = [
            DealSample(size=10.0, moic=2.5),
            DealSample(size=20.0, moic=1.8),
            DealSample(size=30.0, moic=2.4),
            DealSample(size=10.0, moic=1.95),
        ]
        model = DealModel(
            size=LognormalParams(mu=0.0, sigma=1.0),
            growth=LognormalParams(mu=0.0, sigma=0.1),
            rho_log=0.0,
            exit_years=5.0,
            moic_hurdle=2.0,
        )
        # constant(2), T=0.25, target 0.05 -> exactly 10 steps
        config = SolverConfig(
            deal_model=model,
            intensity=ConstantIntensity(2.0),
            horizon=0.25,
            capital_grid=grid,
            n_qmc=64,
        )
        table = solve(config, deals=deals).table
        assert table.time_grid.n_steps == 10

        reference = brute_force_backward(
            grid.points, table.time_grid.times, table.time_grid.step_arrivals,
            deals, model.moic_hurdle,
        )
        for k in range(11):
            for i, f in enumerate(grid.points):
                assert table.values[k, i] == pytest.approx(
                    reference[k][float(f)], abs=1e-12
                ), f"mismatch at k={k}, f={f}"

    def test_deterministic_resolve(self):
        config = SolverConfig(
            deal_model=make_reference_model(),
            intensity=ConstantIntensity(12.0),
            horizon=0.25,
            capital_grid=CapitalGrid.uniform(500.0, 41),
            n_qmc=512,
        )
        a = solve(config).table
        b = solve(config).table
        assert a.values.tobytes() == b.values.tobytes()

    def test_fresh_points_per_step_stays_close(self):
        base = SolverConfig(
            deal_model=make_reference_model(),
            intensity=ConstantIntensity(12.0),
            horizon=0.5,
            capital_grid=CapitalGrid.uniform(500.0, 41),
            n_qmc=2048,
        )
        fresh = SolverConfig(
            deal_model=base.deal_model,
            intensity=base.intensity,
            horizon=base.horizon,
            capital_grid=base.capital_grid,
            n_qmc=base.n_qmc,
            fresh_points_per_step=True,
        )
        va = solve(base).table.values[0, -1]
        vb = solve(fresh).table.values[0, -1]
        assert vb == pytest.approx(va, rel=0.02)


class TestChecks:
    def test_rejects_nonzero_terminal(self):
        grid = CapitalGrid(points=np.array([0.0, 100.0]))
        tg = TimeGrid(times=np.array([0.0, 1.0]), step_arrivals=np.array([0.05]))
        table = ValueTable(grid=grid, time_grid=tg, values=np.array([[0.0, 1.0], [0.0, 0.5]]),
                           moic_hurdle=2.0, exit_years=5.0)
        with pytest.raises(InvariantViolation):
            check_value_table(table)

    def test_rejects_capital_decrease(self):
        grid = CapitalGrid(points=np.array([0.0, 50.0, 100.0]))
        tg = TimeGrid(times=np.array([0.0, 1.0]), step_arrivals=np.array([0.05]))
        table = ValueTable(
            grid=grid, time_grid=tg,
            values=np.array([[0.0, 5.0, 1.0], [0.0, 0.0, 0.0]]),
            moic_hurdle=2.0, exit_years=5.0,
        )
        with pytest.raises(InvariantViolation):
            check_value_table(table)


class TestSerialization:
    def test_round_trip(self, tmp_path, reference_table):
        path = tmp_path / "table.json"
        save_value_table(reference_table, path)
        loaded = load_value_table(path)
        np.testing.assert_array_equal(loaded.values, reference_table.values)
        np.testing.assert_array_equal(loaded.grid.points, reference_table.grid.points)
        np.testing.assert_array_equal(loaded.time_grid.times, reference_table.time_grid.times)
        assert loaded.moic_hurdle == reference_table.moic_hurdle
        assert loaded.exit_years == reference_table.exit_years

    def test_byte_identical_rewrites(self, tmp_path, reference_table):
        p1 = tmp_path / "a.json"
        p2 = tmp_path / "b.json"
        save_value_table(reference_table, p1)
        save_value_table(reference_table, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "other.json"
        path.write_text('{"format": "something-else"}')
        with pytest.raises(ValueError):
            load_value_table(path)

    def test_csv_shape(self, tmp_path):
        grid = CapitalGrid(points=np.array([0.0, 100.0]))
        tg = TimeGrid(times=np.array([0.0, 1.0]), step_arrivals=np.array([0.05]))
        table = ValueTable(grid=grid, time_grid=tg, values=np.zeros((2, 2)),
                           moic_hurdle=2.0, exit_years=5.0)
        path = tmp_path / "v.csv"
        write_value_table_csv(table, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "t,f,V"
        assert len(lines) == 1 + 2 * 2
