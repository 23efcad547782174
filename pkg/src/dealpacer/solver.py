"""Backward-induction solve of the deal-acceptance value function V(f, t)."""

from __future__ import annotations

import csv
import json
import os
import tempfile
import time
from dataclasses import dataclass, field

import numpy as np

from .arrivals import IntensityModel, TimeGrid, build_time_grid
from .stochastics import DealModel, DealSample, QmcSource, sample_deal_arrays

__all__ = [
    "CapitalGrid",
    "SolverConfig",
    "ValueTable",
    "SolveResult",
    "InvariantViolation",
    "interpolate_value",
    "incremental_value",
    "bellman_step",
    "solve",
    "check_value_table",
    "save_value_table",
    "load_value_table",
    "write_value_table_csv",
]

_ARTIFACT_FORMAT = "dealpacer-value-table"
_ARTIFACT_VERSION = 1


class InvariantViolation(RuntimeError):
    """A solved table failed one of its structural checks."""


@dataclass(frozen=True)
class CapitalGrid:
    """Ascending capital levels from 0 to the fund size."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        object.__setattr__(self, "points", pts)
        if pts.ndim != 1 or len(pts) < 2:
            raise ValueError("capital grid needs at least two points")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("capital grid must be strictly increasing")
        if pts[0] != 0.0:
            raise ValueError("capital grid must start at 0")

    @classmethod
    def uniform(cls, fund_size: float, n_points: int = 101) -> "CapitalGrid":
        if fund_size <= 0:
            raise ValueError(f"fund_size must be > 0, got {fund_size}")
        if n_points < 2:
            raise ValueError(f"n_points must be >= 2, got {n_points}")
        return cls(points=np.linspace(0.0, fund_size, n_points))

    @property
    def fund_size(self) -> float:
        return float(self.points[-1])

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class SolverConfig:
    deal_model: DealModel
    intensity: IntensityModel
    horizon: float
    capital_grid: CapitalGrid
    n_qmc: int = 4096
    target_dlambda: float = 0.05
    fresh_points_per_step: bool = False

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValueError(f"horizon must be > 0, got {self.horizon}")
        if self.n_qmc < 64 or self.n_qmc & (self.n_qmc - 1) != 0:
            raise ValueError(f"n_qmc must be a power of two >= 64, got {self.n_qmc}")
        if not 0 < self.target_dlambda <= 0.5:
            raise ValueError(f"target_dlambda must be in (0, 0.5], got {self.target_dlambda}")


@dataclass(frozen=True)
class ValueTable:
    """Excess value V[k][i] over (time index k, capital index i)."""

    grid: CapitalGrid
    time_grid: TimeGrid
    values: np.ndarray = field(repr=False)
    moic_hurdle: float
    exit_years: float

    @property
    def horizon(self) -> float:
        return self.time_grid.horizon

    @property
    def fund_size(self) -> float:
        return self.grid.fund_size


@dataclass(frozen=True)
class SolveResult:
    table: ValueTable
    n_time_steps: int
    n_capital_points: int
    n_qmc: int
    total_evaluations: int
    wall_seconds: float


def interpolate_value(table: ValueTable, f: float, k: int) -> float:
    """V at capital f and time index k, piecewise-linear between grid points."""
    pts = table.grid.points
    if f < pts[0] or f > pts[-1]:
        raise ValueError(f"f={f} outside capital grid [{pts[0]}, {pts[-1]}]")
    return float(np.interp(f, pts, table.values[k]))


def incremental_value(
    f: float,
    deal: DealSample,
    next_slice: np.ndarray,
    grid: CapitalGrid,
    moic_hurdle: float,
) -> float:
    """Value added by accepting one deal at capital f, against the next slice.

    Zero when the deal does not fit; otherwise the deal's profit over the
    hurdle plus the interpolated continuation at the reduced capital, net of
    the continuation given up.
    """
    if deal.size > f:
        return 0.0
    pts = grid.points
    profit = deal.size * (deal.moic - moic_hurdle)
    cont_after = float(np.interp(f - deal.size, pts, next_slice))
    cont_stay = float(np.interp(f, pts, next_slice))
    return profit + cont_after - cont_stay


def _interp_weights(points: np.ndarray, sizes: np.ndarray):
    """Per (capital point, deal) interpolation data for V(f - S)."""
    x = np.clip(points[:, None] - sizes[None, :], 0.0, points[-1])
    idx = np.searchsorted(points, x, side="right") - 1
    np.clip(idx, 0, len(points) - 2, out=idx)
    w = (x - points[idx]) / (points[idx + 1] - points[idx])
    afford = sizes[None, :] <= points[:, None]
    return idx, w, afford


def bellman_step(
    next_slice: np.ndarray,
    deals,
    dlambda_k: float,
    grid: CapitalGrid,
    moic_hurdle: float,
) -> np.ndarray:
    """One backward update: V_k = V_{k+1} + dLambda * E[max(0, inc)]."""
    if len(deals) == 0:
        raise ValueError("deals must be nonempty")
    if not 0.0 <= dlambda_k <= 1.0:
        raise ValueError(f"dlambda_k must be in [0, 1], got {dlambda_k}")
    sizes = np.asarray([d.size for d in deals])
    moics = np.asarray([d.moic for d in deals])
    idx, w, afford = _interp_weights(grid.points, sizes)
    return _sweep_once(next_slice, sizes, moics, idx, w, afford, dlambda_k, moic_hurdle)


def _sweep_once(next_slice, sizes, moics, idx, w, afford, dlambda_k, moic_hurdle):
    profit = sizes * (moics - moic_hurdle)
    cont = next_slice[idx] * (1.0 - w) + next_slice[idx + 1] * w
    inc = profit[None, :] + cont - next_slice[:, None]
    np.maximum(inc, 0.0, out=inc)
    inc *= afford
    return next_slice + dlambda_k * inc.mean(axis=1)


def solve(config: SolverConfig, deals: list[DealSample] | None = None) -> SolveResult:
    """Backward sweep from the terminal condition over the adaptive time grid.

    `deals` overrides the QMC sample with a fixed deal set (used for
    discrete-instance verification); normally the sample is drawn once and
    shared across all capital points and time steps.
    """
    t_start = time.perf_counter()
    model = config.deal_model
    grid = config.capital_grid
    time_grid = build_time_grid(config.intensity, config.horizon, config.target_dlambda)
    n_steps = time_grid.n_steps
    n_f = len(grid)

    if deals is not None:
        sizes = np.asarray([d.size for d in deals])
        moics = np.asarray([d.moic for d in deals])
    else:
        sizes, moics = sample_deal_arrays(model, config.n_qmc, QmcSource(skip=0))
    idx, w, afford = _interp_weights(grid.points, sizes)

    values = np.zeros((n_steps + 1, n_f))
    for k in range(n_steps - 1, -1, -1):
        if deals is None and config.fresh_points_per_step and k < n_steps - 1:
            skip = (n_steps - 1 - k) * config.n_qmc
            sizes, moics = sample_deal_arrays(model, config.n_qmc, QmcSource(skip=skip))
            idx, w, afford = _interp_weights(grid.points, sizes)
        values[k] = _sweep_once(
            values[k + 1], sizes, moics, idx, w, afford,
            float(time_grid.step_arrivals[k]), model.moic_hurdle,
        )

    table = ValueTable(
        grid=grid,
        time_grid=time_grid,
        values=values,
        moic_hurdle=model.moic_hurdle,
        exit_years=model.exit_years,
    )
    check_value_table(table)
    return SolveResult(
        table=table,
        n_time_steps=n_steps,
        n_capital_points=n_f,
        n_qmc=len(sizes),
        total_evaluations=n_steps * n_f * len(sizes),
        wall_seconds=time.perf_counter() - t_start,
    )


def check_value_table(table: ValueTable) -> None:
    """Structural checks; raises InvariantViolation on any failure."""
    v = table.values
    if np.any(v[-1] != 0.0):
        raise InvariantViolation("terminal slice is not identically zero")
    if np.any(v[:, 0] != 0.0):
        raise InvariantViolation("zero-capital column is not identically zero")
    if np.any(v[:-1] < v[1:]):
        raise InvariantViolation("value function increases forward in time")
    tol = 1e-9 * table.fund_size
    if np.any(np.diff(v, axis=1) < -tol):
        worst = float(np.min(np.diff(v, axis=1)))
        raise InvariantViolation(
            f"value function decreases in capital beyond tolerance (worst drop {worst:g})"
        )


def _atomic_write_text(path, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_value_table(table: ValueTable, path) -> None:
    """Versioned text artifact: header with grids and model constants, then
    row-major values (one row per time index)."""
    doc = {
        "format": _ARTIFACT_FORMAT,
        "version": _ARTIFACT_VERSION,
        "moic_hurdle": table.moic_hurdle,
        "exit_years": table.exit_years,
        "capital_grid": table.grid.points.tolist(),
        "times": table.time_grid.times.tolist(),
        "step_arrivals": table.time_grid.step_arrivals.tolist(),
        "values": table.values.tolist(),
    }
    _atomic_write_text(path, json.dumps(doc, indent=None, separators=(",", ":")))


def load_value_table(path) -> ValueTable:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != _ARTIFACT_FORMAT:
        raise ValueError(f"{path} is not a value-table artifact")
    if doc.get("version") != _ARTIFACT_VERSION:
        raise ValueError(f"unsupported artifact version {doc.get('version')}")
    return ValueTable(
        grid=CapitalGrid(points=np.asarray(doc["capital_grid"])),
        time_grid=TimeGrid(
            times=np.asarray(doc["times"]),
            step_arrivals=np.asarray(doc["step_arrivals"]),
        ),
        values=np.asarray(doc["values"]),
        moic_hurdle=float(doc["moic_hurdle"]),
        exit_years=float(doc["exit_years"]),
    )


def write_value_table_csv(table: ValueTable, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "f", "V"])
        for k, t in enumerate(table.time_grid.times):
            for i, f in enumerate(table.grid.points):
                writer.writerow([repr(float(t)), repr(float(f)), repr(float(table.values[k, i]))])
