"""Acceptance thresholds and decisions read off a solved value table."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .solver import ValueTable, interpolate_value
from .stochastics import DealSample

__all__ = [
    "ACCEPT",
    "REJECT",
    "UNAFFORDABLE",
    "FundState",
    "Decision",
    "ThresholdSurface",
    "UnaffordableDealError",
    "threshold_moic",
    "threshold_irr",
    "decide",
    "export_surface",
    "write_surface_csv",
]

ACCEPT = "accept"
REJECT = "reject"
UNAFFORDABLE = "unaffordable"


class UnaffordableDealError(ValueError):
    """Deal size exceeds remaining capital; no threshold exists."""


@dataclass(frozen=True)
class FundState:
    """Remaining capital and elapsed time."""

    remaining_capital: float
    time: float


@dataclass(frozen=True)
class Decision:
    verdict: str
    threshold_moic: float | None
    threshold_irr: float | None
    deal_value_excess: float | None

    def as_record(self) -> dict:
        return {
            "verdict": self.verdict,
            "threshold_moic": self.threshold_moic,
            "threshold_irr": self.threshold_irr,
            "deal_value_excess": self.deal_value_excess,
        }


@dataclass(frozen=True)
class ThresholdSurface:
    """Rows of (t_years, size_fraction, required_irr)."""

    rows: tuple[tuple[float, float, float], ...]


def _time_index(table: ValueTable, t: float) -> int:
    """Nearest grid index at or after t; never overstates remaining time."""
    times = table.time_grid.times
    if t < times[0] or t > times[-1]:
        raise ValueError(f"t={t} outside time grid [{times[0]}, {times[-1]}]")
    return int(np.searchsorted(times, t, side="left"))


def threshold_moic(table: ValueTable, f: float, s: float, t: float) -> float:
    """Minimum underwritten multiple that makes a size-s deal worth taking."""
    if s <= 0:
        raise ValueError(f"deal size must be > 0, got {s}")
    if f < 0 or f > table.fund_size:
        raise ValueError(f"f={f} outside capital grid [0, {table.fund_size}]")
    if s > f:
        raise UnaffordableDealError(f"size {s} exceeds remaining capital {f}")
    k = _time_index(table, t)
    gap = interpolate_value(table, f, k) - interpolate_value(table, f - s, k)
    return table.moic_hurdle + gap / s


def threshold_irr(table: ValueTable, f: float, s: float, t: float) -> float:
    """The threshold multiple expressed as an annual rate over the exit horizon."""
    m_star = threshold_moic(table, f, s, t)
    return m_star ** (1.0 / table.exit_years) - 1.0


def decide(table: ValueTable, state: FundState, deal: DealSample) -> Decision:
    """Accept an affordable deal iff its underwritten multiple meets the
    threshold (ties accept); oversize deals are unaffordable."""
    f, t = state.remaining_capital, state.time
    if f < 0 or f > table.fund_size:
        raise ValueError(f"remaining capital {f} outside [0, {table.fund_size}]")
    k = _time_index(table, t)
    if deal.size > f:
        return Decision(verdict=UNAFFORDABLE, threshold_moic=None,
                        threshold_irr=None, deal_value_excess=None)
    m_star = threshold_moic(table, f, deal.size, t)
    excess = deal.size * (deal.moic - table.moic_hurdle) + (
        interpolate_value(table, f - deal.size, k) - interpolate_value(table, f, k)
    )
    verdict = ACCEPT if deal.moic >= m_star else REJECT
    return Decision(
        verdict=verdict,
        threshold_moic=m_star,
        threshold_irr=m_star ** (1.0 / table.exit_years) - 1.0,
        deal_value_excess=excess,
    )


def export_surface(table: ValueTable, size_fractions, times) -> ThresholdSurface:
    """Reference threshold surface at full capital: required IRR per
    (time, deal size as a fraction of the fund)."""
    fractions = sorted(float(x) for x in size_fractions)
    if any(not 0.0 < x <= 1.0 for x in fractions):
        raise ValueError("size fractions must lie in (0, 1]")
    ts = sorted(float(t) for t in times)
    f0 = table.fund_size
    rows = []
    for fraction in fractions:
        for t in ts:
            rows.append((t, fraction, threshold_irr(table, f0, fraction * f0, t)))
    return ThresholdSurface(rows=tuple(rows))


def write_surface_csv(surface: ThresholdSurface, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_years", "size_fraction", "required_irr"])
        for t, fraction, irr in surface.rows:
            writer.writerow([repr(t), repr(fraction), repr(irr)])
