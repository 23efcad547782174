"""Deal-arrival intensity models, the adaptive time grid, and path simulation."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ConstantIntensity",
    "PiecewiseIntensity",
    "SinusoidalIntensity",
    "IntensityModel",
    "TimeGrid",
    "DegenerateGridError",
    "intensity_at",
    "cumulative_intensity",
    "max_intensity",
    "build_time_grid",
    "effective_arrival_prob",
    "simulate_arrivals",
    "write_time_grid_csv",
]

# Raw increment above which the linearized arrival probability switches to
# the exact exponential form.
_PROB_SWITCH = 0.1

# Fallback advance through zero-intensity stretches, as a fraction of the
# horizon; guarantees grid construction terminates.
_ZERO_RATE_STEP_FRACTION = 1e-3


class DegenerateGridError(ValueError):
    """Raised when no arrivals are possible anywhere on the horizon."""


@dataclass(frozen=True)
class ConstantIntensity:
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError(f"rate must be >= 0, got {self.rate}")


@dataclass(frozen=True)
class PiecewiseIntensity:
    """Step intensity: rates[i] applies on [breakpoints[i], breakpoints[i+1])."""

    breakpoints: tuple[float, ...]
    rates: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        if len(self.breakpoints) < 2 or len(self.rates) != len(self.breakpoints) - 1:
            raise ValueError("need n+1 breakpoints for n rates")
        if any(b1 >= b2 for b1, b2 in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if any(r < 0 for r in self.rates):
            raise ValueError("rates must be >= 0")


@dataclass(frozen=True)
class SinusoidalIntensity:
    """base + amplitude * sin(2*pi*(t - phase)/period), nonnegative everywhere."""

    base: float
    amplitude: float
    period: float
    phase: float = 0.0

    def __post_init__(self):
        if not 0 <= self.amplitude <= self.base:
            raise ValueError("need base >= amplitude >= 0 for a nonnegative intensity")
        if self.period <= 0:
            raise ValueError(f"period must be > 0, got {self.period}")


IntensityModel = ConstantIntensity | PiecewiseIntensity | SinusoidalIntensity


def intensity_at(model: IntensityModel, t: float) -> float:
    """Arrival rate (deals/year) at time t."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if isinstance(model, ConstantIntensity):
        return model.rate
    if isinstance(model, SinusoidalIntensity):
        return model.base + model.amplitude * math.sin(
            2.0 * math.pi * (t - model.phase) / model.period
        )
    if isinstance(model, PiecewiseIntensity):
        bp = model.breakpoints
        if t < bp[0] or t > bp[-1]:
            raise ValueError(f"t={t} outside piecewise coverage [{bp[0]}, {bp[-1]}]")
        if t == bp[-1]:
            return model.rates[-1]
        k = np.searchsorted(bp, t, side="right") - 1
        return model.rates[k]
    raise TypeError(f"unsupported intensity model {model!r}")


def cumulative_intensity(model: IntensityModel, t0: float, t1: float) -> float:
    """Expected arrival count on [t0, t1]: the exact integral of the rate."""
    if t0 < 0 or t1 < t0:
        raise ValueError(f"need 0 <= t0 <= t1, got [{t0}, {t1}]")
    if isinstance(model, ConstantIntensity):
        return model.rate * (t1 - t0)
    if isinstance(model, SinusoidalIntensity):
        w = 2.0 * math.pi / model.period
        osc = (math.cos(w * (t0 - model.phase)) - math.cos(w * (t1 - model.phase))) / w
        return model.base * (t1 - t0) + model.amplitude * osc
    if isinstance(model, PiecewiseIntensity):
        bp = model.breakpoints
        if t0 < bp[0] or t1 > bp[-1]:
            raise ValueError(f"[{t0}, {t1}] outside piecewise coverage [{bp[0]}, {bp[-1]}]")
        total = 0.0
        for left, right, rate in zip(bp, bp[1:], model.rates):
            lo = max(t0, left)
            hi = min(t1, right)
            if hi > lo:
                total += rate * (hi - lo)
        return total
    raise TypeError(f"unsupported intensity model {model!r}")


def max_intensity(model: IntensityModel, t0: float, t1: float) -> float:
    """Dominating rate over [t0, t1], used as the thinning bound."""
    if isinstance(model, ConstantIntensity):
        return model.rate
    if isinstance(model, SinusoidalIntensity):
        return model.base + model.amplitude
    if isinstance(model, PiecewiseIntensity):
        best = 0.0
        for left, right, rate in zip(model.breakpoints, model.breakpoints[1:], model.rates):
            if right > t0 and left < t1:
                best = max(best, rate)
        return best
    raise TypeError(f"unsupported intensity model {model!r}")


@dataclass(frozen=True)
class TimeGrid:
    """Adaptive grid t_0=0 < ... < t_K=T with per-step arrival probabilities."""

    times: np.ndarray
    step_arrivals: np.ndarray = field(repr=False)

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def dt(self, k: int) -> float:
        return float(self.times[k + 1] - self.times[k])


def effective_arrival_prob(rate: float, dt: float) -> float:
    """Per-step arrival probability: rate*dt, or 1-exp(-rate*dt) once the
    raw increment is no longer small."""
    if rate < 0 or dt < 0:
        raise ValueError("rate and dt must be >= 0")
    raw = rate * dt
    if raw <= _PROB_SWITCH:
        return raw
    return 1.0 - math.exp(-raw)


def build_time_grid(model: IntensityModel, horizon: float, target: float = 0.05) -> TimeGrid:
    """Greedy forward grid: each step sized so rate(t_k)*dt matches `target`,
    truncated at the horizon."""
    if horizon <= 0:
        raise ValueError(f"horizon must be > 0, got {horizon}")
    if target <= 0:
        raise ValueError(f"target must be > 0, got {target}")
    if cumulative_intensity(model, 0.0, horizon) == 0.0:
        raise DegenerateGridError("intensity is zero over the whole horizon")

    fallback = horizon * _ZERO_RATE_STEP_FRACTION
    snap = 1e-9 * max(horizon, 1.0)
    times = [0.0]
    probs = []
    t = 0.0
    while t < horizon:
        rate = intensity_at(model, t)
        if rate > 0.0:
            dt = target / rate
        else:
            dt = fallback
            if isinstance(model, PiecewiseIntensity):
                for left, r in zip(model.breakpoints, model.rates):
                    if left > t and r > 0.0:
                        dt = min(dt, left - t)
                        break
        t_next = t + dt
        if t_next >= horizon - snap:
            t_next = horizon
        probs.append(effective_arrival_prob(rate, t_next - t))
        times.append(t_next)
        t = t_next
    return TimeGrid(times=np.asarray(times), step_arrivals=np.asarray(probs))


def simulate_arrivals(model: IntensityModel, horizon: float, seed: int) -> np.ndarray:
    """Arrival times on [0, horizon) by thinning a dominating homogeneous process."""
    if horizon <= 0:
        raise ValueError(f"horizon must be > 0, got {horizon}")
    lam_max = max_intensity(model, 0.0, horizon)
    if lam_max == 0.0:
        return np.empty(0)
    rng = np.random.default_rng(seed)
    out = []
    t = 0.0
    while True:
        t += rng.exponential(1.0 / lam_max)
        if t >= horizon:
            break
        if rng.random() * lam_max < intensity_at(model, t):
            out.append(t)
    return np.asarray(out)


def write_time_grid_csv(grid: TimeGrid, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "t_k", "dt_k", "dLambda_k"])
        for k in range(grid.n_steps):
            writer.writerow([k, repr(float(grid.times[k])), repr(grid.dt(k)),
                             repr(float(grid.step_arrivals[k]))])
