"""Run configuration: flat key = value files, natural units, derived params.

Defaults reproduce the reference experiment: a $500M fund over 12 quarters,
12 deals/year, $50M/25M deal sizes, 20%/2.5% underwritten IRR, log-correlation
-0.3, 15% hurdle, 5-year exits, factor-2-at-95% underwriting noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

from .arrivals import (
    ConstantIntensity,
    IntensityModel,
    PiecewiseIntensity,
    SinusoidalIntensity,
)
from .simulator import COMMITTED_ONLY, IRR_CONVENTIONS
from .solver import CapitalGrid, SolverConfig
from .stochastics import DealModel, moment_match_lognormal, noise_from_bracket

__all__ = ["RunConfig", "ConfigError", "load_config", "parse_config_text"]


class ConfigError(ValueError):
    """Malformed or out-of-bounds configuration."""


@dataclass
class RunConfig:
    fund_size: float = 500.0
    horizon_quarters: float = 12.0
    intensity_kind: str = "constant"
    deals_per_year: float = 12.0
    intensity_breakpoints: list[float] = field(default_factory=list)
    intensity_rates: list[float] = field(default_factory=list)
    intensity_base: float = 12.0
    intensity_amplitude: float = 0.0
    intensity_period: float = 1.0
    intensity_phase: float = 0.0
    size_mean: float = 50.0
    size_std: float = 25.0
    irr_mean: float = 0.20
    irr_std: float = 0.025
    rho_log: float = -0.3
    hurdle_irr: float = 0.15
    exit_years: float = 5.0
    noise_factor: float = 2.0
    noise_confidence: float = 0.95
    noise_mu_override: float | None = None
    n_f: int = 101
    n_qmc: int = 4096
    target_dlambda: float = 0.05
    n_trials: int = 1000
    seed: int = 20250809
    qmc_fresh_per_step: bool = False
    irr_convention: str = COMMITTED_ONLY
    out_dir: str = "out"

    def validate(self) -> None:
        def require(cond: bool, key: str, rule: str):
            if not cond:
                raise ConfigError(f"{key}: {rule} (got {getattr(self, key)!r})")

        require(self.fund_size > 0, "fund_size", "must be > 0")
        require(self.horizon_quarters > 0, "horizon_quarters", "must be > 0")
        require(self.intensity_kind in ("constant", "piecewise", "sinusoidal"),
                "intensity_kind", "must be constant, piecewise, or sinusoidal")
        require(self.deals_per_year >= 0, "deals_per_year", "must be >= 0")
        require(self.size_mean > 0, "size_mean", "must be > 0")
        require(self.size_std >= 0, "size_std", "must be >= 0")
        require(self.irr_mean > -1, "irr_mean", "must be > -1")
        require(self.irr_std >= 0, "irr_std", "must be >= 0")
        require(abs(self.rho_log) <= 1, "rho_log", "must lie in [-1, 1]")
        require(self.hurdle_irr > -1, "hurdle_irr", "must be > -1")
        require(self.exit_years > 0, "exit_years", "must be > 0")
        require(self.noise_factor > 1, "noise_factor", "must be > 1")
        require(0 < self.noise_confidence < 1, "noise_confidence", "must lie in (0, 1)")
        require(self.n_f >= 2, "n_f", "must be >= 2")
        require(self.n_qmc >= 64 and self.n_qmc & (self.n_qmc - 1) == 0,
                "n_qmc", "must be a power of two >= 64")
        require(0 < self.target_dlambda <= 0.5, "target_dlambda", "must lie in (0, 0.5]")
        require(self.n_trials >= 1, "n_trials", "must be >= 1")
        require(self.irr_convention in IRR_CONVENTIONS,
                "irr_convention", f"must be one of {IRR_CONVENTIONS}")
        if self.intensity_kind == "piecewise":
            require(len(self.intensity_breakpoints) >= 2, "intensity_breakpoints",
                    "piecewise intensity needs at least two breakpoints")
            require(len(self.intensity_rates) == len(self.intensity_breakpoints) - 1,
                    "intensity_rates", "need one rate per breakpoint interval")
            require(self.intensity_breakpoints[-1] >= self.horizon_years,
                    "intensity_breakpoints", "must cover the whole horizon")
        if self.intensity_kind == "sinusoidal":
            require(0 <= self.intensity_amplitude <= self.intensity_base,
                    "intensity_amplitude", "need base >= amplitude >= 0")
            require(self.intensity_period > 0, "intensity_period", "must be > 0")

    @property
    def horizon_years(self) -> float:
        return self.horizon_quarters / 4.0

    @property
    def moic_hurdle(self) -> float:
        return (1.0 + self.hurdle_irr) ** self.exit_years

    def noise_params(self) -> tuple[float, float]:
        mu, sigma = noise_from_bracket(self.noise_factor, self.noise_confidence)
        if self.noise_mu_override is not None:
            mu = self.noise_mu_override
        return mu, sigma

    def deal_model(self) -> DealModel:
        noise_mu, noise_sigma = self.noise_params()
        return DealModel(
            size=moment_match_lognormal(self.size_mean, self.size_std),
            growth=moment_match_lognormal(1.0 + self.irr_mean, self.irr_std),
            rho_log=self.rho_log,
            exit_years=self.exit_years,
            moic_hurdle=self.moic_hurdle,
            noise_sigma=noise_sigma,
            noise_mu=noise_mu,
        )

    def intensity(self) -> IntensityModel:
        if self.intensity_kind == "constant":
            return ConstantIntensity(rate=self.deals_per_year)
        if self.intensity_kind == "piecewise":
            return PiecewiseIntensity(
                breakpoints=tuple(self.intensity_breakpoints),
                rates=tuple(self.intensity_rates),
            )
        return SinusoidalIntensity(
            base=self.intensity_base,
            amplitude=self.intensity_amplitude,
            period=self.intensity_period,
            phase=self.intensity_phase,
        )

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            deal_model=self.deal_model(),
            intensity=self.intensity(),
            horizon=self.horizon_years,
            capital_grid=CapitalGrid.uniform(self.fund_size, self.n_f),
            n_qmc=self.n_qmc,
            target_dlambda=self.target_dlambda,
            fresh_points_per_step=self.qmc_fresh_per_step,
        )

    def derived(self) -> dict:
        """Every derived parameter, so a run is auditable without re-deriving."""
        model = self.deal_model()
        return {
            "horizon_years": self.horizon_years,
            "moic_hurdle": self.moic_hurdle,
            "size_log_mu": model.size.mu,
            "size_log_sigma": model.size.sigma,
            "growth_log_mu": model.growth.mu,
            "growth_log_sigma": model.growth.sigma,
            "moic_log_mu": self.exit_years * model.growth.mu,
            "moic_log_sigma": self.exit_years * model.growth.sigma,
            "noise_mu": model.noise_mu,
            "noise_sigma": model.noise_sigma,
            "mean_moic": math.exp(
                self.exit_years * model.growth.mu
                + (self.exit_years * model.growth.sigma) ** 2 / 2
            ),
        }


_BOOL_KEYS = {"qmc_fresh_per_step"}
_INT_KEYS = {"n_f", "n_qmc", "n_trials", "seed"}
_LIST_KEYS = {"intensity_breakpoints", "intensity_rates"}
_STR_KEYS = {"intensity_kind", "irr_convention", "out_dir"}
_OPTIONAL_FLOAT_KEYS = {"noise_mu_override"}
_KNOWN_KEYS = {f.name for f in fields(RunConfig)}


def _parse_value(key: str, raw: str, lineno: int):
    raw = raw.strip()
    try:
        if key in _STR_KEYS:
            return raw
        if key in _BOOL_KEYS:
            if raw.lower() in ("true", "yes", "1"):
                return True
            if raw.lower() in ("false", "no", "0"):
                return False
            raise ValueError("expected true/false")
        if key in _LIST_KEYS:
            return [float(x) for x in raw.split(",") if x.strip()]
        if key in _INT_KEYS:
            return int(raw)
        if key in _OPTIONAL_FLOAT_KEYS:
            return None if raw == "" or raw.lower() == "none" else float(raw)
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc


def parse_config_text(text: str) -> RunConfig:
    config = RunConfig()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        setattr(config, key, _parse_value(key, raw, lineno))
    config.validate()
    return config


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)
