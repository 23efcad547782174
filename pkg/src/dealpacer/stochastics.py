"""Correlated lognormal deal model, Sobol sampling, and underwriting noise."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

__all__ = [
    "LognormalParams",
    "DealModel",
    "DealSample",
    "QmcSource",
    "PseudorandomSource",
    "moment_match_lognormal",
    "sobol_points",
    "inverse_normal_cdf",
    "sample_deals",
    "sample_deal_arrays",
    "realize_moic",
    "noise_from_bracket",
]


@dataclass(frozen=True)
class LognormalParams:
    """Log-space location/scale of a lognormal law."""

    mu: float
    sigma: float

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma)):
            raise ValueError("lognormal params must be finite")

    @property
    def mean(self) -> float:
        return math.exp(self.mu + self.sigma**2 / 2)

    @property
    def std(self) -> float:
        return self.mean * math.sqrt(math.expm1(self.sigma**2))


@dataclass(frozen=True)
class DealModel:
    """Joint law of deal size and growth, plus underwriting-noise parameters.

    `size` is the lognormal law of the deal ticket in $M.  `growth` is the
    lognormal law of (1 + annual return); the holding multiple over
    `exit_years` is then itself lognormal with log-params scaled by the
    horizon.  `rho_log` is the correlation between log size and log multiple.
    """

    size: LognormalParams
    growth: LognormalParams
    rho_log: float
    exit_years: float
    moic_hurdle: float
    noise_sigma: float = 0.0
    noise_mu: float = 0.0

    def __post_init__(self):
        if abs(self.rho_log) > 1:
            raise ValueError(f"rho_log must be in [-1, 1], got {self.rho_log}")
        if self.exit_years <= 0:
            raise ValueError(f"exit_years must be > 0, got {self.exit_years}")
        if self.moic_hurdle <= 0:
            raise ValueError(f"moic_hurdle must be > 0, got {self.moic_hurdle}")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")


@dataclass(frozen=True)
class DealSample:
    """One sampled deal: ticket size and underwritten multiple."""

    size: float
    moic: float


@dataclass(frozen=True)
class QmcSource:
    """Deterministic low-discrepancy sampling, offset by `skip` points."""

    skip: int = 0


@dataclass(frozen=True)
class PseudorandomSource:
    """Seeded pseudorandom sampling."""

    seed: int


def moment_match_lognormal(mean: float, std: float) -> LognormalParams:
    """Lognormal log-params reproducing the given natural-unit mean and std."""
    if mean <= 0:
        raise ValueError(f"mean must be > 0, got {mean}")
    if std < 0:
        raise ValueError(f"std must be >= 0, got {std}")
    sigma2 = math.log(1.0 + (std / mean) ** 2)
    mu = math.log(mean) - sigma2 / 2
    return LognormalParams(mu=mu, sigma=math.sqrt(sigma2))


# Direction integers for the first two Sobol dimensions, scaled to 32 bits.
# Dimension 1 is the van der Corput sequence in base 2; dimension 2 uses the
# degree-1 primitive polynomial with initial value m_1 = 1 and the recurrence
# m_k = (2 * m_{k-1}) ^ m_{k-1}.
_SOBOL_BITS = 32


def _direction_integers(dim_index: int) -> np.ndarray:
    v = np.zeros(_SOBOL_BITS, dtype=np.uint64)
    if dim_index == 0:
        for k in range(_SOBOL_BITS):
            v[k] = np.uint64(1) << np.uint64(_SOBOL_BITS - 1 - k)
    elif dim_index == 1:
        m = 1
        for k in range(_SOBOL_BITS):
            v[k] = np.uint64(m) << np.uint64(_SOBOL_BITS - 1 - k)
            m = (2 * m) ^ m
    else:
        raise ValueError(f"unsupported Sobol dimension index {dim_index}")
    return v


_DIRECTIONS = [_direction_integers(0), _direction_integers(1)]


def sobol_points(n: int, dim: int, skip: int = 0) -> np.ndarray:
    """First `n` Sobol points after `skip`, as an (n, dim) array in [0, 1).

    Indexing starts at the sequence's second element, so the all-zeros
    point is never emitted and every coordinate lies strictly inside (0, 1).
    Identical arguments always reproduce identical output.
    """
    if dim not in (1, 2):
        raise ValueError(f"only dim 1 or 2 supported, got {dim}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if skip < 0:
        raise ValueError(f"skip must be >= 0, got {skip}")
    idx = np.arange(skip + 1, skip + n + 1, dtype=np.uint64)
    gray = idx ^ (idx >> np.uint64(1))
    out = np.empty((n, dim), dtype=np.float64)
    for d in range(dim):
        v = _DIRECTIONS[d]
        x = np.zeros(n, dtype=np.uint64)
        for b in range(_SOBOL_BITS):
            bit = (gray >> np.uint64(b)) & np.uint64(1)
            x ^= bit * v[b]
        out[:, d] = x * (0.5**_SOBOL_BITS)
    return out


def inverse_normal_cdf(u):
    """Standard normal quantile; u must lie strictly inside (0, 1)."""
    u_arr = np.asarray(u, dtype=np.float64)
    if np.any(u_arr <= 0.0) or np.any(u_arr >= 1.0):
        raise ValueError("u must lie strictly in (0, 1)")
    result = ndtri(u_arr)
    return float(result) if np.isscalar(u) or u_arr.ndim == 0 else result


def sample_deal_arrays(
    model: DealModel, n: int, source: QmcSource | PseudorandomSource
) -> tuple[np.ndarray, np.ndarray]:
    """Sample n correlated (size, moic) pairs; returns (sizes, moics) arrays.

    log size and log moic are built from a 2x2 Cholesky of the correlation,
    so their sample correlation converges to `rho_log`.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if isinstance(source, QmcSource):
        u = sobol_points(n, 2, skip=source.skip)
        z = ndtri(u)
        z1, z2 = z[:, 0], z[:, 1]
    elif isinstance(source, PseudorandomSource):
        rng = np.random.default_rng(source.seed)
        z = rng.standard_normal((n, 2))
        z1, z2 = z[:, 0], z[:, 1]
    else:
        raise TypeError(f"unsupported sample source {source!r}")
    rho = model.rho_log
    z2c = rho * z1 + math.sqrt(1.0 - rho * rho) * z2
    log_s = model.size.mu + model.size.sigma * z1
    log_m = model.exit_years * (model.growth.mu + model.growth.sigma * z2c)
    return np.exp(log_s), np.exp(log_m)


def sample_deals(
    model: DealModel, n: int, source: QmcSource | PseudorandomSource
) -> list[DealSample]:
    """Sample n deals from the correlated lognormal model."""
    sizes, moics = sample_deal_arrays(model, n, source)
    return [DealSample(size=float(s), moic=float(m)) for s, m in zip(sizes, moics)]


def realize_moic(underwritten: float, model: DealModel, z: float) -> float:
    """Realized multiple at exit given the underwritten one and a normal draw."""
    if underwritten <= 0:
        raise ValueError(f"underwritten moic must be > 0, got {underwritten}")
    return underwritten * math.exp(model.noise_mu + model.noise_sigma * z)


def noise_from_bracket(factor: float = 2.0, confidence: float = 0.95) -> tuple[float, float]:
    """(noise_mu, noise_sigma) such that realized/underwritten is mean-one and
    falls within [1/factor, factor] with the given probability."""
    if factor <= 1.0:
        raise ValueError(f"factor must be > 1, got {factor}")
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must be in (0, 1), got {confidence}")
    sigma = math.log(factor) / ndtri((1.0 + confidence) / 2.0)
    return -sigma * sigma / 2.0, sigma
