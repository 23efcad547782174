"""Monte Carlo fund lifecycles: threshold policy vs fixed hurdle, paired trials."""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .arrivals import IntensityModel, simulate_arrivals
from .policy import ACCEPT, Decision, FundState, REJECT, UNAFFORDABLE, decide
from .solver import ValueTable
from .stochastics import DealModel, DealSample, PseudorandomSource, realize_moic, sample_deals

__all__ = [
    "CashFlow",
    "TrialResult",
    "PolicyStats",
    "StudySummary",
    "StudyResult",
    "Scenario",
    "make_scenario",
    "baseline_decide",
    "run_trial",
    "portfolio_irr",
    "run_study",
    "write_trials_csv",
    "write_summary_csv",
]

log = logging.getLogger(__name__)

IRR_BRACKET = (-0.999, 10.0)
IRR_NPV_RTOL = 1e-9
_QUANTILES = (5, 25, 50, 75, 95)

# IRR conventions: money-weighted over actual investments only, or the whole
# fund committed at t=0 with unused capital handed back at the horizon.
COMMITTED_ONLY = "committed_only"
FULL_COMMITMENT = "full_commitment"
IRR_CONVENTIONS = (COMMITTED_ONLY, FULL_COMMITMENT)


@dataclass(frozen=True)
class CashFlow:
    time: float
    amount: float  # negative = investment, positive = return


@dataclass(frozen=True)
class TrialResult:
    accepted_deals: int
    deployed: float
    cashflows: tuple[CashFlow, ...]
    irr: float | None


@dataclass(frozen=True)
class Scenario:
    """Pre-drawn stochastic streams for one trial, shared across policies."""

    arrival_times: np.ndarray
    deals: tuple[DealSample, ...]
    noise_z: np.ndarray


@dataclass(frozen=True)
class PolicyStats:
    n_trials: int
    n_with_irr: int
    mean_irr: float | None
    std_irr: float | None
    irr_quantiles: dict[int, float]
    mean_deployed: float
    mean_deal_count: float


@dataclass(frozen=True)
class StudySummary:
    adp: PolicyStats
    baseline: PolicyStats
    n_paired: int
    mean_irr_difference: float | None
    se_irr_difference: float | None


@dataclass(frozen=True)
class StudyResult:
    summary: StudySummary
    adp_trials: list[TrialResult] = field(repr=False)
    baseline_trials: list[TrialResult] = field(repr=False)


def make_scenario(
    model: DealModel, intensity: IntensityModel, horizon: float, seed: int
) -> Scenario:
    """Arrivals, deals, and noise draws for one trial, all derived from `seed`.

    The three streams use independent child seeds so that, e.g., the noise
    draw for arrival i never depends on how many deals were accepted.
    """
    arrivals_seed, deals_seed, noise_seed = np.random.SeedSequence(seed).spawn(3)
    times = simulate_arrivals(intensity, horizon, seed=arrivals_seed)
    n = len(times)
    if n == 0:
        return Scenario(arrival_times=times, deals=(), noise_z=np.empty(0))
    deals = tuple(sample_deals(model, n, PseudorandomSource(seed=deals_seed)))
    noise_z = np.random.default_rng(noise_seed).standard_normal(n)
    return Scenario(arrival_times=times, deals=deals, noise_z=noise_z)


def baseline_decide(
    state: FundState, deal: DealSample, hurdle_irr: float, exit_years: float
) -> Decision:
    """Fixed-hurdle rule: accept anything affordable at or above the hurdle rate.

    The comparison runs in multiple space (moic >= (1+hurdle)^H) so that a
    deal underwritten at exactly the hurdle rate accepts, mirroring the
    table policy's tie rule without a lossy root.
    """
    hurdle_moic = (1.0 + hurdle_irr) ** exit_years
    if deal.size > state.remaining_capital:
        return Decision(verdict=UNAFFORDABLE, threshold_moic=hurdle_moic,
                        threshold_irr=hurdle_irr, deal_value_excess=None)
    verdict = ACCEPT if deal.moic >= hurdle_moic else REJECT
    return Decision(
        verdict=verdict,
        threshold_moic=hurdle_moic,
        threshold_irr=hurdle_irr,
        deal_value_excess=deal.size * (deal.moic - hurdle_moic),
    )


def run_trial(
    policy,
    scenario: Scenario,
    fund_size: float,
    horizon: float,
    model: DealModel,
    irr_convention: str = COMMITTED_ONLY,
) -> TrialResult:
    """Replay one scenario against a decision function.

    Decisions see only the underwritten deal; realized multiples (underwritten
    times noise) enter the ledger after acceptance. Each accepted deal pays
    back `exit_years` after investment.
    """
    if irr_convention not in IRR_CONVENTIONS:
        raise ValueError(f"unknown irr_convention {irr_convention!r}")
    remaining = fund_size
    flows: list[CashFlow] = []
    accepted = 0
    deployed = 0.0
    for t, deal, z in zip(scenario.arrival_times, scenario.deals, scenario.noise_z):
        if t >= horizon:
            continue
        decision = policy(FundState(remaining_capital=remaining, time=float(t)), deal)
        if decision.verdict != ACCEPT:
            continue
        realized = realize_moic(deal.moic, model, float(z))
        flows.append(CashFlow(time=float(t), amount=-deal.size))
        flows.append(CashFlow(time=float(t) + model.exit_years, amount=deal.size * realized))
        remaining -= deal.size
        deployed += deal.size
        accepted += 1
    if irr_convention == FULL_COMMITMENT:
        inflows = [cf for cf in flows if cf.amount > 0]
        flows = [CashFlow(time=0.0, amount=-fund_size)]
        flows.extend(inflows)
        if remaining > 0.0:
            flows.append(CashFlow(time=horizon, amount=remaining))
        flows.sort(key=lambda cf: cf.time)
    irr = portfolio_irr(flows) if accepted else None
    return TrialResult(
        accepted_deals=accepted,
        deployed=deployed,
        cashflows=tuple(flows),
        irr=irr,
    )


def _npv(rate: float, flows) -> float:
    return sum(cf.amount * (1.0 + rate) ** (-cf.time) for cf in flows)


def portfolio_irr(cashflows) -> float | None:
    """Money-weighted annual rate zeroing the NPV, by bracketed bisection.

    Returns None (with a log diagnostic) when the bracket has no sign change,
    e.g. all-positive or all-negative flows.
    """
    flows = list(cashflows)
    scale = sum(abs(cf.amount) for cf in flows)
    if scale == 0.0 or not flows:
        return None
    tol = IRR_NPV_RTOL * scale
    lo, hi = IRR_BRACKET
    npv_lo = _npv(lo, flows)
    npv_hi = _npv(hi, flows)
    if npv_lo == 0.0:
        return lo
    if npv_hi == 0.0:
        return hi
    if (npv_lo > 0) == (npv_hi > 0):
        log.debug("IRR bracket has no sign change: npv(%g)=%g, npv(%g)=%g",
                  lo, npv_lo, hi, npv_hi)
        return None
    for _ in range(500):
        mid = 0.5 * (lo + hi)
        npv_mid = _npv(mid, flows)
        if abs(npv_mid) <= tol:
            return mid
        if (npv_mid > 0) == (npv_lo > 0):
            lo, npv_lo = mid, npv_mid
        else:
            hi = mid
    log.debug("IRR bisection did not reach tolerance; returning midpoint")
    return 0.5 * (lo + hi)


def _policy_stats(trials: list[TrialResult]) -> PolicyStats:
    irrs = np.array([t.irr for t in trials if t.irr is not None])
    return PolicyStats(
        n_trials=len(trials),
        n_with_irr=len(irrs),
        mean_irr=float(np.mean(irrs)) if len(irrs) else None,
        std_irr=float(np.std(irrs, ddof=1)) if len(irrs) > 1 else None,
        irr_quantiles={q: float(np.percentile(irrs, q)) for q in _QUANTILES}
        if len(irrs)
        else {},
        mean_deployed=float(np.mean([t.deployed for t in trials])),
        mean_deal_count=float(np.mean([t.accepted_deals for t in trials])),
    )


def _run_trial_pair(table, model, intensity, horizon, fund_size, hurdle_irr, seed, convention):
    scenario = make_scenario(model, intensity, horizon, seed)
    adp = run_trial(
        lambda state, deal: decide(table, state, deal),
        scenario, fund_size, horizon, model, irr_convention=convention,
    )
    base = run_trial(
        lambda state, deal: baseline_decide(state, deal, hurdle_irr, model.exit_years),
        scenario, fund_size, horizon, model, irr_convention=convention,
    )
    return adp, base


def _run_trial_block(args):
    table, model, intensity, horizon, fund_size, hurdle_irr, seeds, convention = args
    return [
        _run_trial_pair(table, model, intensity, horizon, fund_size, hurdle_irr, s, convention)
        for s in seeds
    ]


def run_study(
    table: ValueTable,
    model: DealModel,
    intensity: IntensityModel,
    n_trials: int,
    base_seed: int,
    workers: int = 1,
    irr_convention: str = COMMITTED_ONLY,
) -> StudyResult:
    """Paired comparison over n_trials scenarios: the table-driven policy and
    the fixed-hurdle baseline replay identical arrival/deal/noise streams."""
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    horizon = table.horizon
    fund_size = table.fund_size
    hurdle_irr = table.moic_hurdle ** (1.0 / table.exit_years) - 1.0
    seeds = [base_seed + i for i in range(n_trials)]

    if workers > 1:
        blocks = np.array_split(np.asarray(seeds), workers)
        jobs = [
            (table, model, intensity, horizon, fund_size, hurdle_irr, list(block), irr_convention)
            for block in blocks
            if len(block)
        ]
        pairs = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for block_result in pool.map(_run_trial_block, jobs):
                pairs.extend(block_result)
    else:
        pairs = [
            _run_trial_pair(
                table, model, intensity, horizon, fund_size, hurdle_irr, s, irr_convention
            )
            for s in seeds
        ]

    adp_trials = [p[0] for p in pairs]
    baseline_trials = [p[1] for p in pairs]
    diffs = np.array(
        [
            a.irr - b.irr
            for a, b in pairs
            if a.irr is not None and b.irr is not None
        ]
    )
    summary = StudySummary(
        adp=_policy_stats(adp_trials),
        baseline=_policy_stats(baseline_trials),
        n_paired=len(diffs),
        mean_irr_difference=float(np.mean(diffs)) if len(diffs) else None,
        se_irr_difference=float(np.std(diffs, ddof=1) / np.sqrt(len(diffs)))
        if len(diffs) > 1
        else None,
    )
    return StudyResult(summary=summary, adp_trials=adp_trials, baseline_trials=baseline_trials)


def write_trials_csv(result: StudyResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "policy", "n_deals", "deployed", "irr"])
        for name, trials in (("adp", result.adp_trials), ("baseline", result.baseline_trials)):
            for i, trial in enumerate(trials):
                writer.writerow([
                    i, name, trial.accepted_deals, repr(trial.deployed),
                    "" if trial.irr is None else repr(trial.irr),
                ])


def write_summary_csv(summary: StudySummary, path) -> None:
    def fmt(x):
        return "" if x is None else repr(x)

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["policy", "n_trials", "n_with_irr", "mean_irr", "std_irr"]
            + [f"irr_p{q}" for q in _QUANTILES]
            + ["mean_deployed", "mean_deal_count"]
        )
        for name, stats in (("adp", summary.adp), ("baseline", summary.baseline)):
            writer.writerow(
                [name, stats.n_trials, stats.n_with_irr, fmt(stats.mean_irr), fmt(stats.std_irr)]
                + [fmt(stats.irr_quantiles.get(q)) for q in _QUANTILES]
                + [fmt(stats.mean_deployed), fmt(stats.mean_deal_count)]
            )
        writer.writerow([])
        writer.writerow(["n_paired", "mean_irr_difference", "se_irr_difference"])
        writer.writerow([
            summary.n_paired,
            fmt(summary.mean_irr_difference),
            fmt(summary.se_irr_difference),
        ])
