import pytest

from dealpacer.arrivals import ConstantIntensity
from dealpacer.solver import CapitalGrid, SolverConfig, solve
from dealpacer.stochastics import DealModel, moment_match_lognormal, noise_from_bracket


def make_reference_model() -> DealModel:
    """Fund model used throughout: $50M/25M deal sizes, 20%/2.5% IRR law,
    rho -0.3, 5-year exits, 15% hurdle, factor-2-at-95% underwriting noise."""
    noise_mu, noise_sigma = noise_from_bracket(2.0, 0.95)
    return DealModel(
        size=moment_match_lognormal(50.0, 25.0),
        growth=moment_match_lognormal(1.20, 0.025),
        rho_log=-0.3,
        exit_years=5.0,
        moic_hurdle=1.15**5,
        noise_sigma=noise_sigma,
        noise_mu=noise_mu,
    )


def make_reference_config(n_qmc: int = 4096) -> SolverConfig:
    return SolverConfig(
        deal_model=make_reference_model(),
        intensity=ConstantIntensity(12.0),
        horizon=3.0,
        capital_grid=CapitalGrid.uniform(500.0, 101),
        n_qmc=n_qmc,
        target_dlambda=0.05,
    )


@pytest.fixture(scope="session")
def reference_model():
    return make_reference_model()


@pytest.fixture(scope="session")
def reference_config():
    return make_reference_config()


@pytest.fixture(scope="session")
def reference_solution(reference_config):
    return solve(reference_config)


@pytest.fixture(scope="session")
def reference_table(reference_solution):
    return reference_solution.table
