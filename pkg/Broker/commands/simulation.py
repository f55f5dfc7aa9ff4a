"""Simulate command."""

import logging
from typing import Optional, Tuple

import pandas as pd

from Broker.models.experiment_models import ExperimentConfig
from Broker.models.simulation_models import EpsMode, PolicyKind
from Broker.services import contract_service
from Broker.services.simulation_service import SimulationService
from Broker.services.distribution_service import bursty_distribution_from_users

logger = logging.getLogger(__name__)


def cmd_simulate(config: ExperimentConfig, trace: bool = False) -> Tuple[pd.DataFrame, Optional[pd.DataFrame]]:
    """Run the market simulator and compare it with the analytic expectations.

    Returns:
        (report, trace): report has columns field, mean, se, n; trace has
        period, xi, k, db_profit, wsd_profit, or is None.
    """
    sim = config.sim_config()
    params, xi_dist = config.params, config.xi_dist
    eps_dist = config.eps_dist
    if sim.eps_mode is EpsMode.RANDOM_USERS:
        eps_dist = bursty_distribution_from_users(sim.random_users)
        logger.info(f"Bursty demand from {sim.random_users.user_count} random users: mean {eps_dist.mean():.4f}")

    menu = None
    if sim.policy is PolicyKind.MENU:
        menu = contract_service.build_contract(sim.scheme, params, xi_dist, eps_dist, config.sweep.grid_size)

    service = SimulationService()
    report, periods = service.run_market_trace(sim, params, xi_dist, eps_dist, menu)

    analytic = service.analytic_expectation(sim, params, xi_dist, eps_dist, menu)
    if report.n_samples >= 100:
        for field in ("db", "wsd", "network"):
            ok = service.validate_against_analytic(report, getattr(analytic, field), field)
            logger.info(f"{field}: simulated {report.mean(field):.6f} vs analytic {getattr(analytic, field):.6f} "
                        f"({'within' if ok else 'outside'} 3 SE)")

    frame = pd.DataFrame({
        "field": ["db_profit", "wsd_profit", "network_profit"],
        "mean": [report.db_profit_mean, report.wsd_profit_mean, report.network_profit_mean],
        "se": [report.db_profit_se, report.wsd_profit_se, report.network_profit_se],
        "n": [report.n_samples] * 3,
    })
    return frame, (periods if trace else None)
