"""Aggregate reservation command.

Evaluates the database's profit from pooling the reservations of a fleet
of WSDs under the DB-bearing-risk menu, for fleets of growing size.
"""

import logging
from typing import List, Tuple

import pandas as pd

from Broker.models.aggregate_models import FleetConfig
from Broker.models.distribution_models import DemandDistribution
from Broker.models.experiment_models import ExperimentConfig
from Broker.models.market_models import RiskScheme
from Broker.services import aggregate_service, contract_service
from Broker.services.storage_service import load_fleet_csv

logger = logging.getLogger(__name__)


def _fleets(config: ExperimentConfig, xi_dist: DemandDistribution) -> List[List[float]]:
    fleet = config.fleet
    if fleet.mode == "csv":
        return [load_fleet_csv(fleet.csv)]
    if fleet.mode == "sampled":
        draws = xi_dist.sample(config.output.seed, fleet.max_size).tolist()
        return [draws[:n] for n in range(1, fleet.max_size + 1)]
    return [[fleet.xi_mean] * n for n in range(1, fleet.max_size + 1)]


def cmd_aggregate(config: ExperimentConfig) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Database profit with and without aggregate reservation per fleet size.

    Returns:
        (summary, reservations): summary has columns N, profit_without,
        profit_with, gain_pct; reservations has N, TK, OTK_star, profit_gain.
    """
    params = config.params
    xi_dist = DemandDistribution.truncated_normal(config.fleet.xi_mean, config.fleet.xi_variance)
    eps_dist = DemandDistribution.chi_square(config.fleet.eps_dof)
    menu = contract_service.build_contract(
        RiskScheme.DB_BEARING_RISK, params, xi_dist, eps_dist, config.sweep.grid_size
    )

    summary, reservations = [], []
    for xi_values in _fleets(config, xi_dist):
        fleet = FleetConfig(xi_values=tuple(xi_values), c=params.c, c_ex=config.fleet.c_ex, eps_dist_single=eps_dist)
        result = aggregate_service.evaluate_fleet(menu, fleet, params)
        summary.append({
            "N": result.n_wsds,
            "profit_without": result.profit_without,
            "profit_with": result.profit_with,
            "gain_pct": result.gain_pct,
        })
        reservations.append({
            "N": result.n_wsds,
            "TK": result.tk,
            "OTK_star": result.otk_star,
            "profit_gain": result.profit_gain,
        })

    logger.info(f"Aggregate sweep over {len(summary)} fleet(s), mode={config.fleet.mode}")
    return pd.DataFrame(summary), pd.DataFrame(reservations)
