"""Reservation and profit sweep commands.

This module provides the sub-commands that tabulate reservations across
scheduled demand and expected profits across the wholesale price or the
scheduled-demand variance, comparing the centralized benchmark, the two
no-sharing regimes and the two optimal contracts.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List

import numpy as np
import pandas as pd

from Broker.config import get_settings
from Broker.models.distribution_models import DemandDistribution, DistributionKind
from Broker.models.experiment_models import ExperimentConfig
from Broker.models.market_models import MarketParams, RiskScheme
from Broker.services import contract_service, market_service

logger = logging.getLogger(__name__)

PROFIT_COLUMNS = [
    "profit_centralized",
    "profit_s1_nosharing",
    "profit_s1_contract",
    "profit_s2_nosharing",
    "profit_s2_contract",
]
PROFIT_KINDS = ("db", "wsd", "network")


def cmd_reservation_sweep(config: ExperimentConfig) -> pd.DataFrame:
    """Reservations of every regime across the ξ support.

    Returns:
        DataFrame with columns xi, k_so, k_db_sym, k_db_asy, k_wsd.
    """
    params, xi_dist, eps_dist = config.params, config.xi_dist, config.eps_dist
    xi = config.xi_values
    frame = pd.DataFrame({
        "xi": xi,
        "k_so": market_service.k_centralized(xi, params, eps_dist),
        "k_db_sym": market_service.k_db_sym(xi, params, eps_dist),
        "k_db_asy": np.full_like(xi, market_service.k_db_asym(params, xi_dist, eps_dist)),
        "k_wsd": market_service.k_wsd(xi, params, eps_dist),
    })
    logger.info(f"Reservation sweep over {len(xi)} scheduled-demand values")
    return frame


def profit_row(
    params: MarketParams, xi_dist: DemandDistribution, eps_dist: DemandDistribution,
    profit: str, grid_size: int,
) -> Dict[str, float]:
    """Expected profit of the chosen party under every regime at one market point.

    The centralized column is the integrated system's network profit
    whatever party is selected.
    """
    if profit not in PROFIT_KINDS:
        raise ValueError(f"profit must be one of {', '.join(PROFIT_KINDS)}, got {profit}")

    def party(breakdown) -> float:
        return getattr(breakdown, profit)

    centralized = market_service.expected_network_profit_of_policy(
        lambda xi: market_service.k_centralized(xi, params, eps_dist), params, xi_dist, eps_dist
    )
    k_asym = market_service.k_db_asym(params, xi_dist, eps_dist)
    s1_nosharing = market_service.expected_profits_of_policy(
        lambda xi: k_asym, params, xi_dist, eps_dist, RiskScheme.DB_BEARING_RISK
    )
    s2_nosharing = market_service.expected_profits_of_policy(
        lambda xi: market_service.k_wsd(xi, params, eps_dist), params, xi_dist, eps_dist, RiskScheme.WSD_BEARING_RISK
    )

    contracts = {}
    for scheme in RiskScheme:
        menu = contract_service.build_contract(scheme, params, xi_dist, eps_dist, grid_size)
        contracts[scheme] = market_service.expected_profits_of_policy(
            lambda xi: np.interp(xi, menu.xi, menu.k), params, xi_dist, eps_dist, scheme,
            fee=lambda xi: np.interp(xi, menu.xi, menu.p),
        )

    return {
        "profit_centralized": centralized,
        "profit_s1_nosharing": party(s1_nosharing),
        "profit_s1_contract": party(contracts[RiskScheme.DB_BEARING_RISK]),
        "profit_s2_nosharing": party(s2_nosharing),
        "profit_s2_contract": party(contracts[RiskScheme.WSD_BEARING_RISK]),
    }


def _profit_row_job(args) -> Dict[str, float]:
    return profit_row(*args)


def _run_rows(jobs: List[tuple]) -> List[Dict[str, float]]:
    """Evaluate sweep points, in parallel when configured; rows keep sweep order."""
    workers = get_settings().workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_profit_row_job, jobs))
    return [profit_row(*job) for job in jobs]


def cmd_profit_sweep(config: ExperimentConfig, profit: str = "db") -> pd.DataFrame:
    """Expected profits across the wholesale-price sweep.

    Returns:
        DataFrame with columns w, profit_centralized, profit_s1_nosharing,
        profit_s1_contract, profit_s2_nosharing, profit_s2_contract.
    """
    base = config.params
    w_values = config.sweep.w_values
    bad = [w for w in w_values if not base.c <= w <= base.s]
    if bad:
        raise ValueError(f"wholesale prices {bad} outside [c={base.c}, s={base.s}]")

    jobs = [(base.with_wholesale(float(w)), config.xi_dist, config.eps_dist, profit, config.sweep.grid_size)
            for w in w_values]
    rows = _run_rows(jobs)
    frame = pd.DataFrame(rows, columns=PROFIT_COLUMNS)
    frame.insert(0, "w", w_values)
    logger.info(f"Profit sweep ({profit}) over {len(w_values)} wholesale prices")
    return frame


def cmd_variance_sweep(config: ExperimentConfig, profit: str = "db") -> pd.DataFrame:
    """Expected profits across the scheduled-demand variance sweep.

    Each point uses a truncated normal with the configured mean and the
    default truncation for that variance.

    Returns:
        DataFrame with a variance column followed by the profit columns.
    """
    if config.xi.kind is not DistributionKind.TRUNCATED_NORMAL:
        raise ValueError("variance sweep needs a truncated-normal scheduled demand")
    variances = config.sweep.variances
    jobs = [(config.params, DemandDistribution.truncated_normal(config.xi.mean, float(v)), config.eps_dist,
             profit, config.sweep.grid_size) for v in variances]
    rows = _run_rows(jobs)
    frame = pd.DataFrame(rows, columns=PROFIT_COLUMNS)
    frame.insert(0, "variance", variances)
    logger.info(f"Variance sweep ({profit}) over {len(variances)} variances")
    return frame
