"""Test configuration and fixtures.

This module provides pytest fixtures and configuration for all tests.
"""

import pytest
import sys
import os

# Add project root to Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from Broker.models.distribution_models import DemandDistribution
from Broker.models.market_models import MarketParams, RiskScheme
from Broker.services.contract_service import ContractService


@pytest.fixture(scope="session")
def params() -> MarketParams:
    """Provide the default market prices.

    Returns:
        r=1, s=0.8, w=0.5, c=0.2, u_min=0.
    """
    return MarketParams(r=1.0, s=0.8, w=0.5, c=0.2, u_min=0.0)


@pytest.fixture(scope="session")
def xi_dist() -> DemandDistribution:
    """Provide the default scheduled demand, a normal(30, 64) truncated to [0, 62]."""
    return DemandDistribution.truncated_normal(30.0, 64.0)


@pytest.fixture(scope="session")
def eps_dist() -> DemandDistribution:
    """Provide the default bursty demand, chi-square with 30 degrees of freedom."""
    return DemandDistribution.chi_square(30)


@pytest.fixture(scope="session")
def menu_db_risk(params, xi_dist, eps_dist):
    """Provide the optimal 200-item menu under DB-bearing-risk."""
    return ContractService().build_contract(RiskScheme.DB_BEARING_RISK, params, xi_dist, eps_dist, 200)


@pytest.fixture(scope="session")
def menu_wsd_risk(params, xi_dist, eps_dist):
    """Provide the optimal 200-item menu under WSD-bearing-risk."""
    return ContractService().build_contract(RiskScheme.WSD_BEARING_RISK, params, xi_dist, eps_dist, 200)


@pytest.fixture
def write_config(tmp_path):
    """Provide a helper that writes an experiment config file.

    Args:
        tmp_path: Pytest temporary directory fixture.

    Returns:
        A function taking the file text and returning its path.
    """
    def _write(text: str, name: str = "experiment.ini"):
        path = tmp_path / name
        path.write_text(text)
        return path

    return _write
