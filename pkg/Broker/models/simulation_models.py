"""Simulation data models.

This module defines the configuration of a Monte Carlo market run and the
report it produces.
"""

from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from Broker.models.distribution_models import RandomUserModel
from Broker.models.market_models import RiskScheme


class PolicyKind(str, Enum):
    """How the reservation k is fixed for a reservation period."""
    FIXED_K = "fixed-k"
    MENU = "menu"
    CENTRALIZED = "centralized"
    DB_SYM = "db-sym"
    DB_ASYM = "db-asym"
    WSD_OPT = "wsd-opt"


class EpsMode(str, Enum):
    """Source of the bursty demand draws."""
    DISTRIBUTION = "distribution"
    RANDOM_USERS = "random-users"


class SimConfig(BaseModel):
    """Configuration of a simulated market run.

    Attributes:
        n_reservation_periods: Reservation periods (one ξ draw each).
        accesses_per_period: Access periods T per reservation period (one ε draw each).
        seed: Root seed; every reservation period derives its own stream.
        scheme: Risk-bearing scheme that sets the WSD's bill.
        policy: Reservation policy.
        fixed_k: Reservation of the fixed-k policy.
        eps_mode: Draw ε from G or from random-user channel physics.
        random_users: Random-user model for eps_mode random-users.
        workers: Processes running reservation periods (1 = in-process).
    """

    model_config = ConfigDict(frozen=True)

    n_reservation_periods: int = Field(2000, ge=1)
    accesses_per_period: int = Field(50, ge=1)
    seed: int = 20240601
    scheme: RiskScheme = RiskScheme.DB_BEARING_RISK
    policy: PolicyKind = PolicyKind.DB_ASYM
    fixed_k: Optional[float] = Field(None, ge=0)
    eps_mode: EpsMode = EpsMode.DISTRIBUTION
    random_users: Optional[RandomUserModel] = None
    workers: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check_policy_inputs(self) -> "SimConfig":
        if self.policy is PolicyKind.FIXED_K and self.fixed_k is None:
            raise ValueError("policy fixed-k requires fixed_k")
        if self.eps_mode is EpsMode.RANDOM_USERS and self.random_users is None:
            raise ValueError("eps_mode random-users requires a random-user model")
        return self


class SimulationReport(BaseModel):
    """Realized profits per access period.

    Attributes:
        db_profit_mean: Mean database profit.
        wsd_profit_mean: Mean WSD profit.
        network_profit_mean: Mean network profit.
        db_profit_se: Standard error of db_profit_mean.
        wsd_profit_se: Standard error of wsd_profit_mean.
        network_profit_se: Standard error of network_profit_mean.
        n_samples: Number of simulated access periods.
    """
    db_profit_mean: float
    wsd_profit_mean: float
    network_profit_mean: float
    db_profit_se: float = Field(..., ge=0)
    wsd_profit_se: float = Field(..., ge=0)
    network_profit_se: float = Field(..., ge=0)
    n_samples: int = Field(..., ge=1)

    @model_validator(mode="after")
    def _check_accounting(self) -> "SimulationReport":
        gap = abs(self.network_profit_mean - self.db_profit_mean - self.wsd_profit_mean)
        if gap > 1e-9 * max(1.0, abs(self.network_profit_mean)):
            raise ValueError(f"network profit differs from db + wsd by {gap:.3g}")
        return self

    def mean(self, which: str) -> float:
        return getattr(self, f"{which}_profit_mean")

    def se(self, which: str) -> float:
        return getattr(self, f"{which}_profit_se")
