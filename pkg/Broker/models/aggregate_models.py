"""Fleet data models.

This module defines a fleet of co-located WSDs served by one database and
the results of the database's second-stage aggregate reservation.
"""

from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from Broker.models.distribution_models import DemandDistribution


class FleetConfig(BaseModel):
    """A fleet of WSDs with i.i.d. bursty demand.

    Attributes:
        xi_values: Realized scheduled demand ξ_n of every WSD.
        c: Reservation cost per unit bandwidth.
        c_ex: Replenishment cost per unit bandwidth bought after the deadline.
        eps_dist_single: Bursty demand distribution G of one WSD.
    """

    model_config = ConfigDict(frozen=True)

    xi_values: Tuple[float, ...] = Field(..., min_length=1, description="Scheduled demand per WSD")
    c: float = Field(..., gt=0, description="Reservation cost per unit bandwidth")
    c_ex: float = Field(..., gt=0, description="Replenishment cost per unit bandwidth")
    eps_dist_single: DemandDistribution

    @model_validator(mode="after")
    def _check_costs(self) -> "FleetConfig":
        if not self.c_ex > self.c:
            raise ValueError(f"replenishment cost must exceed reservation cost, got c_ex={self.c_ex}, c={self.c}")
        if any(xi < 0 for xi in self.xi_values):
            raise ValueError("scheduled demands must be nonnegative")
        return self

    @property
    def size(self) -> int:
        return len(self.xi_values)


class AggregateReservation(BaseModel):
    """Optimal aggregate reservation OTK* of the database.

    Attributes:
        otk_star: Aggregate reservation actually placed.
        profit: Expected incremental profit at otk_star.
        boundary: True if no interior first-order root beat the endpoints.
    """
    otk_star: float
    profit: float
    boundary: bool = False


class FleetEvaluation(BaseModel):
    """Database profit of a fleet with and without aggregate reservation.

    Attributes:
        n_wsds: Number of WSDs N.
        tk: Total requested reservation Σ k(ξ_n).
        t_xi: Total scheduled demand Σ ξ_n.
        otk_star: Optimal aggregate reservation.
        boundary: Whether otk_star is an endpoint of [t_xi, tk].
        profit_without: Σ of per-WSD database profits at their menu items.
        profit_gain: Expected incremental profit of reserving otk_star instead of tk.
    """
    n_wsds: int = Field(..., ge=0)
    tk: float
    t_xi: float
    otk_star: float
    boundary: bool
    profit_without: float
    profit_gain: float

    @property
    def profit_with(self) -> float:
        return self.profit_without + self.profit_gain

    @property
    def gain_pct(self) -> float:
        if self.profit_without == 0:
            return 0.0
        return 100.0 * self.profit_gain / self.profit_without
