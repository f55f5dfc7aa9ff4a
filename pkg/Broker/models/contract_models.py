"""Contract data models.

This module defines the tabulated contract menu offered by the database to
a WSD of unknown scheduled demand, and the result of a brute-force
feasibility check of such a menu.
"""

from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from Broker.models.market_models import RiskScheme


class ContractMenu(BaseModel):
    """A menu of (reservation, fee) items indexed by reported scheduled demand.

    Item i is intended for a WSD whose scheduled demand is xi_grid[i]: the
    database reserves k_values[i] for it and charges p_values[i] per access
    period.

    Attributes:
        scheme: Risk-bearing scheme the menu was designed for.
        xi_grid: Ascending scheduled-demand nodes spanning [ξ̲, ξ̄].
        k_values: Reservation per node.
        p_values: Reservation fee per node.
        u_min: WSD minimum acceptance profit the menu was built with.
    """

    model_config = ConfigDict(frozen=True)

    scheme: RiskScheme
    xi_grid: Tuple[float, ...] = Field(..., min_length=1)
    k_values: Tuple[float, ...] = Field(..., min_length=1)
    p_values: Tuple[float, ...] = Field(..., min_length=1)
    u_min: float = Field(0.0, ge=0)

    @model_validator(mode="after")
    def _check_grid(self) -> "ContractMenu":
        if not (len(self.xi_grid) == len(self.k_values) == len(self.p_values)):
            raise ValueError("xi_grid, k_values and p_values must have equal length")
        if np.any(np.diff(self.xi_grid) <= 0):
            raise ValueError("xi_grid must be strictly increasing")
        if np.any(np.asarray(self.k_values) < 0):
            raise ValueError("reservations must be nonnegative")
        return self

    @property
    def xi(self) -> np.ndarray:
        return np.asarray(self.xi_grid, dtype=float)

    @property
    def k(self) -> np.ndarray:
        return np.asarray(self.k_values, dtype=float)

    @property
    def p(self) -> np.ndarray:
        return np.asarray(self.p_values, dtype=float)

    @property
    def xi_lo(self) -> float:
        return self.xi_grid[0]

    @property
    def xi_hi(self) -> float:
        return self.xi_grid[-1]

    def __len__(self) -> int:
        return len(self.xi_grid)


class FeasibilityReport(BaseModel):
    """Outcome of the brute-force IC/IR check of a menu.

    Attributes:
        ic_max_violation: Largest gain any type gets from misreporting.
        ir_min_slack: Smallest on-menu WSD profit above u_min.
        monotonicity_ok: k nondecreasing (and p too under scheme I).
        feasible: All three conditions hold within tolerance.
        tolerance: The tolerance used.
    """
    ic_max_violation: float = Field(..., description="max over (ξ, ξ̂) of U(ξ̂-item; ξ) - U(ξ-item; ξ)")
    ir_min_slack: float = Field(..., description="min over ξ of U(ξ-item; ξ) - u_min")
    monotonicity_ok: bool
    feasible: bool
    tolerance: float = Field(..., ge=0)
