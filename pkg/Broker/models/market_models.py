"""Market data models.

This module defines the fixed trading prices, the demand environment of a
single WSD and the two risk-bearing schemes.
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, model_validator

from Broker.models.distribution_models import DemandDistribution


class RiskScheme(str, Enum):
    """Who pays for reserved but unused spectrum.

    DB_BEARING_RISK is scheme I: the WSD pays only for what it consumes.
    WSD_BEARING_RISK is scheme II: the WSD pays for the full reservation.
    """
    DB_BEARING_RISK = "db-bearing-risk"
    WSD_BEARING_RISK = "wsd-bearing-risk"


class MarketParams(BaseModel):
    """Trading prices of the spectrum market.

    Prices are ordered r > s > w > c > 0 in a working market. The limits
    w = s and w = c are accepted too: the wholesale sweep includes its
    endpoints, and at w = s (w = c) the WSD (database) reserves no headroom
    for random users. u_min must be nonnegative.

    Attributes:
        r: Price per unit bandwidth charged to subscribers.
        s: Price per unit bandwidth charged to random users.
        w: Wholesale price per unit bandwidth (database to WSD).
        c: Reservation cost per unit bandwidth (licensee to database).
        u_min: WSD minimum acceptance profit per access period.
    """

    model_config = ConfigDict(frozen=True)

    r: float = Field(1.0, gt=0, description="Subscriber price per unit bandwidth")
    s: float = Field(0.8, gt=0, description="Random-user price per unit bandwidth")
    w: float = Field(0.5, gt=0, description="Wholesale price per unit bandwidth")
    c: float = Field(0.2, gt=0, description="Reservation cost per unit bandwidth")
    u_min: float = Field(0.0, ge=0, description="WSD minimum acceptance profit")

    @model_validator(mode="after")
    def _check_price_order(self) -> "MarketParams":
        if not (self.r > self.s >= self.w >= self.c):
            raise ValueError(
                f"prices must satisfy r > s >= w >= c > 0, got r={self.r}, s={self.s}, w={self.w}, c={self.c}"
            )
        return self

    def with_wholesale(self, w: float) -> "MarketParams":
        """Copy with another wholesale price."""
        return MarketParams(r=self.r, s=self.s, w=w, c=self.c, u_min=self.u_min)


class DemandEnvironment(BaseModel):
    """Scheduled demand F and bursty demand G of one WSD.

    Attributes:
        xi_dist: Distribution F of the scheduled demand ξ.
        eps_dist: Distribution G of the bursty demand ε.
    """

    model_config = ConfigDict(frozen=True)

    xi_dist: DemandDistribution
    eps_dist: DemandDistribution

    @model_validator(mode="after")
    def _check_regularity(self) -> "DemandEnvironment":
        from Broker.services.distribution_service import check_ifr

        if self.eps_dist.is_point_mass:
            if self.eps_dist.mu < 0.0:
                raise ValueError(f"bursty demand must be nonnegative, got {self.eps_dist.mu}")
        elif self.eps_dist.numeric_support[0] != 0.0:
            raise ValueError(f"bursty demand must have support starting at 0, got lo={self.eps_dist.lo}")
        if not check_ifr(self.xi_dist):
            raise ValueError("scheduled demand distribution is not IFR")
        return self


class ProfitBreakdown(BaseModel):
    """Expected or realized profits per access period.

    Attributes:
        db: Database profit.
        wsd: WSD profit.
        network: Network profit (db + wsd).
    """
    db: float = Field(..., description="Database profit")
    wsd: float = Field(..., description="WSD profit")
    network: float = Field(..., description="Network profit")
