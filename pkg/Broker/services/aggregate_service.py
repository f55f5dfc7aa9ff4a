"""Service for the database's aggregate reservation across a fleet.

Under DB-bearing-risk every WSD pays only for what it uses, so the database
is free to reserve less than the total requested TK and top up at the
replenishment cost c_ex if the pooled demand exceeds the reservation. This
module computes the pooled bursty demand, the expected incremental profit
of reserving OTK instead of TK, and the optimal OTK*.

Typical usage example:
    service = AggregateService()
    tk = service.aggregate_requests(menu, [9.0, 9.5, 8.7])
    pooled = service.pooled_bursty_dist(eps_dist, 3)
    best = service.optimal_aggregate_reservation(tk, 27.2, pooled, 0.2, 0.4)
"""

import logging
from typing import Optional, Sequence, Union

import numpy as np

from Broker.config import get_settings
from Broker.models.aggregate_models import AggregateReservation, FleetConfig, FleetEvaluation
from Broker.models.contract_models import ContractMenu
from Broker.models.distribution_models import ArrayLike, DemandDistribution, DistributionKind
from Broker.models.market_models import MarketParams, RiskScheme
from Broker.services import contract_service, market_service
from Broker.services.distribution_service import convolve

logger = logging.getLogger(__name__)


def _cumulative_survival(dist: DemandDistribution, x: np.ndarray) -> np.ndarray:
    """∫₀^x (1 − H), extended with slope 1 below zero."""
    return np.asarray(dist.partial_expectation(np.maximum(x, 0.0))) + np.minimum(x, 0.0)


class AggregateService:
    """Second-stage aggregate reservation of the database.

    Attributes:
        scan_points: Intervals of the sign scan on [TΞ, TK].
        root_tol: Bisection stopping width.
    """

    def __init__(self, scan_points: Optional[int] = None, root_tol: Optional[float] = None):
        """Initializes the AggregateService.

        Args:
            scan_points: Sign-scan intervals on [TΞ, TK]. Defaults to BROKER_SCAN_POINTS.
            root_tol: Bisection width. Defaults to BROKER_ROOT_TOL.
        """
        settings = get_settings()
        self.scan_points = scan_points or settings.scan_points
        self.root_tol = root_tol or settings.root_tol

    def aggregate_requests(self, menu: ContractMenu, xi_values: Sequence[float]) -> float:
        """TK = Σ k(ξ_n), k interpolated on the menu grid.

        Raises:
            ValueError: If some ξ_n lies outside the menu's type range.
        """
        xi = np.asarray(xi_values, dtype=float)
        if xi.size == 0:
            return 0.0
        if np.any(xi < menu.xi_lo) or np.any(xi > menu.xi_hi):
            raise ValueError(f"scheduled demand outside the menu range [{menu.xi_lo:.9g}, {menu.xi_hi:.9g}]")
        return float(np.sum(np.interp(xi, menu.xi, menu.k)))

    def pooled_bursty_dist(self, eps_dist_single: DemandDistribution, n: int) -> DemandDistribution:
        """Distribution H of the summed bursty demand of n i.i.d. WSDs.

        Chi-square and point-mass demands stay in closed form; any other
        family is convolved on a grid.

        Args:
            eps_dist_single: Bursty demand of one WSD.
            n: Fleet size, ≥ 1.

        Returns:
            The pooled distribution.

        Raises:
            ValueError: If n < 1.
        """
        if n < 1:
            raise ValueError(f"fleet size must be >= 1, got {n}")
        if n == 1:
            return eps_dist_single
        if eps_dist_single.kind is DistributionKind.CHI_SQUARE:
            return DemandDistribution.chi_square(eps_dist_single.dof * n, eps_dist_single.scale)
        if eps_dist_single.is_point_mass:
            return DemandDistribution.point_mass(eps_dist_single.mu * n)

        # binary powering keeps the number of grid convolutions logarithmic
        result: Optional[DemandDistribution] = None
        power = eps_dist_single
        remaining = n
        while remaining:
            if remaining & 1:
                result = power if result is None else convolve(result, power)
            remaining >>= 1
            if remaining:
                power = convolve(power, power)
        return result

    def expected_incremental_profit(
        self, otk: ArrayLike, tk: float, t_xi: float, pooled: DemandDistribution, c: float, c_ex: float,
    ) -> Union[float, np.ndarray]:
        """Expected gain of reserving OTK instead of TK.

        c·(TK−OTK)·H(OTK−TΞ) − c_ex·∫_{OTK−TΞ}^{TK−TΞ} (1 − H(t)) dt, which
        is the saved reservation cost when pooled demand fits in OTK minus the
        expected replenishment bill otherwise.

        Raises:
            ValueError: If OTK > TK or OTK < 0.
        """
        levels = np.asarray(otk, dtype=float)
        if np.any(levels > tk + 1e-12) or np.any(levels < 0.0):
            raise ValueError(f"aggregate reservation must lie in [0, TK={tk:.9g}], got {otk}")
        levels = np.minimum(levels, tk)
        lower = levels - t_xi
        upper = tk - t_xi
        saved = c * (tk - levels) * np.asarray(pooled.cdf(lower))
        shortfall = _cumulative_survival(pooled, np.asarray(upper)) - _cumulative_survival(pooled, lower)
        value = saved - c_ex * shortfall
        return float(value) if value.ndim == 0 else value

    def realized_incremental_profit(
        self, otk: float, tk: float, t_xi: float, pooled_demand: ArrayLike, c: float, c_ex: float,
    ) -> np.ndarray:
        """Gain for realized pooled bursty demand: saving if it fits, replenishment otherwise."""
        demand = np.asarray(pooled_demand, dtype=float)
        headroom = otk - t_xi
        saved = c * (tk - otk) * (demand <= headroom)
        return saved - c_ex * np.clip(demand - headroom, 0.0, tk - otk)

    def aggregate_foc(self, otk: ArrayLike, tk: float, t_xi: float, pooled: DemandDistribution,
                      c: float, c_ex: float) -> np.ndarray:
        """c_ex + c·(TK − OTK)·h(OTK − TΞ) − (c + c_ex)·H(OTK − TΞ)."""
        otk = np.asarray(otk, dtype=float)
        a = otk - t_xi
        return c_ex + c * (tk - otk) * np.asarray(pooled.pdf(a)) - (c + c_ex) * np.asarray(pooled.cdf(a))

    def optimal_aggregate_reservation(
        self, tk: float, t_xi: float, pooled: DemandDistribution, c: float, c_ex: float,
    ) -> AggregateReservation:
        """OTK* maximizing the expected incremental profit on [TΞ, TK].

        Every + to − sign change of the first-order condition is bisected;
        the best of those roots and the two endpoints is returned, flagged as
        boundary when an endpoint wins.

        Args:
            tk: Total requested reservation TK.
            t_xi: Total scheduled demand TΞ of the fleet.
            pooled: Distribution H of the summed bursty demand.
            c: Reservation cost per unit bandwidth.
            c_ex: Replenishment cost per unit bandwidth, > c.

        Returns:
            AggregateReservation with OTK*, its expected gain and the
            boundary flag.

        Raises:
            ValueError: If c_ex ≤ c or TK < TΞ.

        Example:
            >>> service = AggregateService()
            >>> best = service.optimal_aggregate_reservation(80.0, 30.0, DemandDistribution.chi_square(30), 0.2, 0.4)
            >>> print(f"reserve {best.otk_star:.2f} instead of 80, gaining {best.profit:.4f}")
        """
        if not c_ex > c:
            raise ValueError(f"replenishment cost must exceed reservation cost, got c_ex={c_ex}, c={c}")
        if tk < t_xi:
            raise ValueError(f"total request TK={tk:.9g} below total scheduled demand {t_xi:.9g}")
        if tk == t_xi:
            return AggregateReservation(otk_star=tk, profit=0.0, boundary=True)

        grid = np.linspace(t_xi, tk, self.scan_points + 1)
        foc = self.aggregate_foc(grid, tk, t_xi, pooled, c, c_ex)
        idx = np.flatnonzero((foc[:-1] > 0.0) & (foc[1:] <= 0.0))

        roots = np.empty(0)
        if idx.size:
            a, b = grid[idx].copy(), grid[idx + 1].copy()
            while np.max(b - a) > self.root_tol:
                mid = 0.5 * (a + b)
                positive = self.aggregate_foc(mid, tk, t_xi, pooled, c, c_ex) > 0.0
                a = np.where(positive, mid, a)
                b = np.where(positive, b, mid)
            roots = 0.5 * (a + b)

        candidates = np.concatenate((roots, [t_xi, tk]))
        profits = np.asarray(self.expected_incremental_profit(candidates, tk, t_xi, pooled, c, c_ex))
        best = int(np.argmax(profits))
        boundary = best >= roots.size
        if boundary:
            logger.warning(f"Aggregate reservation at the boundary OTK={candidates[best]:.6g} (TK={tk:.6g})")
        return AggregateReservation(otk_star=float(candidates[best]), profit=float(profits[best]), boundary=boundary)

    def aggregate_scheme2(self, menu: ContractMenu, xi_values: Sequence[float]) -> float:
        """Total reservation under WSD-bearing-risk: the plain sum of requests.

        Raises:
            ValueError: If the menu was not designed for scheme II.
        """
        if menu.scheme is not RiskScheme.WSD_BEARING_RISK:
            raise ValueError("aggregate_scheme2 needs a wsd-bearing-risk menu")
        return self.aggregate_requests(menu, xi_values)

    def evaluate_fleet(self, menu: ContractMenu, fleet: FleetConfig, params: MarketParams) -> FleetEvaluation:
        """Database profit of a fleet under a menu, with and without aggregate reservation.

        Under scheme II no second stage exists and the gain is zero.

        Args:
            menu: Menu the fleet was served with.
            fleet: Reported types, bursty demand and replenishment cost.
            params: Market prices.

        Returns:
            FleetEvaluation with TK, OTK*, the profit without aggregation
            and the gain from it.
        """
        xi = np.asarray(fleet.xi_values, dtype=float)
        k, p = contract_service.menu_item_at(menu, xi)
        k, p = np.atleast_1d(k), np.atleast_1d(p)

        total = np.asarray(market_service.network_profit(k, xi, params, fleet.eps_dist_single))
        wsd = np.asarray(contract_service.wsd_profit_menu(menu.scheme, k, p, xi, params, fleet.eps_dist_single))
        profit_without = float(np.sum(total - wsd))

        tk = float(np.sum(k))
        t_xi = float(np.sum(xi))
        if menu.scheme is RiskScheme.DB_BEARING_RISK:
            pooled = self.pooled_bursty_dist(fleet.eps_dist_single, fleet.size)
            best = self.optimal_aggregate_reservation(tk, t_xi, pooled, fleet.c, fleet.c_ex)
        else:
            best = AggregateReservation(otk_star=tk, profit=0.0, boundary=True)

        logger.info(
            f"Fleet of {fleet.size}: TK={tk:.4f}, OTK*={best.otk_star:.4f}, "
            f"gain={best.profit:.6f} on {profit_without:.6f}"
        )
        return FleetEvaluation(
            n_wsds=fleet.size,
            tk=tk,
            t_xi=t_xi,
            otk_star=best.otk_star,
            boundary=best.boundary,
            profit_without=profit_without,
            profit_gain=best.profit,
        )


# Global service instance for backward compatibility
_service_instance = AggregateService()


def aggregate_requests(menu: ContractMenu, xi_values: Sequence[float]) -> float:
    """Legacy function wrapper for the total requested reservation."""
    return _service_instance.aggregate_requests(menu, xi_values)


def pooled_bursty_dist(eps_dist_single: DemandDistribution, n: int) -> DemandDistribution:
    """Legacy function wrapper for the pooled bursty demand."""
    return _service_instance.pooled_bursty_dist(eps_dist_single, n)


def expected_incremental_profit(otk, tk: float, t_xi: float, pooled: DemandDistribution, c: float, c_ex: float):
    """Legacy function wrapper for the expected incremental profit."""
    return _service_instance.expected_incremental_profit(otk, tk, t_xi, pooled, c, c_ex)


def optimal_aggregate_reservation(tk: float, t_xi: float, pooled: DemandDistribution,
                                  c: float, c_ex: float) -> AggregateReservation:
    """Legacy function wrapper for the optimal aggregate reservation."""
    return _service_instance.optimal_aggregate_reservation(tk, t_xi, pooled, c, c_ex)


def aggregate_scheme2(menu: ContractMenu, xi_values: Sequence[float]) -> float:
    """Legacy function wrapper for the scheme-II total reservation."""
    return _service_instance.aggregate_scheme2(menu, xi_values)


def evaluate_fleet(menu: ContractMenu, fleet: FleetConfig, params: MarketParams) -> FleetEvaluation:
    """Legacy function wrapper for fleet evaluation."""
    return _service_instance.evaluate_fleet(menu, fleet, params)
