"""Service for the no-sharing market benchmarks.

This module provides the expected-profit evaluators of the centralized
system and of both decentralized regimes without information sharing, the
closed-form optimal reservations, and expectations over scheduled demand.

All profits are per access period, and so is the reservation cost c·k.
Every function is vectorized over k and ξ.

Typical usage example:
    service = MarketService()
    k = service.k_centralized(30.0, params, eps_dist)
    profit = service.network_profit(k, 30.0, params, eps_dist)
"""

import logging
import math
from functools import lru_cache
from typing import Callable, Optional, Tuple, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

from Broker.config import get_settings
from Broker.models.distribution_models import ArrayLike, DemandDistribution
from Broker.models.market_models import MarketParams, ProfitBreakdown, RiskScheme
from Broker.services.distribution_service import convolve

logger = logging.getLogger(__name__)

Policy = Callable[[np.ndarray], ArrayLike]
Number = Union[float, np.ndarray]


def _as_number(values: np.ndarray) -> Number:
    return float(values) if np.ndim(values) == 0 else values


def _nonnegative(name: str, value: ArrayLike) -> np.ndarray:
    array = np.asarray(value, dtype=float)
    if np.any(array < 0.0):
        raise ValueError(f"{name} must be >= 0, got {value}")
    return array


@lru_cache(maxsize=64)
def quadrature_rule(dist: DemandDistribution, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes on the support of dist with density-weighted weights.

    The weights sum to one. A point mass yields its atom with weight one.
    """
    if dist.is_point_mass:
        return np.array([dist.mu]), np.array([1.0])
    lo, hi = dist.numeric_support
    t, base = leggauss(nodes)
    half = 0.5 * (hi - lo)
    x = lo + half * (t + 1.0)
    weights = base * half * np.asarray(dist.pdf(x), dtype=float)
    return x, weights / weights.sum()


class MarketService:
    """Benchmark profits and reservations of the spectrum market.

    Attributes:
        quadrature_nodes: Gauss-Legendre nodes used for expectations over ξ.
    """

    def __init__(self, quadrature_nodes: Optional[int] = None):
        """Initializes the MarketService.

        Args:
            quadrature_nodes: Gauss-Legendre nodes over ξ. Defaults to the
                BROKER_QUADRATURE_NODES setting.
        """
        self.quadrature_nodes = quadrature_nodes or get_settings().quadrature_nodes

    # Per-realization expected profits (expectation over ε only)

    def network_profit(self, k: ArrayLike, xi: ArrayLike, params: MarketParams, eps_dist: DemandDistribution) -> Number:
        """Expected network profit of a reservation given the scheduled demand.

        Computes r·min{k,ξ} + s·E[min{ε,(k−ξ)⁺}] − c·k: subscribers are served
        first and random users share what is left of k.

        Args:
            k: Reservation(s), ≥ 0.
            xi: Scheduled demand(s), ≥ 0; broadcast against k.
            params: Market prices.
            eps_dist: Bursty demand distribution G.

        Returns:
            A float for scalar inputs, otherwise an array.

        Raises:
            ValueError: If k or ξ is negative.

        Example:
            >>> service = MarketService()
            >>> service.network_profit(20.0, 30.0, MarketParams(), DemandDistribution.chi_square(30))
            16.0
        """
        k = _nonnegative("k", k)
        xi = _nonnegative("xi", xi)
        served = np.minimum(k, xi)
        bursty = eps_dist.partial_expectation(np.maximum(k - xi, 0.0))
        return _as_number(params.r * served + params.s * bursty - params.c * k)

    def wsd_profit_s1(self, k: ArrayLike, xi: ArrayLike, params: MarketParams, eps_dist: DemandDistribution) -> Number:
        """WSD profit without sharing under scheme I: (r−w)·min{k,ξ} + (s−w)·E[min{ε,(k−ξ)⁺}]."""
        k = _nonnegative("k", k)
        xi = _nonnegative("xi", xi)
        served = np.minimum(k, xi)
        bursty = eps_dist.partial_expectation(np.maximum(k - xi, 0.0))
        return _as_number((params.r - params.w) * served + (params.s - params.w) * bursty)

    def db_profit_s1_sym(self, k: ArrayLike, xi: ArrayLike, params: MarketParams, eps_dist: DemandDistribution) -> Number:
        """Database profit under scheme I with ξ known: w·E[min{ξ+ε, k}] − c·k."""
        k = _nonnegative("k", k)
        xi = _nonnegative("xi", xi)
        sold = np.minimum(k, xi) + eps_dist.partial_expectation(np.maximum(k - xi, 0.0))
        return _as_number(params.w * sold - params.c * k)

    def wsd_profit_s2(self, k: ArrayLike, xi: ArrayLike, params: MarketParams, eps_dist: DemandDistribution) -> Number:
        """WSD profit under scheme II: r·min{k,ξ} + s·E[min{ε,(k−ξ)⁺}] − w·k."""
        k = _nonnegative("k", k)
        xi = _nonnegative("xi", xi)
        served = np.minimum(k, xi)
        bursty = eps_dist.partial_expectation(np.maximum(k - xi, 0.0))
        return _as_number(params.r * served + params.s * bursty - params.w * k)

    def db_profit_s2(self, k: ArrayLike, params: MarketParams) -> Number:
        """Database profit under scheme II: (w−c)·k."""
        k = _nonnegative("k", k)
        return _as_number((params.w - params.c) * k)

    def db_expected_profit_s1_asym(
        self, k: ArrayLike, params: MarketParams, xi_dist: DemandDistribution, eps_dist: DemandDistribution
    ) -> Number:
        """Database profit under scheme I with ξ private: w·E[min{ξ+ε, k}] − c·k."""
        k = _nonnegative("k", k)
        total = convolve(xi_dist, eps_dist)
        return _as_number(params.w * np.asarray(total.partial_expectation(k)) - params.c * k)

    # Optimal reservations

    def k_centralized(self, xi: ArrayLike, params: MarketParams, eps_dist: DemandDistribution) -> Number:
        """ξ + G⁻¹((s−c)/s)."""
        xi = _nonnegative("xi", xi)
        return _as_number(xi + eps_dist.quantile((params.s - params.c) / params.s))

    def k_db_sym(self, xi: ArrayLike, params: MarketParams, eps_dist: DemandDistribution) -> Number:
        """ξ + G⁻¹((w−c)/w)."""
        xi = _nonnegative("xi", xi)
        return _as_number(xi + eps_dist.quantile((params.w - params.c) / params.w))

    def k_wsd(self, xi: ArrayLike, params: MarketParams, eps_dist: DemandDistribution) -> Number:
        """ξ + G⁻¹((s−w)/s); the same with or without information sharing."""
        xi = _nonnegative("xi", xi)
        return _as_number(xi + eps_dist.quantile((params.s - params.w) / params.s))

    def k_db_asym(self, params: MarketParams, xi_dist: DemandDistribution, eps_dist: DemandDistribution) -> float:
        """Database reservation under scheme I when ξ is private.

        The database only knows F, so it reserves the newsvendor quantile
        H⁻¹((w−c)/w) of H, the distribution of the total demand ξ + ε.

        Args:
            params: Market prices.
            xi_dist: Scheduled demand distribution F.
            eps_dist: Bursty demand distribution G.

        Returns:
            One reservation, the same for every realized ξ.

        Example:
            >>> k = MarketService().k_db_asym(MarketParams(), DemandDistribution.point_mass(30.0),
            ...                               DemandDistribution.chi_square(30))
            >>> print(f"{k:.2f}")  # 30 + chi2(30) quantile at 0.6
        """
        total = convolve(xi_dist, eps_dist)
        return float(total.quantile((params.w - params.c) / params.w))

    def critical_wholesale_price(self, params: MarketParams) -> float:
        """Wholesale price at which the WSD and the database agree on k.

        Below √(s·c) the WSD reserves more than the database would;
        above it, less.

        Args:
            params: Market prices; only s and c are used.

        Returns:
            √(s·c).
        """
        return math.sqrt(params.s * params.c)

    # Expectations over ξ

    def expected_profits_of_policy(
        self,
        policy: Policy,
        params: MarketParams,
        xi_dist: DemandDistribution,
        eps_dist: DemandDistribution,
        scheme: RiskScheme = RiskScheme.DB_BEARING_RISK,
        fee: Optional[Policy] = None,
    ) -> ProfitBreakdown:
        """Expected database, WSD and network profit of a reservation policy.

        Args:
            policy: Map ξ ↦ k, called with an array of ξ nodes.
            params: Market prices.
            xi_dist: Scheduled demand distribution F.
            eps_dist: Bursty demand distribution G.
            scheme: Who pays for unused spectrum.
            fee: Optional map ξ ↦ p of a reservation fee paid by the WSD.

        Returns:
            ProfitBreakdown of per-access-period expectations over ξ ~ F.

        Example:
            >>> service = MarketService()
            >>> breakdown = service.expected_profits_of_policy(
            ...     lambda xi: service.k_wsd(xi, params, eps_dist), params, xi_dist, eps_dist,
            ...     scheme=RiskScheme.WSD_BEARING_RISK,
            ... )
            >>> print(f"DB {breakdown.db:.3f}, WSD {breakdown.wsd:.3f}")
        """
        xi, weights = quadrature_rule(xi_dist, self.quadrature_nodes)
        k = np.broadcast_to(np.asarray(policy(xi), dtype=float), xi.shape)
        p = np.zeros_like(xi) if fee is None else np.broadcast_to(np.asarray(fee(xi), dtype=float), xi.shape)

        network = np.asarray(self.network_profit(k, xi, params, eps_dist))
        if scheme is RiskScheme.DB_BEARING_RISK:
            wsd = np.asarray(self.wsd_profit_s1(k, xi, params, eps_dist)) - p
            db = np.asarray(self.db_profit_s1_sym(k, xi, params, eps_dist)) + p
        else:
            wsd = np.asarray(self.wsd_profit_s2(k, xi, params, eps_dist)) - p
            db = np.asarray(self.db_profit_s2(k, params)) + p

        return ProfitBreakdown(
            db=float(weights @ db),
            wsd=float(weights @ wsd),
            network=float(weights @ network),
        )

    def expected_network_profit_of_policy(
        self, policy: Policy, params: MarketParams, xi_dist: DemandDistribution, eps_dist: DemandDistribution
    ) -> float:
        """E_ξ[network_profit(policy(ξ), ξ)]."""
        return self.expected_profits_of_policy(policy, params, xi_dist, eps_dist).network


# Global service instance for backward compatibility
_service_instance = MarketService()


def network_profit(k, xi, params: MarketParams, eps_dist: DemandDistribution):
    """Legacy function wrapper for the network profit."""
    return _service_instance.network_profit(k, xi, params, eps_dist)


def wsd_profit_s1(k, xi, params: MarketParams, eps_dist: DemandDistribution):
    """Legacy function wrapper for the scheme-I WSD profit."""
    return _service_instance.wsd_profit_s1(k, xi, params, eps_dist)


def db_profit_s1_sym(k, xi, params: MarketParams, eps_dist: DemandDistribution):
    """Legacy function wrapper for the scheme-I database profit."""
    return _service_instance.db_profit_s1_sym(k, xi, params, eps_dist)


def wsd_profit_s2(k, xi, params: MarketParams, eps_dist: DemandDistribution):
    """Legacy function wrapper for the scheme-II WSD profit."""
    return _service_instance.wsd_profit_s2(k, xi, params, eps_dist)


def db_profit_s2(k, params: MarketParams):
    """Legacy function wrapper for the scheme-II database profit."""
    return _service_instance.db_profit_s2(k, params)


def db_expected_profit_s1_asym(k, params: MarketParams, xi_dist: DemandDistribution, eps_dist: DemandDistribution):
    """Legacy function wrapper for the asymmetric scheme-I database profit."""
    return _service_instance.db_expected_profit_s1_asym(k, params, xi_dist, eps_dist)


def k_centralized(xi, params: MarketParams, eps_dist: DemandDistribution):
    """Legacy function wrapper for the centralized reservation."""
    return _service_instance.k_centralized(xi, params, eps_dist)


def k_db_sym(xi, params: MarketParams, eps_dist: DemandDistribution):
    """Legacy function wrapper for the database reservation with ξ known."""
    return _service_instance.k_db_sym(xi, params, eps_dist)


def k_wsd(xi, params: MarketParams, eps_dist: DemandDistribution):
    """Legacy function wrapper for the scheme-II WSD reservation."""
    return _service_instance.k_wsd(xi, params, eps_dist)


def k_db_asym(params: MarketParams, xi_dist: DemandDistribution, eps_dist: DemandDistribution) -> float:
    """Legacy function wrapper for the database reservation with ξ private."""
    return _service_instance.k_db_asym(params, xi_dist, eps_dist)


def critical_wholesale_price(params: MarketParams) -> float:
    """Legacy function wrapper for the critical wholesale price."""
    return _service_instance.critical_wholesale_price(params)


def expected_profits_of_policy(policy: Policy, params: MarketParams, xi_dist, eps_dist,
                               scheme: RiskScheme = RiskScheme.DB_BEARING_RISK, fee: Optional[Policy] = None):
    """Legacy function wrapper for the expected profit breakdown."""
    return _service_instance.expected_profits_of_policy(policy, params, xi_dist, eps_dist, scheme, fee)


def expected_network_profit_of_policy(policy: Policy, params: MarketParams, xi_dist, eps_dist) -> float:
    """Legacy function wrapper for the expected network profit."""
    return _service_instance.expected_network_profit_of_policy(policy, params, xi_dist, eps_dist)
