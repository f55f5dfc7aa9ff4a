"""Tests for the market models and the no-sharing benchmarks."""

import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import stats

from Broker.models.distribution_models import DemandDistribution
from Broker.models.market_models import DemandEnvironment, MarketParams, RiskScheme
from Broker.services import market_service
from Broker.services.distribution_service import partial_expectation
from Broker.services.market_service import MarketService, quadrature_rule


class TestMarketParams:
    """Test suite for MarketParams."""

    def test_defaults(self):
        """Test default prices."""
        params = MarketParams()
        assert (params.r, params.s, params.w, params.c, params.u_min) == (1.0, 0.8, 0.5, 0.2, 0.0)

    @pytest.mark.parametrize("prices", [
        {"r": 0.8, "s": 0.8, "w": 0.5, "c": 0.2},
        {"r": 1.0, "s": 0.8, "w": 0.9, "c": 0.2},
        {"r": 1.0, "s": 0.8, "w": 0.1, "c": 0.2},
        {"r": 1.0, "s": 0.8, "w": 0.5, "c": 0.0},
    ])
    def test_price_order_enforced(self, prices):
        """Test r > s >= w >= c > 0 is enforced."""
        with pytest.raises(ValidationError):
            MarketParams(**prices)

    def test_degenerate_limits_allowed(self):
        """Test the limits s = w and w = c are valid."""
        assert MarketParams(r=1.0, s=0.8, w=0.8, c=0.2).w == 0.8
        assert MarketParams(r=1.0, s=0.8, w=0.2, c=0.2).w == 0.2

    def test_negative_u_min_rejected(self):
        """Test u_min must be nonnegative."""
        with pytest.raises(ValidationError):
            MarketParams(u_min=-1.0)

    def test_with_wholesale(self, params):
        """Test copying with another wholesale price."""
        changed = params.with_wholesale(0.4)
        assert changed.w == 0.4
        assert changed.s == params.s


class TestDemandEnvironment:
    """Test suite for DemandEnvironment."""

    def test_default_environment(self, xi_dist, eps_dist):
        """Test the default environment is accepted."""
        env = DemandEnvironment(xi_dist=xi_dist, eps_dist=eps_dist)
        assert env.eps_dist.dof == 30

    def test_bursty_support_must_start_at_zero(self, xi_dist):
        """Test bursty demand with a positive lower bound is rejected."""
        shifted = DemandDistribution.truncated_normal(30.0, 4.0)
        with pytest.raises(ValidationError):
            DemandEnvironment(xi_dist=xi_dist, eps_dist=shifted)

    def test_non_ifr_scheduled_demand_rejected(self, eps_dist):
        """Test a scheduled demand with a decreasing hazard is rejected."""
        dip = DemandDistribution.empirical_grid([0.0, 1.0, 2.0, 3.0], [0.0, 0.8, 0.85, 1.0])
        with pytest.raises(ValidationError):
            DemandEnvironment(xi_dist=dip, eps_dist=eps_dist)


class TestNetworkProfit:
    """Test suite for per-realization profits."""

    def test_network_profit_example(self, params, eps_dist):
        """Test r min{k, xi} + s E[min{eps, k - xi}] - c k at xi=30, k=40."""
        expected = 1.0 * 30 + 0.8 * partial_expectation(eps_dist, 10.0, method="quadrature") - 0.2 * 40
        assert market_service.network_profit(40.0, 30.0, params, eps_dist) == pytest.approx(expected, abs=1e-6)

    def test_network_profit_against_monte_carlo(self, params, eps_dist):
        """Test the network profit against a Monte Carlo average over eps."""
        eps = eps_dist.sample(5, 200_000)
        realized = 30.0 + 0.8 * np.minimum(eps, 10.0) - 0.2 * 40.0
        se = realized.std() / math.sqrt(realized.size)
        assert abs(market_service.network_profit(40.0, 30.0, params, eps_dist) - realized.mean()) < 3 * se

    def test_reservation_below_demand(self, params, eps_dist):
        """Test no random user is served when k <= xi."""
        assert market_service.network_profit(20.0, 30.0, params, eps_dist) == pytest.approx(20.0 - 4.0)

    def test_profit_split_sums_to_network(self, params, eps_dist):
        """Test WSD plus DB profit equals the network profit under both schemes."""
        k = np.array([20.0, 40.0, 65.0])
        xi = np.array([30.0, 30.0, 30.0])
        network = market_service.network_profit(k, xi, params, eps_dist)
        scheme1 = market_service.wsd_profit_s1(k, xi, params, eps_dist) + market_service.db_profit_s1_sym(k, xi, params, eps_dist)
        scheme2 = market_service.wsd_profit_s2(k, xi, params, eps_dist) + market_service.db_profit_s2(k, params)
        np.testing.assert_allclose(scheme1, network, atol=1e-12)
        np.testing.assert_allclose(scheme2, network, atol=1e-12)

    def test_db_profit_s2(self, params):
        """Test the scheme-II database profit is (w - c) k."""
        assert market_service.db_profit_s2(10.0, params) == pytest.approx(3.0)

    def test_negative_inputs_rejected(self, params, eps_dist):
        """Test negative k or xi is rejected."""
        with pytest.raises(ValueError):
            market_service.network_profit(-1.0, 30.0, params, eps_dist)
        with pytest.raises(ValueError):
            market_service.k_centralized(-1.0, params, eps_dist)

    def test_asymmetric_db_profit_against_monte_carlo(self, params, xi_dist, eps_dist):
        """Test w E[min{xi + eps, k}] - c k at k=60 against joint draws."""
        xi = xi_dist.sample(1, 200_000)
        eps = eps_dist.sample(2, 200_000)
        realized = 0.5 * np.minimum(xi + eps, 60.0) - 0.2 * 60.0
        se = realized.std() / math.sqrt(realized.size)
        analytic = market_service.db_expected_profit_s1_asym(60.0, params, xi_dist, eps_dist)
        assert abs(analytic - realized.mean()) < 3 * se + 1e-3


class TestReservations:
    """Test suite for the closed-form reservations."""

    def test_k_centralized_quantile(self, params, eps_dist):
        """Test k_so = xi + G^-1((s - c) / s)."""
        assert market_service.k_centralized(30.0, params, eps_dist) == pytest.approx(
            30.0 + stats.chi2(30).ppf(0.75), abs=1e-9
        )

    def test_k_centralized_is_grid_argmax(self, params, eps_dist):
        """Test k_so maximizes the network profit on a fine grid."""
        k = np.arange(30.0, 130.0, 1e-3)
        profit = market_service.network_profit(k, 30.0, params, eps_dist)
        best = k[np.argmax(profit)]
        assert best == pytest.approx(market_service.k_centralized(30.0, params, eps_dist), abs=2e-3)

    def test_k_db_sym_is_grid_argmax(self, params, eps_dist):
        """Test k_db_sym maximizes the symmetric-information DB profit."""
        k = np.arange(30.0, 130.0, 1e-3)
        profit = market_service.db_profit_s1_sym(k, 30.0, params, eps_dist)
        best = k[np.argmax(profit)]
        assert best == pytest.approx(market_service.k_db_sym(30.0, params, eps_dist), abs=2e-3)

    def test_k_wsd_is_grid_argmax(self, params, eps_dist):
        """Test k_wsd maximizes the scheme-II WSD profit."""
        k = np.arange(30.0, 130.0, 1e-3)
        profit = market_service.wsd_profit_s2(k, 30.0, params, eps_dist)
        best = k[np.argmax(profit)]
        assert best == pytest.approx(market_service.k_wsd(30.0, params, eps_dist), abs=2e-3)

    def test_k_db_asym_is_grid_argmax(self, params, xi_dist, eps_dist):
        """Test k_db_asym maximizes the asymmetric DB profit."""
        center = market_service.k_db_asym(params, xi_dist, eps_dist)
        k = np.arange(center - 5.0, center + 5.0, 1e-3)
        profit = market_service.db_expected_profit_s1_asym(k, params, xi_dist, eps_dist)
        assert k[np.argmax(profit)] == pytest.approx(center, abs=5e-3)

    def test_k_db_asym_independent_of_xi(self, params, xi_dist, eps_dist):
        """Test the asymmetric reservation is a scalar."""
        assert isinstance(market_service.k_db_asym(params, xi_dist, eps_dist), float)

    def test_k_db_asym_point_mass_is_symmetric(self, params, eps_dist):
        """Test a known scheduled demand gives the symmetric-information reservation."""
        known = DemandDistribution.point_mass(30.0)
        k = market_service.k_db_asym(params, known, eps_dist)
        assert k == pytest.approx(market_service.k_db_sym(30.0, params, eps_dist), abs=1e-3)
        assert k == pytest.approx(30.0 + stats.chi2(30).ppf(0.6), abs=1e-3)

    def test_k_db_asym_monotone_in_w(self, params, xi_dist, eps_dist):
        """Test the asymmetric reservation does not fall as the wholesale price rises."""
        prices = [0.3, 0.4, 0.5, 0.6, 0.7]
        k = [market_service.k_db_asym(params.with_wholesale(w), xi_dist, eps_dist) for w in prices]
        assert np.all(np.diff(k) >= 0.0)
        assert k[-1] > k[0]

    def test_reservations_vectorized(self, params, eps_dist):
        """Test reservations broadcast over xi."""
        xi = np.array([10.0, 20.0, 30.0])
        k = market_service.k_centralized(xi, params, eps_dist)
        np.testing.assert_allclose(np.diff(k), [10.0, 10.0])


class TestCriticalWholesalePrice:
    """Test suite for the critical wholesale price."""

    def test_critical_price(self, params):
        """Test sqrt(s c) = 0.4 for s=0.8, c=0.2."""
        assert market_service.critical_wholesale_price(params) == pytest.approx(0.4, abs=1e-12)

    def test_reservations_meet_at_critical_price(self, params, eps_dist):
        """Test k_db_sym = k_wsd at w = sqrt(s c) and the order flips around it."""
        at = params.with_wholesale(0.4)
        gap = market_service.k_db_sym(30.0, at, eps_dist) - market_service.k_wsd(30.0, at, eps_dist)
        assert abs(gap) < 1e-6

        below = params.with_wholesale(0.39)
        above = params.with_wholesale(0.41)
        assert market_service.k_db_sym(30.0, below, eps_dist) < market_service.k_wsd(30.0, below, eps_dist)
        assert market_service.k_db_sym(30.0, above, eps_dist) > market_service.k_wsd(30.0, above, eps_dist)

    @pytest.mark.parametrize("w", [0.3, 0.35, 0.45, 0.6])
    def test_wsd_reservation_more_efficient_below_critical_price(self, params, xi_dist, eps_dist, w):
        """Test k_wsd beats k_db_sym in network profit iff w < sqrt(s c)."""
        market = params.with_wholesale(w)
        by_wsd = market_service.expected_network_profit_of_policy(
            lambda xi: market_service.k_wsd(xi, market, eps_dist), market, xi_dist, eps_dist
        )
        by_db = market_service.expected_network_profit_of_policy(
            lambda xi: market_service.k_db_sym(xi, market, eps_dist), market, xi_dist, eps_dist
        )
        assert (by_wsd > by_db) == (w < market_service.critical_wholesale_price(market))


class TestExpectations:
    """Test suite for expectations over the scheduled demand."""

    def test_quadrature_weights_sum_to_one(self, xi_dist):
        """Test the density-weighted Gauss-Legendre rule is normalized."""
        x, weights = quadrature_rule(xi_dist, 256)
        assert weights.sum() == pytest.approx(1.0)
        assert x.min() > 0.0 and x.max() < 62.0
        assert weights @ x == pytest.approx(xi_dist.mean(), rel=1e-8)

    def test_point_mass_rule(self):
        """Test a point mass integrates at its atom."""
        x, weights = quadrature_rule(DemandDistribution.point_mass(4.0), 256)
        assert x.tolist() == [4.0]
        assert weights.tolist() == [1.0]

    def test_fee_moves_profit_between_parties(self, params, xi_dist, eps_dist):
        """Test a fee leaves the network profit unchanged and db + wsd = network."""
        service = MarketService()
        policy = lambda xi: market_service.k_centralized(xi, params, eps_dist)
        for scheme in RiskScheme:
            plain = service.expected_profits_of_policy(policy, params, xi_dist, eps_dist, scheme)
            charged = service.expected_profits_of_policy(policy, params, xi_dist, eps_dist, scheme, fee=lambda xi: 2.0)
            assert charged.network == pytest.approx(plain.network)
            assert charged.db == pytest.approx(plain.db + 2.0)
            assert charged.db + charged.wsd == pytest.approx(charged.network)

    def test_centralized_beats_no_sharing(self, params, xi_dist, eps_dist):
        """Test the centralized policy has the highest expected network profit."""
        central = market_service.expected_network_profit_of_policy(
            lambda xi: market_service.k_centralized(xi, params, eps_dist), params, xi_dist, eps_dist
        )
        k_asym = market_service.k_db_asym(params, xi_dist, eps_dist)
        asym = market_service.expected_network_profit_of_policy(lambda xi: k_asym, params, xi_dist, eps_dist)
        wsd = market_service.expected_network_profit_of_policy(
            lambda xi: market_service.k_wsd(xi, params, eps_dist), params, xi_dist, eps_dist
        )
        assert central > asym
        assert central > wsd
