"""Service for Monte Carlo market simulation.

This module plays the market protocol forward: each reservation period
draws a scheduled demand ξ and fixes the reservation k by a policy; each
access period inside it draws a bursty demand ε, serves subscribers first
and random users from the remaining headroom, and books the payments of
the chosen risk scheme. Realized profits are averaged and compared with
the analytic expectations.

Typical usage example:
    service = SimulationService()
    report = service.run_market(SimConfig(policy="db-asym"), params, xi_dist, eps_dist)
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd

from Broker.models.contract_models import ContractMenu
from Broker.models.distribution_models import ArrayLike, DemandDistribution
from Broker.models.market_models import MarketParams, ProfitBreakdown, RiskScheme
from Broker.models.simulation_models import EpsMode, PolicyKind, SimConfig, SimulationReport
from Broker.services import contract_service, market_service
from Broker.services.distribution_service import DistributionService

logger = logging.getLogger(__name__)

FIELDS = ("db", "wsd", "network")


def serve_users(k: ArrayLike, xi: ArrayLike, eps: ArrayLike, params: MarketParams) -> Tuple[np.ndarray, np.ndarray]:
    """(r·min{k, ξ}, s·min{ε, (k − ξ)⁺}): subscribers are served first."""
    k = np.asarray(k, dtype=float)
    xi = np.asarray(xi, dtype=float)
    eps = np.asarray(eps, dtype=float)
    if np.any(k < 0) or np.any(xi < 0) or np.any(eps < 0):
        raise ValueError("reservation and demands must be nonnegative")
    subscriber = params.r * np.minimum(k, xi)
    random = params.s * np.minimum(eps, np.maximum(k - xi, 0.0))
    if subscriber.ndim == 0:
        return float(subscriber), float(random)
    return subscriber, random


def _simulate_periods(args) -> Dict[str, np.ndarray]:
    """Run a block of reservation periods; returns per-period arrays."""
    config, params, xi_dist, eps_dist, schedule, seeds = args
    users = DistributionService()
    periods = len(seeds)
    out = {name: np.empty(periods) for name in ("xi", "k", "p", "db", "wsd", "network")}
    squares = {name: 0.0 for name in FIELDS}

    for i, seed in enumerate(seeds):
        rng = np.random.default_rng(seed)
        xi = float(xi_dist.draw(rng, 1)[0])
        k, p = schedule(np.array([xi]))
        k, p = float(k[0]), float(p[0])

        if config.eps_mode is EpsMode.RANDOM_USERS:
            model = config.random_users
            eps = users.draw_random_user_demand(model, rng, model.user_count, config.accesses_per_period)
        else:
            eps = eps_dist.draw(rng, config.accesses_per_period)

        subscriber, random = serve_users(k, xi, eps, params)
        if config.scheme is RiskScheme.DB_BEARING_RISK:
            bill = params.w * np.minimum(k, xi + eps)
        else:
            bill = np.full_like(eps, params.w * k)

        db = bill + p - params.c * k
        wsd = subscriber + random - bill - p
        network = subscriber + random - params.c * k

        out["xi"][i], out["k"][i], out["p"][i] = xi, k, p
        for name, values in (("db", db), ("wsd", wsd), ("network", network)):
            out[name][i] = values.mean()
            squares[name] += float(np.sum((values - values.mean()) ** 2))

    out["squares"] = np.array([squares[name] for name in FIELDS])
    return out


class ReservationSchedule:
    """Map ξ ↦ (k, p) of a reservation policy; picklable for worker processes."""

    def __init__(
        self, policy: PolicyKind, params: MarketParams, eps_dist: DemandDistribution,
        menu: Optional[ContractMenu] = None, constant_k: Optional[float] = None,
    ):
        self.policy = policy
        self.params = params
        self.eps_dist = eps_dist
        self.menu = menu
        self.constant_k = constant_k

    def __call__(self, xi: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        fee = np.zeros_like(xi)
        if self.policy is PolicyKind.MENU:
            k, fee = contract_service.menu_item_at(self.menu, xi)
        elif self.constant_k is not None:
            k = np.full_like(xi, self.constant_k)
        elif self.policy is PolicyKind.CENTRALIZED:
            k = market_service.k_centralized(xi, self.params, self.eps_dist)
        elif self.policy is PolicyKind.DB_SYM:
            k = market_service.k_db_sym(xi, self.params, self.eps_dist)
        else:
            k = market_service.k_wsd(xi, self.params, self.eps_dist)
        return np.atleast_1d(k), np.atleast_1d(fee)


class SimulationService:
    """Monte Carlo realization of the reservation market."""

    def reservation_schedule(
        self, config: SimConfig, params: MarketParams, xi_dist: DemandDistribution,
        eps_dist: DemandDistribution, menu: Optional[ContractMenu] = None,
    ) -> ReservationSchedule:
        """Map ξ ↦ (k, p) of the configured policy.

        Args:
            config: Run configuration; its policy, scheme and fixed_k are used.
            params: Market prices.
            xi_dist: Scheduled demand distribution F.
            eps_dist: Bursty demand distribution G.
            menu: Contract menu, required for the menu policy.

        Returns:
            A picklable ReservationSchedule.

        Raises:
            ValueError: If the menu policy has no menu or the menu's scheme
                differs from the configured scheme.
        """
        policy = config.policy
        if policy is PolicyKind.MENU:
            if menu is None:
                raise ValueError("policy menu requires a contract menu")
            if menu.scheme is not config.scheme:
                raise ValueError(f"menu designed for {menu.scheme.value} but run uses {config.scheme.value}")
            return ReservationSchedule(policy, params, eps_dist, menu=menu)
        if policy is PolicyKind.FIXED_K:
            return ReservationSchedule(policy, params, eps_dist, constant_k=config.fixed_k)
        if policy is PolicyKind.DB_ASYM:
            k = market_service.k_db_asym(params, xi_dist, eps_dist)
            return ReservationSchedule(policy, params, eps_dist, constant_k=k)
        return ReservationSchedule(policy, params, eps_dist)

    def _simulate(self, config, params, xi_dist, eps_dist, menu) -> Dict[str, np.ndarray]:
        schedule = self.reservation_schedule(config, params, xi_dist, eps_dist, menu)
        seeds = np.random.SeedSequence(config.seed).spawn(config.n_reservation_periods)

        if config.workers > 1:
            blocks = [list(block) for block in np.array_split(np.arange(len(seeds)), config.workers) if block.size]
            jobs = [(config, params, xi_dist, eps_dist, schedule, [seeds[i] for i in block]) for block in blocks]
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                parts = list(pool.map(_simulate_periods, jobs))
            result = {name: np.concatenate([part[name] for part in parts]) for name in parts[0] if name != "squares"}
            result["squares"] = np.sum([part["squares"] for part in parts], axis=0)
        else:
            result = _simulate_periods((config, params, xi_dist, eps_dist, schedule, seeds))
        return result

    def _report(self, config: SimConfig, result: Dict[str, np.ndarray]) -> SimulationReport:
        periods = config.n_reservation_periods
        accesses = config.accesses_per_period
        values = {}
        for j, name in enumerate(FIELDS):
            means = result[name]
            values[f"{name}_profit_mean"] = float(means.mean())
            if periods >= 2:
                # constant batches, as with point-mass demands, have no spread
                spread = 0.0 if np.ptp(means) == 0.0 else means.std(ddof=1)
                values[f"{name}_profit_se"] = float(spread / np.sqrt(periods))
            elif accesses >= 2:
                values[f"{name}_profit_se"] = float(np.sqrt(result["squares"][j] / (accesses - 1) / accesses))
            else:
                values[f"{name}_profit_se"] = 0.0
        return SimulationReport(n_samples=periods * accesses, **values)

    def run_market(
        self, config: SimConfig, params: MarketParams, xi_dist: DemandDistribution,
        eps_dist: DemandDistribution, menu: Optional[ContractMenu] = None,
    ) -> SimulationReport:
        """Simulate the market and report mean realized profits per access period.

        Args:
            config: Run configuration.
            params: Market prices.
            xi_dist: Scheduled demand distribution F.
            eps_dist: Bursty demand distribution G (also used by the
                quantile-based policies when eps_mode is random-users).
            menu: Contract menu, required for the menu policy.

        Returns:
            SimulationReport, deterministic for a fixed config.

        Example:
            >>> service = SimulationService()
            >>> report = service.run_market(SimConfig(seed=1), MarketParams(), xi_dist, eps_dist)
            >>> report.network_profit_mean
        """
        report, _ = self.run_market_trace(config, params, xi_dist, eps_dist, menu)
        return report

    def run_market_trace(
        self, config: SimConfig, params: MarketParams, xi_dist: DemandDistribution,
        eps_dist: DemandDistribution, menu: Optional[ContractMenu] = None,
    ) -> Tuple[SimulationReport, pd.DataFrame]:
        """Like run_market, plus a per-reservation-period trace
        (period, xi, k, db_profit, wsd_profit)."""
        logger.info(
            f"Simulating {config.n_reservation_periods} x {config.accesses_per_period} periods, "
            f"policy={config.policy.value}, scheme={config.scheme.value}, seed={config.seed}"
        )
        result = self._simulate(config, params, xi_dist, eps_dist, menu)
        report = self._report(config, result)
        trace = pd.DataFrame({
            "period": np.arange(config.n_reservation_periods),
            "xi": result["xi"],
            "k": result["k"],
            "db_profit": result["db"],
            "wsd_profit": result["wsd"],
        })
        logger.info(
            f"Simulation done: db={report.db_profit_mean:.6f}±{report.db_profit_se:.2g}, "
            f"wsd={report.wsd_profit_mean:.6f}±{report.wsd_profit_se:.2g}"
        )
        return report, trace

    def validate_against_analytic(self, report: SimulationReport, analytic_value: float, which: str) -> bool:
        """Whether |mean − analytic| ≤ 3·SE for the named field.

        A report with zero standard error, as from point-mass demands, is
        held to a relative tolerance of 1e-9 instead.

        Args:
            report: Simulated run with at least 100 samples.
            analytic_value: Expected profit of the same policy.
            which: db, wsd or network; a _profit suffix is accepted.

        Returns:
            True if the simulated mean is within the bound.

        Example:
            >>> expected = service.analytic_expectation(config, params, xi_dist, eps_dist)
            >>> service.validate_against_analytic(report, expected.network, "network")

        Raises:|mean − analytic| ≤ 3·SE for the named field (db, wsd or network).

        Raises:
            ValueError: If the report has fewer than 100 samples or the field is unknown.
        """
        which = which.replace("_profit", "")
        if which not in FIELDS:
            raise ValueError(f"unknown report field: {which}")
        if report.n_samples < 100:
            raise ValueError(f"validation needs >= 100 samples, got {report.n_samples}")
        gap = abs(report.mean(which) - analytic_value)
        bound = 3.0 * report.se(which)
        if bound == 0.0:
            bound = 1e-9 * max(1.0, abs(analytic_value))
        ok = gap <= bound
        if not ok:
            logger.warning(f"{which} profit {report.mean(which):.6f} misses analytic {analytic_value:.6f} by {gap:.3g}")
        return ok

    def analytic_expectation(
        self, config: SimConfig, params: MarketParams, xi_dist: DemandDistribution,
        eps_dist: DemandDistribution, menu: Optional[ContractMenu] = None,
    ) -> ProfitBreakdown:
        """Expected profits the simulator should converge to.

        Returns:
            ProfitBreakdown of the configured policy, evaluated by quadrature.
        """
        schedule = self.reservation_schedule(config, params, xi_dist, eps_dist, menu)
        return market_service.expected_profits_of_policy(
            lambda xi: schedule(xi)[0], params, xi_dist, eps_dist,
            scheme=config.scheme, fee=lambda xi: schedule(xi)[1],
        )


# Global service instance for backward compatibility
_service_instance = SimulationService()


def run_market(config: SimConfig, params: MarketParams, xi_dist, eps_dist,
               menu: Optional[ContractMenu] = None) -> SimulationReport:
    """Legacy function wrapper for a simulated market run."""
    return _service_instance.run_market(config, params, xi_dist, eps_dist, menu)


def validate_against_analytic(report: SimulationReport, analytic_value: float, which: str) -> bool:
    """Legacy function wrapper for the 3-SE check."""
    return _service_instance.validate_against_analytic(report, analytic_value, which)


def analytic_expectation(config: SimConfig, params: MarketParams, xi_dist, eps_dist,
                         menu: Optional[ContractMenu] = None) -> ProfitBreakdown:
    """Legacy function wrapper for the analytic oracle of a run."""
    return _service_instance.analytic_expectation(config, params, xi_dist, eps_dist, menu)
