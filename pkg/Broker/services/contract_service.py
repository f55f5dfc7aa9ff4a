"""Service for optimal contract design.

This module builds the database's optimal menu of (reservation, fee) items
when the WSD's scheduled demand ξ is private information, under either
risk-bearing scheme. It also computes the WSD's information rent, checks
menus for incentive compatibility (IC) and individual rationality (IR) by
brute force, and evaluates the database's expected profit under a menu.

Under scheme I (database bears risk) the hazard term carries α = s − w;
under scheme II (WSD bears risk) it carries α = s.

Typical usage example:
    service = ContractService()
    menu = service.build_contract(RiskScheme.DB_BEARING_RISK, params, xi_dist, eps_dist)
    report = service.verify_feasibility(menu, params, eps_dist)
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid, simpson

from Broker.config import get_settings
from Broker.errors import SolverError
from Broker.models.contract_models import ContractMenu, FeasibilityReport
from Broker.models.distribution_models import ArrayLike, DemandDistribution
from Broker.models.market_models import MarketParams, RiskScheme
from Broker.services import market_service
from Broker.services.distribution_service import check_ifr

logger = logging.getLogger(__name__)

Number = Union[float, np.ndarray]


def rent_coefficient(scheme: RiskScheme, params: MarketParams) -> float:
    """α: s − w under scheme I, s under scheme II."""
    if scheme is RiskScheme.DB_BEARING_RISK:
        return params.s - params.w
    return params.s


def _solve_chunk(args) -> np.ndarray:
    service, scheme, xi, params, xi_dist, eps_dist = args
    return np.atleast_1d(service.solve_k_star(scheme, xi, params, xi_dist, eps_dist))


class ContractService:
    """Optimal screening contracts between the database and a WSD.

    Attributes:
        grid_size: Default number of ξ nodes in a menu.
        scan_points: Intervals of the coarse z = k − ξ scan.
        root_tol: Bisection stopping width.
        tail_probability: z scan stops at the 1 − tail_probability quantile of G.
        density_floor: Smallest density accepted in the hazard weight.
        ic_tolerance_factor: Default IC/IR tolerance as a fraction of r·ξ̄.
    """

    def __init__(
        self,
        grid_size: Optional[int] = None,
        scan_points: Optional[int] = None,
        root_tol: Optional[float] = None,
    ):
        """Initializes the ContractService.

        Tail probability, density floor and IC tolerance always come from
        the settings.

        Args:
            grid_size: Default menu size. Defaults to BROKER_GRID_SIZE.
            scan_points: Sign-scan intervals. Defaults to BROKER_SCAN_POINTS.
            root_tol: Bisection width. Defaults to BROKER_ROOT_TOL.
        """
        settings = get_settings()
        self.grid_size = grid_size or settings.grid_size
        self.scan_points = scan_points or settings.scan_points
        self.root_tol = root_tol or settings.root_tol
        self.tail_probability = settings.tail_probability
        self.density_floor = settings.density_floor
        self.ic_tolerance_factor = settings.ic_tolerance_factor

    # WSD and virtual surplus

    def wsd_profit_menu(
        self, scheme: RiskScheme, k: ArrayLike, p: ArrayLike, xi: ArrayLike,
        params: MarketParams, eps_dist: DemandDistribution,
    ) -> Number:
        """WSD profit from the item (k, p) when its scheduled demand is ξ."""
        if scheme is RiskScheme.DB_BEARING_RISK:
            gross = market_service.wsd_profit_s1(k, xi, params, eps_dist)
        else:
            gross = market_service.wsd_profit_s2(k, xi, params, eps_dist)
        value = np.asarray(gross) - np.asarray(p, dtype=float)
        return float(value) if np.ndim(value) == 0 else value

    def hazard_weight(self, xi: ArrayLike, xi_dist: DemandDistribution) -> Number:
        """(1 − F(ξ)) / f(ξ).

        At the top of a support where both 1 − F and f vanish, the weight is
        taken from a point slightly below.

        Raises:
            ValueError: Where f(ξ) is below the density floor elsewhere.
        """
        x = np.asarray(xi, dtype=float)
        survival = np.asarray(xi_dist.sf(x), dtype=float)
        density = np.asarray(xi_dist.pdf(x), dtype=float)
        top = (density < self.density_floor) & (survival < self.density_floor)
        if np.any(top):
            lo, hi = xi_dist.numeric_support
            shifted = np.where(top, x - 1e-3 * (hi - lo), x)
            survival = np.where(top, xi_dist.sf(shifted), survival)
            density = np.where(top, xi_dist.pdf(shifted), density)
        low = np.atleast_1d(density < self.density_floor)
        if np.any(low):
            bad = float(np.atleast_1d(x)[low][0])
            raise ValueError(f"density of scheduled demand below floor at xi={bad:.9g}")
        weight = survival / density
        return float(weight) if weight.ndim == 0 else weight

    def phi(
        self, scheme: RiskScheme, k: ArrayLike, xi: ArrayLike, params: MarketParams,
        xi_dist: DemandDistribution, eps_dist: DemandDistribution,
    ) -> Number:
        """Virtual surplus U_tot(k, ξ) − ((1−F)/f)·[r − s + α·G(k − ξ)]."""
        alpha = rent_coefficient(scheme, params)
        k = np.asarray(k, dtype=float)
        xi = np.asarray(xi, dtype=float)
        total = np.asarray(market_service.network_profit(k, xi, params, eps_dist))
        rent_slope = params.r - params.s + alpha * np.asarray(eps_dist.cdf(k - xi))
        value = total - np.asarray(self.hazard_weight(xi, xi_dist)) * rent_slope
        return float(value) if value.ndim == 0 else value

    def first_order_condition(
        self, scheme: RiskScheme, z: ArrayLike, xi: ArrayLike, params: MarketParams,
        xi_dist: DemandDistribution, eps_dist: DemandDistribution,
    ) -> Number:
        """∂φ/∂k at k = ξ + z: s·[1 − G(z)] − c − ((1−F)/f)·α·g(z)."""
        alpha = rent_coefficient(scheme, params)
        z = np.asarray(z, dtype=float)
        weight = np.asarray(self.hazard_weight(xi, xi_dist))
        value = params.s * np.asarray(eps_dist.sf(z)) - params.c - weight * alpha * np.asarray(eps_dist.pdf(z))
        return float(value) if value.ndim == 0 else value

    def scan_grid(self, eps_dist: DemandDistribution) -> np.ndarray:
        """z nodes of the bracketing scan on [0, z_cap]."""
        z_cap = float(eps_dist.quantile(1.0 - self.tail_probability))
        return np.linspace(0.0, z_cap, self.scan_points + 1)

    def solve_k_star(
        self, scheme: RiskScheme, xi: ArrayLike, params: MarketParams,
        xi_dist: DemandDistribution, eps_dist: DemandDistribution,
    ) -> Number:
        """Maximizer of φ over k ≥ ξ, vectorized over ξ.

        Every + to − sign change of the first-order condition on the z scan
        is bisected to root_tol. The corner z = 0 (FOC ≤ 0 there) and the
        scan cap (FOC still > 0) are candidates too; the candidate with the
        largest φ wins, ties going to the smaller k.

        Args:
            scheme: Risk-bearing scheme; sets α in the hazard term.
            xi: Reported type(s) on the support of F.
            params: Market prices.
            xi_dist: Scheduled demand distribution F.
            eps_dist: Bursty demand distribution G.

        Returns:
            k*(ξ), a float for scalar ξ and an array otherwise. Not yet
            made monotone across types; build_contract does that.

        Raises:
            SolverError: If no candidate exists for some ξ.
        """
        x = np.atleast_1d(np.asarray(xi, dtype=float))
        alpha = rent_coefficient(scheme, params)
        weight = np.atleast_1d(np.asarray(self.hazard_weight(x, xi_dist)))
        zs = self.scan_grid(eps_dist)

        def foc(z: np.ndarray, w: np.ndarray) -> np.ndarray:
            return params.s * eps_dist.sf(z) - params.c - w * alpha * eps_dist.pdf(z)

        values = foc(zs[None, :], weight[:, None])
        rows: List[np.ndarray] = []
        cands: List[np.ndarray] = []

        corner = np.flatnonzero(values[:, 0] <= 0.0)
        rows.append(corner)
        cands.append(np.zeros(corner.size))

        capped = np.flatnonzero(values[:, -1] > 0.0)
        rows.append(capped)
        cands.append(np.full(capped.size, zs[-1]))

        row_idx, col_idx = np.nonzero((values[:, :-1] > 0.0) & (values[:, 1:] <= 0.0))
        if row_idx.size:
            a = zs[col_idx].copy()
            b = zs[col_idx + 1].copy()
            w = weight[row_idx]
            while np.max(b - a) > self.root_tol:
                mid = 0.5 * (a + b)
                positive = foc(mid, w) > 0.0
                a = np.where(positive, mid, a)
                b = np.where(positive, b, mid)
            rows.append(row_idx)
            cands.append(0.5 * (a + b))

        all_rows = np.concatenate(rows)
        all_z = np.concatenate(cands)
        missing = np.setdiff1d(np.arange(x.size), all_rows)
        if missing.size:
            bad = float(x[missing[0]])
            logger.error(f"No bracket for the reservation first-order condition at xi={bad:.9g}")
            raise SolverError("first-order condition does not change sign on the scan", xi=bad)

        score = np.asarray(self.phi(scheme, x[all_rows] + all_z, x[all_rows], params, xi_dist, eps_dist))
        order = np.lexsort((-all_z, score, all_rows))
        sorted_rows = all_rows[order]
        last = np.r_[sorted_rows[1:] != sorted_rows[:-1], True]
        best_z = np.empty(x.size)
        best_z[sorted_rows[last]] = all_z[order][last]

        if corner.size:
            logger.debug(f"Corner solution k = xi at {corner.size} node(s)")
        k = x + best_z
        return float(k[0]) if np.ndim(xi) == 0 else k

    # Rent and payments

    def rent_on_grid(
        self, scheme: RiskScheme, xi_grid: ArrayLike, k_values: ArrayLike, u_min: float,
        params: MarketParams, eps_dist: DemandDistribution,
    ) -> np.ndarray:
        """U_ms at every node: u_min + (r−s)·(ξ−ξ̲) + ∫ α·G(k(x) − x) dx by cumulative Simpson."""
        x = np.asarray(xi_grid, dtype=float)
        k = np.asarray(k_values, dtype=float)
        integrand = rent_coefficient(scheme, params) * np.asarray(eps_dist.cdf(np.maximum(k - x, 0.0)))
        if x.size >= 3:
            accumulated = cumulative_simpson(integrand, x=x, initial=0.0)
        else:
            accumulated = cumulative_trapezoid(integrand, x=x, initial=0.0)
        return u_min + (params.r - params.s) * (x - x[0]) + accumulated

    def wsd_rent(
        self, scheme: RiskScheme, xi: ArrayLike, menu_k: Union[ContractMenu, Callable[[np.ndarray], ArrayLike]],
        u_min: float, params: MarketParams, eps_dist: DemandDistribution,
        xi_lo: Optional[float] = None, points: Optional[int] = None,
    ) -> Number:
        """Information rent U_ms(ξ) of a WSD of type ξ under a reservation schedule.

        Args:
            scheme: Risk-bearing scheme.
            xi: Type(s) to evaluate, each ≥ ξ̲.
            menu_k: A ContractMenu (k interpolated between nodes) or a map ξ ↦ k.
            u_min: Rent of the lowest type.
            params: Market prices.
            eps_dist: Bursty demand distribution G.
            xi_lo: Lowest type ξ̲; defaults to the menu's first node.
            points: Simpson nodes per integral; defaults to 2·grid_size + 1.
        """
        if isinstance(menu_k, ContractMenu):
            menu = menu_k
            schedule = lambda x: np.interp(x, menu.xi, menu.k)
            xi_lo = menu.xi_lo if xi_lo is None else xi_lo
        else:
            schedule = menu_k
        if xi_lo is None:
            raise ValueError("xi_lo is required when menu_k is a callable")
        points = points or 2 * self.grid_size + 1
        alpha = rent_coefficient(scheme, params)

        def rent_at(level: float) -> float:
            if level < xi_lo:
                raise ValueError(f"xi={level} below the lowest type {xi_lo}")
            if level == xi_lo:
                return u_min
            nodes = np.linspace(xi_lo, level, points)
            k = np.asarray(schedule(nodes), dtype=float)
            integrand = alpha * np.asarray(eps_dist.cdf(np.maximum(k - nodes, 0.0)))
            return u_min + (params.r - params.s) * (level - xi_lo) + float(simpson(integrand, x=nodes))

        values = np.vectorize(rent_at, otypes=[float])(np.asarray(xi, dtype=float))
        return float(values) if np.ndim(xi) == 0 else values

    def payment(
        self, scheme: RiskScheme, xi: ArrayLike, k: ArrayLike, rent: ArrayLike,
        params: MarketParams, eps_dist: DemandDistribution,
    ) -> Number:
        """Fee that leaves a type-ξ WSD exactly its rent on the item k."""
        gross = np.asarray(self.wsd_profit_menu(scheme, k, 0.0, xi, params, eps_dist))
        value = gross - np.asarray(rent, dtype=float)
        return float(value) if value.ndim == 0 else value

    # Menus

    def build_contract(
        self, scheme: RiskScheme, params: MarketParams, xi_dist: DemandDistribution,
        eps_dist: DemandDistribution, grid_size: Optional[int] = None, workers: int = 1,
    ) -> ContractMenu:
        """Optimal menu on a uniform ξ grid.

        Args:
            scheme: Risk-bearing scheme.
            params: Market prices; params.u_min is the rent of the lowest type.
            xi_dist: Scheduled demand distribution F (IFR, continuous).
            eps_dist: Bursty demand distribution G.
            grid_size: Number of ξ nodes (≥ 2). Defaults to the service setting.
            workers: Processes for the per-node solves (1 = in-process).

        Returns:
            The optimal ContractMenu.

        Raises:
            ValueError: If F is a point mass, is not IFR, or grid_size < 2.
            SolverError: If a node has no solution, with the offending ξ.

        Example:
            >>> service = ContractService()
            >>> menu = service.build_contract(RiskScheme.DB_BEARING_RISK, MarketParams(),
            ...                               DemandDistribution.truncated_normal(30.0, 64.0),
            ...                               DemandDistribution.chi_square(30), grid_size=50)
            >>> print(f"{len(menu)} items, top fee {menu.p[-1]:.2f}")
        """
        grid_size = grid_size or self.grid_size
        if grid_size < 2:
            raise ValueError(f"grid_size must be >= 2, got {grid_size}")
        if xi_dist.is_point_mass:
            raise ValueError("contract design needs a scheduled demand with a density")
        if not check_ifr(xi_dist):
            raise ValueError("scheduled demand distribution is not IFR")

        lo, hi = xi_dist.numeric_support
        xi_grid = np.linspace(lo, hi, grid_size)

        if workers > 1:
            chunks = np.array_split(xi_grid, workers)
            jobs = [(self, scheme, chunk, params, xi_dist, eps_dist) for chunk in chunks if chunk.size]
            with ProcessPoolExecutor(max_workers=workers) as pool:
                k = np.concatenate(list(pool.map(_solve_chunk, jobs)))
        else:
            k = np.atleast_1d(self.solve_k_star(scheme, xi_grid, params, xi_dist, eps_dist))

        monotone = np.maximum.accumulate(k)
        if np.max(monotone - k) > 1e-6:
            logger.warning(f"Reservation schedule decreased by up to {np.max(monotone - k):.3g}; flattened")
        k = monotone

        rent = self.rent_on_grid(scheme, xi_grid, k, params.u_min, params, eps_dist)
        p = np.asarray(self.payment(scheme, xi_grid, k, rent, params, eps_dist))

        logger.info(
            f"Built {scheme.value} menu with {grid_size} items: "
            f"k in [{k[0]:.4f}, {k[-1]:.4f}], p in [{p.min():.4f}, {p.max():.4f}]"
        )
        return ContractMenu(
            scheme=scheme,
            xi_grid=tuple(xi_grid.tolist()),
            k_values=tuple(k.tolist()),
            p_values=tuple(p.tolist()),
            u_min=params.u_min,
        )

    def verify_feasibility(
        self, menu: ContractMenu, params: MarketParams, eps_dist: DemandDistribution,
        tol: Optional[float] = None,
    ) -> FeasibilityReport:
        """Brute-force IC/IR check over every (true, reported) pair of grid types.

        Args:
            menu: Menu to check.
            params: Market prices.
            eps_dist: Bursty demand distribution G.
            tol: Tolerance; defaults to ic_tolerance_factor · r · ξ̄.

        Returns:
            A FeasibilityReport. Infeasible menus are reported, not raised,
            and logged as a warning.

        Example:
            >>> report = ContractService().verify_feasibility(menu, params, eps_dist)
            >>> if not report.feasible:
            ...     print(f"worst misreport gains {report.ic_max_violation:.3g}")
        """
        tol = self.ic_tolerance_factor * params.r * menu.xi_hi if tol is None else tol
        xi, k, p = menu.xi, menu.k, menu.p

        # utility[i, j]: type xi[i] taking item j
        utility = np.asarray(self.wsd_profit_menu(
            menu.scheme, k[None, :], p[None, :], xi[:, None], params, eps_dist
        ))
        own = np.diag(utility)
        ic_max_violation = float(np.max(utility - own[:, None]))
        ir_min_slack = float(np.min(own - menu.u_min))

        monotonicity_ok = bool(np.all(np.diff(k) >= -1e-9))
        if menu.scheme is RiskScheme.DB_BEARING_RISK:
            monotonicity_ok = monotonicity_ok and bool(np.all(np.diff(p) >= -tol))

        feasible = ic_max_violation <= tol and ir_min_slack >= -tol and monotonicity_ok
        if not feasible:
            logger.warning(
                f"Menu infeasible: ic_max_violation={ic_max_violation:.3g}, "
                f"ir_min_slack={ir_min_slack:.3g}, monotonicity_ok={monotonicity_ok}"
            )
        return FeasibilityReport(
            ic_max_violation=ic_max_violation,
            ir_min_slack=ir_min_slack,
            monotonicity_ok=monotonicity_ok,
            feasible=feasible,
            tolerance=tol,
        )

    def db_expected_profit_under_menu(
        self, menu: ContractMenu, params: MarketParams,
        xi_dist: DemandDistribution, eps_dist: DemandDistribution,
    ) -> float:
        """Database's expected profit per access period under a menu.

        Integrates E_ξ[U_tot(k(ξ), ξ) − U_ms(ξ)] by Simpson over the menu
        grid, with U_ms the on-menu WSD profit.

        Args:
            menu: Menu offered to the WSD.
            params: Market prices.
            xi_dist: Scheduled demand distribution F, weighting the nodes.
            eps_dist: Bursty demand distribution G.

        Returns:
            Expected database profit. reformulated_db_profit computes the
            same value through the virtual surplus.
        """
        xi, k, p = menu.xi, menu.k, menu.p
        density = np.asarray(xi_dist.pdf(xi))
        total = np.asarray(market_service.network_profit(k, xi, params, eps_dist))
        wsd = np.asarray(self.wsd_profit_menu(menu.scheme, k, p, xi, params, eps_dist))
        return float(simpson((total - wsd) * density, x=xi) / simpson(density, x=xi))

    def reformulated_db_profit(
        self, menu: ContractMenu, params: MarketParams,
        xi_dist: DemandDistribution, eps_dist: DemandDistribution,
    ) -> float:
        """E_ξ[φ(k(ξ), ξ)] − u_min, integrating U_tot·f − (1−F)·[r − s + α·G] to avoid dividing by f."""
        xi, k = menu.xi, menu.k
        alpha = rent_coefficient(menu.scheme, params)
        density = np.asarray(xi_dist.pdf(xi))
        survival = np.asarray(xi_dist.sf(xi))
        total = np.asarray(market_service.network_profit(k, xi, params, eps_dist))
        slope = params.r - params.s + alpha * np.asarray(eps_dist.cdf(np.maximum(k - xi, 0.0)))
        integrand = total * density - survival * slope
        return float(simpson(integrand, x=xi) / simpson(density, x=xi)) - menu.u_min

    def marginal_price_curve(self, menu: ContractMenu) -> List[Tuple[float, float]]:
        """Finite-difference dP/dK at the k midpoints of consecutive items.

        Raises:
            ValueError: If the menu has fewer than 3 items or repeats a k value.
        """
        if len(menu) < 3:
            raise ValueError(f"marginal price curve needs >= 3 items, got {len(menu)}")
        k, p = menu.k, menu.p
        dk = np.diff(k)
        if np.any(dk <= 1e-12 * np.maximum(1.0, np.abs(k[1:]))):
            raise ValueError("menu repeats a reservation value; collapse duplicate items first")
        slope = np.diff(p) / dk
        midpoints = 0.5 * (k[:-1] + k[1:])
        return list(zip(midpoints.tolist(), slope.tolist()))

    def collapse_duplicate_items(self, menu: ContractMenu) -> ContractMenu:
        """Drop items whose k repeats the previous item's, keeping the lowest type of each run."""
        k = menu.k
        keep = np.r_[True, np.diff(k) > 1e-12 * np.maximum(1.0, np.abs(k[1:]))]
        if np.all(keep):
            return menu
        logger.info(f"Collapsed {int(np.sum(~keep))} duplicate menu item(s)")
        return ContractMenu(
            scheme=menu.scheme,
            xi_grid=tuple(menu.xi[keep].tolist()),
            k_values=tuple(k[keep].tolist()),
            p_values=tuple(menu.p[keep].tolist()),
            u_min=menu.u_min,
        )

    def menu_item_at(self, menu: ContractMenu, xi: ArrayLike) -> Tuple[Number, Number]:
        """(k, p) linearly interpolated at off-grid types.

        Raises:
            ValueError: If any ξ lies outside [ξ̲, ξ̄].
        """
        x = np.asarray(xi, dtype=float)
        if np.any(x < menu.xi_lo) or np.any(x > menu.xi_hi):
            raise ValueError(f"xi outside the menu range [{menu.xi_lo:.9g}, {menu.xi_hi:.9g}]")
        k = np.interp(x, menu.xi, menu.k)
        p = np.interp(x, menu.xi, menu.p)
        if x.ndim == 0:
            return float(k), float(p)
        return k, p

    def equivalent_wholesale_price(
        self, menu: ContractMenu, params: MarketParams, eps_dist: DemandDistribution
    ) -> np.ndarray:
        """Per node, the uniform wholesale price s·[1 − G(k − ξ)] under which a
        no-sharing WSD would reserve the menu's k."""
        return params.s * np.asarray(eps_dist.sf(np.maximum(menu.k - menu.xi, 0.0)))

    def mean_equivalent_wholesale_price(
        self, menu: ContractMenu, params: MarketParams,
        xi_dist: DemandDistribution, eps_dist: DemandDistribution,
    ) -> float:
        """Equivalent wholesale price averaged over F."""
        density = np.asarray(xi_dist.pdf(menu.xi))
        price = self.equivalent_wholesale_price(menu, params, eps_dist)
        return float(simpson(price * density, x=menu.xi) / simpson(density, x=menu.xi))


# Global service instance for backward compatibility
_service_instance = ContractService()


def wsd_profit_menu(scheme: RiskScheme, k, p, xi, params: MarketParams, eps_dist: DemandDistribution):
    """Legacy function wrapper for the on-menu WSD profit."""
    return _service_instance.wsd_profit_menu(scheme, k, p, xi, params, eps_dist)


def phi(scheme: RiskScheme, k, xi, params: MarketParams, xi_dist, eps_dist):
    """Legacy function wrapper for the virtual surplus."""
    return _service_instance.phi(scheme, k, xi, params, xi_dist, eps_dist)


def solve_k_star(scheme: RiskScheme, xi, params: MarketParams, xi_dist, eps_dist):
    """Legacy function wrapper for the optimal menu reservation."""
    return _service_instance.solve_k_star(scheme, xi, params, xi_dist, eps_dist)


def wsd_rent(scheme: RiskScheme, xi, menu_k, u_min: float, params: MarketParams, eps_dist, xi_lo=None):
    """Legacy function wrapper for the WSD information rent."""
    return _service_instance.wsd_rent(scheme, xi, menu_k, u_min, params, eps_dist, xi_lo)


def payment(scheme: RiskScheme, xi, k, rent, params: MarketParams, eps_dist):
    """Legacy function wrapper for the reservation fee."""
    return _service_instance.payment(scheme, xi, k, rent, params, eps_dist)


def build_contract(scheme: RiskScheme, params: MarketParams, xi_dist, eps_dist,
                   grid_size: Optional[int] = None, workers: int = 1) -> ContractMenu:
    """Legacy function wrapper for menu construction."""
    return _service_instance.build_contract(scheme, params, xi_dist, eps_dist, grid_size, workers)


def verify_feasibility(menu: ContractMenu, params: MarketParams, eps_dist, tol: Optional[float] = None):
    """Legacy function wrapper for the feasibility check."""
    return _service_instance.verify_feasibility(menu, params, eps_dist, tol)


def db_expected_profit_under_menu(menu: ContractMenu, params: MarketParams, xi_dist, eps_dist) -> float:
    """Legacy function wrapper for the database profit under a menu."""
    return _service_instance.db_expected_profit_under_menu(menu, params, xi_dist, eps_dist)


def reformulated_db_profit(menu: ContractMenu, params: MarketParams, xi_dist, eps_dist) -> float:
    """Legacy function wrapper for the virtual-surplus path of the database profit."""
    return _service_instance.reformulated_db_profit(menu, params, xi_dist, eps_dist)


def marginal_price_curve(menu: ContractMenu):
    """Legacy function wrapper for the marginal price curve."""
    return _service_instance.marginal_price_curve(menu)


def collapse_duplicate_items(menu: ContractMenu) -> ContractMenu:
    """Legacy function wrapper for duplicate-item collapse."""
    return _service_instance.collapse_duplicate_items(menu)


def menu_item_at(menu: ContractMenu, xi):
    """Legacy function wrapper for menu interpolation."""
    return _service_instance.menu_item_at(menu, xi)


def equivalent_wholesale_price(menu: ContractMenu, params: MarketParams, eps_dist) -> np.ndarray:
    """Legacy function wrapper for the equivalent wholesale price."""
    return _service_instance.equivalent_wholesale_price(menu, params, eps_dist)


def mean_equivalent_wholesale_price(menu: ContractMenu, params: MarketParams, xi_dist, eps_dist) -> float:
    """Legacy function wrapper for the F-weighted equivalent wholesale price."""
    return _service_instance.mean_equivalent_wholesale_price(menu, params, xi_dist, eps_dist)
