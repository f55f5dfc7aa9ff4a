"""Service for distribution-level primitives.

This module provides the operations that act on one or two demand
distributions: convolution of scheduled and bursty demand, hazard rates and
the IFR regularity check, the quadrature path of the partial expectation,
and the random-user physics that produces bursty demand.

Typical usage example:
    service = DistributionService()
    total = service.convolve(xi_dist, eps_dist)
    k = total.quantile(0.6)
"""

import logging
import math
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np
from scipy import integrate
from scipy.signal import fftconvolve

from Broker.config import get_settings
from Broker.models.distribution_models import (
    ArrayLike,
    DemandDistribution,
    DistributionKind,
    RandomUserModel,
)

logger = logging.getLogger(__name__)


def _discretize(dist: DemandDistribution, start: float, step: float) -> np.ndarray:
    """Cell masses of dist on [start + i·step, start + (i+1)·step)."""
    lo, hi = dist.numeric_support
    cells = max(1, int(math.ceil((hi - start) / step - 1e-9)))
    edges = start + step * np.arange(cells + 1)
    masses = np.diff(np.asarray(dist.cdf(edges), dtype=float))
    return np.clip(masses, 0.0, None)


def _shifted(dist: DemandDistribution, offset: float, points: int) -> DemandDistribution:
    """dist + offset as a new distribution."""
    if dist.kind is DistributionKind.POINT_MASS:
        return DemandDistribution.point_mass(dist.mu + offset)
    if dist.kind is DistributionKind.EMPIRICAL_GRID:
        return DemandDistribution.empirical_grid(np.asarray(dist.grid_x) + offset, dist.grid_cdf)
    lo, hi = dist.numeric_support
    x = np.linspace(lo, hi, points)
    return DemandDistribution.empirical_grid(x + offset, dist.cdf(x))


@lru_cache(maxsize=64)
def _convolve(first: DemandDistribution, second: DemandDistribution, points: int) -> DemandDistribution:
    if first.is_point_mass:
        return _shifted(second, first.mu, points)
    if second.is_point_mass:
        return _shifted(first, second.mu, points)

    lo_f, hi_f = first.numeric_support
    lo_g, hi_g = second.numeric_support
    step = ((hi_f - lo_f) + (hi_g - lo_g)) / (points - 2)

    mass_f = _discretize(first, lo_f, step)
    mass_g = _discretize(second, lo_g, step)
    mass = np.clip(fftconvolve(mass_f, mass_g), 0.0, None)
    mass /= mass.sum()

    # cell pair (i, j) has midpoint sum lo + (i + j + 1)·step; spread each
    # mass uniformly over one step around it
    lo = lo_f + lo_g
    x = lo + step * (np.arange(mass.size + 1) + 0.5)
    cdf = np.concatenate(([0.0], np.cumsum(mass)))
    cdf[-1] = 1.0
    x = np.concatenate(([lo], x))
    cdf = np.concatenate(([0.0], cdf))
    return DemandDistribution.empirical_grid(x, np.minimum(cdf, 1.0))


class DistributionService:
    """Operations over demand distributions.

    Attributes:
        convolution_points: Grid size of a convolved distribution.
        density_floor: Smallest survival probability accepted by hazard_rate.
        quadrature_abs_tol: Absolute tolerance of the quadrature path.
    """

    def __init__(
        self,
        convolution_points: Optional[int] = None,
        density_floor: Optional[float] = None,
        quadrature_abs_tol: Optional[float] = None,
    ):
        """Initializes the DistributionService.

        Args:
            convolution_points: Grid size of convolved distributions.
                Defaults to BROKER_CONVOLUTION_POINTS.
            density_floor: Smallest survival probability in hazard ratios.
                Defaults to BROKER_DENSITY_FLOOR.
            quadrature_abs_tol: Absolute tolerance of scipy.integrate.quad.
                Defaults to BROKER_QUADRATURE_ABS_TOL.
        """
        settings = get_settings()
        self.convolution_points = convolution_points or settings.convolution_points
        self.density_floor = density_floor if density_floor is not None else settings.density_floor
        self.quadrature_abs_tol = quadrature_abs_tol or settings.quadrature_abs_tol

    def convolve(self, first: DemandDistribution, second: DemandDistribution) -> DemandDistribution:
        """Distribution of the sum of two independent demands.

        The result is an empirical-grid distribution on the combined support,
        except that a point mass convolved with a point mass stays a point mass.

        Args:
            first: Distribution of the first summand (e.g. ξ ~ F).
            second: Distribution of the second summand (e.g. ε ~ G).

        Returns:
            The distribution of first + second.
        """
        result = _convolve(first, second, self.convolution_points)
        logger.debug(f"Convolved {first.kind.value} with {second.kind.value} ({self.convolution_points} points)")
        return result

    def hazard_rate(self, dist: DemandDistribution, x: ArrayLike) -> Union[float, np.ndarray]:
        """f(x) / (1 − F(x)).

        Args:
            dist: The distribution.
            x: Evaluation point(s).

        Returns:
            The hazard rate, a float for scalar x.

        Raises:
            ValueError: Where 1 − F(x) is below the density floor.
        """
        survival = np.asarray(dist.sf(x), dtype=float)
        if np.any(survival < self.density_floor):
            raise ValueError(f"hazard rate undefined where 1 - F(x) < {self.density_floor:g}")
        rate = np.asarray(dist.pdf(x), dtype=float) / survival
        return float(rate) if np.ndim(x) == 0 else rate

    def check_ifr(self, dist: DemandDistribution, grid: Optional[Sequence[float]] = None) -> bool:
        """Whether the hazard rate is nondecreasing across a grid.

        Points with 1 − F below the density floor are skipped. A point mass
        is treated as IFR.

        Args:
            dist: The distribution to check.
            grid: Evaluation points. Defaults to 400 points across the support.

        Returns:
            True iff the hazard never drops by more than a 1e-6 relative step.
        """
        if dist.is_point_mass:
            logger.debug("IFR check skipped for a point mass")
            return True
        if grid is None:
            lo, hi = dist.numeric_support
            grid = np.linspace(lo, hi, 401)[:-1]
        grid = np.asarray(grid, dtype=float)
        grid = grid[np.asarray(dist.sf(grid)) >= self.density_floor]
        if grid.size < 2:
            return True
        rate = np.asarray(self.hazard_rate(dist, grid))
        drops = rate[1:] < rate[:-1] * (1.0 - 1e-6) - 1e-12
        if np.any(drops):
            where = grid[1:][drops][0]
            logger.info(f"Hazard rate decreases near x={where:.6g}; distribution is not IFR")
            return False
        return True

    def partial_expectation(
        self, dist: DemandDistribution, a: ArrayLike, method: str = "closed-form"
    ) -> Union[float, np.ndarray]:
        """E[min{X, a}].

        Args:
            dist: A distribution with nonnegative support.
            a: Cap level(s), each ≥ 0.
            method: "closed-form" (default) or "quadrature" of ∫₀^a (1 − F).

        Returns:
            E[min{X, a}], a float for scalar a.

        Raises:
            ValueError: On negative a, negative support or an unknown method.

        Example:
            >>> service = DistributionService()
            >>> eps = DemandDistribution.chi_square(30)
            >>> closed = service.partial_expectation(eps, 10.0)
            >>> oracle = service.partial_expectation(eps, 10.0, method="quadrature")
        """
        if method == "closed-form":
            return dist.partial_expectation(a)
        if method != "quadrature":
            raise ValueError(f"unknown partial expectation method: {method}")

        levels = np.asarray(a, dtype=float)
        if np.any(levels < 0.0):
            raise ValueError(f"partial expectation needs a >= 0, got {a}")
        lo, _ = dist.numeric_support
        if lo < 0.0:
            raise ValueError(f"partial expectation needs nonnegative support, lo={lo}")

        def tail_integral(level: float) -> float:
            if level == 0.0:
                return 0.0
            breaks = [lo] if 0.0 < lo < level else None
            value, _ = integrate.quad(
                lambda u: float(dist.sf(u)), 0.0, level,
                epsabs=self.quadrature_abs_tol, limit=200, points=breaks,
            )
            return value

        values = np.vectorize(tail_integral, otypes=[float])(levels)
        return float(values) if np.ndim(a) == 0 else values

    def draw_random_user_demand(
        self, model: RandomUserModel, rng: np.random.Generator, n_users: int, size: int
    ) -> np.ndarray:
        """size independent draws of the summed demand of n_users random users."""
        if n_users < 0:
            raise ValueError(f"n_users must be >= 0, got {n_users}")
        if n_users == 0:
            return np.zeros(size)
        channel = rng.normal(0.0, math.sqrt(0.5), size=(size, n_users, 2))
        gain = np.sum(channel ** 2, axis=(1, 2))
        return model.per_user_mean * gain

    def random_user_demand(self, model: RandomUserModel, seed: int, n_users: int) -> float:
        """Summed bursty demand of n_users random users with Rayleigh channels.

        Each user demands P·exp(−(1 + s/β))·|h|²/n0 with h complex normal of
        unit power. Deterministic for a fixed seed.
        """
        rng = np.random.default_rng(seed)
        return float(self.draw_random_user_demand(model, rng, n_users, 1)[0])

    def bursty_distribution_from_users(self, model: RandomUserModel) -> DemandDistribution:
        """Exact distribution of the summed demand of model.user_count users.

        |h|² is Exp(1) = χ²(2)/2, so the sum is (m/2)·χ²(2U) with m the
        per-user mean demand.
        """
        return DemandDistribution.chi_square(dof=2 * model.user_count, scale=model.per_user_mean / 2.0)


# Global service instance for backward compatibility
_service_instance = DistributionService()


def convolve(first: DemandDistribution, second: DemandDistribution) -> DemandDistribution:
    """Legacy function wrapper for convolution."""
    return _service_instance.convolve(first, second)


def hazard_rate(dist: DemandDistribution, x: ArrayLike) -> Union[float, np.ndarray]:
    """Legacy function wrapper for the hazard rate."""
    return _service_instance.hazard_rate(dist, x)


def check_ifr(dist: DemandDistribution, grid: Optional[Sequence[float]] = None) -> bool:
    """Legacy function wrapper for the IFR check."""
    return _service_instance.check_ifr(dist, grid)


def partial_expectation(dist: DemandDistribution, a: ArrayLike, method: str = "closed-form"):
    """Legacy function wrapper for the partial expectation."""
    return _service_instance.partial_expectation(dist, a, method)


def random_user_demand(model: RandomUserModel, seed: int, n_users: int) -> float:
    """Legacy function wrapper for random-user demand."""
    return _service_instance.random_user_demand(model, seed, n_users)


def bursty_distribution_from_users(model: RandomUserModel) -> DemandDistribution:
    """Legacy function wrapper for the random-user bursty distribution."""
    return _service_instance.bursty_distribution_from_users(model)
