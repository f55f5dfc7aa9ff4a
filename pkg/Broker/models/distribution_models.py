"""Demand distribution models.

This module defines the univariate distributions used for scheduled demand
(ξ, distribution F) and bursty demand (ε, distribution G), and the
random-user model from which a bursty-demand distribution can be derived.

A DemandDistribution is an immutable, hashable pydantic value object. Its
numerics live in small backend objects built once per distinct parameter
set, so equal distributions share one scipy frozen distribution.

Typical usage example:
    xi = DemandDistribution.truncated_normal(30.0, 64.0)
    eps = DemandDistribution.chi_square(30)
    eps.partial_expectation(10.0)
"""

import math
from enum import Enum
from functools import lru_cache
from typing import Any, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import stats
from scipy.special import ndtr

from Broker.config import get_settings

ArrayLike = Union[float, Sequence[float], np.ndarray]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _shaped(x: Any, values: np.ndarray) -> Union[float, np.ndarray]:
    """Return a float for scalar input, the array otherwise."""
    if np.ndim(x) == 0:
        return float(values)
    return values


class DistributionKind(str, Enum):
    """Supported distribution families."""
    TRUNCATED_NORMAL = "truncated-normal"
    CHI_SQUARE = "chi-square"
    POINT_MASS = "point-mass"
    EMPIRICAL_GRID = "empirical-grid"


# Numerical backends

class _TruncatedNormal:
    def __init__(self, mu: float, variance: float, lo: float, hi: float):
        self.mu = mu
        self.sigma = math.sqrt(variance)
        self.lo, self.hi = lo, hi
        self.alpha = (lo - mu) / self.sigma
        self.beta = (hi - mu) / self.sigma
        self.mass = float(ndtr(self.beta) - ndtr(self.alpha))
        self.rv = stats.truncnorm(self.alpha, self.beta, loc=mu, scale=self.sigma)
        self.upper = hi

    def cdf(self, x):
        return self.rv.cdf(x)

    def sf(self, x):
        return self.rv.sf(x)

    def pdf(self, x):
        return self.rv.pdf(x)

    def ppf(self, p):
        return self.rv.ppf(p)

    def partial_expectation(self, a):
        clipped = np.clip(a, self.lo, self.hi)
        z = (clipped - self.mu) / self.sigma
        phi_z = np.exp(-0.5 * z * z) / _SQRT_2PI
        phi_alpha = math.exp(-0.5 * self.alpha * self.alpha) / _SQRT_2PI
        head = (self.mu * (ndtr(z) - ndtr(self.alpha)) - self.sigma * (phi_z - phi_alpha)) / self.mass
        return head + a * self.rv.sf(a)

    def mean(self):
        return float(self.rv.mean())

    def var(self):
        return float(self.rv.var())


class _ChiSquare:
    def __init__(self, dof: float, scale: float, tail_probability: float):
        self.dof = dof
        self.scale = scale
        self.rv = stats.chi2(dof, scale=scale)
        self.lo = 0.0
        self.upper = float(self.rv.isf(tail_probability))

    def cdf(self, x):
        return self.rv.cdf(x)

    def sf(self, x):
        return self.rv.sf(x)

    def pdf(self, x):
        return self.rv.pdf(x)

    def ppf(self, p):
        p = np.asarray(p, dtype=float)
        return np.where(p >= 1.0, self.upper, self.rv.ppf(np.minimum(p, 1.0 - 1e-16)))

    def partial_expectation(self, a):
        # E[min(X, a)] = θ·n·F_{n+2}(a/θ) + a·(1 − F_n(a/θ))
        y = a / self.scale
        return self.scale * self.dof * stats.chi2.cdf(y, self.dof + 2) + a * stats.chi2.sf(y, self.dof)

    def mean(self):
        return self.dof * self.scale

    def var(self):
        return 2.0 * self.dof * self.scale ** 2


class _PointMass:
    def __init__(self, at: float):
        self.at = at
        self.lo = self.upper = at

    def cdf(self, x):
        return (np.asarray(x, dtype=float) >= self.at).astype(float)

    def sf(self, x):
        return 1.0 - self.cdf(x)

    def pdf(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def ppf(self, p):
        return np.full_like(np.asarray(p, dtype=float), self.at)

    def partial_expectation(self, a):
        return np.minimum(a, self.at)

    def mean(self):
        return self.at

    def var(self):
        return 0.0


class _EmpiricalGrid:
    def __init__(self, grid_x: Tuple[float, ...], grid_cdf: Tuple[float, ...]):
        self.x = np.asarray(grid_x, dtype=float)
        self.c = np.asarray(grid_cdf, dtype=float)
        self.lo, self.upper = float(self.x[0]), float(self.x[-1])
        self.density = np.maximum(np.gradient(self.c, self.x), 0.0)
        # ∫_lo^x_i (1 − cdf) at every node; exact for a piecewise-linear cdf
        widths = np.diff(self.x)
        self.tail = np.concatenate(([0.0], np.cumsum(widths * (1.0 - 0.5 * (self.c[:-1] + self.c[1:])))))
        self.masses = np.diff(self.c)
        self.midpoints = 0.5 * (self.x[:-1] + self.x[1:])
        self.widths = widths

    def cdf(self, x):
        return np.interp(x, self.x, self.c, left=0.0, right=1.0)

    def sf(self, x):
        return 1.0 - self.cdf(x)

    def pdf(self, x):
        return np.interp(x, self.x, self.density, left=0.0, right=0.0)

    def ppf(self, p):
        p = np.asarray(p, dtype=float)
        idx = np.clip(np.searchsorted(self.c, p, side="left"), 1, len(self.c) - 1)
        c0, c1 = self.c[idx - 1], self.c[idx]
        x0, x1 = self.x[idx - 1], self.x[idx]
        gap = c1 - c0
        frac = np.where(gap > 0, (p - c0) / np.where(gap > 0, gap, 1.0), 0.0)
        return x0 + np.clip(frac, 0.0, 1.0) * (x1 - x0)

    def partial_expectation(self, a):
        a = np.asarray(a, dtype=float)
        xc = np.clip(a, self.lo, self.upper)
        i = np.clip(np.searchsorted(self.x, xc, side="right") - 1, 0, len(self.x) - 2)
        cx = np.interp(xc, self.x, self.c)
        inside = self.tail[i] + (xc - self.x[i]) * (1.0 - 0.5 * (self.c[i] + cx))
        return np.minimum(a, self.lo) + inside

    def mean(self):
        return float(np.sum(self.masses * self.midpoints))

    def var(self):
        second = np.sum(self.masses * (self.midpoints ** 2 + self.widths ** 2 / 12.0))
        return float(second - self.mean() ** 2)


@lru_cache(maxsize=256)
def _backend(kind, mu, variance, dof, scale, lo, hi, grid_x, grid_cdf, tail_probability):
    if kind is DistributionKind.TRUNCATED_NORMAL:
        return _TruncatedNormal(mu, variance, lo, hi)
    if kind is DistributionKind.CHI_SQUARE:
        return _ChiSquare(dof, scale, tail_probability)
    if kind is DistributionKind.POINT_MASS:
        return _PointMass(mu)
    return _EmpiricalGrid(grid_x, grid_cdf)


class DemandDistribution(BaseModel):
    """A univariate demand distribution.

    Attributes:
        kind: Distribution family.
        mu: Parent mean (truncated-normal) or atom location (point-mass).
        variance: Parent variance σ² (truncated-normal only).
        dof: Degrees of freedom n (chi-square only).
        scale: Multiplier θ of a chi-square variable (θ·χ²_n).
        lo: Lower support bound.
        hi: Upper support bound; None for the unbounded chi-square.
        grid_x: Ascending grid nodes (empirical-grid only).
        grid_cdf: Tabulated cdf at grid_x (empirical-grid only).
    """

    model_config = ConfigDict(frozen=True)

    kind: DistributionKind
    mu: Optional[float] = Field(None, description="Mean (bandwidth units)")
    variance: Optional[float] = Field(None, gt=0, description="Variance (bandwidth units²)")
    dof: Optional[float] = Field(None, gt=0, description="Chi-square degrees of freedom")
    scale: float = Field(1.0, gt=0, description="Chi-square scale multiplier")
    lo: Optional[float] = Field(None, description="Lower support bound")
    hi: Optional[float] = Field(None, description="Upper support bound")
    grid_x: Optional[Tuple[float, ...]] = None
    grid_cdf: Optional[Tuple[float, ...]] = None

    @model_validator(mode="before")
    @classmethod
    def _fill_support(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        kind = DistributionKind(data.get("kind"))
        if kind is DistributionKind.TRUNCATED_NORMAL:
            mu, variance = data.get("mu"), data.get("variance")
            if mu is not None and variance is not None and float(variance) > 0:
                width = get_settings().truncation_sigmas * math.sqrt(float(variance))
                if data.get("lo") is None:
                    data["lo"] = max(0.0, float(mu) - width)
                if data.get("hi") is None:
                    data["hi"] = float(mu) + width
        elif kind is DistributionKind.CHI_SQUARE:
            data["lo"], data["hi"] = 0.0, None
        elif kind is DistributionKind.POINT_MASS:
            data["lo"] = data["hi"] = data.get("mu")
        elif kind is DistributionKind.EMPIRICAL_GRID:
            x, cdf = data.get("grid_x"), data.get("grid_cdf")
            if x is not None and cdf is not None and len(x) >= 2 and len(x) == len(cdf):
                cdf = np.clip(np.asarray(cdf, dtype=float), 0.0, 1.0)
                if cdf[0] <= 1e-6 and cdf[-1] >= 1.0 - 1e-6:
                    cdf[0], cdf[-1] = 0.0, 1.0
                data["grid_x"] = tuple(float(v) for v in x)
                data["grid_cdf"] = tuple(float(v) for v in cdf)
                data["lo"], data["hi"] = float(x[0]), float(x[-1])
        return data

    @model_validator(mode="after")
    def _check_parameters(self) -> "DemandDistribution":
        kind = self.kind
        if kind is DistributionKind.TRUNCATED_NORMAL:
            if self.mu is None or self.variance is None:
                raise ValueError("truncated-normal requires mu and variance")
            if not self.lo < self.hi:
                raise ValueError(f"empty truncation interval [{self.lo}, {self.hi}]")
        elif kind is DistributionKind.CHI_SQUARE:
            if self.dof is None:
                raise ValueError("chi-square requires dof")
        elif kind is DistributionKind.POINT_MASS:
            if self.mu is None:
                raise ValueError("point-mass requires mu")
        else:
            if self.grid_x is None or self.grid_cdf is None:
                raise ValueError("empirical-grid requires grid_x and grid_cdf")
            if len(self.grid_x) != len(self.grid_cdf) or len(self.grid_x) < 2:
                raise ValueError("grid_x and grid_cdf must have equal length >= 2")
            x = np.asarray(self.grid_x)
            c = np.asarray(self.grid_cdf)
            if np.any(np.diff(x) <= 0):
                raise ValueError("grid_x must be strictly increasing")
            if np.any(np.diff(c) < -1e-12):
                raise ValueError("grid_cdf must be nondecreasing")
            if c[0] != 0.0 or c[-1] != 1.0:
                raise ValueError("grid_cdf must start at 0 and end at 1")
        return self

    # Constructors

    @classmethod
    def truncated_normal(
        cls, mu: float, variance: float, lo: Optional[float] = None, hi: Optional[float] = None
    ) -> "DemandDistribution":
        """Normal(mu, variance) truncated to [lo, hi] (default [max(0, μ−4σ), μ+4σ])."""
        return cls(kind=DistributionKind.TRUNCATED_NORMAL, mu=mu, variance=variance, lo=lo, hi=hi)

    @classmethod
    def chi_square(cls, dof: float, scale: float = 1.0) -> "DemandDistribution":
        """scale · χ²(dof)."""
        return cls(kind=DistributionKind.CHI_SQUARE, dof=dof, scale=scale)

    @classmethod
    def point_mass(cls, at: float) -> "DemandDistribution":
        """Degenerate distribution at a single value."""
        return cls(kind=DistributionKind.POINT_MASS, mu=at)

    @classmethod
    def empirical_grid(cls, grid_x: Sequence[float], grid_cdf: Sequence[float]) -> "DemandDistribution":
        """Piecewise-linear cdf through the given nodes."""
        return cls(kind=DistributionKind.EMPIRICAL_GRID, grid_x=tuple(grid_x), grid_cdf=tuple(grid_cdf))

    # Numerics

    @property
    def _impl(self):
        return _backend(
            self.kind, self.mu, self.variance, self.dof, self.scale, self.lo, self.hi,
            self.grid_x, self.grid_cdf, get_settings().tail_probability,
        )

    @property
    def is_point_mass(self) -> bool:
        return self.kind is DistributionKind.POINT_MASS

    @property
    def numeric_support(self) -> Tuple[float, float]:
        """Support bounds, with unbounded tails capped at the 1 − tail_probability quantile."""
        impl = self._impl
        return float(impl.lo), float(impl.upper)

    def cdf(self, x: ArrayLike) -> Union[float, np.ndarray]:
        return _shaped(x, np.asarray(self._impl.cdf(np.asarray(x, dtype=float)), dtype=float))

    def sf(self, x: ArrayLike) -> Union[float, np.ndarray]:
        return _shaped(x, np.asarray(self._impl.sf(np.asarray(x, dtype=float)), dtype=float))

    def pdf(self, x: ArrayLike) -> Union[float, np.ndarray]:
        return _shaped(x, np.asarray(self._impl.pdf(np.asarray(x, dtype=float)), dtype=float))

    def quantile(self, p: ArrayLike) -> Union[float, np.ndarray]:
        """Smallest x with cdf(x) ≥ p.

        Raises:
            ValueError: If any p lies outside [0, 1].
        """
        probs = np.asarray(p, dtype=float)
        if np.any(np.isnan(probs)) or np.any(probs < 0.0) or np.any(probs > 1.0):
            raise ValueError(f"probability outside [0, 1]: {p}")
        values = np.asarray(self._impl.ppf(probs), dtype=float)
        values = np.where(probs <= 0.0, self._impl.lo, values)
        return _shaped(p, values)

    def partial_expectation(self, a: ArrayLike) -> Union[float, np.ndarray]:
        """E[min{X, a}] for a nonnegative variable X.

        Raises:
            ValueError: If a < 0 or the support reaches below zero.
        """
        levels = np.asarray(a, dtype=float)
        if np.any(levels < 0.0):
            raise ValueError(f"partial expectation needs a >= 0, got {a}")
        if self._impl.lo < 0.0:
            raise ValueError(f"partial expectation needs nonnegative support, lo={self._impl.lo}")
        return _shaped(a, np.asarray(self._impl.partial_expectation(levels), dtype=float))

    def mean(self) -> float:
        return float(self._impl.mean())

    def var(self) -> float:
        return float(self._impl.var())

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Inverse-transform draws using a caller-owned generator."""
        return np.asarray(self.quantile(rng.random(n)), dtype=float)

    def sample(self, seed: int, n: int) -> np.ndarray:
        """Deterministic inverse-transform sample of size n.

        Raises:
            ValueError: If n < 1.
        """
        if n < 1:
            raise ValueError(f"sample size must be >= 1, got {n}")
        return self.draw(np.random.default_rng(seed), n)


class RandomUserModel(BaseModel):
    """Physical model of random users' bursty demand.

    A user with complex-normal channel h demands
    ε_i = P·exp(−(1 + s/β))·|h|²/n0 units of bandwidth.

    Attributes:
        beta: Monetary income per unit data rate.
        s: Market price per unit bandwidth.
        power: Transmit power P (watts).
        noise: Noise power n0 per unit bandwidth.
        user_count: Number of random users.
    """

    model_config = ConfigDict(frozen=True)

    beta: float = Field(..., gt=0)
    s: float = Field(..., gt=0)
    power: float = Field(..., gt=0)
    noise: float = Field(..., gt=0)
    user_count: int = Field(..., gt=0)

    @property
    def per_user_mean(self) -> float:
        """E[ε_i], using E|h|² = 1."""
        return self.power * math.exp(-(1.0 + self.s / self.beta)) / self.noise
