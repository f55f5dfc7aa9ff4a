"""Experiment configuration models.

This module defines the validated form of an experiment config file. Each
bracketed section of the file maps to one nested model, so a validation
error can be traced back to its section and key. Keys missing from the
file take their values from Settings.
"""

from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from Broker.models.distribution_models import DemandDistribution, DistributionKind, RandomUserModel
from Broker.models.market_models import DemandEnvironment, MarketParams, RiskScheme
from Broker.models.simulation_models import EpsMode, PolicyKind, SimConfig


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class MarketSection(MarketParams):
    """[market] r, s, w, c, u_min."""
    model_config = ConfigDict(extra="forbid", frozen=True)


class DistributionSection(_Section):
    """[xi] / [eps]: one demand distribution.

    Attributes:
        kind: Distribution family.
        mean: Mean of a truncated normal, or location of a point mass.
        variance: Variance of a truncated normal.
        dof: Chi-square degrees of freedom.
        scale: Chi-square scale.
        lo: Truncation lower bound (optional).
        hi: Truncation upper bound (optional).
        csv: Path of an x,cdf table for the empirical-grid kind.
    """
    kind: DistributionKind = DistributionKind.TRUNCATED_NORMAL
    mean: Optional[float] = None
    variance: Optional[float] = Field(None, gt=0)
    dof: Optional[float] = Field(None, gt=0)
    scale: float = Field(1.0, gt=0)
    lo: Optional[float] = None
    hi: Optional[float] = None
    csv: Optional[str] = None

    @model_validator(mode="after")
    def _check_buildable(self) -> "DistributionSection":
        self.build()
        return self

    def build(self) -> DemandDistribution:
        if self.kind is DistributionKind.TRUNCATED_NORMAL:
            if self.mean is None or self.variance is None:
                raise ValueError("truncated-normal needs mean and variance")
            return DemandDistribution.truncated_normal(self.mean, self.variance, self.lo, self.hi)
        if self.kind is DistributionKind.CHI_SQUARE:
            if self.dof is None:
                raise ValueError("chi-square needs dof")
            return DemandDistribution.chi_square(self.dof, self.scale)
        if self.kind is DistributionKind.POINT_MASS:
            if self.mean is None:
                raise ValueError("point-mass needs mean")
            return DemandDistribution.point_mass(self.mean)
        if self.csv is None:
            raise ValueError("empirical-grid needs csv")
        from Broker.services.storage_service import load_distribution_csv

        return load_distribution_csv(self.csv)


class SweepSection(_Section):
    """[sweep] ranges of the reservation, wholesale-price and variance sweeps."""
    xi_points: int = Field(200, ge=2)
    w_start: float = Field(0.3, gt=0)
    w_stop: float = Field(0.7, gt=0)
    w_step: float = Field(0.02, gt=0)
    variance_start: float = Field(16.0, gt=0)
    variance_stop: float = Field(100.0, gt=0)
    variance_step: float = Field(4.0, gt=0)
    variance_values: Optional[List[float]] = None
    grid_size: int = Field(200, ge=2)

    @field_validator("variance_values", mode="before")
    @classmethod
    def _listify(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [value]
        return value

    @model_validator(mode="after")
    def _check_ranges(self) -> "SweepSection":
        if self.w_stop < self.w_start:
            raise ValueError("w_stop must be >= w_start")
        if self.variance_stop < self.variance_start:
            raise ValueError("variance_stop must be >= variance_start")
        return self

    @property
    def w_values(self) -> np.ndarray:
        count = int(round((self.w_stop - self.w_start) / self.w_step)) + 1
        return np.round(self.w_start + self.w_step * np.arange(count), 12)

    @property
    def variances(self) -> np.ndarray:
        if self.variance_values:
            return np.asarray(self.variance_values, dtype=float)
        count = int(round((self.variance_stop - self.variance_start) / self.variance_step)) + 1
        return np.round(self.variance_start + self.variance_step * np.arange(count), 12)


class SimulationSection(_Section):
    """[simulation] run length, policy and optional random-user physics."""
    periods: int = Field(2000, ge=1)
    accesses: int = Field(50, ge=1)
    scheme: RiskScheme = RiskScheme.DB_BEARING_RISK
    policy: PolicyKind = PolicyKind.DB_ASYM
    fixed_k: Optional[float] = Field(None, ge=0)
    eps_mode: EpsMode = EpsMode.DISTRIBUTION
    beta: Optional[float] = Field(None, gt=0)
    power: Optional[float] = Field(None, gt=0)
    noise: Optional[float] = Field(None, gt=0)
    user_count: Optional[int] = Field(None, gt=0)
    workers: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check_policy(self) -> "SimulationSection":
        if self.policy is PolicyKind.FIXED_K and self.fixed_k is None:
            raise ValueError("policy fixed-k needs fixed_k")
        if self.eps_mode is EpsMode.RANDOM_USERS and None in (self.beta, self.power, self.noise, self.user_count):
            raise ValueError("eps_mode random-users needs beta, power, noise and user_count")
        return self


class FleetSection(_Section):
    """[fleet] the pooled-reservation scenario."""
    c_ex: float = Field(0.4, gt=0)
    xi_mean: float = Field(9.0, gt=0)
    xi_variance: float = Field(3.0, gt=0)
    eps_dof: float = Field(10.0, gt=0)
    max_size: int = Field(12, ge=1)
    mode: Literal["mean", "sampled", "csv"] = "mean"
    csv: Optional[str] = None

    @model_validator(mode="after")
    def _check_source(self) -> "FleetSection":
        if self.mode == "csv" and not self.csv:
            raise ValueError("fleet mode csv needs csv")
        return self


class OutputSection(_Section):
    """[output] seed and CSV number format."""
    seed: int = 20240601
    float_format: str = "%.9g"


class ExperimentConfig(BaseModel):
    """A validated experiment.

    Attributes:
        market: Prices and u_min.
        xi: Scheduled demand distribution.
        eps: Bursty demand distribution.
        sweep: Sweep ranges.
        simulation: Simulation run settings.
        fleet: Fleet scenario.
        output: Seed and number format.
    """

    model_config = ConfigDict(frozen=True)

    market: MarketSection
    xi: DistributionSection
    eps: DistributionSection
    sweep: SweepSection = SweepSection()
    simulation: SimulationSection = SimulationSection()
    fleet: FleetSection = FleetSection()
    output: OutputSection = OutputSection()

    @model_validator(mode="after")
    def _check_environment(self) -> "ExperimentConfig":
        DemandEnvironment(xi_dist=self.xi.build(), eps_dist=self.eps.build())
        if not self.fleet.c_ex > self.market.c:
            raise ValueError(f"fleet c_ex={self.fleet.c_ex} must exceed c={self.market.c}")
        return self

    @classmethod
    def from_sections(cls, raw: Dict[str, Dict[str, Any]], settings) -> "ExperimentConfig":
        """Validate raw section dictionaries on top of the Settings defaults."""
        defaults: Dict[str, Dict[str, Any]] = {
            "market": {"r": settings.r, "s": settings.s, "w": settings.w, "c": settings.c, "u_min": settings.u_min},
            "xi": {"kind": "truncated-normal", "mean": settings.xi_mean, "variance": settings.xi_variance},
            "eps": {"kind": "chi-square", "dof": settings.eps_dof},
            "sweep": {"grid_size": settings.grid_size},
            "simulation": {"workers": settings.workers},
            "fleet": {
                "c_ex": settings.c_ex,
                "xi_mean": settings.fleet_xi_mean,
                "xi_variance": settings.fleet_xi_variance,
                "eps_dof": settings.fleet_eps_dof,
                "max_size": settings.fleet_max_size,
            },
            "output": {"seed": settings.seed, "float_format": settings.csv_float_format},
        }
        merged = {name: {**section, **raw.get(name, {})} for name, section in defaults.items()}
        return cls.model_validate(merged)

    # Derived objects

    @property
    def params(self) -> MarketParams:
        return MarketParams(**self.market.model_dump())

    @property
    def xi_dist(self) -> DemandDistribution:
        return self.xi.build()

    @property
    def eps_dist(self) -> DemandDistribution:
        return self.eps.build()

    @property
    def xi_values(self) -> np.ndarray:
        """Nodes of the reservation sweep across the ξ support."""
        lo, hi = self.xi_dist.numeric_support
        return np.linspace(lo, hi, self.sweep.xi_points)

    @property
    def random_user_model(self) -> Optional[RandomUserModel]:
        sim = self.simulation
        if sim.eps_mode is not EpsMode.RANDOM_USERS:
            return None
        return RandomUserModel(
            beta=sim.beta, s=self.market.s, power=sim.power, noise=sim.noise, user_count=sim.user_count
        )

    def sim_config(self) -> SimConfig:
        sim = self.simulation
        return SimConfig(
            n_reservation_periods=sim.periods,
            accesses_per_period=sim.accesses,
            seed=self.output.seed,
            scheme=sim.scheme,
            policy=sim.policy,
            fixed_k=sim.fixed_k,
            eps_mode=sim.eps_mode,
            random_users=self.random_user_model,
            workers=sim.workers,
        )
