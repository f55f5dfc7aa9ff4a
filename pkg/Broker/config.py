"""Application configuration settings.

This module provides configuration management using Pydantic Settings.
Settings are loaded from environment variables (prefix ``BROKER_``) or a
.env file, and hold every numeric knob of the solvers plus the default
market scenario. Experiment files (bracket-sectioned ``key = value`` text)
are parsed here as well and validated into an ``ExperimentConfig``.

Typical usage example:
    from Broker.config import get_settings
    settings = get_settings()
    print(settings.grid_size)
"""

import configparser
import logging
import re
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from Broker.errors import ConfigValidationError

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """Toolkit settings loaded from environment variables.

    Attributes:
        app_name: The application name.
        log_level: Logging level (debug, info, warning, error).
        grid_size: Number of uniform ξ nodes in a contract menu.
        quadrature_nodes: Gauss-Legendre nodes for expectations over ξ.
        convolution_points: Grid points of a convolved distribution.
        scan_points: Coarse scan intervals used to bracket FOC roots.
        root_tol: Bisection stopping width.
        tail_probability: Upper-tail mass cut off unbounded supports.
        truncation_sigmas: Half-width of the default normal truncation.
        density_floor: Smallest density/survival accepted in ratios.
        quadrature_abs_tol: Absolute tolerance of adaptive quadrature.
        ic_tolerance_factor: IC tolerance as a fraction of r * ξ̄.
        r: Subscriber price per unit bandwidth.
        s: Random-user price per unit bandwidth.
        w: Wholesale price per unit bandwidth.
        c: Reservation cost per unit bandwidth.
        u_min: WSD minimum acceptance profit.
        xi_mean: Default scheduled-demand mean.
        xi_variance: Default scheduled-demand variance.
        eps_dof: Default bursty-demand chi-square degrees of freedom.
        fleet_xi_mean: Per-WSD scheduled-demand mean of the fleet scenario.
        fleet_xi_variance: Per-WSD scheduled-demand variance of the fleet scenario.
        fleet_eps_dof: Per-WSD bursty-demand degrees of freedom of the fleet scenario.
        fleet_max_size: Largest fleet in the aggregate sweep.
        c_ex: Replenishment cost per unit bandwidth.
        seed: Default random seed.
        workers: Parallel workers for sweeps and simulation (1 = in-process).
        csv_float_format: printf format for floats in emitted CSV.
    """

    # Application Settings
    app_name: str = "Broker Spectrum Reservation Toolkit"
    log_level: str = "info"

    # Solver Configuration
    grid_size: int = 200
    quadrature_nodes: int = 256
    convolution_points: int = 4096
    scan_points: int = 512
    root_tol: float = 1e-9
    tail_probability: float = 1e-10
    truncation_sigmas: float = 4.0
    density_floor: float = 1e-12
    quadrature_abs_tol: float = 1e-8
    ic_tolerance_factor: float = 1e-6

    # Market Defaults
    r: float = 1.0
    s: float = 0.8
    w: float = 0.5
    c: float = 0.2
    u_min: float = 0.0
    xi_mean: float = 30.0
    xi_variance: float = 64.0
    eps_dof: float = 30.0

    # Fleet Defaults
    fleet_xi_mean: float = 9.0
    fleet_xi_variance: float = 3.0
    fleet_eps_dof: float = 10.0
    fleet_max_size: int = 12
    c_ex: float = 0.4

    # Runner Configuration
    seed: int = 20240601
    workers: int = 1
    csv_float_format: str = "%.9g"

    model_config = SettingsConfigDict(
        env_prefix="BROKER_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",  # Allow extra fields in .env without raising errors
    )


@lru_cache()
def get_settings() -> Settings:
    """Get cached toolkit settings.

    Returns:
        Settings object containing all configuration.

    Example:
        >>> settings = get_settings()
        >>> settings.grid_size
        200
    """
    return Settings()


# Experiment files

SECTIONS = ("market", "xi", "eps", "sweep", "simulation", "fleet", "output")


def _line_index(text: str) -> Dict[tuple, int]:
    """Map (section, key) to the 1-based line where the key is set."""
    index: Dict[tuple, int] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        header = re.match(r"^\[([^\]]+)\]$", line)
        if header:
            section = header.group(1).strip().lower()
            continue
        match = re.match(r"^([A-Za-z0-9_\-]+)\s*[=:]", line)
        if match and section:
            index[(section, match.group(1).lower())] = lineno
    return index


def _parse_value(value: str) -> Any:
    value = value.strip()
    if "," in value:
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


def load_experiment_config(path: Optional[Union[str, Path]] = None, seed: Optional[int] = None):
    """Load and validate an experiment config file.

    Args:
        path: Config file path. None yields the defaults from Settings.
        seed: Optional seed override (the ``--seed`` flag).

    Returns:
        A validated ExperimentConfig.

    Raises:
        ConfigValidationError: With one diagnostic per offending field.
    """
    from Broker.models.experiment_models import ExperimentConfig

    raw: Dict[str, Dict[str, Any]] = {}
    index: Dict[tuple, int] = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as e:
            raise ConfigValidationError([f"{path}: cannot read config file ({e})"])

        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
        try:
            parser.read_string(text, source=str(path))
        except configparser.Error as e:
            raise ConfigValidationError([f"{path}: {e}"])

        unknown = [name for name in parser.sections() if name.lower() not in SECTIONS]
        if unknown:
            raise ConfigValidationError([f"[{name}]: unknown section" for name in unknown])

        raw = {name.lower(): {k: _parse_value(v) for k, v in parser.items(name)} for name in parser.sections()}
        index = _line_index(text)
        logger.info(f"Loaded experiment config from {path}")

    if seed is not None:
        raw.setdefault("output", {})["seed"] = seed

    try:
        return ExperimentConfig.from_sections(raw, get_settings())
    except ValidationError as e:
        diagnostics: List[str] = []
        for error in e.errors():
            loc = [str(part) for part in error["loc"]]
            section = loc[0] if loc else "config"
            key = loc[1] if len(loc) > 1 else ""
            line = index.get((section, key))
            where = f"{section}.{key}" if key else section
            suffix = f" (line {line})" if line else ""
            diagnostics.append(f"{where}{suffix}: {error['msg']}")
        raise ConfigValidationError(diagnostics)
