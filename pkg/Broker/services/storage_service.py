"""Storage service for CSV tables.

This module reads and writes every file the toolkit exchanges with the
outside world: contract menus (``xi,k,p`` plus a ``key=value`` sidecar),
empirical-grid distributions (``x,cdf``), fleet scenarios (``wsd_id,xi``)
and the result tables of the sub-commands.
"""

import logging
import sys
from pathlib import Path
from typing import Dict, List, Mapping, Optional, TextIO, Union

import numpy as np
import pandas as pd

from Broker.config import get_settings
from Broker.models.contract_models import ContractMenu
from Broker.models.distribution_models import DemandDistribution, DistributionKind
from Broker.models.market_models import RiskScheme

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _read_csv(path: PathLike, columns: List[str]) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        logger.error(f"Cannot read {path}: {e}")
        raise ValueError(f"cannot read {path}: {e}") from e
    missing = [name for name in columns if name not in frame.columns]
    if missing:
        raise ValueError(f"{path}: missing column(s) {', '.join(missing)}")
    return frame


class StorageService:
    """CSV persistence for menus, distributions, fleets and result tables."""

    @staticmethod
    def sidecar_path(path: PathLike) -> Path:
        """Metadata file stored next to a menu CSV."""
        return Path(path).with_suffix(".meta")

    @staticmethod
    def write_table(frame: pd.DataFrame, out: Optional[Union[PathLike, TextIO]] = None,
                    float_format: Optional[str] = None) -> None:
        """Write a result table as CSV to a path, or to stdout when out is None."""
        float_format = float_format or get_settings().csv_float_format
        target = sys.stdout if out is None else out
        frame.to_csv(target, index=False, float_format=float_format, lineterminator="\n")
        if out is not None and not hasattr(out, "write"):
            logger.info(f"Wrote {len(frame)} rows to {out}")

    @staticmethod
    def save_menu(menu: ContractMenu, path: PathLike, metadata: Optional[Mapping[str, object]] = None,
                  float_format: Optional[str] = None) -> Path:
        """Write a menu as xi,k,p and its key=value sidecar.

        Args:
            menu: Menu to save.
            path: CSV path; the sidecar goes to the same path with suffix .meta.
            metadata: Extra sidecar entries (prices, distribution parameters).
            float_format: printf format for floats.

        Returns:
            The sidecar path.
        """
        frame = pd.DataFrame({"xi": menu.xi, "k": menu.k, "p": menu.p})
        StorageService.write_table(frame, path, float_format)

        entries: Dict[str, object] = {"scheme": menu.scheme.value, "u_min": menu.u_min, "items": len(menu)}
        entries.update(metadata or {})
        sidecar = StorageService.sidecar_path(path)
        sidecar.write_text("".join(f"{key}={value}\n" for key, value in entries.items()))
        return sidecar

    @staticmethod
    def read_metadata(path: PathLike) -> Dict[str, str]:
        """Parse a key=value sidecar."""
        entries: Dict[str, str] = {}
        for line in Path(path).read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}: malformed metadata line: {line}")
            entries[key.strip()] = value.strip()
        return entries

    @staticmethod
    def load_menu(path: PathLike) -> ContractMenu:
        """Read a menu saved by save_menu.

        Args:
            path: CSV path with xi,k,p columns; the .meta sidecar must exist.

        Returns:
            The validated ContractMenu.

        Example:
            >>> menu = StorageService.load_menu("menu_db.csv")
            >>> menu.scheme

        Raises:
            ValueError: On a missing sidecar, missing columns or an invalid menu.
        """
        frame = _read_csv(path, ["xi", "k", "p"])
        sidecar = StorageService.sidecar_path(path)
        if not sidecar.exists():
            raise ValueError(f"menu sidecar {sidecar} not found")
        meta = StorageService.read_metadata(sidecar)
        return ContractMenu(
            scheme=RiskScheme(meta["scheme"]),
            xi_grid=tuple(frame["xi"].astype(float)),
            k_values=tuple(frame["k"].astype(float)),
            p_values=tuple(frame["p"].astype(float)),
            u_min=float(meta.get("u_min", 0.0)),
        )

    @staticmethod
    def save_distribution(dist: DemandDistribution, path: PathLike) -> None:
        """Write an empirical-grid distribution as x,cdf."""
        if dist.kind is not DistributionKind.EMPIRICAL_GRID:
            raise ValueError("only empirical-grid distributions are stored as x,cdf tables")
        frame = pd.DataFrame({"x": dist.grid_x, "cdf": dist.grid_cdf})
        StorageService.write_table(frame, path, "%.17g")

    @staticmethod
    def load_distribution(path: PathLike) -> DemandDistribution:
        """Read an x,cdf table as an empirical-grid distribution.

        Raises:
            ValueError: If x is not strictly increasing or cdf is not a
                nondecreasing map from 0 to 1.
        """
        frame = _read_csv(path, ["x", "cdf"])
        x = frame["x"].to_numpy(dtype=float)
        cdf = frame["cdf"].to_numpy(dtype=float)
        if np.any(np.diff(cdf) < 0):
            raise ValueError(f"{path}: cdf column is not monotone")
        dist = DemandDistribution.empirical_grid(x, cdf)
        logger.info(f"Loaded empirical distribution with {len(x)} nodes from {path}")
        return dist

    @staticmethod
    def load_fleet(path: PathLike) -> List[float]:
        """Read a wsd_id,xi fleet table, ordered by wsd_id."""
        frame = _read_csv(path, ["wsd_id", "xi"])
        if frame["wsd_id"].duplicated().any():
            raise ValueError(f"{path}: duplicate wsd_id")
        return frame.sort_values("wsd_id")["xi"].astype(float).tolist()


# Global service instance for backward compatibility
_service_instance = StorageService()


def write_table(frame: pd.DataFrame, out=None, float_format: Optional[str] = None) -> None:
    """Legacy function wrapper for result tables."""
    _service_instance.write_table(frame, out, float_format)


def save_menu_csv(menu: ContractMenu, path: PathLike, metadata: Optional[Mapping[str, object]] = None,
                  float_format: Optional[str] = None) -> Path:
    """Legacy function wrapper for saving a menu."""
    return _service_instance.save_menu(menu, path, metadata, float_format)


def load_menu_csv(path: PathLike) -> ContractMenu:
    """Legacy function wrapper for loading a menu."""
    return _service_instance.load_menu(path)


def save_distribution_csv(dist: DemandDistribution, path: PathLike) -> None:
    """Legacy function wrapper for saving an empirical distribution."""
    _service_instance.save_distribution(dist, path)


def load_distribution_csv(path: PathLike) -> DemandDistribution:
    """Legacy function wrapper for loading an empirical distribution."""
    return _service_instance.load_distribution(path)


def load_fleet_csv(path: PathLike) -> List[float]:
    """Legacy function wrapper for loading a fleet."""
    return _service_instance.load_fleet(path)
