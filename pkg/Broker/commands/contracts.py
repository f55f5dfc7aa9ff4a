"""Contract dump command.

Builds the optimal menu of both risk schemes and tabulates each item with
its marginal price dP/dK and the equivalent wholesale price.
"""

import logging
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from Broker.models.experiment_models import ExperimentConfig
from Broker.models.market_models import RiskScheme
from Broker.services import contract_service
from Broker.services.storage_service import save_menu_csv

logger = logging.getLogger(__name__)


def cmd_contract_dump(config: ExperimentConfig, menu_prefix: Optional[Path] = None) -> pd.DataFrame:
    """Both optimal menus in one table.

    Args:
        config: Validated experiment.
        menu_prefix: If given, each menu is also saved as
            ``<prefix>.<scheme>.csv`` with its sidecar.

    Returns:
        DataFrame with columns scheme, xi, k, p, marginal_price, equivalent_w.
    """
    params, xi_dist, eps_dist = config.params, config.xi_dist, config.eps_dist
    frames = []
    for scheme in RiskScheme:
        menu = contract_service.build_contract(scheme, params, xi_dist, eps_dist, config.sweep.grid_size)

        collapsed = contract_service.collapse_duplicate_items(menu)
        if len(collapsed) >= 3:
            curve = np.asarray(contract_service.marginal_price_curve(collapsed))
            marginal = np.interp(menu.k, curve[:, 0], curve[:, 1])
        else:
            marginal = np.full(len(menu), np.nan)

        frames.append(pd.DataFrame({
            "scheme": scheme.value,
            "xi": menu.xi,
            "k": menu.k,
            "p": menu.p,
            "marginal_price": marginal,
            "equivalent_w": contract_service.equivalent_wholesale_price(menu, params, eps_dist),
        }))

        if menu_prefix is not None:
            path = Path(f"{menu_prefix}.{scheme.value}.csv")
            save_menu_csv(menu, path, metadata={
                "r": params.r, "s": params.s, "w": params.w, "c": params.c,
                "xi_kind": xi_dist.kind.value, "xi_mean": xi_dist.mean(), "xi_variance": xi_dist.var(),
                "eps_kind": eps_dist.kind.value, "eps_mean": eps_dist.mean(), "eps_variance": eps_dist.var(),
            }, float_format=config.output.float_format)
            logger.info(f"Saved {scheme.value} menu to {path}")

    return pd.concat(frames, ignore_index=True)
