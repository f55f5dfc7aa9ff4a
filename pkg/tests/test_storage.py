"""Tests for CSV persistence of menus, distributions and fleets."""

import numpy as np
import pandas as pd
import pytest

from Broker.models.contract_models import ContractMenu
from Broker.models.distribution_models import DemandDistribution
from Broker.models.market_models import RiskScheme
from Broker.services import storage_service
from Broker.services.storage_service import StorageService


@pytest.fixture
def small_menu() -> ContractMenu:
    """A three-item menu."""
    return ContractMenu(
        scheme=RiskScheme.WSD_BEARING_RISK,
        xi_grid=(1.0, 2.0, 3.0),
        k_values=(4.0, 5.5, 7.25),
        p_values=(0.0, 0.125, 0.5),
        u_min=0.25,
    )


class TestMenuFiles:
    """Test suite for menu CSV files and their sidecars."""

    def test_save_and_load(self, tmp_path, small_menu):
        """Test a saved menu loads back with its scheme and u_min."""
        path = tmp_path / "menu.csv"
        sidecar = storage_service.save_menu_csv(small_menu, path, {"w": 0.5})
        assert sidecar == tmp_path / "menu.meta"
        assert path.read_text().splitlines()[0] == "xi,k,p"

        loaded = storage_service.load_menu_csv(path)
        assert loaded.scheme is RiskScheme.WSD_BEARING_RISK
        assert loaded.u_min == 0.25
        np.testing.assert_allclose(loaded.k, small_menu.k)
        np.testing.assert_allclose(loaded.p, small_menu.p)

    def test_sidecar_entries(self, tmp_path, small_menu):
        """Test the sidecar carries the scheme, item count and extra metadata."""
        path = tmp_path / "menu.csv"
        storage_service.save_menu_csv(small_menu, path, {"w": 0.5})
        meta = StorageService.read_metadata(StorageService.sidecar_path(path))
        assert meta == {"scheme": "wsd-bearing-risk", "u_min": "0.25", "items": "3", "w": "0.5"}

    def test_missing_sidecar(self, tmp_path, small_menu):
        """Test a menu without its sidecar is rejected."""
        path = tmp_path / "menu.csv"
        storage_service.save_menu_csv(small_menu, path)
        StorageService.sidecar_path(path).unlink()
        with pytest.raises(ValueError, match="sidecar"):
            storage_service.load_menu_csv(path)

    def test_malformed_sidecar(self, tmp_path, small_menu):
        """Test a sidecar line without '=' is rejected."""
        path = tmp_path / "menu.csv"
        storage_service.save_menu_csv(small_menu, path)
        StorageService.sidecar_path(path).write_text("scheme wsd-bearing-risk\n")
        with pytest.raises(ValueError):
            storage_service.load_menu_csv(path)

    def test_missing_column(self, tmp_path):
        """Test a menu table without p is rejected."""
        path = tmp_path / "menu.csv"
        path.write_text("xi,k\n1,2\n")
        with pytest.raises(ValueError, match="missing column"):
            storage_service.load_menu_csv(path)

    def test_missing_file(self, tmp_path):
        """Test a nonexistent menu file is reported as a ValueError."""
        with pytest.raises(ValueError):
            storage_service.load_menu_csv(tmp_path / "absent.csv")


class TestDistributionFiles:
    """Test suite for x,cdf distribution tables."""

    def test_save_and_load(self, tmp_path):
        """Test an empirical grid is stored at full precision."""
        dist = DemandDistribution.empirical_grid([0.0, 1.0 / 3.0, 2.0], [0.0, 0.4, 1.0])
        path = tmp_path / "dist.csv"
        storage_service.save_distribution_csv(dist, path)
        loaded = storage_service.load_distribution_csv(path)
        assert loaded.grid_x == dist.grid_x
        assert loaded.grid_cdf == dist.grid_cdf

    def test_only_empirical_grids_saved(self, tmp_path):
        """Test parametric distributions are not written as tables."""
        with pytest.raises(ValueError):
            storage_service.save_distribution_csv(DemandDistribution.chi_square(30), tmp_path / "dist.csv")

    def test_non_monotone_cdf(self, tmp_path):
        """Test a decreasing cdf column is rejected."""
        path = tmp_path / "dist.csv"
        path.write_text("x,cdf\n0,0\n1,0.7\n2,0.5\n3,1\n")
        with pytest.raises(ValueError, match="monotone"):
            storage_service.load_distribution_csv(path)


class TestFleetFiles:
    """Test suite for wsd_id,xi fleet tables."""

    def test_sorted_by_id(self, tmp_path):
        """Test demands come back ordered by wsd_id."""
        path = tmp_path / "fleet.csv"
        path.write_text("wsd_id,xi\n3,9.5\n1,8.0\n2,10.25\n")
        assert storage_service.load_fleet_csv(path) == [8.0, 10.25, 9.5]

    def test_duplicate_id(self, tmp_path):
        """Test duplicate wsd_id values are rejected."""
        path = tmp_path / "fleet.csv"
        path.write_text("wsd_id,xi\n1,9.5\n1,8.0\n")
        with pytest.raises(ValueError, match="duplicate"):
            storage_service.load_fleet_csv(path)

    def test_missing_column(self, tmp_path):
        """Test a fleet table without xi is rejected."""
        path = tmp_path / "fleet.csv"
        path.write_text("wsd_id,demand\n1,9.5\n")
        with pytest.raises(ValueError):
            storage_service.load_fleet_csv(path)


class TestWriteTable:
    """Test suite for result tables."""

    def test_stdout(self, capsys):
        """Test a table without a target goes to stdout with the float format."""
        storage_service.write_table(pd.DataFrame({"w": [0.5], "profit": [1.0 / 3.0]}), float_format="%.4g")
        assert capsys.readouterr().out == "w,profit\n0.5,0.3333\n"

    def test_file(self, tmp_path):
        """Test a table written to a path uses Unix line endings."""
        path = tmp_path / "table.csv"
        storage_service.write_table(pd.DataFrame({"a": [1, 2]}), path)
        assert path.read_bytes() == b"a\n1\n2\n"
