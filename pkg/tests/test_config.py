"""Tests for settings and experiment config files."""

import pytest

from Broker.config import Settings, load_experiment_config
from Broker.errors import ConfigValidationError
from Broker.models.distribution_models import DistributionKind
from Broker.models.market_models import RiskScheme
from Broker.models.simulation_models import EpsMode, PolicyKind


class TestSettings:
    """Test suite for environment-driven settings."""

    def test_defaults(self):
        """Test the default solver knobs and market scenario."""
        settings = Settings(_env_file=None)
        assert settings.grid_size == 200
        assert settings.quadrature_nodes == 256
        assert settings.root_tol == 1e-9
        assert (settings.r, settings.s, settings.w, settings.c) == (1.0, 0.8, 0.5, 0.2)
        assert settings.csv_float_format == "%.9g"

    def test_environment_override(self, monkeypatch):
        """Test BROKER_-prefixed variables override defaults."""
        monkeypatch.setenv("BROKER_GRID_SIZE", "50")
        monkeypatch.setenv("BROKER_WORKERS", "3")
        settings = Settings(_env_file=None)
        assert settings.grid_size == 50
        assert settings.workers == 3


class TestLoadExperimentConfig:
    """Test suite for experiment config parsing and validation."""

    def test_defaults_without_file(self):
        """Test no file yields the default scenario."""
        config = load_experiment_config(None)
        assert config.params.w == 0.5
        assert config.xi_dist.kind is DistributionKind.TRUNCATED_NORMAL
        assert config.xi_dist.mu == 30.0
        assert config.eps_dist.kind is DistributionKind.CHI_SQUARE
        assert config.eps_dist.dof == 30.0
        assert config.fleet.c_ex == 0.4

    def test_market_override(self, write_config):
        """Test a [market] key overrides the default."""
        config = load_experiment_config(write_config("[market]\nw = 0.45\n"))
        assert config.params.w == 0.45
        assert config.params.s == 0.8

    def test_price_ordering_violation(self, write_config):
        """Test w > s is reported against the market section."""
        with pytest.raises(ConfigValidationError) as info:
            load_experiment_config(write_config("[market]\nw = 0.9\n"))
        assert any(line.startswith("market") for line in info.value.diagnostics)

    def test_unknown_key_reports_line(self, write_config):
        """Test an unknown key is reported with its section and line."""
        with pytest.raises(ConfigValidationError) as info:
            load_experiment_config(write_config("[market]\nfoo = 1\n"))
        assert info.value.diagnostics[0].startswith("market.foo (line 2)")

    def test_invalid_value_reports_line(self, write_config):
        """Test a value of the wrong type is reported with its line."""
        with pytest.raises(ConfigValidationError) as info:
            load_experiment_config(write_config("# prices\n[market]\nr = 1.0\nc = cheap\n"))
        assert info.value.diagnostics[0].startswith("market.c (line 4)")

    def test_unknown_section(self, write_config):
        """Test an unknown section is rejected."""
        with pytest.raises(ConfigValidationError) as info:
            load_experiment_config(write_config("[prices]\nw = 0.5\n"))
        assert info.value.diagnostics == ["[prices]: unknown section"]

    def test_cross_section_check(self, write_config):
        """Test c_ex <= c is reported at the config level."""
        with pytest.raises(ConfigValidationError) as info:
            load_experiment_config(write_config("[fleet]\nc_ex = 0.1\n"))
        assert info.value.diagnostics[0].startswith("config:")

    def test_missing_file(self, tmp_path):
        """Test an unreadable file is a config error."""
        with pytest.raises(ConfigValidationError) as info:
            load_experiment_config(tmp_path / "absent.ini")
        assert "cannot read config file" in info.value.diagnostics[0]

    def test_seed_override(self, write_config):
        """Test the seed argument wins over the file."""
        config = load_experiment_config(write_config("[output]\nseed = 5\n"), seed=99)
        assert config.output.seed == 99
        assert config.sim_config().seed == 99

    def test_variance_list_and_float_format(self, write_config):
        """Test comma lists and percent signs survive parsing."""
        path = write_config("[sweep]\nvariance_values = 4, 16, 64\n\n[output]\nfloat_format = %.6g\n")
        config = load_experiment_config(path)
        assert list(config.sweep.variances) == [4.0, 16.0, 64.0]
        assert config.output.float_format == "%.6g"

    def test_wholesale_range(self, write_config):
        """Test the wholesale sweep expands to an inclusive grid."""
        config = load_experiment_config(write_config("[sweep]\nw_start = 0.3\nw_stop = 0.7\nw_step = 0.1\n"))
        assert list(config.sweep.w_values) == [0.3, 0.4, 0.5, 0.6, 0.7]

    def test_non_ifr_xi_rejected(self, write_config, tmp_path):
        """Test a scheduled demand with a decreasing hazard rate is rejected."""
        table = tmp_path / "xi.csv"
        table.write_text("x,cdf\n0,0\n1,0.8\n2,0.85\n3,1\n")
        with pytest.raises(ConfigValidationError):
            load_experiment_config(write_config(f"[xi]\nkind = empirical-grid\ncsv = {table}\n"))

    def test_empirical_bursty_demand(self, write_config, tmp_path):
        """Test [eps] can load an x,cdf table."""
        table = tmp_path / "eps.csv"
        table.write_text("x,cdf\n0,0\n1,0.1\n2,0.3\n3,0.6\n4,1\n")
        config = load_experiment_config(write_config(f"[eps]\nkind = empirical-grid\ncsv = {table}\n"))
        assert config.eps_dist.kind is DistributionKind.EMPIRICAL_GRID
        assert config.eps_dist.cdf(2.0) == pytest.approx(0.3)

    def test_simulation_section(self, write_config):
        """Test the simulation section feeds the run configuration."""
        path = write_config(
            "[simulation]\nperiods = 20\naccesses = 10\nscheme = wsd-bearing-risk\npolicy = fixed-k\nfixed_k = 35\n"
        )
        sim = load_experiment_config(path).sim_config()
        assert sim.n_reservation_periods == 20
        assert sim.scheme is RiskScheme.WSD_BEARING_RISK
        assert sim.policy is PolicyKind.FIXED_K
        assert sim.fixed_k == 35.0

    def test_random_user_section(self, write_config):
        """Test random-user physics builds a user model priced at the market s."""
        path = write_config(
            "[simulation]\neps_mode = random-users\nbeta = 1\npower = 18\nnoise = 1\nuser_count = 10\n"
        )
        sim = load_experiment_config(path).sim_config()
        assert sim.eps_mode is EpsMode.RANDOM_USERS
        assert sim.random_users.s == 0.8
        assert sim.random_users.user_count == 10

    def test_random_user_section_incomplete(self, write_config):
        """Test random-user mode without its physics is rejected."""
        with pytest.raises(ConfigValidationError) as info:
            load_experiment_config(write_config("[simulation]\neps_mode = random-users\n"))
        assert info.value.diagnostics[0].startswith("simulation")
