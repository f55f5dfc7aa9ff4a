"""Tests for the experiment sub-commands and the command-line entry point."""

import numpy as np
import pandas as pd
import pytest

import main
from Broker.commands.contracts import cmd_contract_dump
from Broker.commands.fleet import cmd_aggregate
from Broker.commands.reservation import PROFIT_COLUMNS, cmd_profit_sweep, cmd_reservation_sweep, cmd_variance_sweep
from Broker.commands.simulation import cmd_simulate
from Broker.config import load_experiment_config
from Broker.errors import SolverError

SWEEP = "[sweep]\nw_start = 0.3\nw_stop = 0.7\nw_step = 0.1\ngrid_size = 100\n"


class TestReservationSweep:
    """Test suite for the reservation sweep."""

    def test_columns_and_ordering(self):
        """Test the sweep covers the support and orders the regimes at w = 0.5."""
        frame = cmd_reservation_sweep(load_experiment_config(None))
        assert list(frame.columns) == ["xi", "k_so", "k_db_sym", "k_db_asy", "k_wsd"]
        assert len(frame) == 200
        assert frame["xi"].iloc[0] == 0.0
        assert frame["xi"].iloc[-1] == pytest.approx(62.0)
        # w = 0.5 lies above the critical price 0.4, so the database reserves more
        assert np.all(frame["k_so"] >= frame["k_db_sym"])
        assert np.all(frame["k_db_sym"] >= frame["k_wsd"])
        assert frame["k_db_asy"].nunique() == 1


class TestProfitSweep:
    """Test suite for the wholesale-price sweep."""

    def test_rejects_prices_outside_range(self, write_config):
        """Test w outside [c, s] is rejected."""
        config = load_experiment_config(write_config("[sweep]\nw_start = 0.1\nw_stop = 0.5\n"))
        with pytest.raises(ValueError):
            cmd_profit_sweep(config)

    def test_rejects_unknown_party(self, write_config):
        """Test the profit selector must name a party."""
        config = load_experiment_config(write_config("[sweep]\nw_start = 0.5\nw_stop = 0.5\ngrid_size = 20\n"))
        with pytest.raises(ValueError):
            cmd_profit_sweep(config, "broker")

    @pytest.mark.slow
    def test_database_profit_dominance(self, write_config):
        """Test contract I >= contract II >= 0 and each contract beats its no-sharing regime."""
        frame = cmd_profit_sweep(load_experiment_config(write_config(SWEEP)), "db")
        assert list(frame.columns) == ["w"] + PROFIT_COLUMNS
        assert list(frame["w"]) == [0.3, 0.4, 0.5, 0.6, 0.7]
        assert np.all(frame["profit_s1_contract"] >= frame["profit_s2_contract"] - 1e-6)
        assert np.all(frame["profit_s2_contract"] >= 0.0)
        assert np.all(frame["profit_s1_contract"] >= frame["profit_s1_nosharing"] - 1e-6)
        assert np.all(frame["profit_s2_contract"] >= frame["profit_s2_nosharing"] - 1e-6)

    @pytest.mark.slow
    def test_network_profit_trends(self, write_config):
        """Test the centralized profit is flat while the no-sharing regimes move with w."""
        frame = cmd_profit_sweep(load_experiment_config(write_config(SWEEP)), "network")
        centralized = frame["profit_centralized"]
        assert (centralized.max() - centralized.min()) / centralized.mean() < 1e-9
        assert np.all(np.diff(frame["profit_s1_nosharing"]) > 0)
        assert np.all(np.diff(frame["profit_s2_nosharing"]) < 0)
        assert np.all(frame[PROFIT_COLUMNS[1:]].to_numpy() <= centralized.to_numpy()[:, None] + 1e-9)

    @pytest.mark.slow
    def test_contract_network_gain(self, write_config):
        """Test the DB-bearing-risk contract lifts network profit by three to seven percent at best."""
        frame = cmd_profit_sweep(load_experiment_config(write_config(SWEEP.replace("0.1", "0.02"))), "network")
        gain = (frame["profit_s1_contract"] - frame["profit_s1_nosharing"]) / frame["profit_s1_nosharing"]
        assert 0.03 <= gain.max() <= 0.07


class TestVarianceSweep:
    """Test suite for the scheduled-demand variance sweep."""

    def test_rejects_non_normal_scheduled_demand(self, write_config):
        """Test the sweep needs a truncated-normal scheduled demand."""
        config = load_experiment_config(write_config("[xi]\nkind = chi-square\ndof = 30\n"))
        with pytest.raises(ValueError):
            cmd_variance_sweep(config)

    @pytest.mark.slow
    def test_contract_profit_falls_with_variance(self, write_config):
        """Test both contract database profits fall as the variance grows."""
        config = load_experiment_config(write_config("[sweep]\nvariance_values = 16, 64, 100\ngrid_size = 100\n"))
        frame = cmd_variance_sweep(config, "db")
        assert list(frame["variance"]) == [16.0, 64.0, 100.0]
        assert np.all(np.diff(frame["profit_s1_contract"]) < 0)
        assert np.all(np.diff(frame["profit_s2_contract"]) < 0)
        assert np.all(frame["profit_s1_contract"] >= frame["profit_s2_contract"] - 1e-6)

    @pytest.mark.slow
    def test_contract_approaches_centralized_as_variance_vanishes(self, write_config):
        """Test the contract's network profit tends to the centralized one as the variance vanishes."""
        config = load_experiment_config(write_config("[sweep]\nvariance_values = 0.25, 4, 64\ngrid_size = 100\n"))
        frame = cmd_variance_sweep(config, "network")
        # No-sharing keeps its double-marginalized reservation even when ξ is
        # nearly known, so the limit checked is the centralized profit.
        loss = (frame["profit_centralized"] - frame["profit_s1_contract"]) / frame["profit_centralized"]
        assert np.all(np.diff(loss) > 0)
        assert np.all(loss >= -1e-9)
        assert loss.iloc[0] < 2e-3
        gap = (frame["profit_centralized"] - frame["profit_s1_nosharing"]) / frame["profit_centralized"]
        assert gap.iloc[0] > 3 * loss.iloc[0]


class TestContractDump:
    """Test suite for the contract dump."""

    def test_both_schemes(self, write_config, tmp_path):
        """Test the dump tabulates both menus and saves them when asked."""
        config = load_experiment_config(write_config("[sweep]\ngrid_size = 20\n"))
        frame = cmd_contract_dump(config, tmp_path / "menus")
        assert list(frame.columns) == ["scheme", "xi", "k", "p", "marginal_price", "equivalent_w"]
        assert frame.groupby("scheme").size().to_dict() == {"db-bearing-risk": 20, "wsd-bearing-risk": 20}

        one = frame[frame["scheme"] == "db-bearing-risk"]
        two = frame[frame["scheme"] == "wsd-bearing-risk"]
        assert np.all(np.diff(one["p"]) >= -1e-9)
        assert np.all(two["k"].to_numpy() <= one["k"].to_numpy() + 1e-6)
        for scheme in ("db-bearing-risk", "wsd-bearing-risk"):
            assert (tmp_path / f"menus.{scheme}.csv").exists()
            assert (tmp_path / f"menus.{scheme}.meta").exists()

    def test_fee_shapes(self, write_config):
        """Test the WSD-bearing-risk fee rises then falls and never exceeds the DB-bearing-risk fee at equal k."""
        frame = cmd_contract_dump(load_experiment_config(write_config("[sweep]\ngrid_size = 100\n")))
        one = frame[frame["scheme"] == "db-bearing-risk"]
        two = frame[frame["scheme"] == "wsd-bearing-risk"]

        p_two = two["p"].to_numpy()
        peak = int(np.argmax(p_two))
        assert 10 < peak < 90
        assert np.all(np.diff(p_two[:peak + 1]) >= -1e-6)
        assert np.all(np.diff(p_two[peak:]) <= 1e-6)
        assert p_two[-1] < p_two[peak] - 1.0

        k_one, p_one = one["k"].to_numpy(), one["p"].to_numpy()
        k_two = two["k"].to_numpy()
        shared = (k_one >= k_two[0]) & (k_one <= k_two[-1])
        gap = p_one[shared] - np.interp(k_one[shared], k_two, p_two)
        assert shared.sum() > 90
        assert np.all(gap >= -1e-2)
        assert gap[-1] > 1.0


class TestAggregateCommand:
    """Test suite for the fleet sweep."""

    def test_mean_fleets(self, write_config):
        """Test one row per fleet size with a nonnegative growing gain."""
        config = load_experiment_config(write_config("[fleet]\nmax_size = 4\n\n[sweep]\ngrid_size = 50\n"))
        summary, reservations = cmd_aggregate(config)
        assert list(summary.columns) == ["N", "profit_without", "profit_with", "gain_pct"]
        assert list(reservations.columns) == ["N", "TK", "OTK_star", "profit_gain"]
        assert list(summary["N"]) == [1, 2, 3, 4]
        assert np.all(reservations["profit_gain"] >= 0.0)
        assert np.all(np.diff(reservations["profit_gain"]) >= -1e-9)
        assert np.all(reservations["OTK_star"] <= reservations["TK"] + 1e-9)

    def test_fleet_from_csv(self, write_config, tmp_path):
        """Test a csv fleet yields a single row."""
        fleet = tmp_path / "fleet.csv"
        fleet.write_text("wsd_id,xi\n1,8.5\n2,9.5\n")
        config = load_experiment_config(write_config(f"[fleet]\nmode = csv\ncsv = {fleet}\n\n[sweep]\ngrid_size = 50\n"))
        summary, reservations = cmd_aggregate(config)
        assert list(summary["N"]) == [2]
        assert reservations["TK"].iloc[0] > 18.0


class TestSimulateCommand:
    """Test suite for the simulate command."""

    def test_report_and_trace(self, write_config):
        """Test the report rows and the optional trace."""
        config = load_experiment_config(write_config("[simulation]\nperiods = 20\naccesses = 10\n"))
        report, trace = cmd_simulate(config, trace=True)
        assert list(report["field"]) == ["db_profit", "wsd_profit", "network_profit"]
        assert list(report["n"]) == [200, 200, 200]
        assert len(trace) == 20
        _, none = cmd_simulate(config)
        assert none is None


class TestMain:
    """Test suite for the command-line entry point."""

    def test_reserve_sweep_to_file(self, tmp_path):
        """Test a successful run exits 0 and writes the header."""
        out = tmp_path / "reservations.csv"
        assert main.main(["reserve-sweep", "--out", str(out)]) == 0
        assert out.read_text().splitlines()[0] == "xi,k_so,k_db_sym,k_db_asy,k_wsd"

    def test_byte_identical_reruns(self, tmp_path):
        """Test rerunning a command reproduces the same bytes."""
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main.main(["reserve-sweep", "--out", str(first)]) == 0
        assert main.main(["reserve-sweep", "--out", str(second)]) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_invalid_config_exits_2(self, write_config, capsys):
        """Test a config error prints its diagnostics and exits 2."""
        path = write_config("[market]\nfoo = 1\n")
        assert main.main(["reserve-sweep", "--config", str(path)]) == 2
        assert "market.foo (line 2)" in capsys.readouterr().err

    def test_bad_sweep_exits_2(self, write_config, tmp_path):
        """Test an out-of-range wholesale sweep exits 2."""
        path = write_config("[sweep]\nw_start = 0.1\n")
        assert main.main(["profit-sweep", "--config", str(path), "--out", str(tmp_path / "p.csv")]) == 2

    def test_solver_failure_exits_3(self, monkeypatch):
        """Test a solver failure exits 3."""
        def fail(config):
            raise SolverError("no root", xi=1.0)

        monkeypatch.setattr(main, "cmd_reservation_sweep", fail)
        assert main.main(["reserve-sweep"]) == 3

    def test_contract_dump_saves_menus(self, write_config, tmp_path):
        """Test contract-dump saves one menu per scheme next to --out."""
        path = write_config("[sweep]\ngrid_size = 20\n")
        out = tmp_path / "contracts.csv"
        assert main.main(["contract-dump", "--config", str(path), "--out", str(out)]) == 0
        assert (tmp_path / "contracts.db-bearing-risk.csv").exists()
        assert (tmp_path / "contracts.wsd-bearing-risk.meta").exists()
        assert len(pd.read_csv(out)) == 40

    def test_aggregate_writes_companion(self, write_config, tmp_path):
        """Test aggregate writes the reservations table next to --out."""
        path = write_config("[fleet]\nmax_size = 3\n\n[sweep]\ngrid_size = 50\n")
        out = tmp_path / "fleet.csv"
        assert main.main(["aggregate", "--config", str(path), "--out", str(out)]) == 0
        assert len(pd.read_csv(out)) == 3
        assert list(pd.read_csv(tmp_path / "fleet.reservations.csv").columns) == ["N", "TK", "OTK_star", "profit_gain"]

    def test_simulate_with_trace(self, write_config, tmp_path):
        """Test simulate writes the report and the trace."""
        path = write_config("[simulation]\nperiods = 20\naccesses = 10\n")
        out, trace = tmp_path / "sim.csv", tmp_path / "trace.csv"
        assert main.main(["simulate", "--config", str(path), "--seed", "7", "--out", str(out), "--trace", str(trace)]) == 0
        assert len(pd.read_csv(out)) == 3
        assert list(pd.read_csv(trace).columns) == ["period", "xi", "k", "db_profit", "wsd_profit"]

    def test_missing_command(self):
        """Test argparse rejects a missing sub-command."""
        with pytest.raises(SystemExit):
            main.main([])
