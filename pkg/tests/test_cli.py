import csv
import io
import json
from pathlib import Path

import numpy as np
import pytest

from ilhedge import amm
from ilhedge.amm import PoolPosition
from ilhedge.cli import main

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"

WORKED = {
    "pool": {"capital": 2000, "entry_price": 100},
    "band": {"lower": 64, "upper": 156.25},
    "pool_return_rate": 0.05,
    "quotes": [{"kind": "put", "strike": 64, "premium": 2}, {"kind": "call", "strike": 156.25, "premium": 3}],
    "output": {"price_from": 25, "price_to": 400, "steps": 4},
}


@pytest.fixture
def scenario(tmp_path):
    def write(**overrides):
        doc = {**WORKED, **overrides}
        doc = {k: v for k, v in doc.items() if v is not None}
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps(doc))
        return str(path)

    return write


def read_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array(rows[1:], dtype=float)


def test_il_curve(scenario, capsys):
    assert main(["il-curve", "--config", scenario()]) == 0
    header, rows = read_csv(capsys.readouterr().out)
    assert header == ["price", "v_pool", "v_hold", "il", "il_slope"]
    assert rows.shape == (5, 5)
    assert np.all(np.diff(rows[:, 0]) > 0)
    at = dict(zip(rows[:, 0], rows[:, 3]))
    assert at[100.0] == 0.0 and at[400.0] == -1000.0


def test_il_curve_matches_library_bitwise(scenario, capsys):
    assert main(["il-curve", "--config", scenario(), "--from", "3", "--to", "7000", "--steps", "333"]) == 0
    _, rows = read_csv(capsys.readouterr().out)
    pool = PoolPosition.from_capital(2000, 100)
    for row in rows:
        p = row[0]
        assert tuple(row[1:]) == (amm.value_pool(pool, p), amm.value_hold(pool, p), amm.il(pool, p),
                                  amm.il_slope(pool, p))


def test_csv_uses_17_significant_digits(scenario, capsys):
    main(["il-curve", "--config", scenario(), "--spacing", "linear", "--from", "1", "--to", "2", "--steps", "3"])
    out = capsys.readouterr().out.splitlines()
    assert out[2].split(",")[0] == "1.3333333333333333"
    assert out[2].split(",")[1] == "%.17g" % amm.value_pool(PoolPosition.from_capital(2000, 100), 4 / 3)


@pytest.mark.parametrize("argv", [["--steps", "1"], ["--from", "10", "--to", "5"], ["--from", "-1"]])
def test_il_curve_usage_errors(scenario, argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["il-curve", "--config", scenario(), *argv])
    assert exc.value.code == 2
    assert "error" in capsys.readouterr().err


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as exc:
        main(["plot"])
    assert exc.value.code == 2


def test_hedge_worked(scenario, tmp_path, capsys):
    curve = tmp_path / "pnl.csv"
    assert main(["hedge", "--config", scenario(), "--curve", str(curve)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["solved"] and rep["feasible"]
    assert (rep["strangle"]["put_qty"], rep["strangle"]["call_qty"]) == (2.5, 2.0)
    assert rep["required_return"] == pytest.approx(0.03675, abs=1e-15)
    cov = rep["coverage"]
    assert cov["covered"] and cov["inequalities_hold"] == [True, True, True]
    assert cov["grid_min_pnl"] == pytest.approx(26.5, abs=1e-12) and cov["grid_argmin"] == 156.25
    header, rows = read_csv(curve.read_text())
    assert header == ["price", "pnl_pool_hold", "pnl_strangle", "pnl_total"]
    assert rows[0, 0] == pytest.approx(0.8 * 64) and rows[-1, 0] == pytest.approx(1.2 * 156.25)
    np.testing.assert_allclose(rows[:, 1] + rows[:, 2], rows[:, 3], atol=1e-9)
    assert {64.0, 100.0, 156.25} <= set(rows[:, 0])


def test_hedge_infeasible(scenario, capsys):
    assert main(["hedge", "--config", scenario(pool_return_rate=0.01)]) == 4
    rep = json.loads(capsys.readouterr().out)
    assert not rep["feasible"]
    assert rep["required_return"] == pytest.approx(0.03675, abs=1e-15)


def test_hedge_given_strangle_not_covered(scenario, capsys):
    s = {"put_strike": 64, "call_strike": 156.25, "put_qty": 2.5, "call_qty": 2, "put_premium": 2, "call_premium": 3}
    assert main(["hedge", "--config", scenario(strangle=s, pool_return_rate=0.03)]) == 4
    rep = json.loads(capsys.readouterr().out)
    assert rep["coverage"]["grid_min_pnl"] == pytest.approx(-13.5, abs=1e-12)
    assert not rep["solved"]


def test_hedge_bad_strike_order(scenario, capsys):
    s = {"put_strike": 110, "call_strike": 156.25, "put_qty": 2.5, "call_qty": 2}
    assert main(["hedge", "--config", scenario(strangle=s)]) == 3
    assert "strangle" in capsys.readouterr().err


def test_band_without_entry_price(scenario, capsys):
    assert main(["hedge", "--config", scenario(band={"lower": 110, "upper": 150})]) == 3
    err = capsys.readouterr().err
    assert "band" in err


@pytest.mark.parametrize(
    "override, field",
    [({"pool": {"capital": -5, "entry_price": 100}}, "pool.capital"), ({"pool": {"entry_price": 100}}, "pool"),
     ({"band": "wide"}, "band"), ({"output": {"steps": "x"}}, "output.steps"),
     ({"quotes": "nope.csv"}, "quotes"), ({"replication": {"payoff": "cubic"}}, "replication.payoff")],
)
def test_validation_names_field(scenario, override, field, capsys):
    assert main(["il-curve", "--config", scenario(**override)]) == 3
    assert f"{field}:" in capsys.readouterr().err


def test_missing_config(tmp_path, capsys):
    assert main(["il-curve", "--config", str(tmp_path / "absent.json")]) == 3


def test_missing_quote_for_solve(scenario, capsys):
    assert main(["hedge", "--config", scenario(band={"lower": 60, "upper": 156.25})]) == 3
    assert "put 60.0" in capsys.readouterr().err


def test_replicate_il_and_hedge(scenario, capsys):
    market = {"rate": 0.0, "volatility": 0.8, "expiry": 0.25}
    cfg = scenario(quotes=None, market=market, band=[25, 400])
    grid = ["--grid-cells", "2000", "--kmin", "10", "--kmax", "1000"]
    assert main(["replicate", "--config", cfg, *grid]) == 0
    doc = json.loads(capsys.readouterr().out)
    legs = [q for _, q in doc["portfolio"]["put_legs"] + doc["portfolio"]["call_legs"]]
    assert all(q < 0 for q in legs) and len(legs) == 4000
    assert doc["present_value"] < 0
    assert doc["replication_error"]["max_abs_error"] <= 1.0
    assert main(["replicate", "--config", cfg, *grid, "--payoff", "hedge"]) == 0
    doc2 = json.loads(capsys.readouterr().out)
    assert all(q > 0 for _, q in doc2["portfolio"]["put_legs"] + doc2["portfolio"]["call_legs"])
    assert doc2["present_value"] == pytest.approx(-doc["present_value"], rel=1e-12)


def test_replicate_quadratic(scenario, capsys):
    cfg = scenario(quotes=None, market={"volatility": 0.5, "expiry": 1.0}, band=[50, 200])
    assert main(["replicate", "--config", cfg, "--payoff", "quadratic", "--kmin", "0", "--kmax", "1000"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["replication_error"]["max_abs_error"] <= 0.5
    assert doc["replication_error"]["probe_from"] == 50 and doc["replication_error"]["probe_to"] == 200


def test_replicate_quote_gaps(scenario, capsys):
    assert main(["replicate", "--config", scenario(), "--grid-cells", "3"]) == 3
    err = capsys.readouterr().err
    assert "missing quotes for 6 strike(s)" in err


def test_replicate_needs_pricer(scenario, capsys):
    assert main(["replicate", "--config", scenario(quotes=None)]) == 3


def test_replicate_from_quote_table(tmp_path, capsys):
    rows = ["kind,strike,premium"] + [f"put,{k},{max(k - 90, 0) + 0.5}" for k in (62.5, 87.5)]
    rows += [f"call,{k},{max(110 - k, 0) + 0.5}" for k in (175.0, 325.0)]
    (tmp_path / "q.csv").write_text("\n".join(rows) + "\n")
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps({"pool": {"capital": 2000, "entry_price": 100}, "quotes": "q.csv",
                               "replication": {"cells": 2, "k_min": 50, "k_max": 400}}))
    assert main(["replicate", "--config", str(cfg)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["pricer"] == "QuoteTable"


def test_outputs_to_files_are_deterministic(scenario, tmp_path):
    cfg = scenario()
    outs = []
    for i in range(2):
        a, b, c = tmp_path / f"il{i}.csv", tmp_path / f"rep{i}.json", tmp_path / f"pnl{i}.csv"
        assert main(["il-curve", "--config", cfg, "--steps", "500", "--out", str(a)]) == 0
        assert main(["hedge", "--config", cfg, "--out", str(b), "--curve", str(c)]) == 0
        outs.append((a.read_bytes(), b.read_bytes(), c.read_bytes()))
    assert outs[0] == outs[1]


@pytest.mark.parametrize("name", ["worked.json", "bs_replicate.json", "table_hedge.json"])
def test_shipped_scenarios_run(name, capsys):
    cmd = "replicate" if name == "bs_replicate.json" else "hedge"
    assert main([cmd, "--config", str(SCENARIOS / name)]) == 0
