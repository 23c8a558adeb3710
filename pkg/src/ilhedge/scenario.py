"""JSON scenario files for the command line.

Example::

    {
      "pool": {"capital": 2000, "entry_price": 100},
      "band": {"lower": 64, "upper": 156.25},
      "pool_return_rate": 0.05,
      "quotes": [{"kind": "put", "strike": 64, "premium": 2},
                 {"kind": "call", "strike": 156.25, "premium": 3}],
      "output": {"price_from": 25, "price_to": 400, "steps": 200}
    }

``pool`` may instead give ``risky_amount`` and ``numeraire_amount`` (plus an
optional ``entry_price`` that must agree with their ratio).  Premiums come
from ``quotes`` (inline rows, or a path to a ``kind,strike,premium`` CSV
relative to the scenario file) or from ``market`` (``spot``, ``rate``,
``volatility``, ``expiry``; ``spot`` defaults to the entry price).  When both
are present, quotes win.  ``strangle`` is optional and is solved for when
absent.  ``replication`` sets ``payoff`` (``il``, ``hedge`` or
``quadratic``), ``center``, ``cells``, ``k_min`` and ``k_max``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .amm import DomainError, PoolPosition
from .hedging import HedgeBand, Strangle
from .pricing import BlackScholes, MarketParams, QuoteTable


class ScenarioError(ValueError):
    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


@dataclass
class OutputControls:
    price_from: float | None = None
    price_to: float | None = None
    steps: int = 200


@dataclass
class ReplicationControls:
    payoff: str = "il"
    center: float | None = None
    cells: int = 2000
    k_min: float | None = None
    k_max: float | None = None


@dataclass
class Scenario:
    pool: PoolPosition
    pool_return_rate: float = 0.0
    band: HedgeBand | None = None
    strangle: Strangle | None = None
    market: MarketParams | None = None
    quotes: QuoteTable | None = None
    output: OutputControls = field(default_factory=OutputControls)
    replication: ReplicationControls = field(default_factory=ReplicationControls)

    @property
    def pricer(self) -> BlackScholes | QuoteTable | None:
        if self.quotes is not None:
            return self.quotes
        if self.market is not None:
            return BlackScholes(self.market)
        return None


def _num(d: dict, key: str, where: str, default: Any = ..., positive: bool = False) -> float:
    if key not in d:
        if default is ...:
            raise ScenarioError(f"{where}.{key}", "missing")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ScenarioError(f"{where}.{key}", f"expected a finite number, got {v!r}")
    if positive and v <= 0:
        raise ScenarioError(f"{where}.{key}", f"must be positive, got {v!r}")
    return float(v)


def _section(raw: dict, key: str) -> dict | None:
    sec = raw.get(key)
    if sec is not None and not isinstance(sec, dict):
        raise ScenarioError(key, "expected an object")
    return sec


def _pool(raw: dict) -> PoolPosition:
    sec = _section(raw, "pool")
    if sec is None:
        raise ScenarioError("pool", "missing")
    try:
        if "capital" in sec:
            return PoolPosition.from_capital(_num(sec, "capital", "pool", positive=True),
                                             _num(sec, "entry_price", "pool", positive=True))
        if "risky_amount" in sec or "numeraire_amount" in sec:
            risky = _num(sec, "risky_amount", "pool", positive=True)
            num = _num(sec, "numeraire_amount", "pool", positive=True)
            p0 = _num(sec, "entry_price", "pool", default=None, positive=True)
            return PoolPosition.from_reserves(risky, num, p0)
    except DomainError as exc:
        raise ScenarioError("pool", str(exc)) from None
    raise ScenarioError("pool", "give either capital + entry_price or risky_amount + numeraire_amount")


def _band(raw: dict, pool: PoolPosition) -> HedgeBand | None:
    sec = raw.get("band")
    if sec is None:
        return None
    if isinstance(sec, list) and len(sec) == 2:
        sec = {"lower": sec[0], "upper": sec[1]}
    if not isinstance(sec, dict):
        raise ScenarioError("band", "expected {lower, upper} or a two-element list")
    try:
        band = HedgeBand(_num(sec, "lower", "band", positive=True), _num(sec, "upper", "band", positive=True))
        band.require_entry(pool)
    except DomainError as exc:
        raise ScenarioError("band", str(exc)) from None
    return band


def _strangle(raw: dict) -> Strangle | None:
    sec = _section(raw, "strangle")
    if sec is None:
        return None
    try:
        return Strangle(
            put_strike=_num(sec, "put_strike", "strangle", positive=True),
            call_strike=_num(sec, "call_strike", "strangle", positive=True),
            put_qty=_num(sec, "put_qty", "strangle"),
            call_qty=_num(sec, "call_qty", "strangle"),
            put_premium=_num(sec, "put_premium", "strangle", default=0.0),
            call_premium=_num(sec, "call_premium", "strangle", default=0.0),
        )
    except DomainError as exc:
        raise ScenarioError("strangle", str(exc)) from None


def _market(raw: dict, pool: PoolPosition) -> MarketParams | None:
    sec = _section(raw, "market")
    if sec is None:
        return None
    try:
        return MarketParams(
            spot=_num(sec, "spot", "market", default=pool.entry_price),
            rate=_num(sec, "rate", "market", default=0.0),
            volatility=_num(sec, "volatility", "market"),
            expiry=_num(sec, "expiry", "market"),
        )
    except DomainError as exc:
        raise ScenarioError("market", str(exc)) from None


def _quotes(raw: dict, base: Path) -> QuoteTable | None:
    sec = raw.get("quotes")
    if sec is None:
        return None
    bond = _num(raw, "quote_bond_price", "scenario", default=1.0, positive=True)
    try:
        if isinstance(sec, str):
            path = Path(sec)
            if not path.is_absolute():
                path = base / path
            return QuoteTable.from_csv(path, bond_price=bond)
        if isinstance(sec, list):
            return QuoteTable(((r["kind"], r["strike"], r["premium"]) for r in sec), bond_price=bond)
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise ScenarioError("quotes", str(exc)) from None
    raise ScenarioError("quotes", "expected a CSV path or a list of {kind, strike, premium}")


def _controls(raw: dict) -> tuple[OutputControls, ReplicationControls]:
    out = _section(raw, "output") or {}
    rep = _section(raw, "replication") or {}
    steps = out.get("steps", 200)
    if isinstance(steps, bool) or not isinstance(steps, int) or steps < 2:
        raise ScenarioError("output.steps", f"expected an integer >= 2, got {steps!r}")
    oc = OutputControls(_num(out, "price_from", "output", default=None, positive=True),
                        _num(out, "price_to", "output", default=None, positive=True), steps)
    payoff = rep.get("payoff", "il")
    if payoff not in ("il", "hedge", "quadratic"):
        raise ScenarioError("replication.payoff", f"expected il, hedge or quadratic, got {payoff!r}")
    cells = rep.get("cells", 2000)
    if isinstance(cells, bool) or not isinstance(cells, int) or cells < 1:
        raise ScenarioError("replication.cells", f"expected a positive integer, got {cells!r}")
    rc = ReplicationControls(payoff, _num(rep, "center", "replication", default=None, positive=True), cells,
                             _num(rep, "k_min", "replication", default=None),
                             _num(rep, "k_max", "replication", default=None, positive=True))
    return oc, rc


def parse_scenario(raw: dict, base: Path | str = ".") -> Scenario:
    if not isinstance(raw, dict):
        raise ScenarioError("scenario", "expected a JSON object")
    pool = _pool(raw)
    rate = _num(raw, "pool_return_rate", "scenario", default=0.0)
    if rate < 0:
        raise ScenarioError("pool_return_rate", f"must be non-negative, got {rate!r}")
    output, replication = _controls(raw)
    return Scenario(
        pool=pool,
        pool_return_rate=rate,
        band=_band(raw, pool),
        strangle=_strangle(raw),
        market=_market(raw, pool),
        quotes=_quotes(raw, Path(base)),
        output=output,
        replication=replication,
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ScenarioError("config", str(exc)) from None
    except json.JSONDecodeError as exc:
        raise ScenarioError("config", f"invalid JSON: {exc}") from None
    return parse_scenario(raw, base=path.parent)
