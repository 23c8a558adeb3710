"""European option premiums and the unit discount bond.

Hedging code only ever sees *quotes*: callables mapping a strike to a
premium.  :class:`BlackScholes` and :class:`QuoteTable` both provide
``call`` / ``put`` quote methods, so a table of market quotes can stand in
for the model without touching anything downstream.

Premiums are netted undiscounted against the expiry payoff, i.e. the strategy
cost ``D`` is treated as settled at expiry.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

from .amm import DomainError, check_price

Quote = Callable[[float], float]

_SQRT2 = math.sqrt(2.0)


def norm_cdf(x: float) -> float:
    # erfc keeps full relative accuracy in the lower tail
    return 0.5 * math.erfc(-x / _SQRT2)


@dataclass(frozen=True)
class MarketParams:
    spot: float
    rate: float
    volatility: float
    expiry: float

    def __post_init__(self):
        if not (math.isfinite(self.spot) and self.spot > 0.0):
            raise DomainError(f"spot must be positive, got {self.spot!r}")
        if not (math.isfinite(self.expiry) and self.expiry > 0.0):
            raise DomainError(f"expiry must be positive, got {self.expiry!r}")
        if not (math.isfinite(self.volatility) and self.volatility >= 0.0):
            raise DomainError(f"volatility must be non-negative, got {self.volatility!r}")
        if not math.isfinite(self.rate):
            raise DomainError(f"rate must be finite, got {self.rate!r}")


def discount_bond(mp: MarketParams) -> float:
    return math.exp(-mp.rate * mp.expiry)


def _d1_d2(mp: MarketParams, strike: float) -> tuple[float, float]:
    vol_t = mp.volatility * math.sqrt(mp.expiry)
    d1 = (math.log(mp.spot / strike) + (mp.rate + 0.5 * mp.volatility**2) * mp.expiry) / vol_t
    return d1, d1 - vol_t


def call_price(mp: MarketParams, strike: float) -> float:
    """Black-Scholes call; zero volatility gives the discounted forward intrinsic."""
    strike = check_price(strike, "strike")
    df = discount_bond(mp)
    if mp.volatility == 0.0:
        return df * max(mp.spot / df - strike, 0.0)
    d1, d2 = _d1_d2(mp, strike)
    # cancellation can leave -1e-14 far out of the money
    return max(mp.spot * norm_cdf(d1) - strike * df * norm_cdf(d2), 0.0)


def put_price(mp: MarketParams, strike: float) -> float:
    strike = check_price(strike, "strike")
    df = discount_bond(mp)
    if mp.volatility == 0.0:
        return df * max(strike - mp.spot / df, 0.0)
    d1, d2 = _d1_d2(mp, strike)
    return max(strike * df * norm_cdf(-d2) - mp.spot * norm_cdf(-d1), 0.0)


@dataclass(frozen=True)
class BlackScholes:
    """Model quote source."""

    params: MarketParams

    def bond(self) -> float:
        return discount_bond(self.params)

    def call(self, strike: float) -> float:
        return call_price(self.params, strike)

    def put(self, strike: float) -> float:
        return put_price(self.params, strike)


class MissingQuoteError(KeyError):
    """No quote at the requested strike.  ``missing`` lists ``(kind, strike)`` pairs."""

    def __init__(self, missing: list[tuple[str, float]]):
        self.missing = missing
        super().__init__(", ".join(f"{k}@{s!r}" for k, s in missing))


class QuoteTable:
    """Market quotes keyed by exact strike; no interpolation.

    The CSV form has the header ``kind,strike,premium`` with ``kind`` one of
    ``call`` or ``put``.
    """

    def __init__(self, rows: Iterable[tuple[str, float, float]], bond_price: float = 1.0):
        self._quotes: dict[str, dict[float, float]] = {"call": {}, "put": {}}
        for kind, strike, premium in rows:
            kind = kind.strip().lower()
            if kind not in self._quotes:
                raise ValueError(f"quote kind must be 'call' or 'put', got {kind!r}")
            strike, premium = float(strike), float(premium)
            check_price(strike, "strike")
            if not math.isfinite(premium) or premium < 0.0:
                raise ValueError(f"premium must be non-negative, got {premium!r} at {kind} {strike!r}")
            self._quotes[kind][strike] = premium
        self.bond_price = float(bond_price)

    @classmethod
    def from_csv(cls, path: str | Path, bond_price: float = 1.0) -> "QuoteTable":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["kind", "strike", "premium"]:
                raise ValueError(f"{path}: expected header 'kind,strike,premium'")
            rows = [(r["kind"], r["strike"], r["premium"]) for r in reader]
        return cls(rows, bond_price=bond_price)

    def bond(self) -> float:
        return self.bond_price

    def _get(self, kind: str, strike: float) -> float:
        try:
            return self._quotes[kind][float(strike)]
        except KeyError:
            raise MissingQuoteError([(kind, float(strike))]) from None

    def call(self, strike: float) -> float:
        return self._get("call", strike)

    def put(self, strike: float) -> float:
        return self._get("put", strike)

    def missing(self, put_strikes: Iterable[float] = (), call_strikes: Iterable[float] = ()) -> list[tuple[str, float]]:
        out = [("put", float(k)) for k in put_strikes if float(k) not in self._quotes["put"]]
        out += [("call", float(k)) for k in call_strikes if float(k) not in self._quotes["call"]]
        return out
