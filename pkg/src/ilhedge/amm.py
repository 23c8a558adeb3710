"""Constant-product pool math.

Convention: the *risky* token (e.g. ETH) is priced in units of the
*numeraire* token (e.g. USDC).  With reserves ``x`` (risky) and ``y``
(numeraire) the pool satisfies ``x * y = k`` and its marginal price is
``P = y / x``.  All amounts are plain floats in numeraire units; token
decimals are not modelled.

Impermanent loss is the price-only form: no fee accrual between deposit and
withdrawal.  Pool fees enter the hedging layer as a separate return rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

CONSISTENCY_RTOL = 1e-9


class DomainError(ValueError):
    """Raised for prices or amounts outside the model's domain."""


def check_price(p, name: str = "price"):
    """Validate a positive finite price (scalar or array) and return it."""
    if np.ndim(p) == 0:
        v = float(p)
        if not math.isfinite(v) or v <= 0.0:
            raise DomainError(f"{name} must be positive and finite, got {p!r}")
        return v
    arr = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError(f"{name} must be positive and finite everywhere")
    return arr


@dataclass(frozen=True)
class PoolPosition:
    """Snapshot of a liquidity deposit at entry.

    Build with :meth:`from_reserves` or :meth:`from_capital`; direct
    construction validates that all five fields are mutually consistent.
    """

    risky_amount_0: float
    numeraire_amount_0: float
    entry_price: float
    invariant_k: float
    capital_c: float

    def __post_init__(self):
        for name in ("risky_amount_0", "numeraire_amount_0", "entry_price"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0.0:
                raise DomainError(f"{name} must be positive and finite, got {v!r}")
        x, y, p0 = self.risky_amount_0, self.numeraire_amount_0, self.entry_price
        checks = {
            "entry_price": (p0, y / x),
            "invariant_k": (self.invariant_k, x * y),
            "capital_c": (self.capital_c, y + x * p0),
        }
        for name, (got, want) in checks.items():
            if not math.isclose(got, want, rel_tol=CONSISTENCY_RTOL, abs_tol=0.0):
                raise DomainError(f"{name}={got!r} inconsistent with reserves (expected {want!r})")

    @classmethod
    def from_reserves(cls, risky: float, numeraire: float, entry_price: float | None = None) -> "PoolPosition":
        risky, numeraire = float(risky), float(numeraire)
        if risky <= 0.0 or numeraire <= 0.0 or not (math.isfinite(risky) and math.isfinite(numeraire)):
            raise DomainError("reserves must be positive and finite")
        p0 = numeraire / risky if entry_price is None else float(entry_price)
        return cls(risky, numeraire, p0, risky * numeraire, numeraire + risky * p0)

    @classmethod
    def from_capital(cls, capital: float, entry_price: float) -> "PoolPosition":
        capital = float(capital)
        p0 = check_price(entry_price, "entry_price")
        if not math.isfinite(capital) or capital <= 0.0:
            raise DomainError(f"capital must be positive and finite, got {capital!r}")
        y = capital / 2.0
        x = y / p0
        return cls(x, y, p0, x * y, capital)

    def scaled(self, factor: float) -> "PoolPosition":
        return PoolPosition.from_reserves(self.risky_amount_0 * factor, self.numeraire_amount_0 * factor, self.entry_price)


def reserves_at_price(pool: PoolPosition, p):
    """Reserves ``(risky, numeraire)`` after arbitrage moves the pool to price ``p``."""
    p = check_price(p)
    k = pool.invariant_k
    return np.sqrt(k / p), np.sqrt(k * p)


def value_pool(pool: PoolPosition, p):
    p = check_price(p)
    return pool.capital_c * np.sqrt(p / pool.entry_price)


def value_hold(pool: PoolPosition, p):
    p = check_price(p)
    return pool.numeraire_amount_0 + pool.risky_amount_0 * p


def il(pool: PoolPosition, p):
    """Impermanent loss at price ``p``; never positive, zero only at entry."""
    p = check_price(p)
    ratio = p / pool.entry_price
    return pool.capital_c * (np.sqrt(ratio) - 0.5 * (ratio + 1.0))


def il_slope(pool: PoolPosition, p):
    p = check_price(p)
    p0 = pool.entry_price
    return pool.capital_c / (2.0 * p0) * (np.sqrt(p0 / p) - 1.0)


def il_curvature(pool: PoolPosition, p):
    """Second price derivative of :func:`il`, ``-c / (4 sqrt(P0) p^1.5)``."""
    p = check_price(p)
    return -pool.capital_c / (4.0 * math.sqrt(pool.entry_price) * p * np.sqrt(p))
