"""Long-strangle hedge of impermanent loss over a price band.

An LP with capital ``c`` entering at ``P0`` buys ``q_p`` puts struck at
``K_p`` and ``q_c`` calls struck at ``K_c``, paying ``D = q_c d_c + q_p d_p``.
With the pool paying ``r_p`` on ``c`` over the period, the PnL at expiry is::

    r_p c + q_c (P_T - K_c)^+ + q_p (K_p - P_T)^+ - D + IL(P_T)

It is non-negative everywhere on ``[P_i, P_s]`` as long as

1. ``q_p >= (c/2) (1/sqrt(P_i P0) - 1/P0)``,
2. ``D - min(IL(K_c), IL(K_p)) <= r_p c``,
3. ``q_c >= -(c/2) (1/sqrt(P_s P0) - 1/P0)``,

with strikes ordered ``P_i <= K_p <= P0 <= K_c <= P_s``.  These conditions are
sufficient, not necessary.  The original statement also mentions long calls
when ``q_c > q_p`` and long puts when ``q_p > q_c``.  Nothing here branches
on that comparison.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import amm, kernels
from .amm import DomainError, PoolPosition, check_price

COVERAGE_RTOL = 1e-9
DEFAULT_GRID_POINTS = 10_001


class StrikeOrderError(ValueError):
    """Strikes do not satisfy ``P_i <= K_p <= P0 <= K_c <= P_s``."""


@dataclass(frozen=True)
class HedgeBand:
    """Protection interval ``[p_lower, p_upper]``; a single point is allowed."""

    p_lower: float
    p_upper: float

    def __post_init__(self):
        check_price(self.p_lower, "p_lower")
        check_price(self.p_upper, "p_upper")
        if self.p_lower > self.p_upper:
            raise DomainError(f"band is inverted: [{self.p_lower!r}, {self.p_upper!r}]")

    def contains(self, p: float) -> bool:
        return self.p_lower <= p <= self.p_upper

    def require_entry(self, pool: PoolPosition) -> None:
        if not self.contains(pool.entry_price):
            raise DomainError(
                f"band [{self.p_lower!r}, {self.p_upper!r}] does not contain the entry price {pool.entry_price!r}"
            )


@dataclass(frozen=True)
class Strangle:
    put_strike: float
    call_strike: float
    put_qty: float
    call_qty: float
    put_premium: float = 0.0
    call_premium: float = 0.0

    def __post_init__(self):
        check_price(self.put_strike, "put_strike")
        check_price(self.call_strike, "call_strike")
        for name in ("put_qty", "call_qty", "put_premium", "call_premium"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0.0:
                raise DomainError(f"{name} must be non-negative and finite, got {v!r}")
        if self.put_strike > self.call_strike:
            raise DomainError("put_strike must not exceed call_strike")

    @property
    def cost(self) -> float:
        return self.call_qty * self.call_premium + self.put_qty * self.put_premium

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class HedgedPosition:
    pool: PoolPosition
    strangle: Strangle
    pool_return_rate: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.pool_return_rate) or self.pool_return_rate < 0.0:
            raise DomainError(f"pool_return_rate must be non-negative, got {self.pool_return_rate!r}")

    @property
    def carry(self) -> float:
        """Pool return minus option cost, ``r_p c - D``."""
        return self.pool_return_rate * self.pool.capital_c - self.strangle.cost


@dataclass(frozen=True)
class CoverageReport:
    put_qty_bound: float
    call_qty_bound: float
    budget_gap: float
    inequalities_hold: tuple[bool, bool, bool]
    grid_min_pnl: float
    grid_argmin: float
    covered: bool

    @property
    def sufficient(self) -> bool:
        return all(self.inequalities_hold)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["inequalities_hold"] = list(self.inequalities_hold)
        return d


@dataclass(frozen=True)
class SolveResult:
    """Outcome of :func:`solve_min_strangle`.

    ``strangle`` is always filled; ``feasible`` says whether the pool return
    covers its cost, ``required_return`` is the smallest rate that would.
    """

    strangle: Strangle
    feasible: bool
    required_return: float


def strangle_payoff(s: Strangle, p_T):
    p_T = check_price(p_T, "p_T")
    return s.call_qty * np.maximum(p_T - s.call_strike, 0.0) + s.put_qty * np.maximum(s.put_strike - p_T, 0.0)


def total_pnl(hp: HedgedPosition, p_T):
    p_T = check_price(p_T, "p_T")
    return hp.pool_return_rate * hp.pool.capital_c + strangle_payoff(hp.strangle, p_T) - hp.strangle.cost + amm.il(hp.pool, p_T)


def proposition_quantity_bounds(pool: PoolPosition, band: HedgeBand) -> tuple[float, float]:
    """Smallest put and call quantities allowed by inequalities 1 and 3."""
    band.require_entry(pool)
    c, p0 = pool.capital_c, pool.entry_price
    # (c/2)(1/sqrt(P P0) - 1/P0) rearranged; exact on square-number prices
    r0, r_lo, r_hi = math.sqrt(p0), math.sqrt(band.p_lower), math.sqrt(band.p_upper)
    q_p = c / (2.0 * p0) * (r0 - r_lo) / r_lo
    q_c = c / (2.0 * p0) * (r_hi - r0) / r_hi
    return (q_p if q_p > 0.0 else 0.0), (q_c if q_c > 0.0 else 0.0)


def required_pool_return(pool: PoolPosition, s: Strangle) -> float:
    """Smallest ``r_p`` for which inequality 2 holds in floating point."""
    worst = min(amm.il(pool, s.call_strike), amm.il(pool, s.put_strike))
    need = float(s.cost - worst)
    c = pool.capital_c
    r = need / c
    while r * c < need:
        r = math.nextafter(r, math.inf)
    return r


def _check_strike_order(pool: PoolPosition, s: Strangle, band: HedgeBand) -> None:
    chain = [("P_i", band.p_lower), ("K_p", s.put_strike), ("P0", pool.entry_price),
             ("K_c", s.call_strike), ("P_s", band.p_upper)]
    for (a, va), (b, vb) in zip(chain, chain[1:]):
        if va > vb:
            order = " <= ".join(f"{n}={v!r}" for n, v in chain)
            raise StrikeOrderError(f"need P_i <= K_p <= P0 <= K_c <= P_s, but {a} > {b} in {order}")


def grid_prices(hp: HedgedPosition, band: HedgeBand, n_points: int) -> np.ndarray:
    s = hp.strangle
    lo, hi = band.p_lower, band.p_upper
    kinks = np.array([s.put_strike, s.call_strike, hp.pool.entry_price, lo, hi])
    kinks = kinks[(kinks >= lo) & (kinks <= hi)]
    return np.unique(np.concatenate([np.linspace(lo, hi, n_points), kinks]))


def verify_coverage_grid(hp: HedgedPosition, band: HedgeBand, n_points: int = DEFAULT_GRID_POINTS) -> tuple[float, float]:
    """Brute-force minimum of :func:`total_pnl` over the band.

    Evaluates ``n_points`` evenly spaced prices plus every kink (strikes,
    entry price, band edges) that falls inside the band.  Ties resolve to the
    lowest price.
    """
    if n_points < 2:
        raise ValueError(f"n_points must be at least 2, got {n_points}")
    prices = grid_prices(hp, band, n_points)
    s = hp.strangle
    pnl = kernels.hedge_pnl(prices, hp.carry, hp.pool.capital_c, hp.pool.entry_price,
                            s.put_strike, s.put_qty, s.call_strike, s.call_qty)
    i = kernels.argmin_lowest(prices, pnl)
    return float(pnl[i]), float(prices[i])


def check_proposition(hp: HedgedPosition, band: HedgeBand, n_points: int = DEFAULT_GRID_POINTS) -> CoverageReport:
    pool, s = hp.pool, hp.strangle
    band.require_entry(pool)
    _check_strike_order(pool, s, band)
    q_p_min, q_c_min = proposition_quantity_bounds(pool, band)
    c = pool.capital_c
    worst = min(amm.il(pool, s.call_strike), amm.il(pool, s.put_strike))
    budget = hp.pool_return_rate * c
    holds = (q_p_min <= s.put_qty, s.cost - worst <= budget, q_c_min <= s.call_qty)
    min_pnl, argmin = verify_coverage_grid(hp, band, n_points)
    return CoverageReport(
        put_qty_bound=q_p_min,
        call_qty_bound=q_c_min,
        budget_gap=float(budget - (s.cost - worst)),
        inequalities_hold=tuple(bool(h) for h in holds),
        grid_min_pnl=min_pnl,
        grid_argmin=argmin,
        covered=bool(min_pnl >= -COVERAGE_RTOL * c),
    )


def solve_min_strangle(pool: PoolPosition, band: HedgeBand, put_quote: Callable[[float], float],
                       call_quote: Callable[[float], float], r_p: float) -> SolveResult:
    """Cheapest strangle with strikes on the band edges.

    Quantities sit exactly on inequalities 1 and 3; premiums come from the
    quote callables (which may raise, e.g. on a missing table strike).
    """
    q_p, q_c = proposition_quantity_bounds(pool, band)
    s = Strangle(band.p_lower, band.p_upper, q_p, q_c,
                 put_premium=float(put_quote(band.p_lower)), call_premium=float(call_quote(band.p_upper)))
    need = required_pool_return(pool, s)
    return SolveResult(s, bool(need <= r_p), need)
