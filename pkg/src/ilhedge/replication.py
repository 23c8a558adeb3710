"""Static replication of a smooth payoff with a bond and European options.

A twice-differentiable payoff ``f`` expanded around ``m`` is held as

* ``f(m)`` unit discount bonds,
* ``f'(m)`` calls minus ``f'(m)`` puts struck at ``m``,
* ``f''(K) dK`` puts at every strike below ``m`` and calls at every strike above.

The strike integrals are discretised with the midpoint rule on cells that
partition ``[K_min, m]`` and ``[m, K_max]``; the leg at each cell midpoint
carries ``f''(K) * width``.  Strikes outside ``[K_min, K_max]`` are dropped, so
the replication degrades for terminal prices outside that window (measure it
with :func:`replication_error`).

This module replicates ``f`` as given.  To hedge a loss, replicate its
negation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import amm, kernels
from .amm import DomainError, PoolPosition, check_price

ScalarFn = Callable[[float], float]


class PayoffCheckError(ValueError):
    """Derivatives supplied with a payoff disagree with its values."""


class PricingError(ValueError):
    """A pricing function returned a negative or non-finite premium."""


def _eval(fn, x: np.ndarray) -> np.ndarray:
    try:
        with warnings.catch_warnings():
            # scalar-only callables (math.*) on size-1 arrays
            warnings.simplefilter("error", DeprecationWarning)
            out = np.asarray(fn(x), dtype=float)
        if out.shape == x.shape:
            return out
        if out.ndim == 0 and x.size == 1:
            return np.full(x.shape, float(out))
    except (TypeError, ValueError, DeprecationWarning):
        pass
    return np.array([float(fn(float(v))) for v in x], dtype=float)


@dataclass(frozen=True)
class SmoothPayoff:
    value_at: ScalarFn
    slope_at: ScalarFn
    curvature_at: ScalarFn
    description: str = "payoff"

    @classmethod
    def constant(cls, level: float) -> "SmoothPayoff":
        return cls(lambda p: level + 0.0 * p, lambda p: 0.0 * p, lambda p: 0.0 * p, f"constant {level:g}")

    @classmethod
    def affine(cls, intercept: float, slope: float) -> "SmoothPayoff":
        return cls(lambda p: intercept + slope * p, lambda p: slope + 0.0 * p, lambda p: 0.0 * p,
                   f"{intercept:g} + {slope:g} P")

    @classmethod
    def quadratic(cls, center: float) -> "SmoothPayoff":
        return cls(lambda p: (p - center) ** 2, lambda p: 2.0 * (p - center), lambda p: 2.0 + 0.0 * p,
                   f"(P - {center:g})^2")

    @classmethod
    def impermanent_loss(cls, pool: PoolPosition) -> "SmoothPayoff":
        return cls(lambda p: amm.il(pool, p), lambda p: amm.il_slope(pool, p), lambda p: amm.il_curvature(pool, p),
                   "impermanent loss")

    def negated(self) -> "SmoothPayoff":
        v, s, c = self.value_at, self.slope_at, self.curvature_at
        return SmoothPayoff(lambda p: -v(p), lambda p: -s(p), lambda p: -c(p), f"-({self.description})")

    def self_check(self, probes: Sequence[float], rel_tol: float = 1e-4) -> None:
        """Compare ``slope_at``/``curvature_at`` with central differences.

        Raises :class:`PayoffCheckError` on the first probe that disagrees.
        """
        p = check_price(np.atleast_1d(np.asarray(probes, dtype=float)), "probe")
        h = 1e-4 * p
        eps = np.finfo(float).eps
        checks = (
            ("slope_at", self.value_at, self.slope_at),
            ("curvature_at", self.slope_at, self.curvature_at),
        )
        for name, base, deriv in checks:
            up, down = _eval(base, p + h), _eval(base, p - h)
            fd = (up - down) / (2.0 * h)
            analytic = _eval(deriv, p)
            scale = np.max(np.abs(analytic))
            roundoff = 64.0 * eps * np.maximum(np.abs(up), np.abs(down)) / h
            tol = rel_tol * np.maximum(np.abs(analytic), scale) + roundoff + np.finfo(float).tiny
            bad = np.flatnonzero(~(np.abs(fd - analytic) <= tol))
            if bad.size:
                i = bad[0]
                raise PayoffCheckError(
                    f"{self.description}: {name}({p[i]:g}) = {analytic[i]:g} but finite difference gives {fd[i]:g}"
                )


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class StrikeGrid:
    """Option strikes on each side of the expansion point ``center_m``.

    ``lower_widths``/``upper_widths`` are the quadrature cell widths that go
    with each strike.
    """

    center_m: float
    lower_strikes: np.ndarray
    upper_strikes: np.ndarray
    truncation_K_max: float
    lower_widths: np.ndarray
    upper_widths: np.ndarray

    def __post_init__(self):
        for name in ("lower_strikes", "upper_strikes", "lower_widths", "upper_widths"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        m = check_price(self.center_m, "center_m")
        lo, up = self.lower_strikes, self.upper_strikes
        if lo.shape != self.lower_widths.shape or up.shape != self.upper_widths.shape:
            raise ValueError("each strike needs exactly one cell width")
        for side, ks in (("lower", lo), ("upper", up)):
            if ks.size and (np.any(ks <= 0.0) or not np.all(np.isfinite(ks))):
                raise ValueError(f"{side} strikes must be positive and finite")
            if ks.size > 1 and np.any(np.diff(ks) <= 0.0):
                raise ValueError(f"{side} strikes must be strictly ascending")
        if np.any(self.lower_widths <= 0.0) or np.any(self.upper_widths <= 0.0):
            raise ValueError("cell widths must be positive")
        if lo.size and lo[-1] >= m:
            raise ValueError("lower strikes must lie below center_m")
        if up.size and up[0] <= m:
            raise ValueError("upper strikes must lie above center_m")
        if up.size and self.truncation_K_max < up[-1]:
            raise ValueError("truncation_K_max must be at least the largest strike")

    @classmethod
    def uniform(cls, center_m: float, k_min: float | None = None, k_max: float | None = None,
                cells: int = 2000, upper_cells: int | None = None) -> "StrikeGrid":
        """Midpoints of ``cells`` equal cells on ``[k_min, m]`` and on ``[m, k_max]``.

        Defaults: ``k_min = m / 100``, ``k_max = 10 m``.
        """
        m = check_price(center_m, "center_m")
        k_min = m / 100.0 if k_min is None else float(k_min)
        k_max = 10.0 * m if k_max is None else float(k_max)
        upper_cells = cells if upper_cells is None else upper_cells
        if not 0.0 <= k_min <= m <= k_max:
            raise ValueError(f"need 0 <= k_min <= m <= k_max, got {k_min!r}, {m!r}, {k_max!r}")
        if cells < 0 or upper_cells < 0:
            raise ValueError("cell counts must be non-negative")

        def side(a, b, n):
            if n == 0 or b <= a:
                return np.empty(0), np.empty(0)
            edges = np.linspace(a, b, n + 1)
            return 0.5 * (edges[:-1] + edges[1:]), np.diff(edges)

        lk, lw = side(k_min, m, cells)
        uk, uw = side(m, k_max, upper_cells)
        return cls(m, lk, uk, k_max, lw, uw)

    @property
    def k_min(self) -> float:
        if self.lower_strikes.size:
            return float(self.lower_strikes[0] - 0.5 * self.lower_widths[0])
        return self.center_m


@dataclass(frozen=True)
class ReplicationPortfolio:
    bond_notional: float
    atm_strike: float
    atm_call_qty: float
    atm_put_qty: float
    put_strikes: np.ndarray = field(default_factory=lambda: np.empty(0))
    put_qtys: np.ndarray = field(default_factory=lambda: np.empty(0))
    call_strikes: np.ndarray = field(default_factory=lambda: np.empty(0))
    call_qtys: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        for name in ("put_strikes", "put_qtys", "call_strikes", "call_qtys"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        if self.put_strikes.shape != self.put_qtys.shape or self.call_strikes.shape != self.call_qtys.shape:
            raise ValueError("each leg needs one strike and one quantity")
        scalars = (self.bond_notional, self.atm_strike, self.atm_call_qty, self.atm_put_qty)
        if not all(math.isfinite(v) for v in scalars):
            raise ValueError("portfolio scalars must be finite")
        if not (np.all(np.isfinite(self.put_qtys)) and np.all(np.isfinite(self.call_qtys))):
            raise ValueError("leg quantities must be finite")
        if self.put_strikes.size and self.put_strikes.max() >= self.atm_strike:
            raise ValueError("put legs must be struck below atm_strike")
        if self.call_strikes.size and self.call_strikes.min() <= self.atm_strike:
            raise ValueError("call legs must be struck above atm_strike")

    @property
    def put_legs(self) -> list[tuple[float, float]]:
        return list(zip(self.put_strikes.tolist(), self.put_qtys.tolist()))

    @property
    def call_legs(self) -> list[tuple[float, float]]:
        return list(zip(self.call_strikes.tolist(), self.call_qtys.tolist()))

    def to_dict(self) -> dict:
        return {
            "bond_notional": float(self.bond_notional),
            "atm_strike": float(self.atm_strike),
            "atm_call_qty": float(self.atm_call_qty),
            "atm_put_qty": float(self.atm_put_qty),
            "put_legs": [list(leg) for leg in self.put_legs],
            "call_legs": [list(leg) for leg in self.call_legs],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ReplicationPortfolio":
        puts = np.asarray(d.get("put_legs") or np.empty((0, 2)), dtype=float).reshape(-1, 2)
        calls = np.asarray(d.get("call_legs") or np.empty((0, 2)), dtype=float).reshape(-1, 2)
        return cls(float(d["bond_notional"]), float(d["atm_strike"]), float(d["atm_call_qty"]),
                   float(d["atm_put_qty"]), puts[:, 0], puts[:, 1], calls[:, 0], calls[:, 1])


def build_portfolio(payoff: SmoothPayoff, grid: StrikeGrid, check: bool = True) -> ReplicationPortfolio:
    m = grid.center_m
    if check:
        first = grid.lower_strikes[0] if grid.lower_strikes.size else m
        probes = np.geomspace(first, max(grid.truncation_K_max, m), 25)
        payoff.self_check(probes)
    for side, ks, probe in (("lower", grid.lower_strikes, 0.5 * m), ("upper", grid.upper_strikes, 2.0 * m)):
        if ks.size == 0 and float(_eval(payoff.curvature_at, np.array([probe]))[0]) != 0.0:
            warnings.warn(f"{side} side of the strike grid is empty but the payoff has curvature there",
                          stacklevel=2)
    fm = float(_eval(payoff.value_at, np.array([m]))[0])
    dfm = float(_eval(payoff.slope_at, np.array([m]))[0])
    put_q = _eval(payoff.curvature_at, grid.lower_strikes) * grid.lower_widths if grid.lower_strikes.size else np.empty(0)
    call_q = _eval(payoff.curvature_at, grid.upper_strikes) * grid.upper_widths if grid.upper_strikes.size else np.empty(0)
    return ReplicationPortfolio(fm, m, dfm, -dfm, grid.lower_strikes, put_q, grid.upper_strikes, call_q)


def _combine(bond_term, atm_call_term, atm_put_term, put_q, put_v, call_q, call_v) -> float:
    # shared by payoff and present value so the two agree bit-for-bit
    return float(bond_term + atm_call_term + atm_put_term + np.dot(put_q, put_v) + np.dot(call_q, call_v))


def portfolio_payoff(port: ReplicationPortfolio, p_T):
    """Expiry value of the portfolio; ``p_T`` may be a scalar or an array."""
    p_T = check_price(p_T, "p_T")
    m = port.atm_strike
    if np.ndim(p_T) == 0:
        return _combine(
            port.bond_notional,
            port.atm_call_qty * max(p_T - m, 0.0),
            port.atm_put_qty * max(m - p_T, 0.0),
            port.put_qtys, np.maximum(port.put_strikes - p_T, 0.0),
            port.call_qtys, np.maximum(p_T - port.call_strikes, 0.0),
        )
    return kernels.portfolio_payoff(p_T, port.bond_notional, m, port.atm_call_qty, port.atm_put_qty,
                                    port.put_strikes, port.put_qtys, port.call_strikes, port.call_qtys)


def _priced(fn: ScalarFn, strikes: np.ndarray, kind: str) -> np.ndarray:
    vals = np.array([float(fn(float(k))) for k in strikes], dtype=float)
    bad = np.flatnonzero(~np.isfinite(vals) | (vals < 0.0))
    if bad.size:
        i = bad[0]
        raise PricingError(f"{kind} price at strike {strikes[i]!r} is {vals[i]!r}")
    return vals


def portfolio_present_value(port: ReplicationPortfolio, bond_price_0: float,
                            call_price_0: ScalarFn, put_price_0: ScalarFn) -> float:
    """Value today from bond and option prices, discretised like the legs."""
    b0 = float(bond_price_0)
    if not math.isfinite(b0) or b0 < 0.0:
        raise PricingError(f"bond price is {b0!r}")
    m = np.array([port.atm_strike])
    # skip pricing the ATM pair when it carries no weight (e.g. the IL portfolio)
    c_m = _priced(call_price_0, m, "call")[0] if port.atm_call_qty != 0.0 else 0.0
    p_m = _priced(put_price_0, m, "put")[0] if port.atm_put_qty != 0.0 else 0.0
    return _combine(
        port.bond_notional * b0,
        port.atm_call_qty * c_m,
        port.atm_put_qty * p_m,
        port.put_qtys, _priced(put_price_0, port.put_strikes, "put"),
        port.call_qtys, _priced(call_price_0, port.call_strikes, "call"),
    )


def replication_error(port: ReplicationPortfolio, payoff: SmoothPayoff, probe_prices) -> tuple[float, float]:
    """``(max |portfolio - payoff|, price where it occurs)`` over the probes."""
    probes = np.atleast_1d(np.asarray(probe_prices, dtype=float))
    if probes.size == 0:
        raise ValueError("probe_prices is empty")
    probes = check_price(probes, "probe")
    err = np.abs(portfolio_payoff(port, probes) - _eval(payoff.value_at, probes))
    i = kernels.argmin_lowest(probes, -err)
    return float(err[i]), float(probes[i])
