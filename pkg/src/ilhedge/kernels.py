"""Hot loops, in two interchangeable implementations.

``*_numpy`` functions are the reference path; ``*_numba`` are compiled with
``numba.njit(parallel=True)``.  The unsuffixed names are bound to one of the
two at import time (see :mod:`ilhedge._accel`).  Both paths are deterministic:
parallel loops only fill per-price slots, reductions run sequentially.
"""

from __future__ import annotations

import numpy as np

from . import _accel
from ._accel import prange

# prices x legs cells processed per numpy chunk
_CHUNK_CELLS = 2_000_000


def portfolio_payoff_numpy(prices, bond, m, atm_call, atm_put, put_k, put_q, call_k, call_q):
    prices = np.ascontiguousarray(prices, dtype=np.float64)
    out = bond + atm_call * np.maximum(prices - m, 0.0) + atm_put * np.maximum(m - prices, 0.0)
    n_legs = max(len(put_k) + len(call_k), 1)
    step = max(_CHUNK_CELLS // n_legs, 1)
    for lo in range(0, len(prices), step):
        p = prices[lo : lo + step, None]
        acc = np.zeros(p.shape[0])
        if len(put_k):
            acc += np.maximum(put_k[None, :] - p, 0.0) @ put_q
        if len(call_k):
            acc += np.maximum(p - call_k[None, :], 0.0) @ call_q
        out[lo : lo + step] += acc
    return out


@_accel.njit(parallel=True, cache=False)
def _portfolio_payoff_jit(prices, bond, m, atm_call, atm_put, put_k, put_q, call_k, call_q):
    n = prices.shape[0]
    out = np.empty(n)
    for i in prange(n):
        p = prices[i]
        acc = 0.0
        # puts only pay below their strike; strikes are ascending
        for j in range(put_k.shape[0] - 1, -1, -1):
            if put_k[j] <= p:
                break
            acc += put_q[j] * (put_k[j] - p)
        for j in range(call_k.shape[0]):
            if call_k[j] >= p:
                break
            acc += call_q[j] * (p - call_k[j])
        out[i] = bond + atm_call * max(p - m, 0.0) + atm_put * max(m - p, 0.0) + acc
    return out


def portfolio_payoff_numba(prices, bond, m, atm_call, atm_put, put_k, put_q, call_k, call_q):
    _accel.apply_thread_cap()
    return _portfolio_payoff_jit(
        np.ascontiguousarray(prices, dtype=np.float64), float(bond), float(m), float(atm_call), float(atm_put),
        np.ascontiguousarray(put_k, dtype=np.float64), np.ascontiguousarray(put_q, dtype=np.float64),
        np.ascontiguousarray(call_k, dtype=np.float64), np.ascontiguousarray(call_q, dtype=np.float64),
    )


def hedge_pnl_numpy(prices, carry, capital, entry_price, put_strike, put_qty, call_strike, call_qty):
    """Total hedged PnL per price; ``carry`` is ``r_p * c - D``."""
    prices = np.asarray(prices, dtype=np.float64)
    ratio = prices / entry_price
    loss = capital * (np.sqrt(ratio) - 0.5 * (ratio + 1.0))
    payoff = call_qty * np.maximum(prices - call_strike, 0.0) + put_qty * np.maximum(put_strike - prices, 0.0)
    return carry + payoff + loss


@_accel.njit(parallel=True, cache=False)
def _hedge_pnl_jit(prices, carry, capital, entry_price, put_strike, put_qty, call_strike, call_qty):
    n = prices.shape[0]
    out = np.empty(n)
    for i in prange(n):
        p = prices[i]
        ratio = p / entry_price
        loss = capital * (np.sqrt(ratio) - 0.5 * (ratio + 1.0))
        payoff = call_qty * max(p - call_strike, 0.0) + put_qty * max(put_strike - p, 0.0)
        out[i] = carry + payoff + loss
    return out


def hedge_pnl_numba(prices, carry, capital, entry_price, put_strike, put_qty, call_strike, call_qty):
    _accel.apply_thread_cap()
    return _hedge_pnl_jit(
        np.ascontiguousarray(prices, dtype=np.float64), float(carry), float(capital), float(entry_price),
        float(put_strike), float(put_qty), float(call_strike), float(call_qty),
    )


def argmin_lowest(prices, values):
    """Index of the minimum value; ties go to the lowest price."""
    prices = np.asarray(prices)
    values = np.asarray(values)
    vmin = values.min()
    idx = np.flatnonzero(values == vmin)
    return int(idx[np.argmin(prices[idx])])


if _accel.USE_NUMBA:
    portfolio_payoff = portfolio_payoff_numba
    hedge_pnl = hedge_pnl_numba
    BACKEND = "numba"
else:
    portfolio_payoff = portfolio_payoff_numpy
    hedge_pnl = hedge_pnl_numpy
    BACKEND = "numpy"
