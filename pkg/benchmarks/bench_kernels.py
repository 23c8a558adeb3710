"""Time the numba kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

The first numba call (JIT compile) is reported separately.
"""

import argparse
import time

import numpy as np

from ilhedge import PoolPosition, SmoothPayoff, StrikeGrid, build_portfolio, kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--cells", type=int, default=2000)
    ap.add_argument("--probes", type=int, default=20_001)
    args = ap.parse_args()

    pool = PoolPosition.from_capital(2000.0, 100.0)
    port = build_portfolio(SmoothPayoff.impermanent_loss(pool), StrikeGrid.uniform(100.0, 10.0, 1000.0, args.cells))
    probes = np.linspace(25.0, 400.0, args.probes)
    legs = (port.bond_notional, port.atm_strike, port.atm_call_qty, port.atm_put_qty,
            port.put_strikes, port.put_qtys, port.call_strikes, port.call_qtys)
    grid = np.linspace(20.0, 500.0, 1_000_001)
    pnl = (89.0, 2000.0, 100.0, 64.0, 2.5, 156.25, 2.0)

    cases = [
        (f"portfolio_payoff {2 * args.cells} legs x {args.probes} prices", kernels.portfolio_payoff_numpy,
         kernels.portfolio_payoff_numba, (probes, *legs)),
        (f"hedge_pnl {grid.size} prices", kernels.hedge_pnl_numpy, kernels.hedge_pnl_numba, (grid, *pnl)),
    ]
    print(f"{'kernel':<48} {'numpy':>10} {'numba':>10} {'jit':>8} {'speedup':>8}")
    for name, np_fn, nb_fn, fargs in cases:
        t0 = time.perf_counter()
        nb_fn(*fargs)
        jit = time.perf_counter() - t0
        t_np = best_of(lambda: np_fn(*fargs), args.repeat)
        t_nb = best_of(lambda: nb_fn(*fargs), args.repeat)
        assert np.allclose(np_fn(*fargs), nb_fn(*fargs), rtol=1e-12, atol=1e-9)
        print(f"{name:<48} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms {jit:>7.2f}s {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
