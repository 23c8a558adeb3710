"""``ilhedge`` command line.

Subcommands::

    ilhedge il-curve  --config S.json [--from A --to B --steps N] [--out F]
    ilhedge replicate --config S.json [--grid-cells N --kmin A --kmax B] [--out F]
    ilhedge hedge     --config S.json [--out REPORT.json] [--curve PNL.csv]

Exit codes: 0 ok / covered, 2 usage, 3 bad data, 4 hedge infeasible or not covered.
"""

from __future__ import annotations

import argparse
import contextlib
import io
import json
import logging
import sys
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import amm, hedging, replication
from .amm import DomainError
from .pricing import MissingQuoteError
from .scenario import Scenario, ScenarioError, load_scenario

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INFEASIBLE = 0, 2, 3, 4

log = logging.getLogger("ilhedge")


class DataError(Exception):
    pass


def fmt(v: float) -> str:
    return "%.17g" % v


def write_csv(fh, header: Sequence[str], columns: Iterable[np.ndarray]) -> None:
    fh.write(",".join(header) + "\n")
    for row in zip(*columns):
        fh.write(",".join(fmt(float(v)) for v in row) + "\n")


@contextlib.contextmanager
def _sink(path: str | None):
    # buffer fully so a failed run leaves no partial file
    buf = io.StringIO()
    yield buf
    if path is None or path == "-":
        sys.stdout.write(buf.getvalue())
        sys.stdout.flush()
    else:
        Path(path).write_text(buf.getvalue())


def price_axis(lo: float, hi: float, steps: int, spacing: str = "log") -> np.ndarray:
    """``steps`` intervals, i.e. ``steps + 1`` prices from ``lo`` to ``hi``."""
    if spacing == "log":
        pts = np.geomspace(lo, hi, steps + 1)
    else:
        pts = np.linspace(lo, hi, steps + 1)
    pts[0], pts[-1] = lo, hi
    return pts


def _range(args, sc: Scenario, parser) -> tuple[float, float, int]:
    p0 = sc.pool.entry_price
    lo = args.price_from if args.price_from is not None else sc.output.price_from or p0 / 4.0
    hi = args.price_to if args.price_to is not None else sc.output.price_to or 4.0 * p0
    steps = args.steps if args.steps is not None else sc.output.steps
    if not (0.0 < lo < hi and np.isfinite(hi)):
        parser.error(f"price range must satisfy 0 < from < to, got [{lo}, {hi}]")
    if steps < 2:
        parser.error(f"--steps must be at least 2, got {steps}")
    return lo, hi, steps


def cmd_il_curve(args, sc: Scenario, parser) -> int:
    lo, hi, steps = _range(args, sc, parser)
    prices = price_axis(lo, hi, steps, args.spacing)
    pool = sc.pool
    cols = (prices, amm.value_pool(pool, prices), amm.value_hold(pool, prices), amm.il(pool, prices),
            amm.il_slope(pool, prices))
    with _sink(args.out) as fh:
        write_csv(fh, ("price", "v_pool", "v_hold", "il", "il_slope"), cols)
    return EXIT_OK


def _payoff(kind: str, sc: Scenario, center: float) -> replication.SmoothPayoff:
    if kind == "quadratic":
        return replication.SmoothPayoff.quadratic(center)
    f = replication.SmoothPayoff.impermanent_loss(sc.pool)
    return f.negated() if kind == "hedge" else f


def cmd_replicate(args, sc: Scenario, parser) -> int:
    rc = sc.replication
    kind = args.payoff or rc.payoff
    m = rc.center or sc.pool.entry_price
    cells = args.grid_cells if args.grid_cells is not None else rc.cells
    if cells < 1:
        parser.error("--grid-cells must be positive")
    k_min = args.kmin if args.kmin is not None else rc.k_min
    k_max = args.kmax if args.kmax is not None else rc.k_max
    try:
        grid = replication.StrikeGrid.uniform(m, k_min, k_max, cells)
    except (ValueError, DomainError) as exc:
        parser.error(str(exc))
    payoff = _payoff(kind, sc, m)
    port = replication.build_portfolio(payoff, grid)

    pricer = sc.pricer
    if pricer is None:
        raise DataError("scenario needs `market` or `quotes` to price the portfolio")
    if hasattr(pricer, "missing"):
        put_k = port.put_strikes.tolist()
        call_k = port.call_strikes.tolist()
        if port.atm_call_qty != 0.0:
            put_k.append(m)
            call_k.append(m)
        gaps = pricer.missing(put_k, call_k)
        if gaps:
            raise MissingQuoteError(gaps)
    pv = replication.portfolio_present_value(port, pricer.bond(), pricer.call, pricer.put)

    if sc.band is not None and sc.band.p_lower < sc.band.p_upper:
        lo, hi = sc.band.p_lower, sc.band.p_upper
    else:
        lo, hi, _ = _range(args, sc, parser)
    probes = np.linspace(lo, hi, 10_001)
    err, where = replication.replication_error(port, payoff, probes)
    doc = {
        "payoff": payoff.description,
        "portfolio": port.to_dict(),
        "present_value": pv,
        "pricer": type(pricer).__name__,
        "replication_error": {"max_abs_error": err, "argmax_price": where, "probe_from": lo, "probe_to": hi,
                              "probes": int(probes.size)},
    }
    with _sink(args.out) as fh:
        fh.write(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def pnl_curve(hp: hedging.HedgedPosition, band: hedging.HedgeBand, steps: int):
    lo, hi = 0.8 * band.p_lower, 1.2 * band.p_upper
    s = hp.strangle
    kinks = [k for k in (s.put_strike, s.call_strike, hp.pool.entry_price, band.p_lower, band.p_upper) if lo <= k <= hi]
    prices = np.unique(np.concatenate([np.linspace(lo, hi, steps + 1), kinks]))
    pool_leg = hp.pool_return_rate * hp.pool.capital_c + amm.il(hp.pool, prices)
    option_leg = hedging.strangle_payoff(s, prices) - s.cost
    return prices, pool_leg, option_leg, hedging.total_pnl(hp, prices)


def cmd_hedge(args, sc: Scenario, parser) -> int:
    if sc.band is None:
        raise ScenarioError("band", "missing")
    band = sc.band
    solved = sc.strangle is None
    if solved:
        pricer = sc.pricer
        if pricer is None:
            raise DataError("scenario needs `strangle`, `quotes` or `market`")
        result = hedging.solve_min_strangle(sc.pool, band, pricer.put, pricer.call, sc.pool_return_rate)
        strangle, required, feasible = result.strangle, result.required_return, result.feasible
    else:
        strangle = sc.strangle
        required = hedging.required_pool_return(sc.pool, strangle)
        feasible = required <= sc.pool_return_rate
    hp = hedging.HedgedPosition(sc.pool, strangle, sc.pool_return_rate)
    try:
        report = hedging.check_proposition(hp, band, args.grid_points)
    except hedging.StrikeOrderError as exc:
        raise ScenarioError("strangle", str(exc)) from None
    doc = {
        "solved": solved,
        "feasible": feasible,
        "pool_return_rate": sc.pool_return_rate,
        "required_return": required,
        "strangle": strangle.to_dict(),
        "strategy_cost": strangle.cost,
        "band": [band.p_lower, band.p_upper],
        "coverage": report.to_dict(),
    }
    with _sink(args.out) as fh:
        fh.write(json.dumps(doc, indent=2) + "\n")
    if args.curve:
        steps = args.steps if args.steps is not None else sc.output.steps
        if steps < 2:
            parser.error(f"--steps must be at least 2, got {steps}")
        with _sink(args.curve) as fh:
            write_csv(fh, ("price", "pnl_pool_hold", "pnl_strangle", "pnl_total"), pnl_curve(hp, band, steps))
    if not feasible:
        log.error("infeasible: pool return %r below required %r", sc.pool_return_rate, required)
        return EXIT_INFEASIBLE
    if not report.covered:
        log.error("not covered: minimum PnL %r at %r", report.grid_min_pnl, report.grid_argmin)
        return EXIT_INFEASIBLE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ilhedge", description="Impermanent loss replication and strangle hedging.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="scenario JSON")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--from", dest="price_from", type=float, default=None)
        p.add_argument("--to", dest="price_to", type=float, default=None)
        p.add_argument("--steps", type=int, default=None, help="number of price intervals")
        p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("il-curve", help="CSV of pool value, hold value and impermanent loss")
    common(p)
    p.add_argument("--spacing", choices=("log", "linear"), default="log")
    p.set_defaults(func=cmd_il_curve)

    p = sub.add_parser("replicate", help="static replication portfolio as JSON")
    common(p)
    p.add_argument("--grid-cells", type=int, default=None, help="cells per side of the strike grid")
    p.add_argument("--kmin", type=float, default=None)
    p.add_argument("--kmax", type=float, default=None)
    p.add_argument("--payoff", choices=("il", "hedge", "quadratic"), default=None)
    p.set_defaults(func=cmd_replicate)

    p = sub.add_parser("hedge", help="solve/check a strangle hedge, JSON report")
    common(p)
    p.add_argument("--curve", default=None, help="write the PnL curve CSV here")
    p.add_argument("--grid-points", type=int, default=hedging.DEFAULT_GRID_POINTS)
    p.set_defaults(func=cmd_hedge)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="ilhedge: %(message)s", stream=sys.stderr)
    try:
        sc = load_scenario(args.config)
        return args.func(args, sc, parser)
    except MissingQuoteError as exc:
        strikes = ", ".join(f"{kind} {k!r}" for kind, k in exc.missing)
        print(f"ilhedge: missing quotes for {len(exc.missing)} strike(s): {strikes}", file=sys.stderr)
        return EXIT_DATA
    except (ScenarioError, DataError, DomainError, replication.PricingError, replication.PayoffCheckError) as exc:
        print(f"ilhedge: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
