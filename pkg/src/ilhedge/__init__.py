"""Impermanent loss of constant-product pools: replication and strangle hedges."""

from .amm import (
    DomainError,
    PoolPosition,
    il,
    il_curvature,
    il_slope,
    reserves_at_price,
    value_hold,
    value_pool,
)
from .hedging import (
    CoverageReport,
    HedgeBand,
    HedgedPosition,
    SolveResult,
    Strangle,
    StrikeOrderError,
    check_proposition,
    proposition_quantity_bounds,
    required_pool_return,
    solve_min_strangle,
    strangle_payoff,
    total_pnl,
    verify_coverage_grid,
)
from .pricing import BlackScholes, MarketParams, MissingQuoteError, QuoteTable, call_price, discount_bond, put_price
from .replication import (
    ReplicationPortfolio,
    SmoothPayoff,
    StrikeGrid,
    build_portfolio,
    portfolio_payoff,
    portfolio_present_value,
    replication_error,
)

__version__ = "0.1.0"
