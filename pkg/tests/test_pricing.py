import math

import numpy as np
import pytest

from ilhedge.amm import DomainError
from ilhedge.pricing import (
    BlackScholes,
    MarketParams,
    MissingQuoteError,
    QuoteTable,
    call_price,
    discount_bond,
    norm_cdf,
    put_price,
)

# 10^7-node trapezoid of E[(S_T - K)^+] under the lognormal law, S=K=100, sigma=0.2, T=1, r=0
ATM_CALL_QUADRATURE = 7.965567454162194


def test_discount_bond():
    assert discount_bond(MarketParams(100, 0.0, 0.2, 1.0)) == 1.0
    assert discount_bond(MarketParams(100, 0.05, 0.2, 1.0)) == pytest.approx(0.951229424500714, abs=1e-15)
    assert discount_bond(MarketParams(100, 0.05, 0.2, 0.5)) == pytest.approx(0.9753099120283326, abs=1e-15)


def test_norm_cdf_tails():
    assert norm_cdf(0.0) == 0.5
    assert norm_cdf(-10.0) == pytest.approx(7.619853024160527e-24, rel=1e-12)
    assert norm_cdf(10.0) == 1.0


def test_atm_call_against_quadrature():
    mp = MarketParams(100.0, 0.0, 0.2, 1.0)
    assert call_price(mp, 100.0) == pytest.approx(ATM_CALL_QUADRATURE, abs=1e-3)
    assert call_price(mp, 100.0) == pytest.approx(7.9656, abs=1e-4)
    assert put_price(mp, 100.0) == pytest.approx(7.9656, abs=1e-4)


def test_zero_volatility_limit():
    mp = MarketParams(100.0, 0.0, 0.0, 1.0)
    assert call_price(mp, 100.0) == 0.0
    assert put_price(mp, 90.0) == 0.0
    assert call_price(mp, 90.0) == pytest.approx(10.0)
    mp = MarketParams(100.0, 0.05, 0.0, 1.0)
    fwd = 100.0 * math.exp(0.05)
    assert put_price(mp, fwd - 1e-6) == 0.0
    assert call_price(mp, 100.0) == pytest.approx(math.exp(-0.05) * (fwd - 100.0))


def test_strike_limits():
    mp = MarketParams(100.0, 0.0, 0.5, 1.0)
    assert call_price(mp, 1e12) == pytest.approx(0.0, abs=1e-12)
    assert call_price(mp, 1e-12) == pytest.approx(100.0, rel=1e-12)


def test_invalid_inputs():
    with pytest.raises(DomainError):
        MarketParams(0.0, 0.0, 0.2, 1.0)
    with pytest.raises(DomainError):
        MarketParams(100.0, 0.0, -0.1, 1.0)
    with pytest.raises(DomainError):
        MarketParams(100.0, 0.0, 0.2, 0.0)
    with pytest.raises(DomainError):
        call_price(MarketParams(100.0, 0.0, 0.2, 1.0), 0.0)


def _random_params(rng, n):
    for _ in range(n):
        yield (
            MarketParams(rng.uniform(1, 1000), rng.uniform(-0.02, 0.15), rng.uniform(0.0, 2.0), rng.uniform(0.01, 5)),
            rng.uniform(1, 2000),
        )


def test_put_call_parity():
    rng = np.random.default_rng(11)
    for mp, k in _random_params(rng, 1000):
        lhs = call_price(mp, k) - put_price(mp, k)
        assert lhs == pytest.approx(mp.spot - k * discount_bond(mp), abs=1e-10)


def test_bounds_and_shape_in_strike():
    rng = np.random.default_rng(5)
    for mp, _ in _random_params(rng, 50):
        ks = np.linspace(mp.spot * 0.2, mp.spot * 3, 200)
        calls = np.array([call_price(mp, k) for k in ks])
        puts = np.array([put_price(mp, k) for k in ks])
        assert np.all(calls >= 0) and np.all(puts >= 0)
        assert np.all(calls <= mp.spot + 1e-12)
        assert np.all(puts <= ks * discount_bond(mp) + 1e-12)
        assert np.all(np.diff(calls) <= 1e-12)
        assert np.all(np.diff(calls, 2) >= -1e-9)


def test_black_scholes_quote_source():
    bs = BlackScholes(MarketParams(100.0, 0.01, 0.3, 0.5))
    assert bs.call(110.0) == call_price(bs.params, 110.0)
    assert bs.put(90.0) == put_price(bs.params, 90.0)
    assert bs.bond() == discount_bond(bs.params)


def test_quote_table_csv(tmp_path):
    path = tmp_path / "q.csv"
    path.write_text("kind,strike,premium\nput,64,2\ncall,156.25,3\nCALL,200,1.5\n")
    table = QuoteTable.from_csv(path)
    assert table.put(64.0) == 2.0
    assert table.call(156.25) == 3.0
    assert table.call(200) == 1.5
    with pytest.raises(MissingQuoteError) as err:
        table.put(65.0)
    assert err.value.missing == [("put", 65.0)]
    assert table.missing([64.0, 70.0], [156.25, 99.0]) == [("put", 70.0), ("call", 99.0)]


@pytest.mark.parametrize(
    "body",
    ["strike,kind,premium\n", "kind,strike,premium\nfuture,10,1\n", "kind,strike,premium\nput,10,-1\n",
     "kind,strike,premium\nput,0,1\n"],
)
def test_quote_table_rejects_bad_rows(tmp_path, body):
    path = tmp_path / "q.csv"
    path.write_text(body)
    with pytest.raises(ValueError):
        QuoteTable.from_csv(path)
