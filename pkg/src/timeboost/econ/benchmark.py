"""Block-to-block auction benchmark and payoff-equivalence checks.

Compares the continuous score policy against fixed-window batch auctions:
exclusion window for the slower party, average confirmation delay, and the
Monte Carlo payoff comparison between all-pay and winner-pays bidding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..score import ScoreParams, time_boost
from .models import DomainError, ValuationModel


@dataclass(frozen=True)
class BlockAuctionMetrics:
    window_fraction: float
    batch_avg_delay: float
    continuous_avg_delay: float
    latency_importance_vs_l1: float
    g: float
    s1: float
    s2: float
    trials: int


def block_auction_compare(
    g: float,
    s1: float,
    s2: float,
    bid_sampler: Callable[[np.random.Generator, int], np.ndarray] | None = None,
    trials: int = 100_000,
    seed: int = 0,
    c: float = 1.0,
    l1_interval: float = 12.0,
) -> BlockAuctionMetrics:
    """Metrics for a batch auction with window g against the score policy.

    A party reaching the sequencer in s1 can wait until g - s1 into the
    window, so a slower party (s2) is shut out of (s2-s1)/g of the races.
    Batch delay for uniform arrivals averages g/2 regardless of bids; the
    continuous policy delays each transaction by g minus its boost.
    """
    if not (0.0 <= s1 <= s2 < g):
        raise DomainError(f"need 0 <= s1 <= s2 < g, got s1={s1}, s2={s2}, g={g}")
    if trials < 1:
        raise DomainError("trials must be positive")
    rng = np.random.default_rng(seed)
    arrivals = rng.random(trials) * g
    batch_delay = float(np.mean(g - arrivals))

    if bid_sampler is None:
        bids = np.zeros(trials)
    else:
        bids = np.asarray(bid_sampler(rng, trials), dtype=float)
    params = ScoreParams(g=g, c=c)
    boosts = params.g * bids / (bids + params.c)
    continuous_delay = float(np.mean(g - boosts))

    return BlockAuctionMetrics(
        window_fraction=(s2 - s1) / g,
        batch_avg_delay=batch_delay,
        continuous_avg_delay=continuous_delay,
        latency_importance_vs_l1=l1_interval / g,
        g=g,
        s1=s1,
        s2=s2,
        trials=trials,
    )


@dataclass(frozen=True)
class PayoffEquivalence:
    allpay_payoff: float
    firstprice_payoff: float
    allpay_se: float
    firstprice_se: float
    n: int
    trials: int

    @property
    def gap(self) -> float:
        return abs(self.allpay_payoff - self.firstprice_payoff)

    @property
    def gap_se(self) -> float:
        return math.hypot(self.allpay_se, self.firstprice_se)


def payoff_equivalence_mc(
    model: ValuationModel | None = None,
    n: int = 2,
    trials: int = 1_000_000,
    seed: int = 0,
) -> PayoffEquivalence:
    """Monte Carlo expected payoffs under all-pay and winner-pays bidding.

    Both formats are simulated at their uniform-type equilibrium
    strategies: all-pay types spend (n-1)/n * v^n win or lose; first-price
    types bid the expected best rival below them, (n-1)/n * v.  A single
    bidder keeps the full valuation either way.
    """
    if model is None:
        model = ValuationModel.uniform()
    if n < 1:
        raise DomainError(f"need at least 1 player, got {n}")
    if trials < 1:
        raise DomainError("trials must be positive")
    rng = np.random.default_rng(seed)

    v = model.sample(rng, trials * n).reshape(trials, n)
    v0 = v[:, 0]
    if n == 1:
        win = np.ones(trials, dtype=bool)
    else:
        win = v0 >= v[:, 1:].max(axis=1)

    allpay = win * v0 - (n - 1) / n * v0**n
    firstprice = win * (v0 - (n - 1) / n * v0)

    return PayoffEquivalence(
        allpay_payoff=float(allpay.mean()),
        firstprice_payoff=float(firstprice.mean()),
        allpay_se=float(allpay.std(ddof=1) / math.sqrt(trials)),
        firstprice_se=float(firstprice.std(ddof=1) / math.sqrt(trials)),
        n=n,
        trials=trials,
    )
