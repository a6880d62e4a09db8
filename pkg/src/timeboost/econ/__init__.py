"""Numerical solvers for the bidding/latency equilibria and benchmarks."""

from .benchmark import BlockAuctionMetrics, PayoffEquivalence, block_auction_compare, payoff_equivalence_mc
from .exante import (
    BudgetEquilibrium,
    SeparationCurves,
    exante_budget_eq,
    exante_latency_mixed_eq,
    full_separation_bid,
    full_separation_value,
    partial_separation_solve,
)
from .expost import (
    BiddingShare,
    LatencyChoice,
    RevenueEquivalence,
    bidding_share,
    expost_equilibrium,
    expost_latency_only,
    expost_optimal_split,
    marginal_bidding_type,
    marginal_signal_cost,
    revenue_equivalence_check,
    signal_cost,
    signal_cost_inverse,
    time_boost_tech,
)
from .models import (
    DegenerateModelError,
    DomainError,
    EquilibriumCurve,
    LatencyTech,
    MixedStrategy,
    SignalTech,
    ValuationModel,
)

__all__ = [
    "BiddingShare",
    "BlockAuctionMetrics",
    "BudgetEquilibrium",
    "DegenerateModelError",
    "DomainError",
    "EquilibriumCurve",
    "LatencyChoice",
    "LatencyTech",
    "MixedStrategy",
    "PayoffEquivalence",
    "RevenueEquivalence",
    "SeparationCurves",
    "SignalTech",
    "ValuationModel",
    "bidding_share",
    "block_auction_compare",
    "exante_budget_eq",
    "exante_latency_mixed_eq",
    "expost_equilibrium",
    "expost_latency_only",
    "expost_optimal_split",
    "full_separation_bid",
    "full_separation_value",
    "marginal_bidding_type",
    "marginal_signal_cost",
    "partial_separation_solve",
    "payoff_equivalence_mc",
    "revenue_equivalence_check",
    "signal_cost",
    "signal_cost_inverse",
    "time_boost_tech",
]
