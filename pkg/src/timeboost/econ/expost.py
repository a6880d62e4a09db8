"""Equilibria when latency can be bought after the valuation is known.

With the reciprocal latency technology and the bid boost g*m/(m+1), the
cheapest way to produce a score s is a piecewise split between pure
latency (low scores) and a latency+bid mix (high scores).  The symmetric
equilibrium score function follows a first-order ODE above the marginal
type; below it players buy latency only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .models import DomainError, EquilibriumCurve, SignalTech, ValuationModel
from .numerics import rk4_path, simpson_on_grid


class InfeasibleScoreError(DomainError):
    """Scores at or above g cannot be produced at any cost."""


@dataclass(frozen=True)
class LatencyChoice:
    delay: float
    spend: float


def expost_latency_only(v: float, n: int = 2) -> LatencyChoice:
    """Equilibrium delay and spend when only latency can be bought.

    delay = n / ((n-1) * v^n); spend is its reciprocal.  A zero-valuation
    type waits forever and spends nothing.
    """
    if n < 2:
        raise DomainError(f"need at least 2 players, got {n}")
    if not (0.0 <= v <= 1.0):
        raise DomainError(f"valuation must lie in [0, 1], got {v}")
    if v == 0.0:
        return LatencyChoice(delay=math.inf, spend=0.0)
    spend = (n - 1) * v**n / n
    return LatencyChoice(delay=1.0 / spend, spend=spend)


def signal_cost(s: float, g: float) -> float:
    """Minimal spend (bid + latency) producing score s.

    (1 + 2*sqrt(g) + s)/(g - s) once bidding pays (s > -sqrt(g)), else the
    pure latency cost -1/s.  Continuous at the junction with value
    1/sqrt(g).
    """
    if g <= 0:
        raise DomainError(f"g must be positive, got {g}")
    if s >= g:
        raise InfeasibleScoreError(f"score {s} is not reachable (cap {g})")
    rg = math.sqrt(g)
    if s > -rg:
        return (1.0 + 2.0 * rg + s) / (g - s)
    return -1.0 / s


def marginal_signal_cost(s: float, g: float) -> float:
    """d/ds of signal_cost: (1+sqrt(g))^2/(g-s)^2 above -sqrt(g), 1/s^2 below."""
    if s >= g:
        raise InfeasibleScoreError(f"score {s} is not reachable (cap {g})")
    rg = math.sqrt(g)
    if s > -rg:
        return (1.0 + rg) ** 2 / (g - s) ** 2
    return 1.0 / (s * s)


def signal_cost_inverse(y: float, g: float) -> float:
    """Score whose cheapest production cost is y (> 0)."""
    if y <= 0:
        raise DomainError(f"cost must be positive, got {y}")
    rg = math.sqrt(g)
    if y < 1.0 / rg:
        return -1.0 / y
    return (y * g - 2.0 * rg - 1.0) / (y + 1.0)


def expost_optimal_split(s: float, g: float) -> tuple[float, float]:
    """Cheapest (bid m, delay t) pair with boost(m) - t = s.

    m = (s + sqrt(g))/(g - s) clamped at zero; the delay absorbs the rest
    of the score equation.  m + 1/t equals signal_cost(s, g).
    """
    if s >= g:
        raise InfeasibleScoreError(f"score {s} is not reachable (cap {g})")
    rg = math.sqrt(g)
    m = max(0.0, (s + rg) / (g - s))
    t = g * m / (m + 1.0) - s
    return m, t


def time_boost_tech(g: float) -> SignalTech:
    """The shipped boost/latency pair packaged as a generic signal tech."""
    return SignalTech(
        cost=lambda s: signal_cost(s, g),
        marginal=lambda s: marginal_signal_cost(s, g),
        inverse=lambda y: signal_cost_inverse(y, g),
        s_hi=g,
        name=f"time_boost(g={g})",
    )


def marginal_bidding_type(g: float, n: int = 2) -> float:
    """Lowest type that mixes bidding into its signal.

    Set by s(u) = -sqrt(g) against the latency-only branch
    s(v) = -n/((n-1) v^n), giving u = (n / ((n-1) sqrt(g)))^(1/n); reduces
    to sqrt(2/sqrt(g)) for two players.
    """
    if n < 2:
        raise DomainError(f"need at least 2 players, got {n}")
    if g <= 0:
        raise DomainError(f"g must be positive, got {g}")
    return (n / ((n - 1) * math.sqrt(g))) ** (1.0 / n)


def expost_equilibrium(g: float, n: int = 2, grid: int | np.ndarray = 1001) -> EquilibriumCurve:
    """Symmetric equilibrium score/bid/latency schedule on a type grid.

    Types below the marginal type u use latency only; above u the score
    solves c'(s) s'(v) = (n-1) v^(n-1) with boundary s(u) = -sqrt(g),
    integrated by RK4 exactly through the requested grid points.
    """
    if g <= 1.0:
        raise DomainError(f"g must exceed 1, got {g}")
    if n < 2:
        raise DomainError(f"need at least 2 players, got {n}")
    vs = np.linspace(0.0, 1.0, grid) if isinstance(grid, int) else np.asarray(grid, dtype=float)
    u = min(1.0, marginal_bidding_type(g, n))

    s = np.empty_like(vs)
    bid = np.zeros_like(vs)
    lat = np.empty_like(vs)

    low = vs < u
    with np.errstate(divide="ignore"):
        s[low] = np.where(vs[low] > 0, -n / ((n - 1) * vs[low] ** n), -np.inf)
    lat[low] = (n - 1) * vs[low] ** n / n

    high_idx = np.flatnonzero(~low)
    if len(high_idx):
        rg = math.sqrt(g)

        def deriv(v: float, sv: float) -> float:
            return (n - 1) * v ** (n - 1) / marginal_signal_cost(sv, g)

        s_high = rk4_path(deriv, u, -rg, vs[high_idx], h_max=2.5e-4)
        for j, i in enumerate(high_idx):
            m, t = expost_optimal_split(float(s_high[j]), g)
            s[i] = s_high[j]
            bid[i] = m
            lat[i] = 1.0 / t if t > 0 else 0.0

    return EquilibriumCurve(v=vs, s=s, bid=bid, latency_spend=lat, marginal_type=u, g=g, n=n)


@dataclass(frozen=True)
class BiddingShare:
    """Split of expected equilibrium expenditure between bids and latency."""

    value: float
    latency_share: float
    no_bidding: bool
    g: float
    n: int


def bidding_share(g: float, n: int = 2, grid: int = 2001,
                  model: ValuationModel | None = None) -> BiddingShare:
    """Expected bid expenditure b(g) = integral of m(v) f(v) over [u, 1].

    Tends to the all-latency average spend (1/6 for two uniform players)
    as g grows; returns a zero value with the no_bidding flag when g is too
    small for anyone to bid.
    """
    if model is None:
        model = ValuationModel.uniform()
    u = marginal_bidding_type(g, n)
    if u >= 1.0:
        curve = expost_equilibrium(g, n, grid) if g > 1.0 else None
        if curve is None:
            lat = (n - 1) / (n * (n + 1))
        else:
            f = np.array([model.pdf(x) for x in curve.v])
            lat = simpson_on_grid(curve.latency_spend * f, curve.v)
        return BiddingShare(value=0.0, latency_share=lat, no_bidding=True, g=g, n=n)
    curve = expost_equilibrium(g, n, grid)
    f = np.array([model.pdf(x) for x in curve.v])
    value = simpson_on_grid(curve.bid * f, curve.v)
    lat = simpson_on_grid(curve.latency_spend * f, curve.v)
    return BiddingShare(value=float(value), latency_share=float(lat), no_bidding=False, g=g, n=n)


@dataclass(frozen=True)
class RevenueEquivalence:
    expected_spend: float
    total_spend: float
    max_deviation: float
    n: int
    tech_name: str


def revenue_equivalence_check(tech: SignalTech, n: int = 2, grid: int = 2001) -> RevenueEquivalence:
    """Verify that equilibrium spend is technology-independent.

    For any increasing differentiable cost C the equilibrium satisfies
    C(s(v)) = (n-1)/n * v^n (uniform types), so the expected spend per
    player depends only on the valuation distribution.  Returns the
    realized expected spend and the worst defect of the solved schedule.
    """
    if n < 2:
        raise DomainError(f"need at least 2 players, got {n}")
    vs = np.linspace(0.0, 1.0, grid)
    target = (n - 1) / n * vs**n
    achieved = np.zeros_like(vs)
    for i, y in enumerate(target):
        if y <= 0.0:
            continue
        s = tech.invert(float(y))
        achieved[i] = tech.cost(s)
    max_dev = float(np.max(np.abs(achieved - target)))
    expected = float(simpson_on_grid(achieved, vs))
    return RevenueEquivalence(
        expected_spend=expected,
        total_spend=n * expected,
        max_deviation=max_dev,
        n=n,
        tech_name=tech.name,
    )
