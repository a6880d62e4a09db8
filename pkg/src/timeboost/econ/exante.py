"""Equilibria when latency is bought before valuations are known.

Covers the pure latency race (mixed equilibrium), the budget-constrained
race, and the bidding stage that follows a fixed latency gap: full
separation when the gap is zero, partial separation (entry threshold plus
two coupled signal curves) when it is not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .models import DegenerateModelError, DomainError, MixedStrategy, ValuationModel
from .numerics import cumulative_integral


def exante_latency_mixed_eq(model: ValuationModel) -> MixedStrategy:
    """Symmetric mixed equilibrium of the two-player latency race.

    Each player spends uniformly at random on (0, E[V]); every spend level
    in the support is a best response with payoff exactly zero.
    """
    ev = model.mean
    if not (math.isfinite(ev) and ev > 0):
        raise DegenerateModelError(f"mean valuation must be positive, got {ev}")
    return MixedStrategy(density=((0.0, ev, 1.0 / ev),))


@dataclass(frozen=True)
class BudgetEquilibrium:
    weak: MixedStrategy
    strong: MixedStrategy
    weak_payoff: float
    strong_payoff: float


def exante_budget_eq(b1: float, b2: float, model: ValuationModel) -> BudgetEquilibrium:
    """Mixed equilibrium of the latency race with budgets b1 < b2.

    The weak player sits out with probability (E[V]-b1)/E[V] and otherwise
    randomizes up to its budget; the strong player randomizes up to b1 and
    parks the rest of its probability there.  Payoffs are 0 and E[V]-b1.
    """
    ev = model.mean
    if not (0.0 < b1 < ev):
        raise DomainError(f"weak budget must lie in (0, E[V]) = (0, {ev}), got {b1}")
    if not (b2 > b1):
        raise DomainError(f"strong budget must exceed the weak one, got {b2} <= {b1}")
    weak = MixedStrategy(
        atoms=((0.0, (ev - b1) / ev),),
        density=((0.0, b1, 1.0 / ev),),
    )
    strong = MixedStrategy(
        atoms=((b1, (ev - b1) / ev),),
        density=((0.0, b1, 1.0 / ev),),
    )
    return BudgetEquilibrium(weak=weak, strong=strong, weak_payoff=0.0, strong_payoff=ev - b1)


def full_separation_bid(v: float, g: float) -> float:
    """Signal bought by type v when both players share the same latency.

    Closed form g*v^2/(2+v^2); its inverse is value_of_signal.
    """
    if not (0.0 <= v <= 1.0):
        raise DomainError(f"valuation must lie in [0, 1], got {v}")
    if g <= 0:
        raise DomainError(f"g must be positive, got {g}")
    return g * v * v / (2.0 + v * v)


def full_separation_value(pi: float, g: float) -> float:
    """Type that buys signal pi under equal latency: sqrt(2*pi/(g-pi))."""
    if not (0.0 <= pi < g):
        raise DomainError(f"signal must lie in [0, g), got {pi}")
    return math.sqrt(2.0 * pi / (g - pi))


@dataclass(frozen=True)
class SeparationCurves:
    """Partial-separation equilibrium for a latency gap delta in (0, g).

    Player 1 is the low-latency side (arrives delta earlier).  pi1/v1 map
    player 1's bid level to the type using it, likewise pi2/v2 for player 2
    (whose bids start at delta).  Below `threshold` nobody bids.
    """

    g: float
    delta: float
    threshold: float
    pi1: np.ndarray
    v1: np.ndarray
    pi2: np.ndarray
    v2: np.ndarray

    def bid_of_value(self, player: int, v: np.ndarray | float) -> np.ndarray:
        """Equilibrium bid signal pi_i(v); zero below the entry threshold."""
        v = np.asarray(v, dtype=float)
        if player == 1:
            out = np.interp(v, self.v1, self.pi1)
        elif player == 2:
            out = np.interp(v, self.v2, self.pi2)
        else:
            raise ValueError("player must be 1 or 2")
        return np.where(v < self.threshold, 0.0, out)

    def signal_of_value(self, player: int, v: np.ndarray | float) -> np.ndarray:
        """Total signal pi_i(v) - t_i with timestamps normalized to t2 = 0."""
        base = self.bid_of_value(player, v)
        return base + self.delta if player == 1 else base


def partial_separation_solve(g: float, delta: float, grid: int = 2000) -> SeparationCurves:
    """Solve the coupled signal ODEs for a nonzero latency gap.

    Both curves come from one cumulative quadrature: the product
    v1(pi)*v2(pi+delta) has the closed form pi/(g-pi) + (pi+delta)/(g-pi-delta),
    which pins the entry threshold sqrt(delta/(g-delta)) and turns each
    curve into exp of an integral.
    """
    if not (0.0 < delta < g):
        raise DomainError(f"latency gap must lie in (0, g), got delta={delta}, g={g}")
    if grid < 16:
        raise ValueError("grid too small")
    threshold = math.sqrt(delta / (g - delta))

    def denom(x: float) -> float:
        return x / (g - x) + (x + delta) / (g - x - delta)

    def integrand1(x: float) -> float:
        return g / ((g - x - delta) ** 2) / denom(x)

    def integrand2(x: float) -> float:
        return g / ((g - x) ** 2) / denom(x)

    # The integrands have a sharp (integrable) knee of width ~delta at 0,
    # so the pi-grid is log-spaced near 0 and linear further out.
    cap = (g - delta) * 0.999999
    n_log = grid // 2
    n_lin = grid - n_log
    knee = min(delta, cap / 4.0)
    xs_log = np.geomspace(knee * 1e-6, knee, n_log)
    xs_lin = np.linspace(knee, cap, n_lin + 1)[1:]
    xs = np.concatenate([[0.0], xs_log, xs_lin])

    cum1 = cumulative_integral(integrand1, xs)
    cum2 = cumulative_integral(integrand2, xs)
    v1 = threshold * np.exp(cum1)
    v2 = threshold * np.exp(cum2)

    # Keep only the region where types exist (v <= 1), ending exactly at 1.
    def clip_curve(xs: np.ndarray, vs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        idx = int(np.searchsorted(vs, 1.0))
        if idx >= len(vs):
            return xs, vs
        x_top = float(np.interp(1.0, vs[: idx + 1], xs[: idx + 1]))
        return np.append(xs[:idx], x_top), np.append(vs[:idx], 1.0)

    pi1, v1 = clip_curve(xs, v1)
    pi2_base, v2 = clip_curve(xs, v2)
    return SeparationCurves(
        g=g,
        delta=delta,
        threshold=threshold,
        pi1=pi1,
        v1=v1,
        pi2=pi2_base + delta,
        v2=v2,
    )
