"""Model objects for the bidding/latency games.

Valuations live on [0, 1]; the uniform model is the one with closed-form
reference values, but the solvers accept any distribution object.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .numerics import bisect_root


class DegenerateModelError(ValueError):
    """The valuation model cannot support the requested equilibrium."""


class DomainError(ValueError):
    """A parameter is outside the region where the solution exists."""


@dataclass(frozen=True)
class ValuationModel:
    """Distribution of a player's valuation.

    cdf must be monotone with cdf(0)=0 and cdf(1)=1; pdf is its density.
    """

    cdf: Callable[[float], float]
    pdf: Callable[[float], float]
    mean: float
    name: str = "custom"

    @staticmethod
    def uniform() -> "ValuationModel":
        return ValuationModel(
            cdf=lambda x: min(1.0, max(0.0, x)),
            pdf=lambda x: 1.0 if 0.0 <= x <= 1.0 else 0.0,
            mean=0.5,
            name="uniform",
        )

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.name == "uniform":
            return rng.random(n)
        u = rng.random(n)
        return np.array([bisect_root(lambda x, ui=ui: self.cdf(x) - ui, 0.0, 1.0) for ui in u])


@dataclass(frozen=True)
class LatencyTech:
    """Cost of achieving a given delivery delay, and its inverse.

    The default is spend = 1/delay: halving the delay doubles the bill.
    """

    cost: Callable[[float], float]
    delay_for_spend: Callable[[float], float]

    @staticmethod
    def reciprocal() -> "LatencyTech":
        return LatencyTech(cost=lambda t: 1.0 / t, delay_for_spend=lambda x: 1.0 / x)


@dataclass(frozen=True)
class SignalTech:
    """An increasing, differentiable cost C(s) of producing score s.

    `inverse` may be omitted, in which case inversion falls back to a
    bracketed search between s_lo and s_hi.
    """

    cost: Callable[[float], float]
    marginal: Callable[[float], float] | None = None
    inverse: Callable[[float], float] | None = None
    s_lo: float = -1e9
    s_hi: float = math.inf
    name: str = "custom"

    def invert(self, y: float) -> float:
        if self.inverse is not None:
            return self.inverse(y)
        hi = self.s_hi if math.isfinite(self.s_hi) else 1e9
        return bisect_root(lambda s: self.cost(s) - y, self.s_lo, hi)


@dataclass(frozen=True)
class MixedStrategy:
    """A spend distribution: point atoms plus piecewise-constant density.

    atoms: (location, mass) pairs; density: (lo, hi, height) pieces.
    Total mass must be 1.
    """

    atoms: tuple[tuple[float, float], ...] = ()
    density: tuple[tuple[float, float, float], ...] = ()

    def total_mass(self) -> float:
        mass = sum(m for _, m in self.atoms)
        mass += sum((hi - lo) * h for lo, hi, h in self.density)
        return mass

    def cdf(self, x: float) -> float:
        p = sum(m for loc, m in self.atoms if loc <= x)
        for lo, hi, h in self.density:
            if x > lo:
                p += (min(x, hi) - lo) * h
        return p

    def mean(self) -> float:
        mu = sum(loc * m for loc, m in self.atoms)
        mu += sum(0.5 * (lo + hi) * (hi - lo) * h for lo, hi, h in self.density)
        return mu

    def support_max(self) -> float:
        top = max((loc for loc, m in self.atoms if m > 0), default=0.0)
        for lo, hi, h in self.density:
            if h > 0:
                top = max(top, hi)
        return top

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        u = rng.random(n)
        out = np.empty(n)
        # Inverse-transform over the atom/density pieces in location order.
        pieces: list[tuple[float, float, float, float]] = []  # (cum_lo, cum_hi, x_lo, x_hi)
        cum = 0.0
        events: list[tuple[float, str, tuple]] = []
        for loc, m in self.atoms:
            events.append((loc, "atom", (loc, m)))
        for lo, hi, h in self.density:
            events.append((lo, "dens", (lo, hi, h)))
        events.sort(key=lambda e: e[0])
        for _, kind, payload in events:
            if kind == "atom":
                loc, m = payload
                pieces.append((cum, cum + m, loc, loc))
                cum += m
            else:
                lo, hi, h = payload
                pieces.append((cum, cum + (hi - lo) * h, lo, hi))
                cum += (hi - lo) * h
        for i, ui in enumerate(u):
            ui = min(ui, cum - 1e-15)
            for c_lo, c_hi, x_lo, x_hi in pieces:
                if ui < c_hi or c_hi == cum:
                    if x_lo == x_hi:
                        out[i] = x_lo
                    else:
                        frac = (ui - c_lo) / (c_hi - c_lo)
                        out[i] = x_lo + frac * (x_hi - x_lo)
                    break
        return out


@dataclass(frozen=True)
class EquilibriumCurve:
    """Sampled symmetric equilibrium: valuation -> (score, bid, latency spend)."""

    v: np.ndarray
    s: np.ndarray
    bid: np.ndarray
    latency_spend: np.ndarray
    marginal_type: float
    g: float
    n: int

    @property
    def total_cost(self) -> np.ndarray:
        return self.bid + self.latency_spend
