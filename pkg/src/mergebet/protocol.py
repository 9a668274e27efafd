"""The betting protocol: futures-contract orders, settlement, capitals.

Each step the two Forecasters announce measures over the whole future, the
Sceptic places one order per side, Reality reveals a symbol, and the books
are settled. Accounting is cash plus mark-to-market: buying at the quoted
price leaves capital unchanged, a contract on a single symbol pays 1 when it
matches, contracts inconsistent with the observation die worthless, and
longer contracts are re-based to their tails and re-marked at the next
forecast's prices. This is equivalent to the incremental capital-update
reading in which length-1 contracts settle once and longer contracts are
charged once and re-marked thereafter (the unique non-double-counting
reading); the brute-force cross-check lives in the harness oracles.

Orders may contain explicit stakes on finite strings and/or structured hedge
legs. A hedge leg stakes scale * sqrt(Q(x)/P(x)) on every x in Y^m, which
cannot be enumerated for large m; it is carried symbolically and marked as
scale * H_r(P', Q') where P', Q' are the leg's measures conditioned on the
symbols observed so far. Under a coherent forecaster this equals the exact
mark at the announced forecast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .errors import DomainError, PhaseError
from .measures import Alphabet, Measure, String
from .metrics import DEFAULT_BUDGET, hellinger_restricted

SIDES = ("I", "II")


@dataclass
class ForecastPair:
    """The step-n announcements, each a measure over the continuation."""

    p_i: Measure
    p_ii: Measure

    def side(self, s: str) -> Measure:
        if s == "I":
            return self.p_i
        if s == "II":
            return self.p_ii
        raise DomainError(f"unknown side {s!r}")


@dataclass
class HedgeLeg:
    """Symbolic stake of scale * sqrt(other(x)/own(x)) on every x in Y^horizon."""

    scale: float
    own: Measure
    other: Measure
    horizon: int

    def value(self, budget: int = DEFAULT_BUDGET) -> float:
        if self.horizon == 0:
            return self.scale
        return self.scale * hellinger_restricted(self.own, self.other,
                                                 self.horizon, budget=budget)

    def advance(self, y: int) -> Optional[float]:
        """Observe one symbol; returns the cash payoff if the leg expires."""
        p = self.own.one_step(())[y]
        q = self.other.one_step(())[y]
        self.scale *= math.sqrt(q / p)
        self.own = self.own.condition((y,))
        self.other = self.other.condition((y,))
        self.horizon -= 1
        return self.scale if self.horizon == 0 else None

    def copy(self) -> "HedgeLeg":
        return HedgeLeg(self.scale, self.own, self.other, self.horizon)


@dataclass
class BetOrder:
    """Sceptic's move: finitely many stakes on future strings.

    ``stakes`` maps nonempty future-relative strings to real stakes; ``legs``
    are symbolic hedge components. The engine accepts signed explicit stakes;
    the strategies in this repo only ever use nonnegative ones.
    """

    stakes: Dict[String, float] = field(default_factory=dict)
    legs: List[HedgeLeg] = field(default_factory=list)

    def __post_init__(self):
        for x in self.stakes:
            if len(x) == 0:
                raise DomainError("stakes must be on nonempty strings")

    @staticmethod
    def zero() -> "BetOrder":
        return BetOrder()

    def is_zero(self) -> bool:
        return not self.legs and all(v == 0.0 for v in self.stakes.values())

    def scaled(self, c: float) -> "BetOrder":
        legs = [HedgeLeg(l.scale * c, l.own, l.other, l.horizon) for l in self.legs]
        return BetOrder({x: c * v for x, v in self.stakes.items()}, legs)

    def merged(self, other: "BetOrder") -> "BetOrder":
        stakes = dict(self.stakes)
        for x, v in other.stakes.items():
            stakes[x] = stakes.get(x, 0.0) + v
        return BetOrder(stakes, self.legs + other.legs)


def order_cost(order: BetOrder, forecast: Measure,
               budget: int = DEFAULT_BUDGET) -> float:
    """Purchase cost of the order at the forecast's quoted prices."""
    cost = math.fsum(v * math.exp(forecast.cylinder_log_prob(x))
                     for x, v in order.stakes.items())
    return cost + math.fsum(l.value(budget) for l in order.legs)


@dataclass
class Portfolio:
    """One side's book: cash plus open contracts (explicit and symbolic)."""

    cash: float = 1.0
    contracts: Dict[String, float] = field(default_factory=dict)
    legs: List[HedgeLeg] = field(default_factory=list)

    def marked_value(self, forecast: Measure, budget: int = DEFAULT_BUDGET) -> float:
        v = math.fsum(pos * math.exp(forecast.cylinder_log_prob(x))
                      for x, pos in self.contracts.items())
        return v + math.fsum(l.value(budget) for l in self.legs)


class ProtocolState:
    """Sequential protocol run: step counter, history, per-side books.

    Phase order within a step is enforced: forecasts are announced (at
    construction or by the previous settlement), each side's order may be
    placed at most once, then ``settle_step`` consumes the observation
    together with the next announcements.
    """

    def __init__(self, alphabet: Alphabet, forecasts: ForecastPair,
                 budget: int = DEFAULT_BUDGET):
        self.alphabet = alphabet
        self.n = 1
        self.history: String = ()
        self.budget = budget
        self.forecasts = forecasts
        self.portfolios = {s: Portfolio() for s in SIDES}
        self._placed = {s: False for s in SIDES}

    # -- moves -------------------------------------------------------------

    def place_order(self, side: str, order: BetOrder) -> "ProtocolState":
        if side not in SIDES:
            raise DomainError(f"unknown side {side!r}")
        if self._placed[side]:
            raise PhaseError(f"side {side} already placed an order at step {self.n}")
        self._placed[side] = True
        if order.is_zero():
            return self
        pf = self.portfolios[side]
        pf.cash -= order_cost(order, self.forecasts.side(side), self.budget)
        for x, v in order.stakes.items():
            self.alphabet.check_string(x)
            pf.contracts[x] = pf.contracts.get(x, 0.0) + v
        pf.legs.extend(l.copy() for l in order.legs)
        return self

    def settle_step(self, y: int, next_forecasts: ForecastPair) -> "ProtocolState":
        if not 0 <= int(y) < self.alphabet.size:
            raise DomainError(f"symbol {y} outside alphabet")
        y = int(y)
        for side in SIDES:
            pf = self.portfolios[side]
            new: Dict[String, float] = {}
            for x, pos in pf.contracts.items():
                if x[0] != y:
                    continue  # inconsistent prefix: dies at value 0
                if len(x) == 1:
                    pf.cash += pos  # matured single-symbol contract pays 1
                else:
                    tail = x[1:]
                    new[tail] = new.get(tail, 0.0) + pos
            pf.contracts = new
            kept = []
            for leg in pf.legs:
                payoff = leg.advance(y)
                if payoff is None:
                    kept.append(leg)
                else:
                    pf.cash += payoff
            pf.legs = kept
        self.history = self.history + (y,)
        self.n += 1
        self.forecasts = next_forecasts
        self._placed = {s: False for s in SIDES}
        return self

    # -- observers -----------------------------------------------------------

    def capital(self, side: str) -> float:
        if side not in SIDES:
            raise DomainError(f"unknown side {side!r}")
        pf = self.portfolios[side]
        return pf.cash + pf.marked_value(self.forecasts.side(side), self.budget)

    def log2_capital(self, side: str) -> float:
        return math.log2(max(self.capital(side), 1e-300))


# -- module-level operation aliases ---------------------------------------

def place_order(state: ProtocolState, side: str, order: BetOrder) -> ProtocolState:
    return state.place_order(side, order)


def settle_step(state: ProtocolState, y: int,
                next_forecasts: ForecastPair) -> ProtocolState:
    return state.settle_step(y, next_forecasts)


def capital(state: ProtocolState, side: str) -> float:
    return state.capital(side)
