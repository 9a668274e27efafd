"""Sceptic strategies: fixed-epsilon gambling, the 2^-j mixture, lim-wrap.

A fixed-epsilon component watches the announced pair; whenever a horizon m
certifies that the affinity of the two announcements drops strictly below
1 - epsilon, it stakes its whole component capital on a pair of square-root
likelihood-ratio hedges (one against each forecaster) expiring in m steps,
then stays quiet until expiry. Whatever block is realized, the geometric
mean of the two hedge multipliers is exactly 1/H_m >= 1/(1-epsilon), so each
completed cycle grows the geometric-mean capital outcome-independently.

The full Sceptic is the 2^-j-weighted mixture of components for
epsilon = 2^-j, j = 1..J, truncated at J with the residual weight held as
cash. ``lim_wrap`` converts an unbounded capital path into a divergent one
by splitting capital across doubling-threshold accounts that freeze once
they hit their target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .errors import DomainError
from .measures import Measure
from .metrics import (DEFAULT_BUDGET, HorizonProfile, hellinger_restricted,
                      _check_budget)
from .protocol import BetOrder, ForecastPair, HedgeLeg


def find_horizon(p: Measure, q: Measure, epsilon: float, m_max: int,
                 profile: Optional[HorizonProfile] = None,
                 budget: int = DEFAULT_BUDGET) -> Optional[int]:
    """Smallest m <= m_max with H_m(p, q) < 1 - epsilon strictly, else None.

    Any returned m certifies that the full-horizon affinity is below
    1 - epsilon, since H_m decreases to it; None means no certificate exists
    within the search cap (or the enumeration budget, which is logged).
    """
    if not 0.0 < epsilon < 1.0:
        raise DomainError("epsilon must lie in (0, 1)")
    if m_max < 1:
        raise DomainError("m_max must be >= 1")
    if profile is None:
        profile = HorizonProfile(p, q, budget)
    return profile.find_below(1.0 - epsilon, m_max)


def build_hedge_leg(p_own: Measure, p_other: Measure, m: int, k: float,
                    budget: int = DEFAULT_BUDGET) -> HedgeLeg:
    """Symbolic hedge staking k * sqrt(other/own)/H_m on each x in Y^m."""
    if k < 0:
        raise DomainError("capital must be nonnegative")
    h = hellinger_restricted(p_own, p_other, m, budget=budget)
    return HedgeLeg(k / h, p_own, p_other, m)


def build_hedge(p_own: Measure, p_other: Measure, m: int, k: float,
                budget: int = DEFAULT_BUDGET) -> BetOrder:
    """Explicit form of the hedge: stakes on every string of length m.

    Costs exactly k at the own forecast's prices and pays
    k * sqrt(other(x*)/own(x*))/H_m on the realized block x*.
    """
    _check_budget(p_own.a, m, budget)
    h = hellinger_restricted(p_own, p_other, m, budget=budget)
    stakes = {}

    def walk(x, lp, lq):
        if len(x) == m:
            stakes[x] = k * math.exp(0.5 * (lq - lp)) / h
            return
        dp, dq = p_own.one_step(x), p_other.one_step(x)
        for y in range(p_own.a):
            walk(x + (y,), lp + math.log(dp[y]), lq + math.log(dq[y]))

    walk((), 0.0, 0.0)
    return BetOrder(stakes)


@dataclass
class CycleRecord:
    """One completed hedge cycle of a component."""

    start_step: int
    horizon: int
    h_m: float
    mult_i: float
    mult_ii: float


class EpsilonComponent:
    """State machine of the fixed-epsilon gambling routine.

    Component-local capitals start at 1 per side; while holding, the entire
    capital sits in the open hedge and no new bets are placed.
    """

    def __init__(self, epsilon: float, budget: int = DEFAULT_BUDGET):
        if not 0.0 < epsilon < 1.0:
            raise DomainError("epsilon must lie in (0, 1)")
        self.epsilon = epsilon
        self.budget = budget
        self.capital_i = 1.0
        self.capital_ii = 1.0
        self.holding = False
        self._leg_i: Optional[HedgeLeg] = None
        self._leg_ii: Optional[HedgeLeg] = None
        self._cycle_start_capitals: Tuple[float, float] = (1.0, 1.0)
        self._cycle_start_step = 0
        self._cycle_h = 1.0
        self._cycle_m = 0
        self._step = 0
        self.bets_placed = 0
        self.cycles: List[CycleRecord] = []

    def step_orders(self, forecasts: ForecastPair, m_max: int,
                    profile: Optional[HorizonProfile] = None
                    ) -> Optional[Tuple[BetOrder, BetOrder]]:
        """Orders for the current step; None while holding or idle."""
        self._step += 1
        if self.holding:
            return None
        m = find_horizon(forecasts.p_i, forecasts.p_ii, self.epsilon, m_max,
                         profile=profile, budget=self.budget)
        if m is None:
            return None
        h = profile.h(m) if profile is not None else hellinger_restricted(
            forecasts.p_i, forecasts.p_ii, m, budget=self.budget)
        self._leg_i = HedgeLeg(self.capital_i / h, forecasts.p_i,
                               forecasts.p_ii, m)
        self._leg_ii = HedgeLeg(self.capital_ii / h, forecasts.p_ii,
                                forecasts.p_i, m)
        self.holding = True
        self.bets_placed += 1
        self._cycle_start_capitals = (self.capital_i, self.capital_ii)
        self._cycle_start_step = self._step
        self._cycle_h = h
        self._cycle_m = m
        return (BetOrder(legs=[self._leg_i.copy()]),
                BetOrder(legs=[self._leg_ii.copy()]))

    def settle(self, y: int) -> None:
        """Observe Reality's symbol; realizes payoffs at expiry."""
        if not self.holding:
            return
        pay_i = self._leg_i.advance(y)
        pay_ii = self._leg_ii.advance(y)
        if pay_i is not None:
            k_i0, k_ii0 = self._cycle_start_capitals
            self.capital_i = pay_i
            self.capital_ii = pay_ii
            self.cycles.append(CycleRecord(
                self._cycle_start_step, self._cycle_m, self._cycle_h,
                pay_i / k_i0, pay_ii / k_ii0))
            self.holding = False
            self._leg_i = self._leg_ii = None


class MixtureSceptic:
    """2^-j-weighted mixture of epsilon components plus a cash reserve."""

    def __init__(self, j_max: int = 20, m_max: int = 64,
                 budget: int = DEFAULT_BUDGET):
        if j_max < 1:
            raise DomainError("need at least one component")
        self.m_max = m_max
        self.budget = budget
        self.weights = [2.0 ** -(j + 1) for j in range(j_max)]
        self.components = [EpsilonComponent(2.0 ** -(j + 1), budget)
                           for j in range(j_max)]
        self.reserve = 1.0 - sum(self.weights)
        self.last_bets_placed = False
        self.last_active = 0

    def step_orders(self, forecasts: ForecastPair) -> Tuple[BetOrder, BetOrder]:
        profile = HorizonProfile(forecasts.p_i, forecasts.p_ii, self.budget)
        order_i, order_ii = BetOrder.zero(), BetOrder.zero()
        self.last_bets_placed = False
        for w, comp in zip(self.weights, self.components):
            placed = comp.step_orders(forecasts, self.m_max, profile)
            if placed is not None:
                self.last_bets_placed = True
                order_i = order_i.merged(placed[0].scaled(w))
                order_ii = order_ii.merged(placed[1].scaled(w))
        self.last_active = sum(1 for c in self.components if c.holding)
        return order_i, order_ii

    def settle(self, y: int) -> None:
        for comp in self.components:
            comp.settle(y)

    def capital(self, side: str) -> float:
        caps = [(c.capital_i if side == "I" else c.capital_ii)
                if not c.holding else
                ((c._leg_i if side == "I" else c._leg_ii).value(self.budget))
                for c in self.components]
        return math.fsum(w * k for w, k in zip(self.weights, caps)) + self.reserve


@dataclass
class LimWrapConfig:
    """Doubling-threshold accounts for the unbounded-to-divergent transform."""

    num_accounts: int = 30

    def __post_init__(self):
        if self.num_accounts < 1:
            raise DomainError("need at least one account")

    @property
    def account_weights(self) -> List[float]:
        return [2.0 ** -k for k in range(1, self.num_accounts + 1)]


class LimWrap:
    """Streaming wrapper: account k mirrors the base capital at weight 2^-k
    until the base first reaches 2^k, then holds its value as cash forever."""

    def __init__(self, cfg: LimWrapConfig = LimWrapConfig()):
        self.cfg = cfg
        self.frozen: List[Optional[float]] = [None] * cfg.num_accounts
        self.residual = 2.0 ** -cfg.num_accounts  # weight never put at risk

    def update(self, base_capital: float) -> float:
        total = self.residual
        for idx, w in enumerate(self.cfg.account_weights):
            k = idx + 1
            if self.frozen[idx] is None and base_capital >= 2.0 ** k:
                self.frozen[idx] = w * base_capital
            total += self.frozen[idx] if self.frozen[idx] is not None \
                else w * base_capital
        return total

    @property
    def frozen_total(self) -> float:
        return math.fsum(v for v in self.frozen if v is not None)


def wrap_capital_path(path: Sequence[float],
                      cfg: LimWrapConfig = LimWrapConfig()) -> List[float]:
    """Apply the lim-wrap transform to a scripted base capital path."""
    wrapper = LimWrap(cfg)
    return [wrapper.update(k) for k in path]


class LimWrappedSceptic:
    """Order-level wrapper around a mixture: live accounts mirror the base
    strategy, so orders are scaled by the per-side live weight."""

    def __init__(self, base: MixtureSceptic, cfg: LimWrapConfig = LimWrapConfig()):
        self.base = base
        self.wrappers = {"I": LimWrap(cfg), "II": LimWrap(cfg)}
        self._live = {"I": sum(cfg.account_weights), "II": sum(cfg.account_weights)}

    def step_orders(self, forecasts: ForecastPair) -> Tuple[BetOrder, BetOrder]:
        o_i, o_ii = self.base.step_orders(forecasts)
        self.last_bets_placed = self.base.last_bets_placed
        self.last_active = self.base.last_active
        return o_i.scaled(self._live["I"]), o_ii.scaled(self._live["II"])

    def settle(self, y: int) -> None:
        self.base.settle(y)
        for side in ("I", "II"):
            w = self.wrappers[side]
            w.update(self.base.capital(side))
            self._live[side] = math.fsum(
                wt for wt, fr in zip(w.cfg.account_weights, w.frozen)
                if fr is None)

    def capital(self, side: str) -> float:
        w = self.wrappers[side]
        return (w.frozen_total + w.residual
                + self._live[side] * self.base.capital(side))
