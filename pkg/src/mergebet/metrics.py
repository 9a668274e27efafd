"""Horizon-m Hellinger affinity and total variation between measures.

Three computation routes:

  * ``dp``        -- joint-context dynamic programming, for measures with a
                     bounded-memory (IID/Markov-like) chain view; cost grows
                     with the paired state space, not with a**m.
  * count-based   -- for exchangeable pairs the sum over Y^m collapses onto
                     count vectors (used automatically; never requested by
                     name).
  * ``enumerate`` -- depth-first walk of the outcome tree, refused beyond a
                     configurable term budget.

``method="auto"`` picks dp, then count-based, then enumeration. Affinity is
non-increasing and total variation non-decreasing in the horizon; both are
computed from log-domain cylinder probabilities with compensated summation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .errors import BudgetExceeded, DomainError, MethodUnsupported
from .measures import Measure, String, _tail, log_multinomial

log = logging.getLogger(__name__)

#: default cap on the number of enumerated strings a**m
DEFAULT_BUDGET = 2 ** 22


def _check_budget(a: int, m: int, budget: int) -> None:
    if m * math.log(a) > math.log(budget) + 1e-9:
        raise BudgetExceeded(
            f"enumeration over {a}^{m} strings exceeds the budget of {budget} terms")


class _Kahan:
    """Compensated accumulator; keeps tree-walk sums accurate to ~1 ulp."""

    __slots__ = ("s", "c")

    def __init__(self):
        self.s = 0.0
        self.c = 0.0

    def add(self, x: float) -> None:
        y = x - self.c
        t = self.s + y
        self.c = (t - self.s) - y
        self.s = t


# -- chain (DP) route ------------------------------------------------------

class _ChainAffinity:
    """Incremental H_m over paired chain contexts; advance() yields H_{m+1}.

    When both chains are memoryless the per-step affinity is a constant rho
    and H_m = rho**m, so no context bookkeeping is needed.
    """

    def __init__(self, p: Measure, q: Measure):
        vp, vq = p.chain_view(), q.chain_view()
        if vp is None or vq is None:
            raise MethodUnsupported(
                "dp requires both measures to have a bounded-memory chain view")
        self._a = p.a
        self._vp, self._vq = vp, vq
        self._rho = None
        if vp.order == 0 and vq.order == 0:
            self._rho = min(float(np.sqrt(vp.dist(()) * vq.dist(())).sum()), 1.0)
        self._w = {(vp.context, vq.context): 1.0}
        self.h: List[float] = [1.0]

    def advance(self) -> float:
        if self._rho is not None:
            self.h.append(self._rho ** (len(self.h)))
            return self.h[-1]
        kp, kq = self._vp.order, self._vq.order
        new: dict = {}
        for (cp, cq), w in self._w.items():
            aff = np.sqrt(self._vp.dist(cp) * self._vq.dist(cq))
            for y in range(self._a):
                key = (_tail(cp + (y,), kp), _tail(cq + (y,), kq))
                new[key] = new.get(key, 0.0) + w * aff[y]
        self._w = new
        total = min(math.fsum(new.values()), 1.0)
        self.h.append(total)
        return total

    def up_to(self, m: int) -> float:
        while len(self.h) <= m:
            self.advance()
        return self.h[m]


def _chain_esr(f: Measure, p: Measure, q: Measure, m: int) -> float:
    """E_F[sqrt(Q/P)] over Y^m via triple-context DP."""
    views = [x.chain_view() for x in (f, p, q)]
    if any(v is None for v in views):
        raise MethodUnsupported("dp expectation requires chain views")
    vf, vp, vq = views
    a = f.a
    w = {(vf.context, vp.context, vq.context): 1.0}
    for _ in range(m):
        new: dict = {}
        for (cf, cp, cq), wt in w.items():
            fac = vf.dist(cf) * np.sqrt(vq.dist(cq) / vp.dist(cp))
            for y in range(a):
                key = (_tail(cf + (y,), vf.order), _tail(cp + (y,), vp.order),
                       _tail(cq + (y,), vq.order))
                new[key] = new.get(key, 0.0) + wt * fac[y]
        w = new
    return math.fsum(w.values())


# -- count-based route (exchangeable pairs) ---------------------------------

def _count_affinity(p: Measure, q: Measure, m: int) -> Optional[float]:
    lp, lq = p.count_log_probs(m), q.count_log_probs(m)
    if lp is None or lq is None:
        return None
    lc = log_multinomial(m, p.a)
    return min(float(np.exp(lc + 0.5 * (lp + lq)).sum()), 1.0)


def _count_tv(p: Measure, q: Measure, m: int) -> Optional[float]:
    lp, lq = p.count_log_probs(m), q.count_log_probs(m)
    if lp is None or lq is None:
        return None
    lc = log_multinomial(m, p.a)
    return float(np.abs(np.exp(lc + lp) - np.exp(lc + lq)).sum())


def _count_esr(f: Measure, p: Measure, q: Measure, m: int) -> Optional[float]:
    lf, lp, lq = (x.count_log_probs(m) for x in (f, p, q))
    if lf is None or lp is None or lq is None:
        return None
    lc = log_multinomial(m, f.a)
    return float(np.exp(lc + lf + 0.5 * (lq - lp)).sum())


# -- enumeration route -------------------------------------------------------

def _enum_profiles(p: Measure, q: Measure, max_m: int,
                   budget: int) -> Tuple[np.ndarray, np.ndarray]:
    """(H_0..H_max, TV_0..TV_max) by one depth-first walk of the tree."""
    a = p.a
    _check_budget(a, max_m, budget)
    hell = [_Kahan() for _ in range(max_m + 1)]
    tv = [_Kahan() for _ in range(max_m + 1)]

    def walk(x: String, lp: float, lq: float) -> None:
        d = len(x)
        hell[d].add(math.exp(0.5 * (lp + lq)))
        tv[d].add(abs(math.exp(lp) - math.exp(lq)))
        if d == max_m:
            return
        dp, dq = p.one_step(x), q.one_step(x)
        for y in range(a):
            walk(x + (y,), lp + math.log(dp[y]), lq + math.log(dq[y]))

    walk((), 0.0, 0.0)
    return (np.minimum(np.array([k.s for k in hell]), 1.0),
            np.array([k.s for k in tv]))


def _enum_esr(f: Measure, p: Measure, q: Measure, m: int, budget: int) -> float:
    a = f.a
    _check_budget(a, m, budget)
    acc = _Kahan()

    def walk(x: String, lf: float, lp: float, lq: float) -> None:
        if len(x) == m:
            acc.add(math.exp(lf + 0.5 * (lq - lp)))
            return
        df, dpp, dq = f.one_step(x), p.one_step(x), q.one_step(x)
        for y in range(a):
            walk(x + (y,), lf + math.log(df[y]), lp + math.log(dpp[y]),
                 lq + math.log(dq[y]))

    walk((), 0.0, 0.0, 0.0)
    return acc.s


# -- public operations --------------------------------------------------------

def hellinger_restricted(p: Measure, q: Measure, m: int, method: str = "auto",
                         budget: int = DEFAULT_BUDGET) -> float:
    """Affinity H_m = sum over Y^m of sqrt(P(x) Q(x)); in [0, 1]."""
    if m < 0:
        raise DomainError("horizon must be >= 0")
    if p.a != q.a:
        raise DomainError("measures live on different alphabets")
    if m == 0:
        return 1.0
    if method == "dp":
        return _ChainAffinity(p, q).up_to(m)
    if method == "enumerate":
        return float(_enum_profiles(p, q, m, budget)[0][m])
    if method != "auto":
        raise DomainError(f"unknown method {method!r}")
    if p.chain_view() is not None and q.chain_view() is not None:
        return _ChainAffinity(p, q).up_to(m)
    v = _count_affinity(p, q, m)
    if v is not None:
        return v
    return float(_enum_profiles(p, q, m, budget)[0][m])


def affinity_profile(p: Measure, q: Measure, max_m: int, method: str = "auto",
                     budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """H_0 .. H_max as an array."""
    if max_m < 0:
        raise DomainError("horizon must be >= 0")
    if method == "auto" and p.chain_view() is not None and q.chain_view() is not None:
        it = _ChainAffinity(p, q)
        it.up_to(max_m)
        return np.array(it.h)
    if method == "dp":
        it = _ChainAffinity(p, q)
        it.up_to(max_m)
        return np.array(it.h)
    if method == "auto" and p.exchangeable and q.exchangeable:
        return np.array([1.0] + [_count_affinity(p, q, m)
                                 for m in range(1, max_m + 1)])
    return _enum_profiles(p, q, max_m, budget)[0]


def tv_restricted(p: Measure, q: Measure, m: int,
                  budget: int = DEFAULT_BUDGET) -> float:
    """Total variation of the horizon-m restrictions; in [0, 2]."""
    if m < 0:
        raise DomainError("horizon must be >= 0")
    if p.a != q.a:
        raise DomainError("measures live on different alphabets")
    if m == 0:
        return 0.0
    v = _count_tv(p, q, m)
    if v is not None:
        return v
    return float(_enum_profiles(p, q, m, budget)[1][m])


def tv_profile(p: Measure, q: Measure, max_m: int,
               budget: int = DEFAULT_BUDGET) -> np.ndarray:
    if p.exchangeable and q.exchangeable:
        return np.array([0.0] + [_count_tv(p, q, m) for m in range(1, max_m + 1)])
    return _enum_profiles(p, q, max_m, budget)[1]


def hellinger_tv_bounds(h: float) -> Tuple[float, float]:
    """Sandwich bounds on total variation: (2(1-h), sqrt(8(1-h)))."""
    if not 0.0 <= h <= 1.0 + 1e-12:
        raise DomainError(f"affinity must lie in [0,1], got {h}")
    h = min(h, 1.0)
    return 2.0 * (1.0 - h), math.sqrt(8.0 * (1.0 - h))


def expectation_sqrt_ratio(f: Measure, p: Measure, q: Measure, m: int,
                           budget: int = DEFAULT_BUDGET) -> float:
    """E_F[sqrt(Q(x)/P(x))] over x in Y^m; the mark-to-market primitive."""
    if m < 0:
        raise DomainError("horizon must be >= 0")
    if m == 0:
        return 1.0
    if all(x.chain_view() is not None for x in (f, p, q)):
        return _chain_esr(f, p, q, m)
    v = _count_esr(f, p, q, m)
    if v is not None:
        return v
    return _enum_esr(f, p, q, m, budget)


class HorizonProfile:
    """Memoized H_m for one pair, with a monotone threshold search.

    H_m is non-increasing in m, so the smallest horizon with H_m below a
    threshold is found by bisection over the cached profile.
    """

    def __init__(self, p: Measure, q: Measure, budget: int = DEFAULT_BUDGET):
        self.p, self.q = p, q
        self.budget = budget
        self._chain: Optional[_ChainAffinity] = None
        self._cache = {0: 1.0}
        self._countable = None
        if p.chain_view() is not None and q.chain_view() is not None:
            self._chain = _ChainAffinity(p, q)
        else:
            self._countable = p.exchangeable and q.exchangeable

    def max_enumerable(self) -> int:
        """Largest horizon the fallback enumeration route can afford."""
        return int(math.log(self.budget) / math.log(max(self.p.a, 2)))

    def h(self, m: int) -> float:
        if self._chain is not None:
            return self._chain.up_to(m)
        if m not in self._cache:
            if self._countable:
                self._cache[m] = _count_affinity(self.p, self.q, m)
            else:
                prof = _enum_profiles(self.p, self.q, m, self.budget)[0]
                for i, v in enumerate(prof):
                    self._cache[i] = float(v)
        return self._cache[m]

    def find_below(self, threshold: float, m_max: int) -> Optional[int]:
        """Smallest m <= m_max with H_m < threshold (strict), else None."""
        if m_max < 1:
            return None
        if self._chain is None and not self._countable:
            cap = self.max_enumerable()
            if m_max > cap:
                log.warning("horizon search capped at m=%d by the enumeration "
                            "budget (requested %d)", cap, m_max)
                m_max = cap
        if m_max < 1 or not self.h(m_max) < threshold:
            return None
        lo, hi = 0, m_max  # invariant: H_lo >= threshold > H_hi
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.h(mid) < threshold:
                hi = mid
            else:
                lo = mid
        return hi


@dataclass
class HorizonDistribution:
    """Explicit restriction of a measure to Y^m: (string, log-probability)."""

    horizon: int
    items: List[Tuple[String, float]]


def horizon_distribution(measure: Measure, m: int,
                         budget: int = DEFAULT_BUDGET) -> HorizonDistribution:
    """Enumerate the horizon-m restriction; validates normalization."""
    from scipy.special import logsumexp
    a = measure.a
    _check_budget(a, m, budget)
    items: List[Tuple[String, float]] = []

    def walk(x: String, lp: float) -> None:
        if len(x) == m:
            items.append((x, lp))
            return
        d = measure.one_step(x)
        for y in range(a):
            walk(x + (y,), lp + math.log(d[y]))

    walk((), 0.0)
    total = float(logsumexp([lp for _, lp in items]))
    if abs(math.exp(total) - 1.0) > 1e-9:
        raise DomainError(f"restriction mass {math.exp(total)} not 1 within 1e-9")
    return HorizonDistribution(m, items)
