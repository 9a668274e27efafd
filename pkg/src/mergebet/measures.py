"""Probability measures on infinite symbol sequences over a finite alphabet.

A measure is represented by its one-step conditional distributions: a rule
mapping any finite history to a strictly positive distribution over the next
symbol. That is enough to price every cylinder set, which is all the betting
protocol ever needs. Cylinder probabilities are carried in log domain so that
long horizons do not underflow.

Families:
  * ``IID``            -- fixed weights, memoryless.
  * ``Markov``         -- order-k chain with initial laws for short histories.
  * ``BetaLearner``    -- Dirichlet/Polya posterior-predictive learner.
  * ``FiniteMixture``  -- Bayesian mixture of component measures.
  * ``Conditioned``    -- generic wrapper pinning a prefix of history.

All measures are immutable after construction; ``condition`` returns a new
object. Construction rejects any parameter that would yield a zero one-step
probability (Cromwell's rule), optionally smoothing user tables with a floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import CromwellViolation, DomainError


def logsumexp(a, axis=None):
    # lean replacement for scipy.special.logsumexp; the scipy version
    # carries array-api dispatch overhead that dominates tight loops here
    a = np.asarray(a, dtype=float)
    hi = np.max(a, axis=axis, keepdims=True)
    hi = np.where(np.isfinite(hi), hi, 0.0)
    body = np.log(np.sum(np.exp(a - hi), axis=axis, keepdims=True)) + hi
    if axis is None:
        return float(body.ravel()[0])
    return np.squeeze(body, axis=axis)


Symbol = int
String = tuple  # tuple of symbols; () is the empty string

#: tolerance for checking that a supplied distribution sums to one
SUM_TOL = 1e-9


@dataclass(frozen=True)
class Alphabet:
    """Finite observation space; symbols are 0 .. size-1."""

    size: int

    def __post_init__(self):
        if self.size < 1:
            raise DomainError(f"alphabet size must be >= 1, got {self.size}")

    def check_string(self, x: Sequence[Symbol]) -> String:
        x = tuple(int(s) for s in x)
        for s in x:
            if not 0 <= s < self.size:
                raise DomainError(f"symbol {s} outside alphabet of size {self.size}")
        return x


@dataclass(frozen=True)
class ChainView:
    """Bounded-memory view of a measure, when one exists.

    The one-step distribution depends only on the last ``order`` symbols of
    the full history (including any conditioning prefix). ``context`` is the
    current tail; during the initial ramp it may be shorter than ``order``.
    """

    order: int
    context: String
    dist: Callable[[String], np.ndarray]


def _tail(s: String, k: int) -> String:
    if k == 0:
        return ()
    return s if len(s) < k else s[-k:]


@lru_cache(maxsize=None)
def compositions(m: int, a: int) -> np.ndarray:
    """All count vectors (c_0,...,c_{a-1}) with sum m, lexicographic order."""
    if a == 1:
        return np.array([[m]], dtype=np.int64)
    rows = []
    for c0 in range(m + 1):
        rest = compositions(m - c0, a - 1)
        block = np.empty((rest.shape[0], a), dtype=np.int64)
        block[:, 0] = c0
        block[:, 1:] = rest
        rows.append(block)
    return np.vstack(rows)


@lru_cache(maxsize=None)
def log_multinomial(m: int, a: int) -> np.ndarray:
    """log of the number of strings realizing each composition of m over a symbols."""
    c = compositions(m, a)
    return gammaln(m + 1) - gammaln(c + 1).sum(axis=1)


def _validated_weights(w, floor: Optional[float]) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size < 1:
        raise DomainError("weights must be a 1-d sequence")
    if floor is not None:
        w = np.maximum(w, floor)
    if np.any(w <= 0.0) or not np.all(np.isfinite(w)):
        raise CromwellViolation(f"weights must be strictly positive, got {w}")
    s = w.sum()
    if abs(s - 1.0) > SUM_TOL:
        raise DomainError(f"weights sum to {s}, expected 1 within {SUM_TOL}")
    w = w / s
    w.flags.writeable = False
    return w


class Measure:
    """Base class: a probability measure given by one-step conditionals."""

    def __init__(self, alphabet: Alphabet):
        self.alphabet = alphabet

    @property
    def a(self) -> int:
        return self.alphabet.size

    # -- core interface --------------------------------------------------

    def one_step(self, history: String) -> np.ndarray:
        """Distribution of the next symbol given the observed history."""
        raise NotImplementedError

    def cylinder_log_prob(self, x: Sequence[Symbol]) -> float:
        """log P([x]); the empty string has log-probability 0."""
        x = self.alphabet.check_string(x)
        lp = 0.0
        for i, y in enumerate(x):
            lp += math.log(self.one_step(x[:i])[y])
        return lp

    def condition(self, prefix: Sequence[Symbol]) -> "Measure":
        """The conditional measure on the continuation after ``prefix``."""
        prefix = self.alphabet.check_string(prefix)
        if not prefix:
            return self
        return Conditioned(self, prefix)

    def sample_path(self, seed, t: int) -> String:
        """Draw ``t`` symbols; deterministic given the seed."""
        if t < 0:
            raise DomainError("path length must be >= 0")
        rng = np.random.default_rng(seed)
        path = []
        for _ in range(t):
            p = self.one_step(tuple(path))
            path.append(int(rng.choice(self.a, p=p / p.sum())))
        return tuple(path)

    # -- capability hooks (used by the metric fast paths) -----------------

    def chain_view(self) -> Optional[ChainView]:
        """Bounded-memory representation, or None if the family has none."""
        return None

    def count_log_probs(self, m: int) -> Optional[np.ndarray]:
        """Per-string log-probabilities by future count vector, for
        exchangeable families; aligned with ``compositions(m, a)``.
        Returns None when the family is not exchangeable."""
        return None

    @property
    def exchangeable(self) -> bool:
        return self.count_log_probs(0) is not None


class IID(Measure):
    """Independent draws from fixed weights."""

    def __init__(self, weights, alphabet: Optional[Alphabet] = None,
                 floor: Optional[float] = None):
        w = _validated_weights(weights, floor)
        super().__init__(alphabet or Alphabet(w.size))
        if w.size != self.a:
            raise DomainError("weight vector length does not match alphabet")
        self._w = w
        self._logw = np.log(w)

    def one_step(self, history: String) -> np.ndarray:
        return self._w

    def cylinder_log_prob(self, x) -> float:
        x = self.alphabet.check_string(x)
        return float(self._logw[list(x)].sum()) if x else 0.0

    def condition(self, prefix):
        self.alphabet.check_string(prefix)
        return self

    def sample_path(self, seed, t: int) -> String:
        if t < 0:
            raise DomainError("path length must be >= 0")
        rng = np.random.default_rng(seed)
        return tuple(int(y) for y in rng.choice(self.a, size=t, p=self._w))

    def chain_view(self):
        return ChainView(0, (), lambda tail: self._w)

    def count_log_probs(self, m: int) -> np.ndarray:
        return compositions(m, self.a) @ self._logw


def bernoulli(p_one: float) -> IID:
    """Binary i.i.d. measure with P(1) = p_one."""
    return IID([1.0 - p_one, p_one])


class Markov(Measure):
    """Order-k Markov chain.

    ``transition`` has shape (a,)*k + (a,). ``initial`` supplies the laws for
    histories shorter than k: a list where ``initial[j]`` has shape
    (a,)*j + (a,); for order 1 a plain vector is accepted. ``context`` is the
    already-observed tail used by conditioned copies.
    """

    def __init__(self, transition, initial=None, context: String = (),
                 alphabet: Optional[Alphabet] = None, floor: Optional[float] = None):
        tr = np.asarray(transition, dtype=float)
        a = tr.shape[-1]
        super().__init__(alphabet or Alphabet(a))
        if tr.shape != (a,) * tr.ndim:
            raise DomainError(f"transition table has inconsistent shape {tr.shape}")
        self.order = tr.ndim - 1
        self._tr = self._norm_table(tr, floor)

        if initial is None:
            initial = [np.full((a,) * j + (a,), 1.0 / a) for j in range(self.order)]
        elif self.order == 1 and np.asarray(initial).ndim == 1:
            initial = [np.asarray(initial, dtype=float)]
        self._init = [self._norm_table(np.asarray(t, dtype=float), floor)
                      for t in initial]
        if len(self._init) != self.order:
            raise DomainError(f"need {self.order} initial laws, got {len(self._init)}")
        for j, t in enumerate(self._init):
            if t.shape != (a,) * (j + 1):
                raise DomainError(f"initial law {j} has shape {t.shape}")
        self._context = _tail(self.alphabet.check_string(context), self.order)

    def _norm_table(self, t: np.ndarray, floor) -> np.ndarray:
        if floor is not None:
            t = np.maximum(t, floor)
        if np.any(t <= 0.0) or not np.all(np.isfinite(t)):
            raise CromwellViolation("transition table has a nonpositive entry")
        sums = t.sum(axis=-1, keepdims=True)
        if np.any(np.abs(sums - 1.0) > SUM_TOL):
            raise DomainError("a transition row does not sum to 1")
        t = t / sums
        t.flags.writeable = False
        return t

    def dist_from_tail(self, tail: String) -> np.ndarray:
        if len(tail) == self.order:
            return self._tr[tail] if tail else self._tr
        return self._init[len(tail)][tail] if tail else self._init[0]

    def one_step(self, history: String) -> np.ndarray:
        return self.dist_from_tail(_tail(self._context + tuple(history), self.order))

    def condition(self, prefix):
        prefix = self.alphabet.check_string(prefix)
        if not prefix:
            return self
        m = Markov.__new__(Markov)
        Measure.__init__(m, self.alphabet)
        m.order, m._tr, m._init = self.order, self._tr, self._init
        m._context = _tail(self._context + prefix, self.order)
        return m

    def chain_view(self):
        return ChainView(self.order, self._context, self.dist_from_tail)


class BetaLearner(Measure):
    """Dirichlet (Polya urn) sequential learner.

    One-step law after history h: (alpha_y + count_y(h)) / (sum alpha + |h|).
    Conditioning folds observed counts into the pseudo-counts.
    """

    def __init__(self, pseudo_counts, alphabet: Optional[Alphabet] = None):
        a = np.asarray(pseudo_counts, dtype=float)
        if a.ndim != 1 or np.any(a <= 0.0) or not np.all(np.isfinite(a)):
            raise CromwellViolation("pseudo-counts must be strictly positive")
        super().__init__(alphabet or Alphabet(a.size))
        if a.size != self.a:
            raise DomainError("pseudo-count length does not match alphabet")
        a.flags.writeable = False
        self._alpha = a
        self._alpha0 = float(a.sum())

    def one_step(self, history: String) -> np.ndarray:
        history = tuple(history)
        c = np.bincount(history, minlength=self.a) if history else 0
        return (self._alpha + c) / (self._alpha0 + len(history))

    def cylinder_log_prob(self, x) -> float:
        x = self.alphabet.check_string(x)
        c = np.zeros(self.a)
        lp = 0.0
        for n, y in enumerate(x):
            lp += math.log((self._alpha[y] + c[y]) / (self._alpha0 + n))
            c[y] += 1
        return lp

    def condition(self, prefix):
        prefix = self.alphabet.check_string(prefix)
        if not prefix:
            return self
        # bypass __init__ checks: posterior counts of a valid learner stay valid
        b = BetaLearner.__new__(BetaLearner)
        Measure.__init__(b, self.alphabet)
        a = self._alpha + np.bincount(prefix, minlength=self.a)
        a.flags.writeable = False
        b._alpha = a
        b._alpha0 = float(a.sum())
        return b

    def count_log_probs(self, m: int) -> np.ndarray:
        cached = getattr(self, "_clp_cache", None)
        if cached is None:
            cached = self._clp_cache = {}
        out = cached.get(m)
        if out is None:
            c = compositions(m, self.a)
            out = (gammaln(self._alpha + c).sum(axis=1)
                   - gammaln(self._alpha).sum()
                   + math.lgamma(self._alpha0) - math.lgamma(self._alpha0 + m))
            out.flags.writeable = False
            cached[m] = out
        return out


class FiniteMixture(Measure):
    """Bayesian mixture of component measures with positive weights.

    Weights are carried in log domain internally so that conditioning on a
    long history (which can drive a posterior weight far below the smallest
    positive double) never produces a literal zero.
    """

    def __init__(self, weights, components: Sequence[Measure]):
        comps = list(components)
        w = _validated_weights(weights, None)
        self._init_from_logw(np.log(w), comps)

    @classmethod
    def _from_log_weights(cls, logw: np.ndarray,
                          components: Sequence[Measure]) -> "FiniteMixture":
        m = cls.__new__(cls)
        m._init_from_logw(logw - logsumexp(logw), list(components))
        return m

    def _init_from_logw(self, logw: np.ndarray, comps) -> None:
        if not comps:
            raise DomainError("mixture needs at least one component")
        Measure.__init__(self, comps[0].alphabet)
        for c in comps:
            if c.alphabet.size != self.a:
                raise DomainError("mixture components disagree on the alphabet")
        if logw.size != len(comps):
            raise DomainError("one weight per component required")
        if np.any(np.isnan(logw)) or np.any(logw == np.inf):
            raise DomainError("invalid mixture weights")
        logw = np.array(logw, dtype=float)
        logw.flags.writeable = False
        self._logw = logw
        self.components = comps

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self._logw)

    def _posterior_logw(self, history: String) -> np.ndarray:
        lw = self._logw + np.array([c.cylinder_log_prob(history)
                                    for c in self.components])
        return lw - logsumexp(lw)

    def one_step(self, history: String) -> np.ndarray:
        history = tuple(history)
        post = np.exp(self._posterior_logw(history)) if history \
            else np.exp(self._logw)
        dists = np.stack([c.one_step(history) for c in self.components])
        return post @ dists

    def cylinder_log_prob(self, x) -> float:
        x = self.alphabet.check_string(x)
        return float(logsumexp(self._logw + np.array(
            [c.cylinder_log_prob(x) for c in self.components])))

    def condition(self, prefix):
        prefix = self.alphabet.check_string(prefix)
        if not prefix:
            return self
        return FiniteMixture._from_log_weights(
            self._posterior_logw(prefix),
            [c.condition(prefix) for c in self.components])

    def count_log_probs(self, m: int) -> Optional[np.ndarray]:
        per_comp = [c.count_log_probs(m) for c in self.components]
        if any(v is None for v in per_comp):
            return None
        stacked = np.stack(per_comp) + self._logw[:, None]
        return logsumexp(stacked, axis=0)


class Conditioned(Measure):
    """Generic conditional measure: the base with a pinned history prefix."""

    def __init__(self, base: Measure, prefix: Sequence[Symbol]):
        super().__init__(base.alphabet)
        prefix = base.alphabet.check_string(prefix)
        if isinstance(base, Conditioned):
            prefix = base.prefix + prefix
            base = base.base
        self.base = base
        self.prefix = prefix

    def one_step(self, history: String) -> np.ndarray:
        return self.base.one_step(self.prefix + tuple(history))

    def cylinder_log_prob(self, x) -> float:
        x = self.alphabet.check_string(x)
        return (self.base.cylinder_log_prob(self.prefix + x)
                - self.base.cylinder_log_prob(self.prefix))

    def condition(self, prefix):
        prefix = self.alphabet.check_string(prefix)
        if not prefix:
            return self
        return Conditioned(self.base, self.prefix + prefix)

    def chain_view(self):
        v = self.base.chain_view()
        if v is None:
            return None
        return ChainView(v.order, _tail(v.context + self.prefix, v.order), v.dist)


# -- module-level operation aliases ---------------------------------------

def one_step_dist(measure: Measure, history) -> np.ndarray:
    return measure.one_step(measure.alphabet.check_string(history))


def cylinder_log_prob(measure: Measure, x) -> float:
    return measure.cylinder_log_prob(x)


def condition_on(measure: Measure, prefix) -> Measure:
    return measure.condition(prefix)


def sample_path(measure: Measure, seed, t: int) -> String:
    return measure.sample_path(seed, t)
