"""Game-theoretic simulator of sequential forecast testing.

Two Forecasters announce probability measures over all future observations;
a Sceptic trades futures contracts against both. Either the forecasts merge
in total variation, or at least one Sceptic capital process grows without
bound. This package simulates the protocol, implements the mixture betting
strategy, and verifies the finite-horizon surrogates of that disjunction.
"""

from .errors import (BudgetExceeded, ConfigError, CromwellViolation, DomainError,
                     MergebetError, MethodUnsupported, PhaseError)
from .measures import (Alphabet, BetaLearner, Conditioned, FiniteMixture, IID,
                       Markov, Measure, bernoulli, condition_on,
                       cylinder_log_prob, one_step_dist, sample_path)
from .metrics import (DEFAULT_BUDGET, HorizonProfile, affinity_profile,
                      expectation_sqrt_ratio, hellinger_restricted,
                      hellinger_tv_bounds, horizon_distribution, tv_profile,
                      tv_restricted)
from .protocol import (BetOrder, ForecastPair, HedgeLeg, Portfolio,
                       ProtocolState, capital, order_cost, place_order,
                       settle_step)
from .scenarios import (ForecasterSpec, RealitySpec, SingularPairSpec, catalog,
                        default_singular_pair, make_forecaster, make_reality,
                        singular_pair)
from .strategy import (EpsilonComponent, LimWrap, LimWrapConfig,
                       LimWrappedSceptic, MixtureSceptic, build_hedge,
                       build_hedge_leg, find_horizon, wrap_capital_path)
from .harness import (ExperimentConfig, Trace, incremental_capitals,
                      oracle_expect_capital, oracle_metrics, run_experiment,
                      run_on_path, summarize)

__version__ = "0.1.0"
