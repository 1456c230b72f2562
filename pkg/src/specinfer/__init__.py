"""Infer which finite-horizon task specification best explains demonstrations.

Pipeline: encode stochastic dynamics as deterministic bit-level circuits over
fair coins (`dynamics`), express candidate task specifications as sequential
monitor circuits (`monitor`), unroll their composition over the horizon into
one reduced decision diagram (`compiler` on top of `bdd`), run the
entropy-regularized value backup and fit the rationality coefficient to the
demonstrations' empirical satisfaction rate (`planner`), then score and rank
candidates by demonstration likelihood (`pipeline`).
"""

from .bdd import BOT, ONE, ZERO, Engine
from .compiler import (CompileStats, LevelMeta, TraceBdd, size_bound, unroll,
                       widen_monitor, with_discount)
from .dynamics import (ExplicitPA, Gridworld, RandomBitPA, approximation_gap,
                       load_world, make_gridworld, to_explicit,
                       transition_counts, transition_prob, world_from_json)
from .errors import (ConfigError, DomainError, ImpossibleTransitionError,
                     ResourceError, SpecInferError, StructureError)
from .monitor import (Monitor, accepts, avoid, dry_before_recharge,
                      false_monitor, historically, m_and, m_not, m_or, once,
                      parse_spec, reach, since, true_monitor)
from .pipeline import (Demonstration, EncodedDemo, GridCoinCache,
                       LikelihoodReport, RankRow, clamp_probability,
                       demo_log_likelihood, demos_from_json,
                       empirical_sat_prob, encode_demo, fit_candidate,
                       infer_coins, load_demos, rank)
from .planner import (PolicySolution, PolicyWalker, ValueTable, fit_theta,
                      policy_at, sat_prob, value_backup)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
