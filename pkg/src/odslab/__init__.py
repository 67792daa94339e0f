"""odslab: a simulation lab for on-demand sampling in multi-distribution
learning, with margin boosting, lazily-updated Hedge, and cap-gated
first-order optimization over the probability simplex."""

__version__ = "0.1.0"

from .env import (ConstPredictor, Environment, FiniteDistribution,
                  LabeledExample, Sample, SampleLedger, SampleRequest,
                  TablePredictor, ThresholdPredictor, empirical_error,
                  minimax_opt, population_error)
from .gf2 import (Gf2Basis, Gf2Vector, LinearClass, LinearHypothesis,
                  eval_linear, rank, sample_independent_subspaces, solve_label)
from .hedge import (HedgeHistory, hedge_step, regret_certificate,
                    trajectory_sum_max)
from .instances import (DifficultySpec, PlantedMdlInstance,
                        build_difficulty_spec, default_ambient_dim,
                        gen_agnostic_finite, gen_planted_mdl,
                        gen_single_planted, random_linear_subclass)
from .realizable import (Ensemble, TradeoffParams, check_majority_margin_bound,
                         majority_predict, pac_learn, run_tradeoff_mdl,
                         tradeoff_params)
from .agnostic import (LazyMdlConstants, RandomizedClassifier, erm_weighted,
                       randomized_error, run_lazy_hedge_mdl)
from .simplex_opt import (BOX, ELLIPSOID, LARGE_EPS, SMALL_EPS,
                          AdversarialInstance, CapTracker, LazyHedgeResult,
                          MinAffineOracle, OracleResponse, lazy_hedge_maximize,
                          lift_cap, make_adversarial, make_random_concave,
                          region_contains, simplex_grid,
                          verify_approx_max_characterization,
                          verify_oracle_locality)
from .harness import (ExperimentConfig, run_experiment, summarize, trial_rng)
