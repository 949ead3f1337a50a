"""Exact solvers and stochastic-approximation learners for finite Markov reward and decision processes."""

from .errors import (
    ConfigError,
    DimensionMismatch,
    MarkovRLError,
    MaxItersExceeded,
    ModelParseError,
    NegativeEntryError,
    NonFiniteUpdate,
    NotIrreducibleError,
    RankDeficientBasis,
    RowSumError,
    UnknownFixture,
)
from .markov import (
    PRNG_ALGORITHM,
    SamplePath,
    StationaryDistribution,
    StochasticMatrix,
    is_irreducible,
    sample_path,
    stationary_distribution,
    validate_stochastic,
    weighted_norm,
)
from .mdp import (
    ActionValueFunction,
    MarkovDecisionProcess,
    Policy,
    bellman_map,
    f_map,
    greedy_policy,
    induced_mrp,
    q_of_policy,
    solve_optimal_q,
    solve_optimal_value,
)
from .models import load_fixture, load_model, save_model
from .mrp import (
    MarkovRewardProcess,
    ValueVector,
    reward_from_next_state,
    value_direct,
    value_iterate,
)
from .qlearning import QLearnerState, q_update, run_batch_q_learning, run_q_learning
from .sa import (
    ClockMode,
    NoiseModel,
    SAEstimate,
    StepSchedule,
    basa_step,
    run_basa,
    sa_step_synchronous,
    step_size,
)
from .td import (
    projection_M,
    t_lambda_operator,
    td_fa_fixed_point,
    td_lambda_fa,
    td_lambda_tabular,
    temporal_difference,
)
from .traces import TraceRecord

__version__ = "0.1.0"
