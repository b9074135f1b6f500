"""prefsim: choice models, preference-data simulation, and fitting algorithms.

A small laboratory for studying what reward-learning, direct-preference,
inclusive, and calibration fits do to a two-category message policy when the
preference data come from a population that violates independence of
irrelevant alternatives.
"""

__version__ = "0.1.0"

from .core import (
    BasePolicy,
    Category,
    MessagePool,
    PolicyParams,
    RewardParams,
    TypeDistribution,
    category_mass,
    kl_to_base,
)
from .choice import (
    ChoiceDistribution,
    ChoiceSet,
    FiniteChoiceModel,
    Message,
    dichotomy_choice_probs,
    hard_choice_probs,
    iia_deviation,
    logit_choice_probs,
    sample_choice,
    sample_soft_choice_gumbel,
    soft_choice_probs,
)
from .datagen import (
    GenerationConfig,
    PreferenceDatum,
    SufficientStats,
    partition_counts,
    rho_stats,
    sample_choice_set,
    sample_choice_set_members,
    sample_dataset,
)
from .fitting import (
    FitResult,
    FitSettings,
    dpo_loss,
    fit_dpo,
    fit_il,
    fit_reward,
    fit_rlpo,
    fit_slic,
    il_loss,
    optimal_policy,
    policy_loss,
    reward_loss,
    slic_loss,
)
from .solvers import (
    ScalarMinResult,
    gradient_descent_scalar,
    minimize_scalar_convex,
)
from .theory import (
    Direction,
    FailurePrediction,
    both_categories_rate,
    default_eta,
    event_eta_holds,
    event_il_holds,
    f_threshold,
    il_asymptotic_mass,
    predict_rlpo_failure,
)
from .experiments import (
    ExperimentConfig,
    Curve,
    CurvePoint,
    run_il_sweep,
    run_rlpo_dpo_sweep,
    run_slic_sweep,
    run_theory_check,
)
from .errors import (
    InvalidParameterError,
    NumericError,
    SimulationError,
    UndefinedRatioError,
    UnsupportedFormatError,
)
