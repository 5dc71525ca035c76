"""Bandits with arm-dependent, heavy-tailed, partially observable delays.

Simulation environment, delay-patient index policies, reconstructed
baselines, hard-instance generators, and a Monte Carlo harness with
deterministic seeding.
"""

__version__ = "0.1.0"

from .distributions import (
    Bernoulli,
    Dirac,
    Geometric,
    ParetoCeil,
    PointMass,
    TwoPointMass,
    assumption1_margin,
    delay_law_from_spec,
    reward_law_from_spec,
)
from .environment import (
    BanditInstance,
    DelayedBanditEnv,
    EpisodeComplete,
    ObservationView,
    PullRecord,
    WindowedSum,
)
from .estimators import (
    AdaptParams,
    InsufficientDataError,
    UcbParams,
    UndefinedEstimatorError,
    alpha_bar,
    alpha_hat,
    bias_bound_oracle,
    confidence_radius,
    log_log_schedule,
    mu_hat,
    window_pair,
)
from .harness import (
    MonteCarloResult,
    RegretTrace,
    default_checkpoints,
    monte_carlo,
    run_episode,
    simulate,
    split_seed,
)
from .policies import (
    AdaptPatientBandits,
    DUcb,
    PatientBandits,
    Policy,
    UniformRandom,
    VanillaUcb,
    make_policy,
)
from .theory import (
    LowerBoundPair,
    make_coupled_pair,
    make_lower_bound_pair,
    observable_mean,
)

__all__ = [
    "__version__",
    "Bernoulli", "PointMass", "Dirac", "ParetoCeil", "TwoPointMass", "Geometric",
    "assumption1_margin", "reward_law_from_spec", "delay_law_from_spec",
    "BanditInstance", "DelayedBanditEnv", "EpisodeComplete", "ObservationView",
    "PullRecord", "WindowedSum",
    "UcbParams", "AdaptParams", "mu_hat", "confidence_radius", "bias_bound_oracle",
    "alpha_hat", "alpha_bar", "window_pair", "log_log_schedule",
    "UndefinedEstimatorError", "InsufficientDataError",
    "Policy", "PatientBandits", "AdaptPatientBandits", "DUcb", "VanillaUcb",
    "UniformRandom", "make_policy",
    "RegretTrace", "MonteCarloResult", "split_seed", "default_checkpoints",
    "simulate", "run_episode", "monte_carlo",
    "LowerBoundPair", "make_lower_bound_pair", "make_coupled_pair", "observable_mean",
]
