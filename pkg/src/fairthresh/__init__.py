"""Fair threshold policies for two groups and their behaviour under biased training data."""

from .bias import BiasSpec, BiasedPopulation, ShiftSpec, apply_bias, sample_dataset
from .errors import (
    DegenerateProfile,
    DomainError,
    FairThreshError,
    InconsistentInput,
    InfeasibleConstraint,
    InsufficientData,
    ParseError,
    SolverUnavailable,
    UnsupportedCriterion,
    ValidationError,
)
from .ingest import ProfileTable, ScoredRecords, load_fico, load_profile_table, records_to_population, table_to_population
from .policy import FairnessSpec, PolicyEvaluation, ThresholdPair, grid_oracle, solve_fair, solve_mu, utility
from .population import GroupModel, Population, gaussian_population, population_from_profile, synthetic_population
from .scenario import Scenario, SweepResult, emit_outputs, fit_violation_trend, load_scenario, run_scenario
from .sensitivity import compare_dp_tpr, sensitivity_feature_bias, sensitivity_label_bias

__version__ = "0.1.0"
