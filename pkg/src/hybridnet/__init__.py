"""Simulation and likelihood inference for directed hybrid attachment networks."""

from .degrees import (
    DegreeCounts,
    GrowthDiagnostic,
    LimitPmf,
    ccdf,
    degree_counts,
    growth_diagnostic,
    limit_pmf,
    limit_pmf_quadrature,
    nb_pmf,
    strict_tail_fractions,
)
from .estimation import (
    EstimationResult,
    FlatPrior,
    MhConfig,
    NelderMeadConfig,
    TraceEntry,
    accept_probability,
    default_step_sizes,
    fit_integrated,
    fit_mh,
    fit_nelder_mead,
)
from .generator import (
    SimulationConfig,
    SimulationOutput,
    replicate_seeds,
    simulate,
    simulate_replicates,
)
from .io import export, parse_edge_file, window
from .likelihood import (
    ApproxScoreResult,
    BracketingError,
    ScenarioMle,
    SufficientStats,
    approx_score_solve,
    log_likelihood,
    mle_scenarios,
    replay,
    score,
)
from .model import (
    DerivedConstants,
    EdgeLog,
    EdgeRecord,
    HybridParams,
    NetworkState,
    attach_prob_in,
    attach_prob_out,
    classify_edge_log,
    classify_scenario,
    derived_constants,
    step_distribution,
)

__version__ = "0.1.0"

__all__ = [
    "ApproxScoreResult",
    "BracketingError",
    "DegreeCounts",
    "DerivedConstants",
    "EdgeLog",
    "EdgeRecord",
    "EstimationResult",
    "FlatPrior",
    "GrowthDiagnostic",
    "HybridParams",
    "LimitPmf",
    "MhConfig",
    "NelderMeadConfig",
    "NetworkState",
    "ScenarioMle",
    "SimulationConfig",
    "SimulationOutput",
    "SufficientStats",
    "TraceEntry",
    "accept_probability",
    "attach_prob_in",
    "attach_prob_out",
    "ccdf",
    "classify_edge_log",
    "classify_scenario",
    "default_step_sizes",
    "degree_counts",
    "derived_constants",
    "export",
    "fit_integrated",
    "fit_mh",
    "fit_nelder_mead",
    "growth_diagnostic",
    "limit_pmf",
    "limit_pmf_quadrature",
    "log_likelihood",
    "mle_scenarios",
    "nb_pmf",
    "parse_edge_file",
    "replay",
    "replicate_seeds",
    "score",
    "simulate",
    "simulate_replicates",
    "step_distribution",
    "strict_tail_fractions",
    "window",
]
