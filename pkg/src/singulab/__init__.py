"""Numerical laboratory for hypothesis testability in singular models.

Two model families (two-component Gaussian location mixtures, reduced-rank
linear regression), tools to certify when a hypothesis about them cannot be
tested (overlap witnesses), tests for when it can, posterior contraction on
finite grids, and a scale scan mapping where detectability turns on.
"""

from ._version import __version__
from .config import ExperimentConfig, load_config, point_from_json, point_to_json, resolve_config
from .contraction import (
    ContractionTrace,
    EpsilonSchedule,
    GridPrior,
    contraction_experiment,
    hellinger_to_null_set,
    nonseparation_demo,
    posterior_over_grid,
    prior_mass_within,
)
from .divergence import (
    ExponentFit,
    HellingerEstimate,
    SeparationReport,
    fit_separation_exponent,
    hellinger2,
    hellinger2_monte_carlo,
    hellinger2_quadrature,
    regime_separation,
)
from .equivalence import (
    GMM_ABS_GAP,
    GMM_LABEL_SWAP,
    GMM_SIGNED_GAP,
    RRR_LEADING_U,
    RRR_RANK,
    RRR_SIGN_FLIP,
    IdentifiabilityReport,
    ImpossibilityBound,
    Interval,
    Observable,
    OverlapWitness,
    Regime,
    RegimeLabel,
    SymmetryAction,
    TargetBox,
    find_overlap_witness,
    fixed_sign_svd,
    interval,
    is_identifiable,
    max_log_density_gap,
    singleton,
    verify_impossibility_bound,
)
from .errors import (
    ConfigError,
    InputError,
    InsufficientDataError,
    NumericalError,
    ParameterError,
    ReplicationFailureError,
    SingulabError,
    UnsupportedMethodError,
)
from .harness import RunResult, inject_witness, run_experiment
from .models import (
    GmmParams,
    ModelKind,
    ModelPoint,
    RrrParams,
    SampleBatch,
    batch_seed,
    fingerprint,
    log_density,
    sample,
)
from .testing import (
    ErrorCurve,
    MixtureCalibration,
    OrderingCalibration,
    RankCalibration,
    SignCalibration,
    TestProcedure,
    estimate_error_curve,
    make_gmm_mixture_test,
    make_gmm_ordering_test,
    make_rrr_rank_test,
    make_rrr_sign_test,
)

__all__ = [
    "__version__",
    "ConfigError", "InputError", "InsufficientDataError", "NumericalError",
    "ParameterError", "ReplicationFailureError", "SingulabError",
    "UnsupportedMethodError",
    "GmmParams", "ModelKind", "ModelPoint", "RrrParams", "SampleBatch",
    "batch_seed", "fingerprint", "log_density", "sample",
    "GMM_ABS_GAP", "GMM_LABEL_SWAP", "GMM_SIGNED_GAP", "RRR_LEADING_U",
    "RRR_RANK", "RRR_SIGN_FLIP",
    "IdentifiabilityReport", "ImpossibilityBound", "Interval", "Observable",
    "OverlapWitness", "Regime", "RegimeLabel", "SymmetryAction", "TargetBox",
    "find_overlap_witness", "fixed_sign_svd", "interval", "is_identifiable",
    "max_log_density_gap", "singleton", "verify_impossibility_bound",
    "ExponentFit", "HellingerEstimate", "SeparationReport",
    "fit_separation_exponent", "hellinger2", "hellinger2_monte_carlo",
    "hellinger2_quadrature", "regime_separation",
    "ErrorCurve", "MixtureCalibration", "OrderingCalibration",
    "RankCalibration", "SignCalibration", "TestProcedure",
    "estimate_error_curve", "make_gmm_mixture_test", "make_gmm_ordering_test",
    "make_rrr_rank_test", "make_rrr_sign_test",
    "ContractionTrace", "EpsilonSchedule", "GridPrior",
    "contraction_experiment", "hellinger_to_null_set", "nonseparation_demo",
    "posterior_over_grid", "prior_mass_within",
    "ExperimentConfig", "load_config", "point_from_json", "point_to_json",
    "resolve_config",
    "RunResult", "inject_witness", "run_experiment",
]
