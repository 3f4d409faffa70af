"""Symmetric random matrices with independent, internally correlated
diagonals: spectral Monte Carlo against the semicircle law plus exact
moment-method combinatorics at desk scale."""

from .ensemble import (
    ConditionReport,
    EnsembleConfig,
    RandomField,
    SymmetricMatrix,
    assemble_matrix,
    check_conditions,
    generate_field,
    sample_matrix,
)
from .errors import (
    ConfigurationError,
    CorrwigError,
    EnumerationGuardError,
    NumericalError,
    UnsupportedModelError,
)
from .experiments import (
    ExperimentPlan,
    ExperimentResult,
    preset_plan,
    recompute_verdicts,
    run_convergence,
    run_counterexample,
    run_covariance_decay,
    run_experiment,
    run_lemma_counts,
    run_moments,
    run_variance_scaling,
)
from .partitions import (
    PairPartition,
    Partition,
    enumerate_noncrossing_pair_partitions,
    enumerate_pair_partitions,
    enumerate_partitions,
    is_crossing,
)
from .processes import (
    ConstantDiagonal,
    CovarianceModel,
    FiniteMarkov,
    GaussAR1,
    IID,
    MarkovChainSpec,
    covariance_model,
    generate_ar1_diagonal,
    generate_markov_diagonal,
    markov_covariance,
    two_state_chain,
)
from .spectral import (
    SEMICIRCLE,
    EmpiricalDistribution,
    MomentReport,
    SemicircleLaw,
    Spectrum,
    catalan,
    eigenvalues,
    empirical_distribution,
    kolmogorov_distance,
    moment_report,
    semicircle_cdf,
    semicircle_density,
    semicircle_moment,
    trace_moment,
)
from .streams import DEFAULT_SEED, standard_normals, substream
from .tuples import (
    ConsistentTuple,
    count_pattern_tuples,
    count_reflected_tuples,
    enumerate_consistent_tuples,
    exact_expected_trace_moment,
    expected_product_gaussian,
    induced_partition,
    pattern_tuple_counts,
    reflected_abs_expectation_sum,
)

__version__ = "0.1.0"
