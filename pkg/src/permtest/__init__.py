"""Identity testing of discrete distributions under a permutation promise.

The package bundles the bucket-histogram identity tester and a plug-in
tolerant tester with exact generators for three hard-instance families
and a seeded Monte Carlo harness for measuring empirical error rates and
sample-size thresholds.
"""

from .dist import (
    Permutation,
    Pmf,
    SampleSet,
    apply_permutation,
    dkw_sample_count,
    empirical_pmf,
    kolmogorov_distance,
    load_pmf,
    load_samples,
    sample,
    save_pmf,
    save_samples,
    tv_distance,
)
from .errors import (
    ConstructionError,
    DimensionError,
    FileFormatError,
    ParameterError,
    PermtestError,
    SearchBudgetError,
    VerificationError,
)
from .harness import (
    ExperimentConfig,
    RateSummary,
    TrialRecord,
    run_experiment,
    run_scaling_study,
    summarize,
    threshold,
    wilson_interval,
    write_csv,
)
from .instances import (
    CFRTriple,
    HardInstance,
    MultiplicativeConfig,
    TestingLBConfig,
    build_cfr,
    cfr_distances,
    equal_instance,
    family_member,
    load_instance,
    mult_config,
    mult_exact_tv,
    mult_rational_checks,
    multiplicative_instance,
    random_sorted_pair,
    save_instance,
    testing_lb_config,
    testing_lb_perturbation,
    testing_lb_predicted_tv,
    testing_lb_reference,
)
from .moments import MomentPair, birthday_load, find_moment_pair
from .rng import AliasSampler, derive_seed, generator, splitmix64
from .tester import (
    NO,
    YES,
    BucketPartition,
    TesterParams,
    Verdict,
    build_buckets,
    compute_params,
    exact_suffix_gap,
    identity_test_from_draws,
    permutation_identity_test,
    plugin_tolerant_test,
)

__version__ = "0.1.0"
