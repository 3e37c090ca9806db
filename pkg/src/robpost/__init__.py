"""Posterior sampling from robust summary statistics.

Samples the exact Bayesian posterior of parametric-family parameters when
only insufficient robust statistics of the data are available: a set of
empirical quantiles, (median, IQR), or (median, MAD).  A two-block Gibbs
sampler alternates between resampling the latent data vector under the
observed constraints and resampling the parameters given the completed
data.  An ABC-rejection baseline and a closed-form Normal-Inverse-Gamma
approximation are included for validation.
"""

from .distributions import (
    Cauchy,
    Family,
    Gaussian,
    Interval,
    TranslatedWeibull,
    make_family,
)
from .errors import (
    ConfigError,
    DegenerateScaleError,
    DiagnosticsError,
    InfeasibleIntervalError,
    InitializationError,
    ParameterError,
    RobpostError,
)
from .med_iqr_conditional import (
    MedIqrConstraints,
    conditional_mediqr_logdensity,
    init_mediqr_state,
    mediqr_free_variables,
    mh_update_mediqr,
    refill_free_coordinates_mediqr,
)
from .med_mad_conditional import (
    MedMadConstraints,
    audit_medmad,
    gibbs_sweep_medmad,
    init_medmad_state,
    pair_update_even,
    pair_update_odd,
)
from .order_stats import (
    OrderStatSpec,
    QuantileIndex,
    empirical_iqr,
    empirical_mad,
    empirical_median,
    empirical_quantile,
    joint_orderstat_logdensity,
    orderstat_variance_approx,
    quantile_index,
)
from .posterior_updates import (
    CauchyLocPrior,
    CauchyPriors,
    GammaPrior,
    NigParams,
    WeibullPriors,
    mh_theta_update,
    nig_approx_medmad,
    nig_posterior_given_x,
    sample_nig,
)
from .quantile_conditional import (
    QuantileConstraints,
    conditional_orderstat_logdensity,
    init_quantile_state,
    mh_update_orderstats,
    refill_free_coordinates,
)
from .sampler import (
    AbcConfig,
    AbcOutput,
    ChainOutput,
    GibbsConfig,
    MedianIqrSummary,
    MedianMadSummary,
    QuantileSummary,
    abc_rejection,
    effective_sample_size,
    run_chain,
    summarize,
)

__version__ = "0.1.0"
