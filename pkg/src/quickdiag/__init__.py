"""Robust quickest change diagnosis.

MCUSUM procedures built from oracle, user-chosen or robust pair sets, a
window-limited GLR competitor, exact boundedness verifiers for Gaussian mean
boxes, and a seeded Monte Carlo harness.
"""

__version__ = "0.1.0"

from .boundedness import (
    Certificate,
    UncertaintyModel,
    check_dsb_direct,
    check_dsb_via_wsb,
    check_wsb,
    delta_ij,
    delta_star,
    inf_delta_over_box,
    sup_lr_expectation_over_box,
)
from .cusum import Censored, CusumState, cusum_run, cusum_statistic_bruteforce, cusum_update
from .distributions import (
    Categorical,
    DistPair,
    GaussianId,
    kl_divergence,
    llr_increment,
    log_density,
    lr_expectation,
    run_rng,
    sample,
)
from .glr import BoxSet, GlrState, clipped_mle, glr_new, glr_run, glr_statistic, glr_step
from .mcusum import (
    Diagnosis,
    McusumState,
    UpsilonSet,
    mcusum_new,
    mcusum_run,
    mcusum_step,
    renewal_first_detection,
    upsilon_from_distributions,
)
from .montecarlo import (
    GlrProcedure,
    McEstimate,
    McusumProcedure,
    Scenario,
    calibrate_threshold,
    compare_robust_vs_oracle,
    estimate_delay,
    estimate_false_metric,
    false_metrics,
)
