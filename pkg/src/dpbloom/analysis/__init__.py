"""Accuracy bounds, calibration oracles, privacy audit and experiment runners."""

from .audit import AuditReport, AuditRow, TailCheck, loss_tail_check, privacy_audit
from .bounds import (
    QueryOutcome,
    UtilityParams,
    accuracy_bound_private,
    accuracy_bound_private_vs_standard,
    accuracy_bound_standard,
    fpr_approx,
    fpr_bound,
    fpr_exact,
    random_guess_rate,
)
from .experiments import (
    FprResult,
    Rate,
    UtilityResult,
    WdistResult,
    run_fpr_experiment,
    run_utility_experiment,
    run_wdist_experiment,
)
from .oracles import (
    empirical_quantile,
    enumerate_y,
    enumerate_y_exact,
    enumerate_z,
    enumerate_z_exact,
    mc_w_distribution,
    mc_w_samples,
    occupancy_w_distribution,
    total_variation,
)
