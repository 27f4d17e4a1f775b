"""Sparse extremal graphical models for Huesler-Reiss distributions.

The package estimates the variogram matrix of a Huesler-Reiss model under
the constraint that the associated precision matrix is the Laplacian of a
connected graph with positive edge weights.  The fit is a block coordinate
descent on a concave dual problem with optimality certificates, preceded by
a data pipeline that turns raw multivariate observations into an empirical
variogram via rank normalization and threshold exceedances.
"""

from .linalg import logdet_pd, pseudo_inverse, sym_eig
from .qp import LowerBoundedQP, QPResult, solve_lb_qp
from .solver import (
    FitConfig,
    FitResult,
    KktReport,
    duality_gap,
    existence_check,
    extract_graph,
    fit,
    fit_on_graph,
    initial_point,
    kkt_report,
    row_update,
)
from .model import (
    HRModel,
    grid_log_concavity,
    information_criteria,
    one_factor_variogram,
    simulate_pareto,
    simulate_root_conditioned,
    surrogate_loglik,
    tree_metric_variogram,
)
from .pipeline import (
    EmpiricalVariogram,
    ExceedanceSet,
    exceedances_from_samples,
    normalize_margins,
    select_exceedances,
    variogram_combined,
    variogram_rooted,
)
from .variogram import (
    InvalidVariogramError,
    cayley_menger_logdet,
    check_variogram,
    fiedler_identity_residual,
    gamma_to_sigma_k,
    gamma_to_theta,
    is_emtp2,
    pseudo_det,
    q_to_theta,
    sigma_k_to_gamma,
    spanning_tree_sum,
    theta_to_gamma,
    theta_to_q,
)

__version__ = "0.1.0"
