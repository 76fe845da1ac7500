"""prefmix: individual mixing preference inference for labeled networks."""

from .netio import (
    CountsTable,
    GroupSummary,
    LabeledNetwork,
    group_counts,
    group_summary,
    parse_network,
    parse_network_json,
)
from .likelihood import GroupObjectiveContext, grad, hess, log_lik
from .fit import FitOptions, GroupFit, NetworkFit, fit_all, fit_group
from .metrics import (
    R_point,
    V_point,
    assortativity_point,
    beta_marginal_curve,
    dirichlet_mean,
    dirichlet_sigma2,
    normalized_variance,
    null_assortativity,
)
from .posterior import PosteriorEstimate, estimate_metric, laplace_mean

__version__ = "0.1.0"
