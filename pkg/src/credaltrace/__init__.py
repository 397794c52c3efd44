"""Bayesian and credal networks under log-likelihood-ratio tracing attacks."""

from .attack import (
    AttackModel,
    CalibratedTest,
    PowerCurve,
    bn_attack,
    calibrate,
    cn_attack,
    decide,
    default_alpha_grid,
    evaluate,
    llr,
    theoretical_power,
)
from .bayesnet import (
    BayesNet,
    count_tables,
    dirichlet_estimate,
    forward_sample,
    log_joint,
    log_likelihood,
    mle,
    random_parameters,
    subsample,
)
from .credalnet import (
    CredalNet,
    constrained_mle,
    contaminate,
    contains,
    idm_from_data,
    sample_point,
    singleton,
    vacuous,
)
from .graph import Dag, complexity, parent_configurations, random_dag
from .reconstruction import classify_cn, recover_from_contamination, recover_from_idm
from .stats import empirical_quantile, make_rng, std_normal_cdf, std_normal_quantile

__version__ = "0.1.0"
