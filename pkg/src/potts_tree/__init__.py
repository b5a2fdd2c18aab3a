"""Extremality and reconstruction thresholds for Potts broadcasting on trees.

The package has four layers: `core` (the symmetric q-ary channel and
simplex/message containers), `tree` (breadth-first rooted trees: regular,
spherically symmetric, Galton-Watson), `thresholds` (the analytic
constants and critical temperatures), and `broadcast` (exact conditional
root marginals plus seeded Monte-Carlo estimators).  The `potts-tree`
console script exposes all of it.
"""

from .core import (
    MessageVector,
    PottsChannel,
    ProbVector,
    beta_of_epsilon,
    channel_matrix,
    epsilon_total_of_beta,
    lambda2,
    lambda_of_epsilon,
    phi,
    symmetrize,
    u,
    utilde,
)
from .tree import (
    MAX_NODES,
    OffspringDistribution,
    TreeBudgetError,
    TreeInstance,
    galton_watson_tree,
    galton_watson_tree_from,
    regular_tree,
    spherically_symmetric_tree,
    tree_from_text,
    tree_to_text,
)
from .thresholds import (
    DEFAULT_SETTINGS,
    SWEEP_SETTINGS,
    ExcessSweep,
    KestenStigumPoint,
    OptimizerSettings,
    SolverError,
    Table2Row,
    ThresholdReport,
    beta_c,
    cbar,
    chat,
    criterion_value,
    epsilon_excess,
    ferro_threshold,
    kesten_stigum,
    lambda_q,
    psi,
    reproduce_table2,
    simplex_ratio,
    slice_interval,
    slice_ratio,
    threshold_report,
)
from .broadcast import (
    UNIFORM,
    DeviationPoint,
    EntropyEstimate,
    SpinConfiguration,
    bp_all_messages,
    bp_root_marginal,
    broadcast,
    entropy_mc,
    root_deviation_probe,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # core
    "PottsChannel",
    "ProbVector",
    "MessageVector",
    "lambda2",
    "beta_of_epsilon",
    "lambda_of_epsilon",
    "epsilon_total_of_beta",
    "channel_matrix",
    "u",
    "utilde",
    "phi",
    "symmetrize",
    # tree
    "MAX_NODES",
    "TreeBudgetError",
    "OffspringDistribution",
    "TreeInstance",
    "regular_tree",
    "spherically_symmetric_tree",
    "galton_watson_tree",
    "galton_watson_tree_from",
    "tree_to_text",
    "tree_from_text",
    # thresholds
    "OptimizerSettings",
    "DEFAULT_SETTINGS",
    "SWEEP_SETTINGS",
    "SolverError",
    "psi",
    "ferro_threshold",
    "lambda_q",
    "slice_interval",
    "slice_ratio",
    "simplex_ratio",
    "chat",
    "cbar",
    "criterion_value",
    "beta_c",
    "KestenStigumPoint",
    "kesten_stigum",
    "Table2Row",
    "reproduce_table2",
    "ExcessSweep",
    "epsilon_excess",
    "ThresholdReport",
    "threshold_report",
    # broadcast
    "UNIFORM",
    "SpinConfiguration",
    "EntropyEstimate",
    "DeviationPoint",
    "broadcast",
    "bp_root_marginal",
    "bp_all_messages",
    "entropy_mc",
    "root_deviation_probe",
]
