#
# -*- coding: utf-8 -*-
# flake8: noqa F401
"""Exact tabular MDP solvers, generative-model planning and numerical certification of their error bounds."""

import sys

# For python 3.8 and later
if sys.version_info >= (3, 8):
    import importlib.metadata as importlib_metadata
else:
    # For everyone else
    import importlib_metadata
try:
    __version__ = importlib_metadata.version(__name__)
except importlib_metadata.PackageNotFoundError:  # pragma: no cover
    # package is not installed
    pass

from typing import List

from .absorbing import (
    AbsorbingSpec,
    EpsilonNet,
    MatchResult,
    build_net,
    canonical_u_star,
    check_lipschitz,
    lemma4_match,
    make_absorbing,
    snap_to_net,
    u_star_deviation,
)
from .bounds import (
    AuxiliarySequence,
    BernsteinReport,
    EvalBoundReport,
    auxiliary_sequence,
    bernstein_condition_check,
    check_lemma7_bound,
    eval_bound_report,
    plug_in_evaluate,
    separation_gap,
)
from .exceptions import (
    InternalError,
    InvalidArgumentError,
    MdpCertError,
)
from .families import generate_mdp
from .generative import (
    EmpiricalModel,
    empirical_mdp,
    sample_empirical_kernel,
    total_sample_size,
)
from .mdp import (
    Policy,
    PolicyMatrices,
    QVector,
    SolveResult,
    TabularMDP,
    ValueVector,
    bellman_optimality_step,
    evaluate_policy_exact,
    greedy_policy,
    load_mdp,
    policy_matrices,
    solve_optimal,
    variance_of_value,
)
from .perturb import (
    PerturbationConfig,
    PlannerConfig,
    end_to_end,
    perturb_rewards,
    perturbation_scale,
    plan_perturbed,
    required_sample_size,
)
from .sweep import (
    ExperimentSpec,
    SlopeFit,
    SweepRecord,
    fit_loglog_slope,
    run_sweep,
)
from .tiebreak import (
    TieBreakReport,
    certify_tie_breaking,
    min_pairwise_gap,
)


__all__: List[str] = [
    # Exceptions
    'MdpCertError',
    'InvalidArgumentError',
    'InternalError',
    # Core types
    'TabularMDP',
    'Policy',
    'ValueVector',
    'QVector',
    'PolicyMatrices',
    'SolveResult',
    # Core operations
    'policy_matrices',
    'evaluate_policy_exact',
    'bellman_optimality_step',
    'solve_optimal',
    'greedy_policy',
    'variance_of_value',
    'load_mdp',
    # Generative model
    'EmpiricalModel',
    'sample_empirical_kernel',
    'empirical_mdp',
    'total_sample_size',
    # Planning
    'PerturbationConfig',
    'PlannerConfig',
    'perturbation_scale',
    'perturb_rewards',
    'required_sample_size',
    'plan_perturbed',
    'end_to_end',
    # Evaluation bounds
    'AuxiliarySequence',
    'BernsteinReport',
    'EvalBoundReport',
    'plug_in_evaluate',
    'auxiliary_sequence',
    'check_lemma7_bound',
    'bernstein_condition_check',
    'eval_bound_report',
    'separation_gap',
    # Absorbing MDPs
    'AbsorbingSpec',
    'EpsilonNet',
    'MatchResult',
    'make_absorbing',
    'canonical_u_star',
    'u_star_deviation',
    'check_lipschitz',
    'build_net',
    'snap_to_net',
    'lemma4_match',
    # Tie-breaking
    'TieBreakReport',
    'certify_tie_breaking',
    'min_pairwise_gap',
    # Experiments
    'generate_mdp',
    'ExperimentSpec',
    'SweepRecord',
    'SlopeFit',
    'run_sweep',
    'fit_loglog_slope',
]
