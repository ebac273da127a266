# coding=utf-8
"""
Battery of hard numerical assertions over seeded random instances.

Each check receives a base seed and an instance index, rebuilds its instance from the keyed battery stream and
returns the margin between the bound it tests and the observed value. A violated bound raises LemmaViolation.
Checks that do not apply to an instance return None and are counted as skipped.
"""
from typing import (
    Callable,
    List,
    Optional,
    Sequence,
    Tuple,
)

import attr
import numpy as np
from numpy.random import (
    Generator,
)

from . import (
    constants,
    utils,
)
from .absorbing import (
    check_lipschitz,
    lemma4_match,
    u_star_deviation,
)
from .bounds import (
    check_lemma7_bound,
    expansion_diagnostics,
)
from .exceptions import (
    InternalError,
    InvalidArgumentError,
    LemmaViolation,
)
from .generative import (
    sample_empirical_kernel,
)
from .mdp import (
    Policy,
    TabularMDP,
    evaluate_policy_exact,
    exhaustive_optimal,
    policy_matrices,
    resolvent,
    solve_exact,
    solve_optimal,
)
from .perturb import (
    PerturbationConfig,
    perturb_rewards,
)

CheckFunc = Callable[[int, int], Optional[float]]


def battery_instance(
    seed: int,
    index: int,
    *,
    max_states: int = constants.BATTERY_MAX_STATES,
    max_actions: int = constants.BATTERY_MAX_ACTIONS,
) -> Tuple[TabularMDP, Policy, Generator]:
    """
    Random MDP, random policy and the generator they were drawn from, for one battery index

    Sizes are uniform on 1..max_states and 1..max_actions, the discount is one of 0.5, 0.9 and 0.95, kernel rows
    are Dirichlet(1) and rewards Unif[0, 1]. The returned generator continues the same stream for check-specific
    draws.
    """
    rng = utils.keyed_rng(seed, constants.STREAM_BATTERY, index)
    num_states = int(rng.integers(1, max_states + 1))
    num_actions = int(rng.integers(1, max_actions + 1))
    discount = float(rng.choice(constants.BATTERY_DISCOUNTS))
    kernel = rng.dirichlet(np.ones(num_states), size=num_states * num_actions)
    kernel /= kernel.sum(axis=1, keepdims=True)
    reward = rng.uniform(size=num_states * num_actions)
    mdp = TabularMDP(num_states=num_states, num_actions=num_actions, kernel=kernel, reward=reward, discount=discount)
    pi = Policy(rng.integers(0, num_actions, size=num_states))
    return mdp, pi, rng


def _require(observed: float, bound: float, what: str) -> float:
    margin = bound - observed
    if not margin >= 0:
        raise LemmaViolation(f'{what}: {observed!r} exceeds {bound!r}', margin=margin)
    return margin


def check_neumann_series(seed: int, index: int) -> float:
    """200 terms of sum_i (discount P_pi)^i agree with the direct inverse up to the truncated tail"""
    mdp, pi, _ = battery_instance(seed, index)
    p_sub = policy_matrices(mdp, pi).p_sub
    total = np.zeros_like(p_sub)
    term = np.eye(mdp.num_states)
    for _ in range(constants.NEUMANN_TERMS):
        total += term
        term = mdp.discount * (term @ p_sub)
    tail = mdp.discount ** constants.NEUMANN_TERMS * mdp.horizon
    return _require(float(np.max(np.abs(total - resolvent(mdp, pi)))), tail + 1e-8, 'Neumann series')


def check_resolvent_nonnegative(seed: int, index: int) -> float:
    """Every entry of (I - discount P_pi)^-1 is nonnegative"""
    mdp, pi, _ = battery_instance(seed, index)
    return _require(-float(resolvent(mdp, pi).min()), 1e-12, 'negative resolvent entry')


def check_resolvent_row_sum(seed: int, index: int) -> float:
    """Largest absolute row sum of the resolvent is at most 1/(1 - discount)"""
    mdp, pi, _ = battery_instance(seed, index)
    norm = float(np.abs(resolvent(mdp, pi)).sum(axis=1).max())
    return _require(norm, mdp.horizon + 1e-9, 'resolvent row sum')


def check_resolvent_normalization(seed: int, index: int) -> float:
    """(1 - discount) (I - discount P_pi)^-1 1 = 1"""
    mdp, pi, _ = battery_instance(seed, index)
    ones = np.ones(mdp.num_states)
    deviation = utils.sup_norm((1.0 - mdp.discount) * (resolvent(mdp, pi) @ ones) - ones)
    return _require(deviation, 1e-10, 'resolvent normalization')


def check_resolvent_monotone(seed: int, index: int) -> float:
    """0 <= r1 <= r2 implies (I - discount P_pi)^-1 r1 <= (I - discount P_pi)^-1 r2"""
    mdp, pi, rng = battery_instance(seed, index)
    r1 = rng.uniform(size=mdp.num_states)
    r2 = r1 + rng.uniform(size=mdp.num_states)
    inverse = resolvent(mdp, pi)
    return _require(-float(np.min(inverse @ r2 - inverse @ r1)), 1e-12, 'resolvent monotonicity')


def check_absorbing_equivalence(seed: int, index: int) -> float:
    """For every pair, the absorbing MDP at u* has the optimal Q of the original"""
    mdp, _, _ = battery_instance(seed, index)
    optimum = solve_exact(mdp)
    worst = 0.0
    for s in range(mdp.num_states):
        for a in range(mdp.num_actions):
            q_dev, _ = u_star_deviation(mdp, s, a, optimum)
            worst = max(worst, q_dev)
    return _require(worst, 1e-8, 'absorbing Q deviation')


def check_variance_bound(seed: int, index: int) -> float:
    """Resolvent-variance norm against both the sharp and the classical bound, for a random nonnegative reward"""
    mdp, pi, rng = battery_instance(seed, index)
    check = check_lemma7_bound(mdp, pi, rng.uniform(size=mdp.num_states))
    margin = min(check.rhs - check.lhs, check.classical_rhs - check.lhs)
    if not (check.holds and check.classical_holds):
        raise LemmaViolation(f'resolvent-variance norm {check.lhs!r} exceeds a bound', margin=margin)
    return margin


def check_lipschitz_property(seed: int, index: int) -> float:
    """Optimal Q of absorbing MDPs moves by at most |u - u'| / (1 - discount)"""
    mdp, _, rng = battery_instance(seed, index)
    s = int(rng.integers(mdp.num_states))
    a = int(rng.integers(mdp.num_actions))
    u, u_other = rng.uniform(-mdp.horizon, mdp.horizon, size=2)
    lhs, rhs, holds = check_lipschitz(mdp, s, a, float(u), float(u_other))
    if not holds:
        raise LemmaViolation(f'absorbing Q moved by {lhs!r}, bound {rhs!r}', margin=rhs - lhs)
    return rhs - lhs


def check_planner_oracle(seed: int, index: int) -> float:
    """QVI and PI both reach the value of the best policy found by exhaustive enumeration"""
    mdp, _, _ = battery_instance(seed, index, max_states=constants.BATTERY_ORACLE_MAX_STATES)
    _, v_best = exhaustive_optimal(mdp)
    margin = constants.INFINITY
    for method in constants.METHODS:
        result = solve_optimal(mdp, method)
        if not result.converged:
            raise LemmaViolation(f'{method} did not converge', margin=-constants.INFINITY)
        deviation = utils.sup_norm(result.values.values - v_best.values)
        margin = min(margin, _require(deviation, 1e-9, f'{method} value against enumeration'))
    return margin


def check_perturbation_shift(seed: int, index: int) -> float:
    """Unif(0, xi) reward noise moves any policy value by at most xi / (1 - discount)"""
    mdp, pi, rng = battery_instance(seed, index)
    xi = float(rng.uniform())
    cfg = PerturbationConfig(xi=xi, seed=int(rng.integers(2 ** 32)))
    v, _ = evaluate_policy_exact(mdp, pi)
    v_p, _ = evaluate_policy_exact(perturb_rewards(mdp, cfg), pi)
    return _require(utils.sup_norm(v.values - v_p.values), xi * mdp.horizon + 1e-12, 'perturbation shift')


def check_expansions(seed: int, index: int) -> float:
    """First- and second-order expansions of the plug-in evaluation error are exact"""
    mdp, pi, rng = battery_instance(seed, index)
    em = sample_empirical_kernel(mdp, int(rng.integers(10, 200)), int(rng.integers(2 ** 32)))
    report = expansion_diagnostics(mdp, em, pi)
    return _require(max(report.first_order_residual, report.second_order_residual), 1e-8, 'expansion residual')


def check_net_match(seed: int, index: int) -> Optional[float]:
    """
    With the empirical actions separated by at least omega, the nearest net point to u_hat* reproduces the empirical
    optimal policy and lies within one net step of u_hat*
    """
    mdp, _, rng = battery_instance(seed, index)
    em = sample_empirical_kernel(mdp, int(rng.integers(10, 200)), int(rng.integers(2 ** 32)))
    s = int(rng.integers(mdp.num_states))
    a = int(rng.integers(mdp.num_actions))
    omega = constants.NET_MATCH_OMEGA
    result = lemma4_match(em, mdp.reward, mdp.discount, s, a, omega)
    if result.status == constants.NOT_APPLICABLE:
        return None
    if not result.matches:
        raise LemmaViolation(f'net point {result.u0!r} changes the optimal policy', margin=-constants.INFINITY)
    return _require(result.snap_error, (1.0 - mdp.discount) * omega / 4.0, 'net snapping error')


# name, description, check; rows print in this order
BATTERY: List[Tuple[str, str, CheckFunc]] = [
    ('resolvent-neumann', 'truncated Neumann series', check_neumann_series),
    ('resolvent-nonnegative', 'resolvent entries >= 0', check_resolvent_nonnegative),
    ('resolvent-row-sum', 'resolvent row sums <= 1/(1-g)', check_resolvent_row_sum),
    ('resolvent-normalization', '(1-g) resolvent 1 = 1', check_resolvent_normalization),
    ('resolvent-monotone', 'resolvent is monotone', check_resolvent_monotone),
    ('absorbing-equivalence', 'absorbing MDP at u* keeps Q*', check_absorbing_equivalence),
    ('variance-bound', 'resolvent-variance bounds', check_variance_bound),
    ('lipschitz', 'absorbing Q* is Lipschitz in u', check_lipschitz_property),
    ('planner-oracle', 'QVI and PI match enumeration', check_planner_oracle),
    ('perturbation-shift', 'reward noise shifts V by <= xi/(1-g)', check_perturbation_shift),
    ('expansions', 'plug-in error expansions', check_expansions),
    ('net-match', 'net point keeps the empirical policy', check_net_match),
]

CHECK_NAMES = [name for name, _, _ in BATTERY]


@attr.s(auto_attribs=True, frozen=True)
class LemmaCheck:
    """Outcome of one battery row"""

    name: str
    description: str
    instances: int
    skipped: int
    failures: int
    worst_margin: float
    first_failure: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.failures == 0


def run_check(name: str, description: str, check: CheckFunc, seeds: int, seed: int = 0) -> LemmaCheck:
    """Run one check over instances 0..seeds-1 and tally the outcome"""
    skipped = 0
    failures = 0
    worst = constants.INFINITY
    first_failure = None
    for index in range(seeds):
        try:
            margin = check(seed, index)
        except (LemmaViolation, InternalError) as ex:
            failures += 1
            worst = min(worst, getattr(ex, 'margin', -constants.INFINITY))
            if first_failure is None:
                first_failure = f'instance {index}: {ex}'
            continue
        if margin is None:
            skipped += 1
        else:
            worst = min(worst, margin)
    return LemmaCheck(name, description, seeds, skipped, failures, worst, first_failure)


def run_lemma_battery(
    seeds: int,
    seed: int = 0,
    *,
    names: Optional[Sequence[str]] = None,
    progress: Optional[Callable[[str], None]] = None,
) -> List[LemmaCheck]:
    """
    Run the battery

    :param seeds: instances per check
    :param seed: base seed of the instance stream
    :param names: subset of CHECK_NAMES to run, all of them by default
    :param progress: optional callback receiving one message per check
    :return: one LemmaCheck per row in battery order
    :raises InvalidArgumentError: on a nonpositive instance count or an unknown check name
    """
    if isinstance(seeds, bool) or not isinstance(seeds, int) or seeds < 1:
        raise InvalidArgumentError('must be a positive integer', field='seeds')
    selected = CHECK_NAMES if names is None else list(names)
    for name in selected:
        if name not in CHECK_NAMES:
            raise InvalidArgumentError(f'unknown check {name!r}', field='names')

    results = []
    for name, description, check in BATTERY:
        if name not in selected:
            continue
        if progress is not None:
            progress(f'Checking {name} on {seeds} instances')
        results.append(run_check(name, description, check, seeds, seed))
    return results
