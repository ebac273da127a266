# coding=utf-8
"""
Perturbed model-based planning.

Rewards of the empirical MDP are perturbed by independent Unif(0, xi) noise, which makes the optimal policy of the
perturbed empirical MDP unique with a quantifiable margin. Planning on that MDP for a fixed number of QVI or PI
iterations then recovers it exactly.
"""
import itertools
import math
from typing import (
    Any,
    Dict,
    Optional,
)

import attr
import numpy as np

from . import (
    constants,
    utils,
)
from .bounds import (
    separation_gap,
)
from .exceptions import (
    InvalidArgumentError,
)
from .generative import (
    EmpiricalModel,
    empirical_mdp,
    sample_empirical_kernel,
)
from .mdp import (
    Policy,
    QVector,
    TabularMDP,
    evaluate_policy_exact,
    greedy_policy,
    policy_iteration_steps,
    q_value_iteration,
    solve_exact,
)


@attr.s(auto_attribs=True, frozen=True)
class PerturbationConfig:
    """
    Reward perturbation settings.

    ``xi`` is the width of the uniform noise. ``xi == 0`` is accepted as the unperturbed control run.
    """

    xi: float = attr.ib(validator=utils.nonnegative)
    alpha: float = attr.ib(default=constants.DEFAULT_ALPHA, validator=utils.at_least(1.0))
    c1: float = attr.ib(default=constants.DEFAULT_C1, validator=utils.positive)
    seed: int = 0

    @classmethod
    def from_scale(
        cls,
        num_states: int,
        num_actions: int,
        discount: float,
        epsilon: float,
        *,
        c1: float = constants.DEFAULT_C1,
        alpha: float = constants.DEFAULT_ALPHA,
        seed: int = 0,
    ) -> 'PerturbationConfig':
        """Config whose xi comes from perturbation_scale"""
        xi = perturbation_scale(num_states, num_actions, discount, epsilon, c1, alpha)
        return cls(xi=xi, alpha=alpha, c1=c1, seed=seed)

    @classmethod
    def from_dict(cls, data: Any) -> 'PerturbationConfig':
        return utils.attrs_from_dict(cls, data, field='perturbation')  # type: ignore[no-any-return]

    def to_dict(self) -> Dict[str, Any]:
        return utils.attrs_to_dict(self)


@attr.s(auto_attribs=True, frozen=True)
class PlannerConfig:
    """Target accuracy, confidence and the constants of the sample and iteration counts"""

    epsilon: float = attr.ib(validator=utils.positive)
    delta: float = attr.ib(validator=utils.open_unit_interval)
    c0: float = attr.ib(default=constants.DEFAULT_C0, validator=utils.positive)
    c2: float = attr.ib(default=constants.DEFAULT_C2, validator=utils.positive)
    method: str = attr.ib(default=constants.METHOD_QVI, validator=utils.one_of(constants.METHODS))

    def check_discount(self, discount: float) -> None:
        """Make sure epsilon lies in (0, 1/(1 - discount)]"""
        if self.epsilon > utils.discount_horizon(discount):
            raise InvalidArgumentError(
                f'must not exceed 1/(1-discount) = {utils.discount_horizon(discount)}', field='epsilon'
            )

    @classmethod
    def from_dict(cls, data: Any) -> 'PlannerConfig':
        return utils.attrs_from_dict(cls, data, field='planner')  # type: ignore[no-any-return]

    def to_dict(self) -> Dict[str, Any]:
        return utils.attrs_to_dict(self)


def perturbation_scale(
    num_states: int,
    num_actions: int,
    discount: float,
    epsilon: float,
    c1: float = constants.DEFAULT_C1,
    alpha: float = constants.DEFAULT_ALPHA,
) -> float:
    """
    xi = c1 (1 - discount) epsilon / (|S|^alpha |A|^alpha)

    :raises InvalidArgumentError: if an input is out of range or xi is not representable as a positive float
    """
    if num_states < 1 or num_actions < 1:
        raise InvalidArgumentError('state and action counts must be positive', field='num_states')
    if not 0.0 < discount < 1.0:
        raise InvalidArgumentError('must lie strictly between 0 and 1', field='discount')
    if not epsilon > 0:
        raise InvalidArgumentError('must be positive', field='epsilon')
    if not c1 > 0:
        raise InvalidArgumentError('must be positive', field='c1')
    if not alpha >= 1:
        raise InvalidArgumentError('must be at least 1', field='alpha')
    try:
        xi = c1 * (1.0 - discount) * epsilon / (float(num_states * num_actions) ** alpha)
    except OverflowError:
        xi = 0.0
    if xi <= 0.0:
        raise InvalidArgumentError(
            f'perturbation scale underflows to zero for {num_states * num_actions} pairs; lower alpha',
            field='alpha',
        )
    return xi


def perturbation_noise(num_states: int, num_actions: int, cfg: PerturbationConfig) -> np.ndarray:
    """zeta(s, a) ~ Unif(0, xi), one draw from the keyed stream of each pair"""
    noise = np.empty(num_states * num_actions)
    for s in range(num_states):
        for a in range(num_actions):
            rng = utils.keyed_rng(cfg.seed, constants.STREAM_PERTURBATION, s, a)
            noise[s * num_actions + a] = rng.uniform(0.0, cfg.xi)
    return noise


def perturb_rewards(mdp: TabularMDP, cfg: PerturbationConfig) -> TabularMDP:
    """r_p = r + zeta with the kernel and discount unchanged"""
    return mdp.with_reward(mdp.reward + perturbation_noise(mdp.num_states, mdp.num_actions, cfg))


def _log_argument(cfg: PlannerConfig, num_states: int, num_actions: int, discount: float) -> float:
    cfg.check_discount(discount)
    return num_states * num_actions / ((1.0 - discount) * cfg.epsilon * cfg.delta)


def sample_size_bound(cfg: PlannerConfig, num_states: int, num_actions: int, discount: float) -> float:
    """c0 log(|S||A| / ((1 - discount) epsilon delta)) / ((1 - discount)^3 epsilon^2), before rounding up"""
    log_term = math.log(_log_argument(cfg, num_states, num_actions, discount))
    return cfg.c0 * log_term / ((1.0 - discount) ** 3 * cfg.epsilon ** 2)


def required_sample_size(cfg: PlannerConfig, num_states: int, num_actions: int, discount: float) -> int:
    """Samples per pair that the planner needs for an epsilon-optimal policy with probability 1 - delta"""
    return int(math.ceil(sample_size_bound(cfg, num_states, num_actions, discount)))


def iteration_count(cfg: PlannerConfig, num_states: int, num_actions: int, discount: float) -> int:
    """k = ceil(c2 / (1 - discount) * log(|S||A| / ((1 - discount) epsilon delta)))"""
    log_term = math.log(_log_argument(cfg, num_states, num_actions, discount))
    return max(1, int(math.ceil(cfg.c2 / (1.0 - discount) * log_term)))


def optimization_error_bound(discount: float, iterations: int) -> float:
    """2 discount^(k+1) / (1 - discount)^2, the Q error of the greedy policy after k iterations"""
    return 2.0 * discount ** (iterations + 1) / (1.0 - discount) ** 2


def recovery_threshold(xi: float, delta: float, discount: float, num_states: int, num_actions: int) -> float:
    """Optimization accuracy xi delta (1 - discount) / (8 |S| |A|^2) that guarantees exact recovery"""
    return xi * delta * (1.0 - discount) / (8.0 * num_states * num_actions ** 2)


def perturbed_decomposition_bound(
    n: int, num_states: int, num_actions: int, discount: float, delta: float, xi: float
) -> float:
    """
    Computable end bound on ||V* - V^pi_hat|| for the perturbed planner:
    2 xi / (1 - discount) + 12 sqrt(2 log(128 S^2 A^3 / (xi (1 - discount)^4 delta^2)) / (N (1 - discount)^3))

    Infinite when xi is 0.
    """
    if xi <= 0.0:
        return constants.INFINITY
    gap = 1.0 - discount
    log_term = math.log(128.0 * num_states ** 2 * num_actions ** 3 / (xi * gap ** 4 * delta ** 2))
    return 2.0 * xi / gap + 12.0 * math.sqrt(2.0 * log_term / (n * gap ** 3))


@attr.s(auto_attribs=True, frozen=True, eq=False)
class PlanResult:
    """Planner output. mdp is the perturbed empirical MDP that was planned on."""

    policy: Policy
    q_values: QVector
    iterations: int
    error_bound: float
    mdp: TabularMDP


def plan_on(mdp: TabularMDP, iterations: int, method: str = constants.METHOD_QVI) -> PlanResult:
    """
    Run a fixed iteration budget of QVI (from Q = 0) or PI and return the greedy policy of the last Q iterate

    For PI the last iterate is the Q-function of the last evaluated policy, so a truncated run returns the improved
    policy one step ahead of it. PI may finish early once its policy is stable; the returned iteration count is what
    was used.
    """
    if iterations < 1:
        raise InvalidArgumentError('must be at least 1', field='iterations')
    if method == constants.METHOD_PI:
        used = 0
        q: Optional[QVector] = None
        for used, (_, _, q) in enumerate(itertools.islice(policy_iteration_steps(mdp), iterations), start=1):
            pass
        assert q is not None
        return PlanResult(greedy_policy(q), q, used, optimization_error_bound(mdp.discount, used), mdp)
    if method != constants.METHOD_QVI:
        raise InvalidArgumentError(f"must be one of {', '.join(constants.METHODS)}", field='method')
    q_final = next(itertools.islice(q_value_iteration(mdp), iterations - 1, None))
    return PlanResult(greedy_policy(q_final), q_final, iterations, optimization_error_bound(mdp.discount, iterations), mdp)


def plan_perturbed(
    em: EmpiricalModel, base_reward: Any, discount: float, pcfg: PerturbationConfig, cfg: PlannerConfig
) -> PlanResult:
    """
    Perturb the rewards of the empirical MDP and plan on it

    :param em: samples from the generative model
    :param base_reward: unperturbed reward vector
    :param discount: discount factor
    :param pcfg: perturbation settings
    :param cfg: planner settings; its iteration constant fixes the QVI/PI budget
    :return: greedy policy of the final iterate, that iterate, the iteration count and its error bound
    """
    perturbed = perturb_rewards(empirical_mdp(em, base_reward, discount), pcfg)
    k = iteration_count(cfg, em.num_states, em.num_actions, discount)
    return plan_on(perturbed, k, cfg.method)


@attr.s(auto_attribs=True, frozen=True, eq=False)
class RecoveryCertificate:
    """Comparison of a planner result with the exact optimum of the MDP it planned on"""

    separation_gap: float
    error_bound: float
    guaranteed: bool
    exact_policy: Policy
    recovered: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            'separation_gap': self.separation_gap,
            'error_bound': self.error_bound,
            'guaranteed': self.guaranteed,
            'exact_policy': list(self.exact_policy.action_of),
            'recovered': self.recovered,
        }


def certify_recovery(result: PlanResult) -> RecoveryCertificate:
    """
    Solve the planned-on MDP exactly and check whether the planner returned its optimal policy

    ``guaranteed`` is True when the separation gap of the exact Q exceeds twice the error bound, in which case
    ``recovered`` must be True as well.
    """
    exact = solve_exact(result.mdp)
    gap, exact_policy = separation_gap(exact.q_values)
    return RecoveryCertificate(
        separation_gap=gap,
        error_bound=result.error_bound,
        guaranteed=gap > 2.0 * result.error_bound,
        exact_policy=exact_policy,
        recovered=result.policy == exact_policy,
    )


@attr.s(auto_attribs=True, frozen=True, eq=False)
class EndToEndResult:
    """Learned policy and its suboptimality on the true MDP"""

    policy: Policy
    achieved_gap: float
    q_gap: float
    samples_per_pair: int
    xi: float
    plan: PlanResult

    @property
    def q_relation_holds(self) -> bool:
        """Q-gap <= discount * V-gap, up to 1e-9"""
        return self.q_gap <= self.plan.mdp.discount * self.achieved_gap + 1e-9

    def to_dict(self) -> Dict[str, Any]:
        return {
            'policy': list(self.policy.action_of),
            'achieved_gap': self.achieved_gap,
            'q_gap': self.q_gap,
            'samples_per_pair': self.samples_per_pair,
            'xi': self.xi,
            'iterations': self.plan.iterations,
            'error_bound': self.plan.error_bound,
        }


def end_to_end(
    mdp_true: TabularMDP,
    cfg: PlannerConfig,
    pcfg: PerturbationConfig,
    sample_seed: int,
    *,
    n: Optional[int] = None,
    workers: int = 1,
) -> EndToEndResult:
    """
    Sample, plan and measure the learned policy on the true MDP

    :param mdp_true: the MDP serving as generative model
    :param cfg: planner settings
    :param pcfg: perturbation settings
    :param sample_seed: seed of the transition samples
    :param n: samples per pair; defaults to required_sample_size
    :param workers: threads used for sampling
    :return: the policy with ||V* - V^pi||, ||Q* - Q^pi|| and the plan
    """
    if n is None:
        n = required_sample_size(cfg, mdp_true.num_states, mdp_true.num_actions, mdp_true.discount)
    em = sample_empirical_kernel(mdp_true, n, sample_seed, workers=workers)
    plan = plan_perturbed(em, mdp_true.reward, mdp_true.discount, pcfg, cfg)
    optimum = solve_exact(mdp_true)
    v_pi, q_pi = evaluate_policy_exact(mdp_true, plan.policy)
    return EndToEndResult(
        policy=plan.policy,
        achieved_gap=utils.sup_norm(optimum.values.values - v_pi.values),
        q_gap=utils.sup_norm(optimum.q_values.values - q_pi.values),
        samples_per_pair=n,
        xi=pcfg.xi,
        plan=plan,
    )
