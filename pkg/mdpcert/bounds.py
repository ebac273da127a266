# coding=utf-8
"""
Plug-in policy evaluation and the computable quantities of its error analysis: the auxiliary variance recursion,
the Bernstein-type condition, instance-dependent and worst-case evaluation bounds, and the resolvent-variance bound.

All logarithms are natural.
"""
import math
from typing import (
    Any,
    Dict,
    Optional,
    Tuple,
)

import attr
import numpy as np

from . import (
    constants,
    utils,
)
from .exceptions import (
    InvalidArgumentError,
)
from .generative import (
    EmpiricalModel,
    empirical_mdp,
)
from .mdp import (
    Policy,
    QVector,
    TabularMDP,
    ValueVector,
    evaluate_policy_exact,
    greedy_policy,
    solve_resolvent,
    variance_of_value,
)


def plug_in_evaluate(em: EmpiricalModel, reward: Any, discount: float, pi: Policy) -> ValueVector:
    """V_hat^pi = (I - discount * P_hat_pi)^-1 r_pi, solved exactly on the empirical kernel"""
    v_hat, _ = evaluate_policy_exact(empirical_mdp(em, reward, discount), pi)
    return v_hat


def default_depth(discount: float) -> int:
    """m = ceil(log(e / (1 - discount)))"""
    return int(math.ceil(utils.log_horizon(discount)))


def log_factor(num_states: int, discount: float, delta: float) -> float:
    """L = log(4 |S| log(e / (1 - discount)) / delta)"""
    return math.log(4.0 * num_states * utils.log_horizon(discount) / delta)


def evaluation_premise(n: int, num_states: int, discount: float, delta: float) -> bool:
    """Sample size condition N >= 32 e^2 / (1 - discount) * L of the evaluation bound"""
    return n >= 32.0 * math.e ** 2 / (1.0 - discount) * log_factor(num_states, discount, delta)


def required_evaluation_sample_size(
    num_states: int, discount: float, epsilon: float, delta: float, c0: float = constants.DEFAULT_C0
) -> int:
    """
    Samples per pair for an epsilon-accurate plug-in estimate,
    c0 log(|S| log(e/(1-discount)) / delta) / ((1-discount)^3 epsilon^2)
    """
    if not (epsilon > 0 and 0 < delta < 1 and 0 < discount < 1):
        raise InvalidArgumentError('epsilon must be positive, delta and discount in (0, 1)', field='epsilon')
    value = c0 * math.log(num_states * utils.log_horizon(discount) / delta) / ((1.0 - discount) ** 3 * epsilon ** 2)
    return max(1, int(math.ceil(value)))


@attr.s(auto_attribs=True, frozen=True, eq=False)
class AuxiliarySequence:
    """
    r^(0) = r_pi, V^(l) = (I - discount * P_pi)^-1 r^(l) and r^(l) = sqrt(Var_{P_pi}[V^(l-1)]) for l = 1..depth
    """

    depth: int
    r_levels: Tuple[np.ndarray, ...]
    v_levels: Tuple[np.ndarray, ...]

    def level_norms(self) -> Tuple[float, ...]:
        return tuple(utils.sup_norm(v) for v in self.v_levels)

    def norm_bound_holds(self, discount: float, *, slack: float = 1e-9) -> bool:
        """||V^(l)|| <= (4 / (discount sqrt(1 - discount)))^(l-1) ||V^(1)|| for every l >= 1"""
        norms = self.level_norms()
        if self.depth < 1:
            return True
        factor = 4.0 / (discount * math.sqrt(1.0 - discount))
        return all(norms[lvl] <= factor ** (lvl - 1) * norms[1] * (1.0 + slack) + slack for lvl in range(1, self.depth + 1))


def auxiliary_sequence(mdp: TabularMDP, pi: Policy, m: Optional[int] = None) -> AuxiliarySequence:
    """
    Build the auxiliary vectors of the fixed-policy error analysis

    :param mdp: the true MDP
    :param pi: the policy
    :param m: depth, at least 1; defaults to default_depth
    """
    depth = default_depth(mdp.discount) if m is None else m
    if depth < 1:
        raise InvalidArgumentError('must be at least 1', field='m')
    rows = pi.pair_indices(mdp)
    p_sub = mdp.kernel[rows]
    r_levels = [mdp.reward[rows].copy()]
    v_levels = [solve_resolvent(p_sub, mdp.discount, r_levels[0])]
    for _ in range(depth):
        r_levels.append(np.sqrt(variance_of_value(p_sub, ValueVector(v_levels[-1]))))
        v_levels.append(solve_resolvent(p_sub, mdp.discount, r_levels[-1]))
    return AuxiliarySequence(depth=depth, r_levels=tuple(r_levels), v_levels=tuple(v_levels))


def resolvent_variance_norm(mdp: TabularMDP, pi: Policy, v: ValueVector) -> float:
    """||(I - discount * P_pi)^-1 sqrt(Var_{P_pi}[V])||"""
    p_sub = mdp.kernel[pi.pair_indices(mdp)]
    return utils.sup_norm(solve_resolvent(p_sub, mdp.discount, np.sqrt(variance_of_value(p_sub, v))))


def classical_variance_bound(discount: float, reward: Any) -> float:
    """2 log 2 / (discount (1 - discount)^1.5) ||r||, the older bound on the resolvent-variance norm"""
    return 2.0 * math.log(2.0) / (discount * (1.0 - discount) ** 1.5) * utils.sup_norm(reward)


@attr.s(auto_attribs=True, frozen=True)
class VarianceBoundCheck:
    """Both sides of the resolvent-variance bound, with the classical bound for comparison"""

    lhs: float
    rhs: float
    holds: bool
    classical_rhs: float
    classical_holds: bool


def check_lemma7_bound(mdp: TabularMDP, pi: Policy, r_nonneg: Any, *, slack: float = 1e-9) -> VarianceBoundCheck:
    """
    Compare ||(I - discount * P_pi)^-1 sqrt(Var_{P_pi}(V))|| with 4 / (discount sqrt(1 - discount)) ||V||
    where V = (I - discount * P_pi)^-1 r_nonneg

    :param mdp: supplies the kernel and discount
    :param pi: the policy
    :param r_nonneg: nonnegative state reward vector of length |S|
    :raises InvalidArgumentError: if the reward has a negative entry or the wrong length
    """
    r = utils.as_float_array(r_nonneg, field='r_nonneg', ndim=1)
    if r.shape[0] != mdp.num_states:
        raise InvalidArgumentError(f'expected {mdp.num_states} entries', field='r_nonneg')
    if np.any(r < 0):
        raise InvalidArgumentError('rewards must be nonnegative', field='r_nonneg')
    p_sub = mdp.kernel[pi.pair_indices(mdp)]
    v = ValueVector(solve_resolvent(p_sub, mdp.discount, r))
    lhs = utils.sup_norm(solve_resolvent(p_sub, mdp.discount, np.sqrt(variance_of_value(p_sub, v))))
    rhs = 4.0 / (mdp.discount * math.sqrt(1.0 - mdp.discount)) * v.sup_norm()
    classical = classical_variance_bound(mdp.discount, r)
    tol = slack * (1.0 + lhs)
    return VarianceBoundCheck(
        lhs=lhs, rhs=rhs, holds=lhs <= rhs + tol, classical_rhs=classical, classical_holds=lhs <= classical + tol
    )


def default_beta1(depth: int, num_states: int, delta: float) -> float:
    """beta1 = 2 log(4 m |S| / delta), the value for which the Bernstein condition holds with probability 1 - delta"""
    return 2.0 * math.log(4.0 * depth * num_states / delta)


def bernstein_premise(n: int, discount: float, beta1: float) -> bool:
    """N > 16 e^2 beta1 / (1 - discount)"""
    return n > 16.0 * math.e ** 2 * beta1 / (1.0 - discount)


def bernstein_error_bound(n: int, discount: float, beta1: float, reward_norm: float = 1.0) -> float:
    """6 / (1 - discount) sqrt(beta1 / (N (1 - discount))) ||r||, the evaluation error implied by the condition"""
    return 6.0 / (1.0 - discount) * math.sqrt(beta1 / (n * (1.0 - discount))) * reward_norm


@attr.s(auto_attribs=True, frozen=True, eq=False)
class BernsteinReport:
    """Per-level outcome of the Bernstein-type condition"""

    beta1: float
    n: int
    level_holds: Tuple[bool, ...]
    minimal_beta1: float

    @property
    def holds(self) -> bool:
        return all(self.level_holds)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'beta1': self.beta1,
            'n': self.n,
            'level_holds': list(self.level_holds),
            'holds': self.holds,
            'minimal_beta1': self.minimal_beta1,
        }


def _minimal_beta(deviation: np.ndarray, std: np.ndarray, norm: float, n: int) -> float:
    """Smallest beta with deviation <= sqrt(beta/n) std + beta norm / n entrywise"""
    a = std / math.sqrt(n)
    b = norm / n
    worst = 0.0
    for dev, lin in zip(deviation, a):
        if dev <= 0.0:
            continue
        if b > 0.0:
            root = (-lin + math.sqrt(lin * lin + 4.0 * b * dev)) / (2.0 * b)
        elif lin > 0.0:
            root = dev / lin
        else:
            return constants.INFINITY
        worst = max(worst, root * root)
    return worst


def bernstein_condition_check(
    p_true: Any, p_hat: Any, pi: Policy, aux: AuxiliarySequence, beta1: float, n: int
) -> BernsteinReport:
    """
    Evaluate |(P_hat_pi - P_pi) V^(l)| <= sqrt(beta1/N) sqrt(Var_{P_pi}[V^(l)]) + beta1 ||V^(l)|| / N entrywise for
    every level 0 <= l <= m

    :param p_true: true kernel, shape (S*A, S)
    :param p_hat: empirical kernel, same shape
    :param pi: the policy the auxiliary sequence was built for
    :param aux: auxiliary sequence of pi on the true kernel
    :param beta1: the constant under test
    :param n: samples per pair
    :return: per-level booleans and the smallest beta1 that passes every level
    """
    p_true = np.asarray(p_true, dtype=np.float64)
    p_hat = np.asarray(p_hat, dtype=np.float64)
    if p_true.shape != p_hat.shape or p_true.ndim != 2:
        raise InvalidArgumentError('kernels must have the same 2-d shape', field='p_hat')
    num_states = p_true.shape[1]
    if pi.num_states != num_states or p_true.shape[0] % num_states:
        raise InvalidArgumentError('policy does not match the kernels', field='policy')
    num_actions = p_true.shape[0] // num_states
    rows = np.arange(num_states) * num_actions + pi.array
    p_pi, p_hat_pi = p_true[rows], p_hat[rows]

    level_holds = []
    minimal = 0.0
    for v in aux.v_levels:
        norm = utils.sup_norm(v)
        noise = 1e-12 * (1.0 + norm)
        deviation = np.abs((p_hat_pi - p_pi) @ v)
        deviation = np.where(deviation <= noise, 0.0, deviation)
        std = np.sqrt(variance_of_value(p_pi, ValueVector(v)))
        rhs = math.sqrt(beta1 / n) * std + beta1 * norm / n
        level_holds.append(bool(np.all(deviation <= rhs + noise)))
        minimal = max(minimal, _minimal_beta(deviation, std, norm, n))
    return BernsteinReport(beta1=beta1, n=n, level_holds=tuple(level_holds), minimal_beta1=minimal)


@attr.s(auto_attribs=True, frozen=True, eq=False)
class EvalBoundReport:
    """Plug-in evaluation error of one policy next to its instance-dependent and worst-case bounds"""

    empirical_error: float
    instance_bound: float
    worst_case_bound: float
    resolvent_variance_norm: float
    n: int
    delta: float
    premise_holds: bool
    bernstein: Optional[BernsteinReport] = None

    def to_dict(self) -> Dict[str, Any]:
        data = utils.attrs_to_dict(self)
        data['bernstein'] = None if self.bernstein is None else self.bernstein.to_dict()
        return data


def eval_bound_report(
    mdp_true: TabularMDP, em: EmpiricalModel, pi: Policy, delta: float, *, beta1: Optional[float] = None
) -> EvalBoundReport:
    """
    Measure the plug-in evaluation error and compute both evaluation bounds

    The bounds are only meaningful when pi does not depend on the samples in em; that is up to the caller.

    :param mdp_true: the true MDP
    :param em: the samples
    :param pi: policy chosen independently of em
    :param delta: failure probability, in (0, 1)
    :param beta1: when given, a Bernstein condition report at this beta1 is attached
    """
    if not 0.0 < delta < 1.0:
        raise InvalidArgumentError('must lie strictly between 0 and 1', field='delta')
    gamma, n = mdp_true.discount, em.samples_per_pair
    v, _ = evaluate_policy_exact(mdp_true, pi)
    v_hat = plug_in_evaluate(em, mdp_true.reward, gamma, pi)
    rvn = resolvent_variance_norm(mdp_true, pi, v)
    big_l = log_factor(mdp_true.num_states, gamma, delta)
    instance = 4.0 * gamma * math.sqrt(2.0 * big_l / n) * rvn + 2.0 * gamma * big_l / ((1.0 - gamma) * n) * v.sup_norm()
    worst = 6.0 * math.sqrt(2.0 * big_l / (n * (1.0 - gamma) ** 3)) * utils.sup_norm(mdp_true.reward)
    bernstein = None
    if beta1 is not None:
        aux = auxiliary_sequence(mdp_true, pi)
        bernstein = bernstein_condition_check(mdp_true.kernel, em.kernel_hat, pi, aux, beta1, n)
    return EvalBoundReport(
        empirical_error=utils.sup_norm(v_hat.values - v.values),
        instance_bound=instance,
        worst_case_bound=worst,
        resolvent_variance_norm=rvn,
        n=n,
        delta=delta,
        premise_holds=evaluation_premise(n, mdp_true.num_states, gamma, delta),
        bernstein=bernstein,
    )


@attr.s(auto_attribs=True, frozen=True)
class ExpansionReport:
    """Residuals of the first- and second-order expansions of V_hat^pi - V^pi"""

    first_order_residual: float
    second_order_residual: float


def expansion_diagnostics(mdp: TabularMDP, em: EmpiricalModel, pi: Policy) -> ExpansionReport:
    """
    Compute V_hat - V directly and through
    discount (I - discount P_hat_pi)^-1 (P_hat_pi - P_pi) V and its two-term second-order decomposition
    """
    gamma = mdp.discount
    rows = pi.pair_indices(mdp)
    p_pi, p_hat_pi, r_pi = mdp.kernel[rows], em.kernel_hat[rows], mdp.reward[rows]
    v = solve_resolvent(p_pi, gamma, r_pi)
    v_hat = solve_resolvent(p_hat_pi, gamma, r_pi)
    diff = v_hat - v
    delta_v = (p_hat_pi - p_pi) @ v
    first = gamma * solve_resolvent(p_hat_pi, gamma, delta_v)
    inner = solve_resolvent(p_pi, gamma, delta_v)
    second = gamma * inner + gamma ** 2 * solve_resolvent(p_hat_pi, gamma, (p_hat_pi - p_pi) @ inner)
    return ExpansionReport(
        first_order_residual=utils.sup_norm(diff - first), second_order_residual=utils.sup_norm(diff - second)
    )


def planning_error_bounds(
    n: int, num_states: int, num_actions: int, discount: float, delta: float, omega: float
) -> Tuple[float, float]:
    """
    Bounds that hold under the separation event B_omega:
    ||V_hat^pi_hat - V^pi_hat|| <= 6 sqrt(2 log(32 S A / ((1 - discount)^3 omega delta)) / (N (1 - discount)^3))
    and V* - V^pi_hat <= twice that.
    """
    gap = 1.0 - discount
    value = 6.0 * math.sqrt(
        2.0 * math.log(32.0 * num_states * num_actions / (gap ** 3 * omega * delta)) / (n * gap ** 3)
    )
    return value, 2.0 * value


def separation_gap(q: QVector) -> Tuple[float, Policy]:
    """
    Smallest margin between the best and second best action over all states

    :return: the margin (infinite with a single action) and the argmax policy
    """
    policy = greedy_policy(q)
    if q.num_actions == 1:
        return constants.INFINITY, policy
    top_two = np.sort(q.table, axis=1)[:, -2:]
    return float(np.min(top_two[:, 1] - top_two[:, 0])), policy
