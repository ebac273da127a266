# coding=utf-8
"""
State-action absorbing MDPs.

Making pair (s, a) absorbing with reward u replaces its transition row by a unit mass on s and its reward by u. With
the canonical reward u* the absorbing MDP has the same optimal Q as the original, and a finite net over u is enough
to reproduce the optimal policy of the original whenever its actions are separated.
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
from .bounds import (
    separation_gap,
)
from .exceptions import (
    InvalidArgumentError,
)
from .generative import (
    EmpiricalModel,
    empirical_mdp,
)
from .mdp import (
    SolveResult,
    TabularMDP,
    greedy_policy,
    solve_exact,
)


@attr.s(auto_attribs=True, frozen=True)
class AbsorbingSpec:
    """Pair (state, action) made absorbing with reward u"""

    state: int = attr.ib(converter=int)
    action: int = attr.ib(converter=int)
    u: float = attr.ib(converter=float)

    @property
    def out_of_unit_range(self) -> bool:
        """True when u lies outside [0, 1], which reward-normalized workflows may want to hear about"""
        return not 0.0 <= self.u <= 1.0

    def check_range(self, discount: float) -> None:
        """
        :raises InvalidArgumentError: if |u| > 1/(1 - discount)
        """
        limit = utils.discount_horizon(discount)
        if not abs(self.u) <= limit + constants.ABSORBING_U_SLACK:
            raise InvalidArgumentError(f'|u| must not exceed 1/(1-discount) = {limit}', field='u')


def make_absorbing(mdp: TabularMDP, spec: AbsorbingSpec) -> TabularMDP:
    """
    Replace row (s, a) of the kernel by the unit mass on s and its reward by u. All other rows and rewards are copied
    bit for bit.
    """
    spec.check_range(mdp.discount)
    row = mdp.pair_index(spec.state, spec.action)
    kernel = np.array(mdp.kernel)
    kernel[row] = 0.0
    kernel[row, spec.state] = 1.0
    reward = np.array(mdp.reward)
    reward[row] = spec.u
    return TabularMDP(
        num_states=mdp.num_states, num_actions=mdp.num_actions, kernel=kernel, reward=reward, discount=mdp.discount
    )


def _u_for(mdp: TabularMDP, optimum: SolveResult, state: int, action: int) -> float:
    row = mdp.pair_index(state, action)
    v_star = optimum.values.values
    return float(mdp.reward[row] + mdp.discount * (mdp.kernel[row] @ v_star) - mdp.discount * v_star[state])


def canonical_u_star(mdp: TabularMDP, state: int, action: int, optimum: Optional[SolveResult] = None) -> float:
    """
    u* = r(s, a) + discount (P V*)_(s, a) - discount V*(s), the absorbing reward that leaves Q* unchanged

    :param optimum: exact solution of mdp, computed when not given
    """
    if optimum is None:
        optimum = solve_exact(mdp)
    return _u_for(mdp, optimum, state, action)


def u_star_deviation(mdp: TabularMDP, state: int, action: int, optimum: Optional[SolveResult] = None) -> Tuple[float, float]:
    """
    Solve the absorbing MDP at u* and measure how far its optimal values are from the original ones

    :return: (||Q*_{s,a,u*} - Q*||, ||V*_{s,a,u*} - V*||)
    """
    if optimum is None:
        optimum = solve_exact(mdp)
    u = _u_for(mdp, optimum, state, action)
    absorbed = solve_exact(make_absorbing(mdp, AbsorbingSpec(state, action, u)))
    return (
        utils.sup_norm(absorbed.q_values.values - optimum.q_values.values),
        utils.sup_norm(absorbed.values.values - optimum.values.values),
    )


def check_lipschitz(mdp: TabularMDP, state: int, action: int, u: float, u_other: float) -> Tuple[float, float, bool]:
    """
    ||Q*_{s,a,u} - Q*_{s,a,u'}|| against |u - u'| / (1 - discount)

    :return: (lhs, rhs, holds) with 1e-8 slack
    """
    first = solve_exact(make_absorbing(mdp, AbsorbingSpec(state, action, u)))
    second = solve_exact(make_absorbing(mdp, AbsorbingSpec(state, action, u_other)))
    lhs = utils.sup_norm(first.q_values.values - second.q_values.values)
    rhs = abs(u - u_other) * mdp.horizon
    return lhs, rhs, lhs <= rhs + 1e-8


@attr.s(auto_attribs=True, frozen=True, eq=False)
class EpsilonNet:
    """Symmetric grid {-n step, ..., 0, ..., n step} with n the largest integer such that n step < 1/(1 - discount)"""

    step: float
    points: np.ndarray
    discount: float

    @property
    def half_width(self) -> int:
        return (len(self.points) - 1) // 2

    @property
    def cardinality_bound(self) -> float:
        """2 / ((1 - discount) step)"""
        return 2.0 * utils.discount_horizon(self.discount) / self.step


def build_net(discount: float, step: float) -> EpsilonNet:
    """
    Build the net of the given step. A step of at least 1/(1 - discount) gives the single point {0}.

    :raises InvalidArgumentError: if step is not positive or discount is outside (0, 1)
    """
    if not (isinstance(step, (int, float)) and math.isfinite(step) and step > 0):
        raise InvalidArgumentError('must be positive', field='step')
    if not 0.0 < discount < 1.0:
        raise InvalidArgumentError('must lie strictly between 0 and 1', field='discount')
    horizon = utils.discount_horizon(discount)
    n = max(0, int(math.ceil(horizon / step)) - 1)
    # correct the float estimate so that n is exactly the largest integer with n * step < horizon
    while (n + 1) * step < horizon:
        n += 1
    while n > 0 and n * step >= horizon:
        n -= 1
    points = np.arange(-n, n + 1, dtype=np.float64) * step
    points.setflags(write=False)
    return EpsilonNet(step=float(step), points=points, discount=discount)


def snap_to_net(net: EpsilonNet, u: float) -> float:
    """Nearest net point to u; exact ties go to the smaller point"""
    return float(net.points[int(np.argmin(np.abs(net.points - u)))])


@attr.s(auto_attribs=True, frozen=True)
class MatchResult:
    """Outcome of the net-matching check for one pair"""

    status: str
    u_hat: float
    u0: float
    snap_error: float
    gap: float

    @property
    def matches(self) -> bool:
        return self.status == constants.MATCH

    def to_dict(self) -> Dict[str, Any]:
        return utils.attrs_to_dict(self)


def lemma4_match(
    em: EmpiricalModel,
    reward: Any,
    discount: float,
    state: int,
    action: int,
    omega: float,
    *,
    optimum: Optional[SolveResult] = None,
) -> MatchResult:
    """
    Check that a net point reproduces the empirical optimal policy when pair (s, a) is made absorbing

    When the separation gap of the empirical Q* is at least omega, the empirical u_hat* is snapped to the net of step
    (1 - discount) omega / 4 and the absorbing empirical MDP at that point is solved; its greedy policy must equal the
    empirical optimal policy. Otherwise the status is not-applicable.

    :param em: the samples
    :param reward: reward vector
    :param discount: discount factor
    :param state: absorbing state
    :param action: absorbing action
    :param omega: separation level, positive
    :param optimum: exact solution of the empirical MDP, computed when not given
    """
    if not omega > 0:
        raise InvalidArgumentError('must be positive', field='omega')
    mdp_hat = empirical_mdp(em, reward, discount)
    if optimum is None:
        optimum = solve_exact(mdp_hat)
    gap, pi_hat = separation_gap(optimum.q_values)
    u_hat = _u_for(mdp_hat, optimum, state, action)
    if gap < omega:
        return MatchResult(constants.NOT_APPLICABLE, u_hat, u_hat, 0.0, gap)
    net = build_net(discount, (1.0 - discount) * omega / 4.0)
    u0 = snap_to_net(net, u_hat)
    absorbed = solve_exact(make_absorbing(mdp_hat, AbsorbingSpec(state, action, u0)))
    status = constants.MATCH if greedy_policy(absorbed.q_values) == pi_hat else constants.MISMATCH
    return MatchResult(status, u_hat, u0, abs(u_hat - u0), gap)
