# coding=utf-8
"""
Exact tabular MDPs.

State-action pairs are flattened as ``(s, a) -> s * num_actions + a``, which is the row layout of the kernel.
Every type here is immutable once constructed and every function is pure.
"""
import functools
import itertools
from typing import (
    Any,
    Dict,
    Iterator,
    Mapping,
    Optional,
    Tuple,
)

import attr
import numpy as np
import scipy.linalg

from . import (
    constants,
    utils,
)
from .exceptions import (
    InternalError,
    InvalidArgumentError,
)


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@attr.s(auto_attribs=True, frozen=True, eq=False, repr=False)
class TabularMDP:
    """
    A finite discounted MDP.

    ``kernel`` has shape ``(S*A, S)`` and row ``s*A + a`` is the next-state distribution of pair (s, a).
    ``reward`` has length ``S*A``. Construction validates every invariant and raises InvalidArgumentError
    with the offending field.
    """

    num_states: int = attr.ib(validator=utils.positive_int)
    num_actions: int = attr.ib(validator=utils.positive_int)
    kernel: np.ndarray = attr.ib(converter=functools.partial(utils.as_float_array, field='kernel', ndim=2))
    reward: np.ndarray = attr.ib(converter=functools.partial(utils.as_float_array, field='reward', ndim=1))
    discount: float = attr.ib(converter=float, validator=utils.open_unit_interval)

    def __attrs_post_init__(self) -> None:
        pairs = self.num_pairs
        if self.kernel.shape != (pairs, self.num_states):
            raise InvalidArgumentError(
                f'expected shape ({pairs}, {self.num_states}), got {self.kernel.shape}', field='kernel'
            )
        if self.reward.shape != (pairs,):
            raise InvalidArgumentError(f'expected length {pairs}, got {self.reward.shape[0]}', field='reward')
        if not np.all(np.isfinite(self.reward)):
            bad = int(np.flatnonzero(~np.isfinite(self.reward))[0])
            raise InvalidArgumentError('reward must be finite', field=f'reward[{bad}]')
        negative = np.flatnonzero(~(self.kernel >= 0).all(axis=1))
        if negative.size:
            raise InvalidArgumentError('entries must be nonnegative', field=f'kernel[{int(negative[0])}]')
        deviation = np.abs(self.kernel.sum(axis=1) - 1.0)
        bad_rows = np.flatnonzero(deviation > constants.ROW_SUM_TOL)
        if bad_rows.size:
            row = int(bad_rows[0])
            raise InvalidArgumentError(
                f'row sums to {float(self.kernel[row].sum())!r}, not 1', field=f'kernel[{row}]'
            )

    def __repr__(self) -> str:
        return f'TabularMDP(num_states={self.num_states}, num_actions={self.num_actions}, discount={self.discount})'

    @property
    def num_pairs(self) -> int:
        """|S||A|"""
        return self.num_states * self.num_actions

    def pair_index(self, state: int, action: int) -> int:
        """Row of the (state, action) pair in the kernel"""
        if not (0 <= state < self.num_states and 0 <= action < self.num_actions):
            raise InvalidArgumentError(f'pair ({state}, {action}) out of range', field='pair')
        return state * self.num_actions + action

    @property
    def reward_table(self) -> np.ndarray:
        """Rewards viewed as an (S, A) table"""
        return self.reward.reshape(self.num_states, self.num_actions)

    @property
    def horizon(self) -> float:
        """Effective horizon 1/(1-discount)"""
        return utils.discount_horizon(self.discount)

    def with_reward(self, reward: Any) -> 'TabularMDP':
        """Copy of this MDP with a different reward vector"""
        return attr.evolve(self, reward=reward)

    def with_kernel(self, kernel: Any) -> 'TabularMDP':
        """Copy of this MDP with a different transition kernel"""
        return attr.evolve(self, kernel=kernel)

    def to_dict(self) -> Dict[str, Any]:
        """Plain data in the MDP JSON schema"""
        return {
            'num_states': self.num_states,
            'num_actions': self.num_actions,
            'discount': self.discount,
            'reward': self.reward.tolist(),
            'kernel': self.kernel.tolist(),
        }


def mdp_from_dict(data: Any) -> TabularMDP:
    """
    Build an MDP from the JSON schema
    ``{"num_states", "num_actions", "discount", "reward": [S*A], "kernel": [[S] * S*A]}``

    :raises InvalidArgumentError: naming the first invalid field
    """
    data = utils.require_mapping(data, field='mdp')
    utils.check_fields(data, required=['num_states', 'num_actions', 'discount', 'reward', 'kernel'])
    for name in ('num_states', 'num_actions'):
        if isinstance(data[name], bool) or not isinstance(data[name], int):
            raise InvalidArgumentError('must be an integer', field=name)
    if not isinstance(data['discount'], (int, float)) or isinstance(data['discount'], bool):
        raise InvalidArgumentError('must be a number', field='discount')
    kernel = data['kernel']
    if not isinstance(kernel, list):
        raise InvalidArgumentError('must be a list of rows', field='kernel')
    for i, row in enumerate(kernel):
        if not isinstance(row, list) or len(row) != data['num_states']:
            raise InvalidArgumentError(f"each row needs {data['num_states']} entries", field=f'kernel[{i}]')
    return TabularMDP(
        num_states=data['num_states'],
        num_actions=data['num_actions'],
        kernel=kernel,
        reward=data['reward'],
        discount=data['discount'],
    )


def load_mdp(path: str) -> TabularMDP:
    """Load and validate an MDP JSON file"""
    return mdp_from_dict(utils.load_json_file(path))


def _to_actions(value: Any) -> Tuple[int, ...]:
    try:
        actions = tuple(int(a) for a in np.asarray(value).ravel())
    except (TypeError, ValueError):
        raise InvalidArgumentError('actions must be integers', field='policy') from None
    return actions


@attr.s(auto_attribs=True, frozen=True)
class Policy:
    """A deterministic policy: ``action_of[s]`` is the action taken in state s"""

    action_of: Tuple[int, ...] = attr.ib(converter=_to_actions)

    @property
    def num_states(self) -> int:
        return len(self.action_of)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.action_of, dtype=np.intp)

    def __getitem__(self, state: int) -> int:
        return self.action_of[state]

    def pair_indices(self, mdp: TabularMDP) -> np.ndarray:
        """Kernel rows (s, pi(s)) for every state, validating the policy against the MDP"""
        if self.num_states != mdp.num_states:
            raise InvalidArgumentError(
                f'policy covers {self.num_states} states, MDP has {mdp.num_states}', field='policy'
            )
        actions = self.array
        bad = np.flatnonzero((actions < 0) | (actions >= mdp.num_actions))
        if bad.size:
            raise InvalidArgumentError(f'invalid action {actions[bad[0]]}', field=f'policy[{int(bad[0])}]')
        return np.arange(mdp.num_states) * mdp.num_actions + actions


@attr.s(auto_attribs=True, frozen=True, eq=False)
class ValueVector:
    """State values V"""

    values: np.ndarray = attr.ib(converter=functools.partial(utils.as_float_array, field='values', ndim=1))

    @property
    def num_states(self) -> int:
        return int(self.values.shape[0])

    def sup_norm(self) -> float:
        return utils.sup_norm(self.values)


@attr.s(auto_attribs=True, frozen=True, eq=False)
class QVector:
    """State-action values Q, flattened in kernel row order"""

    values: np.ndarray = attr.ib(converter=functools.partial(utils.as_float_array, field='values', ndim=1))
    num_actions: int = attr.ib(validator=utils.positive_int)

    def __attrs_post_init__(self) -> None:
        if self.values.shape[0] % self.num_actions:
            raise InvalidArgumentError(
                f'length {self.values.shape[0]} is not a multiple of {self.num_actions} actions', field='values'
            )

    @classmethod
    def from_table(cls, table: Any) -> 'QVector':
        """Build from an (S, A) table"""
        arr = utils.as_float_array(table, field='table', ndim=2)
        return cls(arr.ravel(), arr.shape[1])

    @property
    def num_states(self) -> int:
        return int(self.values.shape[0]) // self.num_actions

    @property
    def table(self) -> np.ndarray:
        """Values viewed as an (S, A) table"""
        return self.values.reshape(self.num_states, self.num_actions)

    def sup_norm(self) -> float:
        return utils.sup_norm(self.values)


@attr.s(auto_attribs=True, frozen=True, eq=False)
class PolicyMatrices:
    """Matrices induced by a policy: projection, pair-to-pair kernel, state-to-state kernel and reward"""

    projection: np.ndarray
    p_super: np.ndarray
    p_sub: np.ndarray
    r_pi: np.ndarray


def policy_matrices(mdp: TabularMDP, pi: Policy) -> PolicyMatrices:
    """
    Build the projection matrix of a policy and the kernels it induces

    :param mdp: the MDP
    :param pi: a policy over the same states
    :return: projection (S x SA), p_super = P projection (SA x SA), p_sub = projection P (S x S) and r_pi
    :raises InvalidArgumentError: if the policy does not fit the MDP
    """
    rows = pi.pair_indices(mdp)
    projection = np.zeros((mdp.num_states, mdp.num_pairs))
    projection[np.arange(mdp.num_states), rows] = 1.0
    return PolicyMatrices(
        projection=_readonly(projection),
        p_super=_readonly(mdp.kernel @ projection),
        p_sub=_readonly(mdp.kernel[rows].copy()),
        r_pi=_readonly(mdp.reward[rows].copy()),
    )


def solve_resolvent(p_sub: np.ndarray, discount: float, rhs: np.ndarray) -> np.ndarray:
    """
    Solve ``(I - discount * p_sub) x = rhs`` by dense LU with partial pivoting

    :raises InternalError: if the residual exceeds tolerance
    """
    system = np.eye(p_sub.shape[0]) - discount * p_sub
    x = scipy.linalg.lu_solve(scipy.linalg.lu_factor(system), rhs)
    residual = utils.sup_norm(system @ x - rhs)
    if residual > constants.SOLVE_RESIDUAL_TOL * (1.0 + utils.sup_norm(rhs)):
        raise InternalError(f'linear solve residual {residual:.3e} exceeds tolerance')
    return np.asarray(x)


def resolvent(mdp: TabularMDP, pi: Policy) -> np.ndarray:
    """The dense matrix (I - discount * P_pi)^-1"""
    p_sub = mdp.kernel[pi.pair_indices(mdp)]
    return solve_resolvent(p_sub, mdp.discount, np.eye(mdp.num_states))


def q_from_values(mdp: TabularMDP, v: ValueVector) -> QVector:
    """Q = r + discount * P V"""
    if v.num_states != mdp.num_states:
        raise InvalidArgumentError(f'expected {mdp.num_states} values, got {v.num_states}', field='values')
    return QVector(mdp.reward + mdp.discount * (mdp.kernel @ v.values), mdp.num_actions)


def evaluate_policy_exact(mdp: TabularMDP, pi: Policy) -> Tuple[ValueVector, QVector]:
    """
    Exact value of a policy by a direct solve of ``(I - discount * P_pi) V = r_pi``

    :param mdp: the MDP
    :param pi: the policy to evaluate
    :return: V and Q = r + discount * P V
    :raises InvalidArgumentError: if the policy does not fit the MDP
    :raises InternalError: if the solve is inaccurate
    """
    rows = pi.pair_indices(mdp)
    v = ValueVector(solve_resolvent(mdp.kernel[rows], mdp.discount, mdp.reward[rows]))
    return v, q_from_values(mdp, v)


def fixed_point_evaluate(mdp: TabularMDP, pi: Policy, *, tol: float = 1e-12, max_iters: int = 1_000_000) -> ValueVector:
    """Evaluate a policy by iterating its Bellman operator until successive iterates differ by at most tol"""
    rows = pi.pair_indices(mdp)
    p_sub, r_pi = mdp.kernel[rows], mdp.reward[rows]
    v = np.zeros(mdp.num_states)
    for _ in range(max_iters):
        nxt = r_pi + mdp.discount * (p_sub @ v)
        if utils.sup_norm(nxt - v) <= tol:
            return ValueVector(nxt)
        v = nxt
    return ValueVector(v)


def _check_q(mdp: TabularMDP, q: QVector) -> None:
    if q.values.shape[0] != mdp.num_pairs or q.num_actions != mdp.num_actions:
        raise InvalidArgumentError(f'expected {mdp.num_pairs} state-action values', field='q')


def bellman_optimality_step(mdp: TabularMDP, q: QVector) -> QVector:
    """T(Q)(s, a) = r(s, a) + discount * sum_s' P(s'|s, a) max_a' Q(s', a')"""
    _check_q(mdp, q)
    return QVector(mdp.reward + mdp.discount * (mdp.kernel @ q.table.max(axis=1)), mdp.num_actions)


def greedy_policy(q: QVector) -> Policy:
    """Argmax policy of Q. Ties go to the smallest action index."""
    return Policy(np.argmax(q.table, axis=1))


def _improve(q: QVector, current: Policy) -> Policy:
    """Greedy improvement that keeps the current action unless another one is strictly better"""
    table = q.table
    states = np.arange(q.num_states)
    best = np.argmax(table, axis=1)
    margin = constants.PI_SWITCH_TOL * (1.0 + q.sup_norm())
    switch = table[states, best] > table[states, current.array] + margin
    return Policy(np.where(switch, best, current.array))


def variance_of_value(kernel_rows: Any, v: ValueVector) -> np.ndarray:
    """
    Per-row variance of V under each next-state distribution, Var_P(V) = P(V*V) - (PV)*(PV)

    Select the rows of a policy (or multiply by its projection matrix) to get Var_{P_pi}(V).

    :param kernel_rows: matrix whose rows are distributions over states
    :param v: values of the next states
    :return: nonnegative vector with one entry per row
    :raises InternalError: if an entry is below -1e-9
    """
    rows = np.asarray(kernel_rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != v.num_states:
        raise InvalidArgumentError(f'rows must have {v.num_states} columns', field='kernel_rows')
    mean = rows @ v.values
    # centered form of P(V*V) - (PV)^2, exact in real arithmetic and free of cancellation
    var = np.einsum('ij,ij->i', rows, (v.values[None, :] - mean[:, None]) ** 2)
    lowest = float(var.min()) if var.size else 0.0
    if lowest < -constants.VARIANCE_CORRUPTION_TOL:
        raise InternalError(f'variance {lowest:.3e} is negative')
    return np.maximum(var, 0.0)


@attr.s(auto_attribs=True, frozen=True, eq=False)
class SolveResult:
    """Outcome of solve_optimal. values and q_values are the exact evaluation of policy."""

    policy: Policy
    values: ValueVector
    q_values: QVector
    iterations: int
    converged: bool


def q_value_iteration(mdp: TabularMDP, q0: Optional[QVector] = None) -> Iterator[QVector]:
    """Yield Q_1, Q_2, ... with Q_{k+1} = T(Q_k), starting from Q_0 = 0 unless given"""
    q = q0 if q0 is not None else QVector(np.zeros(mdp.num_pairs), mdp.num_actions)
    while True:
        q = bellman_optimality_step(mdp, q)
        yield q


def policy_iteration_steps(
    mdp: TabularMDP, initial: Optional[Policy] = None
) -> Iterator[Tuple[Policy, ValueVector, QVector]]:
    """
    Yield every policy visited by policy iteration together with its exact values.

    The first policy is ``initial`` or the greedy policy of the immediate reward. The generator stops after the
    first policy that improvement leaves unchanged, which is therefore optimal.
    """
    pi = initial if initial is not None else greedy_policy(QVector(mdp.reward, mdp.num_actions))
    while True:
        v, q = evaluate_policy_exact(mdp, pi)
        yield pi, v, q
        nxt = _improve(q, pi)
        if nxt == pi:
            return
        pi = nxt


def solve_optimal(
    mdp: TabularMDP, method: str = constants.METHOD_QVI, max_iters: int = 10_000, tol: float = 1e-10
) -> SolveResult:
    """
    Compute an optimal policy by Q-value iteration or policy iteration

    QVI starts from Q = 0 and stops once successive iterates differ by at most ``tol * (1 - discount) / (2 * discount)``.
    PI stops when improvement leaves the policy unchanged. Either way the returned values are the exact evaluation
    of the returned policy; hitting ``max_iters`` returns the last iterate with ``converged`` False.

    :param mdp: the MDP
    :param method: 'qvi' or 'pi'
    :param max_iters: iteration limit, at least 1
    :param tol: target accuracy, positive
    :raises InvalidArgumentError: on a bad method, iteration limit or tolerance
    """
    if method not in constants.METHODS:
        raise InvalidArgumentError(f"must be one of {', '.join(constants.METHODS)}", field='method')
    if max_iters < 1:
        raise InvalidArgumentError('must be at least 1', field='max_iters')
    if not tol > 0:
        raise InvalidArgumentError('must be positive', field='tol')

    if method == constants.METHOD_PI:
        steps = policy_iteration_steps(mdp)
        iterations = 0
        for iterations, (pi, v, q) in enumerate(steps, start=1):
            if iterations >= max_iters:
                break
        else:
            return SolveResult(pi, v, q, iterations, True)
        # out of iterations; the last policy is still optimal if improvement would leave it unchanged
        return SolveResult(pi, v, q, iterations, next(steps, None) is None)

    threshold = tol * (1.0 - mdp.discount) / (2.0 * mdp.discount)
    prev = QVector(np.zeros(mdp.num_pairs), mdp.num_actions)
    converged = False
    iterations = 0
    for iterations, q in enumerate(q_value_iteration(mdp, prev), start=1):
        converged = utils.sup_norm(q.values - prev.values) <= threshold
        prev = q
        if converged or iterations >= max_iters:
            break
    pi = greedy_policy(prev)
    v, q_exact = evaluate_policy_exact(mdp, pi)
    return SolveResult(pi, v, q_exact, iterations, converged)


def solve_exact(mdp: TabularMDP) -> SolveResult:
    """Optimal solution at oracle precision, by policy iteration"""
    return solve_optimal(mdp, constants.METHOD_PI, max_iters=constants.ORACLE_MAX_ITERS, tol=constants.ORACLE_TOL)


def all_policies(num_states: int, num_actions: int) -> Iterator[Policy]:
    """Every deterministic policy, in lexicographic order"""
    for actions in itertools.product(range(num_actions), repeat=num_states):
        yield Policy(actions)


def exhaustive_optimal(mdp: TabularMDP) -> Tuple[Policy, ValueVector]:
    """
    Brute-force optimal policy over all |A|^|S| deterministic policies

    The optimal value dominates every other value entrywise, so the policy with the largest value sum is optimal.
    Among policies whose sums agree to 1e-12 relative precision the lexicographically first one is kept.

    :raises InvalidArgumentError: if there are more than 100,000 policies
    """
    count = mdp.num_actions ** mdp.num_states
    if count > constants.MAX_ENUMERATED_POLICIES:
        raise InvalidArgumentError(f'{count} policies are too many to enumerate', field='mdp')
    best: Optional[Tuple[Policy, ValueVector]] = None
    best_sum = -constants.INFINITY
    for pi in all_policies(mdp.num_states, mdp.num_actions):
        v, _ = evaluate_policy_exact(mdp, pi)
        total = float(v.values.sum())
        if best is None or total > best_sum + 1e-12 * (1.0 + abs(best_sum)):
            best, best_sum = (pi, v), total
    assert best is not None
    return best


def value_range_holds(mdp: TabularMDP, v: ValueVector, *, slack: float = 1e-9) -> bool:
    """Check 0 <= V <= ||r|| / (1 - discount), meaningful only when rewards are nonnegative"""
    upper = utils.sup_norm(mdp.reward) * mdp.horizon
    return bool(np.all(v.values >= -slack) and np.all(v.values <= upper + slack))


def policy_to_dict(pi: Policy, v: ValueVector, q: Optional[QVector] = None) -> Dict[str, Any]:
    """Plain data describing a policy and its values"""
    data: Dict[str, Any] = {'policy': list(pi.action_of), 'values': v.values.tolist()}
    if q is not None:
        data['q_values'] = q.table.tolist()
    return data


def coerce_policy(data: Any, mdp: TabularMDP) -> Policy:
    """Build a policy from a JSON list and validate it against an MDP"""
    if isinstance(data, Mapping):
        data = data.get('policy')
    if not isinstance(data, list):
        raise InvalidArgumentError('expected a list of actions', field='policy')
    pi = Policy(data)
    pi.pair_indices(mdp)
    return pi
