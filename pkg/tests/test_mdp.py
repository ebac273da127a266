# coding=utf-8
# flake8: noqa E302
"""
Unit testing for mdpcert/mdp.py module.
"""
import math

import numpy as np
import pytest
from hypothesis import (
    given,
    settings,
)
from hypothesis import strategies as st
from hypothesis.extra.numpy import (
    arrays,
)

from mdpcert import (
    constants,
)
from mdpcert.exceptions import (
    InternalError,
    InvalidArgumentError,
)
from mdpcert.mdp import (
    Policy,
    QVector,
    TabularMDP,
    ValueVector,
    all_policies,
    bellman_optimality_step,
    coerce_policy,
    evaluate_policy_exact,
    exhaustive_optimal,
    fixed_point_evaluate,
    greedy_policy,
    load_mdp,
    mdp_from_dict,
    policy_iteration_steps,
    policy_matrices,
    policy_to_dict,
    resolvent,
    solve_exact,
    solve_optimal,
    value_range_holds,
    variance_of_value,
)

from .conftest import (
    random_mdp,
    single_state_mdp,
    two_state_chain,
    write_json,
)

CONTRACTION_MDP = random_mdp(11, 3, 2, 0.9)


def detour_mdp():
    """State 0 can loop for 0.5 or move to state 1 which pays 1 forever; greedy on reward picks the loop"""
    return TabularMDP(
        num_states=2,
        num_actions=2,
        kernel=[[1.0, 0.0], [0.0, 1.0], [0.0, 1.0], [0.0, 1.0]],
        reward=[0.5, 0.0, 1.0, 1.0],
        discount=0.9,
    )


def test_policy_matrices_single_pair():
    mdp = single_state_mdp([0.3], 0.5)
    pm = policy_matrices(mdp, Policy([0]))
    assert pm.projection.tolist() == [[1.0]]
    assert pm.p_sub.tolist() == [[1.0]]
    assert pm.r_pi.tolist() == [0.3]


def test_policy_matrices_projection_layout():
    mdp = random_mdp(1, 2, 2, 0.9)
    pm = policy_matrices(mdp, Policy([0, 1]))
    assert pm.projection.tolist() == [[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0]]
    assert pm.r_pi.tolist() == [mdp.reward[0], mdp.reward[3]]


def test_policy_matrices_row_stochastic():
    mdp = random_mdp(2, 3, 2, 0.9)
    pm = policy_matrices(mdp, Policy([1, 0, 1]))
    assert np.all(np.abs(pm.p_sub.sum(axis=1) - 1.0) <= 1e-12)
    assert np.all(np.abs(pm.p_super.sum(axis=1) - 1.0) <= 1e-12)
    assert np.allclose(pm.p_super, mdp.kernel @ pm.projection)
    assert pm.p_sub[2].tolist() == mdp.kernel[5].tolist()


def test_policy_matrices_dimension_mismatch():
    mdp = random_mdp(3, 3, 2, 0.9)
    with pytest.raises(InvalidArgumentError) as excinfo:
        policy_matrices(mdp, Policy([0, 1]))
    assert excinfo.value.field == 'policy'


def test_policy_invalid_action():
    mdp = random_mdp(3, 3, 2, 0.9)
    with pytest.raises(InvalidArgumentError) as excinfo:
        evaluate_policy_exact(mdp, Policy([0, 2, 0]))
    assert excinfo.value.field == 'policy[1]'


def test_evaluate_geometric_series():
    v, q = evaluate_policy_exact(single_state_mdp([1.0], 0.5), Policy([0]))
    assert v.values.tolist() == pytest.approx([2.0])
    assert q.values.tolist() == pytest.approx([2.0])


def test_evaluate_chain():
    v, _ = evaluate_policy_exact(two_state_chain(), Policy([0, 0]))
    assert v.values == pytest.approx([9.0, 10.0], abs=1e-12)


@pytest.mark.parametrize('seed', [0, 1, 2])
def test_evaluate_matches_fixed_point(seed):
    mdp = random_mdp(seed, 4, 3, 0.9)
    pi = Policy([2, 0, 1, 1])
    v, q = evaluate_policy_exact(mdp, pi)
    oracle = fixed_point_evaluate(mdp, pi, tol=1e-12)
    assert np.max(np.abs(v.values - oracle.values)) <= 1e-9
    assert np.allclose(q.values, mdp.reward + mdp.discount * mdp.kernel @ v.values)


def test_evaluate_value_range():
    mdp = random_mdp(5, 4, 2, 0.95)
    v, _ = evaluate_policy_exact(mdp, Policy([1, 1, 0, 0]))
    assert value_range_holds(mdp, v)
    assert not value_range_holds(mdp, ValueVector([-1.0, 0.0, 0.0, 0.0]))


def test_bellman_fixed_point():
    mdp = random_mdp(4, 4, 3, 0.9)
    q_star = solve_exact(mdp).q_values
    assert np.max(np.abs(bellman_optimality_step(mdp, q_star).values - q_star.values)) <= 1e-10


def test_bellman_zero_mdp():
    mdp = random_mdp(4, 3, 2, 0.9).with_reward(np.zeros(6))
    out = bellman_optimality_step(mdp, QVector(np.zeros(6), 2))
    assert not np.any(out.values)


def test_bellman_wrong_length():
    mdp = random_mdp(4, 3, 2, 0.9)
    with pytest.raises(InvalidArgumentError):
        bellman_optimality_step(mdp, QVector(np.zeros(4), 2))


@settings(deadline=None, max_examples=50)
@given(
    q1=arrays(np.float64, (6,), elements=st.floats(min_value=-100, max_value=100)),
    q2=arrays(np.float64, (6,), elements=st.floats(min_value=-100, max_value=100)),
)
def test_bellman_contraction(q1, q2):
    mdp = CONTRACTION_MDP
    t1 = bellman_optimality_step(mdp, QVector(q1, 2))
    t2 = bellman_optimality_step(mdp, QVector(q2, 2))
    lhs = np.max(np.abs(t1.values - t2.values))
    assert lhs <= mdp.discount * np.max(np.abs(q1 - q2)) + 1e-9


@pytest.mark.parametrize('method', constants.METHODS)
def test_solve_single_state(method):
    result = solve_optimal(single_state_mdp([0.2, 0.7], 0.5), method)
    assert result.policy == Policy([1])
    assert result.values.values == pytest.approx([1.4])
    assert result.converged


@pytest.mark.parametrize('method', constants.METHODS)
def test_solve_symmetric_actions(method):
    mdp = TabularMDP(
        num_states=2, num_actions=2, kernel=[[0.3, 0.7]] * 2 + [[0.6, 0.4]] * 2, reward=[0.4, 0.4, 0.9, 0.9], discount=0.8
    )
    _, v_best = exhaustive_optimal(mdp)
    for pi in all_policies(2, 2):
        v, _ = evaluate_policy_exact(mdp, pi)
        assert np.allclose(v.values, v_best.values, atol=1e-12)
    result = solve_optimal(mdp, method)
    assert np.allclose(result.values.values, v_best.values, atol=1e-9)


@pytest.mark.parametrize('seed', range(5))
@pytest.mark.parametrize('method', constants.METHODS)
def test_solve_matches_enumeration(seed, method):
    mdp = random_mdp(100 + seed, 4, 3, 0.9)
    pi_best, v_best = exhaustive_optimal(mdp)
    result = solve_optimal(mdp, method)
    assert result.policy == pi_best
    assert np.max(np.abs(result.values.values - v_best.values)) <= 1e-9


@pytest.mark.parametrize('seed', range(5))
def test_qvi_and_pi_agree(seed):
    mdp = random_mdp(200 + seed, 5, 3, 0.95)
    qvi = solve_optimal(mdp, constants.METHOD_QVI)
    pi = solve_optimal(mdp, constants.METHOD_PI)
    assert np.max(np.abs(qvi.values.values - pi.values.values)) <= 1e-9


def test_solve_bellman_residual():
    mdp = random_mdp(9, 4, 2, 0.9)
    tol = 1e-8
    q = solve_optimal(mdp, constants.METHOD_QVI, tol=tol).q_values
    assert np.max(np.abs(bellman_optimality_step(mdp, q).values - q.values)) <= tol


def test_solve_unconverged_qvi():
    result = solve_optimal(detour_mdp(), constants.METHOD_QVI, max_iters=1)
    assert not result.converged
    assert result.iterations == 1


def test_solve_unconverged_pi():
    result = solve_optimal(detour_mdp(), constants.METHOD_PI, max_iters=1)
    assert not result.converged
    assert result.policy == Policy([0, 0])
    assert solve_optimal(detour_mdp(), constants.METHOD_PI).policy == Policy([1, 0])


@pytest.mark.parametrize(
    'kwargs, field', [({'method': 'sarsa'}, 'method'), ({'max_iters': 0}, 'max_iters'), ({'tol': 0.0}, 'tol')]
)
def test_solve_invalid_arguments(kwargs, field):
    with pytest.raises(InvalidArgumentError) as excinfo:
        solve_optimal(detour_mdp(), **kwargs)
    assert excinfo.value.field == field


def test_policy_iteration_monotone():
    mdp = random_mdp(12, 6, 3, 0.95)
    previous = None
    for _, v, _ in policy_iteration_steps(mdp, Policy([0] * 6)):
        if previous is not None:
            assert np.all(v.values >= previous - 1e-10)
        previous = v.values


def test_greedy_tie_goes_to_smallest_action():
    assert greedy_policy(QVector.from_table([[1.0, 1.0]])) == Policy([0])


def test_greedy_strict_argmax():
    assert greedy_policy(QVector.from_table([[0.0, 2.0, 1.0]])) == Policy([1])


@given(
    table=arrays(np.float64, (4, 3), elements=st.integers(min_value=-1000, max_value=1000).map(float)),
    shift=arrays(np.float64, (4, 1), elements=st.integers(min_value=-50, max_value=50).map(float)),
)
def test_greedy_shift_invariance(table, shift):
    assert greedy_policy(QVector.from_table(table)) == greedy_policy(QVector.from_table(table + shift))


def test_variance_unit_mass():
    assert variance_of_value([[0.0, 1.0, 0.0]], ValueVector([3.0, -2.0, 7.0])).tolist() == [0.0]


def test_variance_bernoulli():
    assert variance_of_value([[0.5, 0.5]], ValueVector([0.0, 1.0])).tolist() == pytest.approx([0.25])


def test_variance_direct_summation():
    rng = np.random.default_rng(3)
    row = rng.dirichlet(np.ones(6))
    v = rng.uniform(-5, 5, size=6)
    mean = math.fsum(p * x for p, x in zip(row, v))
    expected = math.fsum(p * x * x for p, x in zip(row, v)) - mean * mean
    assert variance_of_value([row], ValueVector(v))[0] == pytest.approx(expected, abs=1e-12)


@settings(deadline=None)
@given(v=arrays(np.float64, (5,), elements=st.floats(min_value=-1e4, max_value=1e4)))
def test_variance_nonnegative(v):
    rows = np.random.default_rng(0).dirichlet(np.ones(5), size=4)
    assert np.all(variance_of_value(rows, ValueVector(v)) >= 0.0)


def test_variance_corruption_detected(mocker):
    mocker.patch('mdpcert.mdp.np.einsum', return_value=np.array([-1e-3]))
    with pytest.raises(InternalError):
        variance_of_value([[0.5, 0.5]], ValueVector([0.0, 1.0]))


def test_variance_wrong_columns():
    with pytest.raises(InvalidArgumentError):
        variance_of_value([[0.5, 0.5]], ValueVector([0.0, 1.0, 2.0]))


def test_resolvent_properties():
    mdp = random_mdp(21, 5, 2, 0.9)
    inverse = resolvent(mdp, Policy([0, 1, 0, 1, 0]))
    assert inverse.min() >= -1e-12
    assert np.abs(inverse).sum(axis=1).max() <= mdp.horizon + 1e-9
    assert np.allclose((1.0 - mdp.discount) * inverse.sum(axis=1), 1.0, atol=1e-10)


def test_mdp_row_sum_rejected():
    with pytest.raises(InvalidArgumentError) as excinfo:
        TabularMDP(num_states=2, num_actions=1, kernel=[[0.5, 0.5], [0.5, 0.4]], reward=[0.0, 0.0], discount=0.9)
    assert excinfo.value.field == 'kernel[1]'


def test_mdp_negative_entry_rejected():
    with pytest.raises(InvalidArgumentError) as excinfo:
        TabularMDP(num_states=2, num_actions=1, kernel=[[1.5, -0.5], [0.5, 0.5]], reward=[0.0, 0.0], discount=0.9)
    assert excinfo.value.field == 'kernel[0]'


@pytest.mark.parametrize('discount', [0.0, 1.0, 1.5])
def test_mdp_discount_rejected(discount):
    with pytest.raises(InvalidArgumentError) as excinfo:
        single_state_mdp([1.0], discount)
    assert excinfo.value.field == 'discount'


def test_mdp_reward_checks():
    with pytest.raises(InvalidArgumentError) as excinfo:
        TabularMDP(num_states=1, num_actions=2, kernel=[[1.0], [1.0]], reward=[1.0], discount=0.5)
    assert excinfo.value.field == 'reward'
    with pytest.raises(InvalidArgumentError) as excinfo:
        single_state_mdp([1.0, float('nan')], 0.5)
    assert excinfo.value.field == 'reward[1]'


def test_mdp_is_immutable():
    mdp = random_mdp(1, 2, 2, 0.9)
    with pytest.raises(ValueError):
        mdp.kernel[0, 0] = 0.5


def test_mdp_dict_round_trip():
    mdp = random_mdp(8, 3, 2, 0.7)
    again = mdp_from_dict(mdp.to_dict())
    assert np.array_equal(again.kernel, mdp.kernel)
    assert np.array_equal(again.reward, mdp.reward)
    assert again.discount == mdp.discount


@pytest.mark.parametrize(
    'change, field',
    [
        ({'num_states': 1.5}, 'num_states'),
        ({'discount': 'high'}, 'discount'),
        ({'num_states': 2, 'kernel': [[1.0], [1.0]]}, 'kernel[0]'),
        ({'extra': 1}, 'extra'),
    ],
)
def test_mdp_from_dict_field_diagnostics(change, field):
    data = single_state_mdp([1.0], 0.5).to_dict()
    data.update(change)
    with pytest.raises(InvalidArgumentError) as excinfo:
        mdp_from_dict(data)
    assert excinfo.value.field == field


def test_mdp_from_dict_missing_field():
    data = single_state_mdp([1.0], 0.5).to_dict()
    del data['reward']
    with pytest.raises(InvalidArgumentError) as excinfo:
        mdp_from_dict(data)
    assert excinfo.value.field == 'reward'


def test_load_mdp_syntax_error(tmp_path):
    path = tmp_path / 'broken.json'
    path.write_text('{\n  "num_states": 1,\n  oops\n}', encoding='utf-8')
    with pytest.raises(InvalidArgumentError) as excinfo:
        load_mdp(str(path))
    assert 'line 3' in str(excinfo.value)


def test_load_mdp(tmp_path):
    path = write_json(tmp_path / 'mdp.json', two_state_chain().to_dict())
    assert load_mdp(path).num_states == 2


def test_exhaustive_refuses_large_instances():
    mdp = random_mdp(0, 11, 3, 0.5)
    with pytest.raises(InvalidArgumentError):
        exhaustive_optimal(mdp)


def test_coerce_policy():
    mdp = random_mdp(0, 3, 2, 0.5)
    assert coerce_policy({'policy': [1, 0, 1]}, mdp) == Policy([1, 0, 1])
    with pytest.raises(InvalidArgumentError) as excinfo:
        coerce_policy([3, 0, 0], mdp)
    assert excinfo.value.field == 'policy[0]'
    with pytest.raises(InvalidArgumentError):
        coerce_policy('0,1,1', mdp)


def test_policy_to_dict():
    v, q = evaluate_policy_exact(two_state_chain(), Policy([0, 0]))
    data = policy_to_dict(Policy([0, 0]), v, q)
    assert data['policy'] == [0, 0]
    assert data['values'] == pytest.approx([9.0, 10.0])
    assert len(data['q_values']) == 2
