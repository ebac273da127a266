# coding=utf-8
# flake8: noqa E302
"""
Unit testing for mdpcert/generative.py module.
"""
import numpy as np
import pytest
import scipy.stats

from mdpcert import (
    utils,
)
from mdpcert.exceptions import (
    InvalidArgumentError,
)
from mdpcert.generative import (
    EmpiricalModel,
    empirical_mdp,
    sample_empirical_kernel,
    sample_pair_counts,
    total_sample_size,
)
from mdpcert.mdp import (
    TabularMDP,
)

from .conftest import (
    random_mdp,
    two_state_chain,
)


@pytest.fixture
def mdp():
    return random_mdp(31, 3, 2, 0.9)


def test_sampling_is_deterministic(mdp):
    first = sample_empirical_kernel(mdp, 500, 42)
    second = sample_empirical_kernel(mdp, 500, 42)
    assert np.array_equal(first.counts, second.counts)


def test_sampling_depends_on_seed(mdp):
    first = sample_empirical_kernel(mdp, 1000, 1)
    second = sample_empirical_kernel(mdp, 1000, 2)
    assert not np.array_equal(first.counts, second.counts)


@pytest.mark.parametrize('workers', [2, 4, 16])
def test_workers_do_not_change_counts(mdp, workers):
    serial = sample_empirical_kernel(mdp, 300, 9)
    parallel = sample_empirical_kernel(mdp, 300, 9, workers=workers)
    assert np.array_equal(serial.counts, parallel.counts)


def test_pair_streams_are_independent(mdp):
    em = sample_empirical_kernel(mdp, 250, 5)
    for s in range(mdp.num_states):
        for a in range(mdp.num_actions):
            alone = sample_pair_counts(mdp, 250, 5, s, a)
            assert np.array_equal(alone, em.counts[mdp.pair_index(s, a)])


def test_rows_sum_to_n(mdp):
    em = sample_empirical_kernel(mdp, 77, 0)
    assert em.counts.sum(axis=1).tolist() == [77] * mdp.num_pairs
    assert np.allclose(em.kernel_hat.sum(axis=1), 1.0)
    assert np.array_equal(em.kernel_hat, em.counts / 77.0)
    assert np.array_equal(np.rint(em.kernel_hat * 77), em.counts)

def test_marginals_match_kernel():
    kernel = np.array(
        [
            [0.5, 0.3, 0.2],
            [0.1, 0.6, 0.3],
            [0.0, 0.25, 0.75],
            [0.4, 0.4, 0.2],
            [0.7, 0.0, 0.3],
            [0.05, 0.05, 0.9],
        ]
    )
    mdp = TabularMDP(num_states=3, num_actions=2, kernel=kernel, reward=np.zeros(6), discount=0.9)
    n, seeds = 2000, range(10)
    counts = sum(sample_empirical_kernel(mdp, n, seed).counts for seed in seeds)
    support = kernel > 0.0
    assert np.all(counts[~support] == 0)
    result = scipy.stats.chisquare(counts[support], n * len(seeds) * kernel[support])
    assert result.pvalue > 1e-3



def test_zero_probability_never_drawn():
    em = sample_empirical_kernel(two_state_chain(), 1000, 3)
    assert em.counts.tolist() == [[0, 1000], [0, 1000]]


def test_empirical_kernel_concentrates(mdp):
    em = sample_empirical_kernel(mdp, 20000, 11)
    assert np.max(np.abs(em.kernel_hat - mdp.kernel)) <= 0.03


@pytest.mark.parametrize('n', [0, -3, 1.5, True])
def test_invalid_sample_size(mdp, n):
    with pytest.raises(InvalidArgumentError) as excinfo:
        sample_empirical_kernel(mdp, n, 0)
    assert excinfo.value.field == 'n'


def test_numpy_integer_sample_size(mdp):
    assert sample_empirical_kernel(mdp, np.int64(10), 0).samples_per_pair == 10


def test_pair_out_of_range(mdp):
    with pytest.raises(InvalidArgumentError) as excinfo:
        sample_pair_counts(mdp, 10, 0, 3, 0)
    assert excinfo.value.field == 'pair'


def test_negative_seed_is_masked(mdp):
    em = sample_empirical_kernel(mdp, 10, -1)
    assert em.source_seed == utils.SEED_MASK
    assert np.array_equal(em.counts, sample_empirical_kernel(mdp, 10, utils.SEED_MASK).counts)


def test_counts_are_read_only(mdp):
    em = sample_empirical_kernel(mdp, 10, 0)
    with pytest.raises(ValueError):
        em.counts[0, 0] = 3


def test_dict_round_trip(mdp):
    em = sample_empirical_kernel(mdp, 40, 8)
    again = EmpiricalModel.from_dict(em.to_dict())
    assert np.array_equal(again.counts, em.counts)
    assert again.samples_per_pair == 40
    assert again.source_seed == 8
    assert again.num_actions == mdp.num_actions


def test_from_dict_needs_num_actions():
    data = {'n': 2, 'seed': 0, 'counts': [[1, 1], [2, 0]]}
    with pytest.raises(InvalidArgumentError) as excinfo:
        EmpiricalModel.from_dict(data)
    assert excinfo.value.field == 'num_actions'
    assert EmpiricalModel.from_dict(data, num_actions=1).num_states == 2


@pytest.mark.parametrize(
    'counts, field',
    [
        ([[1, 1], [1, 0]], 'counts[1]'),
        ([[1, 1], [3, -1]], 'counts'),
        ([[2, 0]], 'counts'),
        ([1, 1], 'counts'),
        ([['a', 'b'], [1, 1]], 'counts'),
    ],
)
def test_from_dict_rejects_counts(counts, field):
    with pytest.raises(InvalidArgumentError) as excinfo:
        EmpiricalModel.from_dict({'n': 2, 'seed': 0, 'num_actions': 1, 'counts': counts})
    assert excinfo.value.field == field


def test_from_dict_unknown_field():
    with pytest.raises(InvalidArgumentError) as excinfo:
        EmpiricalModel.from_dict({'n': 2, 'seed': 0, 'num_actions': 1, 'counts': [[2]], 'kernel': []})
    assert excinfo.value.field == 'kernel'


def test_empirical_mdp(mdp):
    em = sample_empirical_kernel(mdp, 64, 4)
    hat = empirical_mdp(em, mdp.reward, mdp.discount)
    assert np.array_equal(hat.kernel, em.kernel_hat)
    assert np.array_equal(hat.reward, mdp.reward)
    assert hat.discount == mdp.discount


def test_total_sample_size(mdp):
    assert total_sample_size(sample_empirical_kernel(mdp, 64, 4)) == 64 * 3 * 2
