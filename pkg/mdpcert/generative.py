# coding=utf-8
"""
Generative model simulator and the empirical kernel it induces.

Every state-action pair draws from its own keyed random stream, so the counts of one pair never depend on whether or
in which order the other pairs were sampled.
"""
import concurrent.futures
from typing import (
    Any,
    Dict,
    List,
    Optional,
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
from .mdp import (
    TabularMDP,
)


def _counts_matrix(value: Any) -> np.ndarray:
    try:
        arr = np.array(value, dtype=np.int64, copy=True)
    except (TypeError, ValueError) as ex:
        raise InvalidArgumentError(f'not an integer matrix ({ex})', field='counts') from None
    if arr.ndim != 2:
        raise InvalidArgumentError(f'expected 2 dimensions, got {arr.ndim}', field='counts')
    arr.setflags(write=False)
    return arr


@attr.s(auto_attribs=True, frozen=True, eq=False)
class EmpiricalModel:
    """Transition counts of N draws per state-action pair"""

    counts: np.ndarray = attr.ib(converter=_counts_matrix)
    samples_per_pair: int = attr.ib(validator=utils.positive_int)
    num_actions: int = attr.ib(validator=utils.positive_int)
    source_seed: int = 0

    def __attrs_post_init__(self) -> None:
        pairs, states = self.counts.shape
        if pairs != states * self.num_actions:
            raise InvalidArgumentError(
                f'expected {states * self.num_actions} rows for {states} states and {self.num_actions} actions, got {pairs}',
                field='counts',
            )
        if np.any(self.counts < 0):
            raise InvalidArgumentError('counts must be nonnegative', field='counts')
        bad = np.flatnonzero(self.counts.sum(axis=1) != self.samples_per_pair)
        if bad.size:
            raise InvalidArgumentError(
                f'row does not sum to n={self.samples_per_pair}', field=f'counts[{int(bad[0])}]'
            )

    @property
    def num_states(self) -> int:
        return int(self.counts.shape[1])

    @property
    def kernel_hat(self) -> np.ndarray:
        """counts / N. Every entry is an integer multiple of 1/N."""
        return self.counts / float(self.samples_per_pair)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n': self.samples_per_pair,
            'seed': self.source_seed,
            'num_actions': self.num_actions,
            'counts': self.counts.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Any, num_actions: Optional[int] = None) -> 'EmpiricalModel':
        """
        Rebuild from ``{"n", "seed", "counts"}``

        :param data: decoded JSON
        :param num_actions: action count, needed when the document does not carry ``num_actions``
        :raises InvalidArgumentError: on a malformed document
        """
        data = utils.require_mapping(data, field='empirical_model')
        utils.check_fields(data, required=['n', 'seed', 'counts'], optional=['num_actions'])
        actions = data.get('num_actions', num_actions)
        if actions is None:
            raise InvalidArgumentError('needed to reshape counts', field='num_actions')
        return cls(counts=data['counts'], samples_per_pair=data['n'], num_actions=actions, source_seed=data['seed'])


def sample_pair_counts(mdp: TabularMDP, n: int, seed: int, state: int, action: int) -> np.ndarray:
    """
    Draw n next states for one pair and count them

    Sampling inverts the row's prefix sums scanned left to right, so a state with zero probability is never drawn
    and ties in the prefix sums go to the lower state index.

    :return: integer vector of length |S| summing to n
    """
    row = mdp.kernel[mdp.pair_index(state, action)]
    cdf = np.cumsum(row)
    cdf /= cdf[-1]
    u = utils.keyed_rng(seed, constants.STREAM_TRANSITIONS, state, action).random(n)
    draws = np.searchsorted(cdf, u, side='right')
    return np.bincount(np.minimum(draws, mdp.num_states - 1), minlength=mdp.num_states)


def sample_empirical_kernel(mdp: TabularMDP, n: int, seed: int, *, workers: int = 1) -> EmpiricalModel:
    """
    Collect n independent next-state samples for every state-action pair

    :param mdp: the true MDP acting as generative model
    :param n: samples per pair, at least 1
    :param seed: 64-bit seed; identical inputs reproduce identical counts for any worker count
    :param workers: threads to sample pairs with
    :raises InvalidArgumentError: if n < 1
    """
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidArgumentError('must be a positive integer', field='n')
    n = int(n)
    pairs = [(s, a) for s in range(mdp.num_states) for a in range(mdp.num_actions)]

    def draw(pair: Any) -> np.ndarray:
        return sample_pair_counts(mdp, n, seed, pair[0], pair[1])

    rows: List[np.ndarray]
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
            rows = list(executor.map(draw, pairs))
    else:
        rows = [draw(pair) for pair in pairs]
    return EmpiricalModel(
        counts=np.vstack(rows), samples_per_pair=n, num_actions=mdp.num_actions, source_seed=int(seed) & utils.SEED_MASK
    )


def empirical_mdp(em: EmpiricalModel, reward: Any, discount: float) -> TabularMDP:
    """The MDP (S, A, P_hat, r, discount)"""
    return TabularMDP(
        num_states=em.num_states, num_actions=em.num_actions, kernel=em.kernel_hat, reward=reward, discount=discount
    )


def total_sample_size(em: EmpiricalModel) -> int:
    """N |S| |A|"""
    return em.samples_per_pair * em.num_states * em.num_actions
