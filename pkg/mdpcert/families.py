# coding=utf-8
"""Generators of benchmark MDP families"""
import math

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


def _dirichlet_row(seed: int, state: int, action: int, num_states: int) -> np.ndarray:
    row = utils.keyed_rng(seed, constants.STREAM_FAMILY_KERNEL, state, action).dirichlet(np.ones(num_states))
    return row / row.sum()


def _uniform_reward(seed: int, state: int, action: int) -> float:
    return float(utils.keyed_rng(seed, constants.STREAM_FAMILY_REWARD, state, action).uniform())


def random_dirichlet(num_states: int, num_actions: int, discount: float, seed: int) -> TabularMDP:
    """Every kernel row from a symmetric Dirichlet(1), every reward from Unif[0, 1]"""
    kernel = np.vstack([_dirichlet_row(seed, s, a, num_states) for s in range(num_states) for a in range(num_actions)])
    reward = [_uniform_reward(seed, s, a) for s in range(num_states) for a in range(num_actions)]
    return TabularMDP(num_states=num_states, num_actions=num_actions, kernel=kernel, reward=reward, discount=discount)


def symmetric_adversarial(num_states: int, num_actions: int, discount: float, seed: int) -> TabularMDP:
    """Random rows and rewards per state, repeated identically for every action so that all actions tie"""
    kernel = np.vstack([_dirichlet_row(seed, s, 0, num_states) for s in range(num_states) for _ in range(num_actions)])
    reward = [_uniform_reward(seed, s, 0) for s in range(num_states) for _ in range(num_actions)]
    return TabularMDP(num_states=num_states, num_actions=num_actions, kernel=kernel, reward=reward, discount=discount)


def chain(num_states: int, num_actions: int, discount: float, seed: int = 0) -> TabularMDP:
    """
    Leaky chain with a ladder of near-ties.

    States 0 .. S-2 are links and the last state is absorbing with reward 0. Every action on a link earns 1, holds the
    link with some probability and otherwise drops to the end. Action 0 holds with p = 1 - (1 - discount) / 3, so a link
    is worth 1 / (1 - discount p), of the order of the effective horizon. Action a on link i holds with
    p - a * scale * decay^i * sqrt(p (1 - p)): its disadvantage is a fixed multiple of the sampling standard deviation of
    the hold probability, shrinking geometrically along the chain. A link whose margin is below about one standard
    deviation at N samples is chosen wrongly about as often as not and costs roughly margin * horizon^2, so the median
    value loss of a sample-based planner falls like sqrt(horizon^3 / N).

    The construction is deterministic; seed is accepted for a uniform signature.
    """
    del seed
    hold = 1.0 - constants.CHAIN_LEAK_SCALE * (1.0 - discount)
    spread = math.sqrt(hold * (1.0 - hold))
    last = num_states - 1

    kernel = np.zeros((num_states * num_actions, num_states))
    reward = np.zeros(num_states * num_actions)
    for i in range(num_states):
        for a in range(num_actions):
            row = i * num_actions + a
            if i == last:
                kernel[row, last] = 1.0
                continue
            p = max(0.0, hold - a * constants.CHAIN_GAP_SCALE * constants.CHAIN_GAP_DECAY ** i * spread)
            kernel[row, i] = p
            kernel[row, last] = 1.0 - p
            reward[row] = 1.0
    return TabularMDP(num_states=num_states, num_actions=num_actions, kernel=kernel, reward=reward, discount=discount)


_GENERATORS = {
    constants.FAMILY_RANDOM_DIRICHLET: random_dirichlet,
    constants.FAMILY_CHAIN: chain,
    constants.FAMILY_SYMMETRIC_ADVERSARIAL: symmetric_adversarial,
}


def generate_mdp(family: str, num_states: int, num_actions: int, discount: float, seed: int) -> TabularMDP:
    """
    Build an instance of a benchmark family. Identical arguments give identical MDPs.

    :param family: 'random-dirichlet', 'chain' or 'symmetric-adversarial'
    :raises InvalidArgumentError: on an unknown family or invalid dimensions
    """
    try:
        generator = _GENERATORS[family]
    except KeyError:
        raise InvalidArgumentError(f"must be one of {', '.join(constants.FAMILIES)}", field='family') from None
    if num_states < 1 or num_actions < 1:
        raise InvalidArgumentError('state and action counts must be positive', field='num_states')
    if not 0.0 < discount < 1.0:
        raise InvalidArgumentError('must lie strictly between 0 and 1', field='discount')
    return generator(num_states, num_actions, discount, seed)
