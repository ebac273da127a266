# coding=utf-8
"""Monte-Carlo certification that uniform reward perturbation separates every pair of actions"""
import concurrent.futures
import math
from typing import (
    Any,
    Callable,
    Dict,
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
    QVector,
    TabularMDP,
    solve_exact,
)
from .perturb import (
    PerturbationConfig,
    perturb_rewards,
)


def separation_threshold(xi: float, delta: float, discount: float, num_states: int, num_actions: int) -> float:
    """omega = xi delta (1 - discount) / (4 |S| |A|^2)"""
    return xi * delta * (1.0 - discount) / (4.0 * num_states * num_actions ** 2)


def min_pairwise_gap(q: QVector) -> float:
    """
    Smallest |Q(s, a1) - Q(s, a2)| over all states and action pairs a1 != a2, infinite with a single action

    This never exceeds the separation gap, which is one of the pairwise gaps.
    """
    if q.num_actions == 1:
        return constants.INFINITY
    ordered = np.sort(q.table, axis=1)
    return float(np.min(np.diff(ordered, axis=1)))


@attr.s(auto_attribs=True, frozen=True)
class TieBreakReport:
    """Failure count of the separation event over independent perturbations"""

    xi: float
    delta: float
    threshold: float
    trials: int
    failures: int

    @property
    def failure_rate(self) -> float:
        return self.failures / self.trials

    @property
    def allowed_rate(self) -> float:
        """delta plus three binomial standard deviations"""
        return self.delta + 3.0 * math.sqrt(self.delta * (1.0 - self.delta) / self.trials)

    @property
    def passed(self) -> bool:
        return self.failure_rate <= self.allowed_rate

    def to_dict(self) -> Dict[str, Any]:
        return {
            'xi': self.xi,
            'delta': self.delta,
            'threshold': self.threshold,
            'trials': self.trials,
            'failures': self.failures,
            'failure_rate': self.failure_rate,
            'pass': self.passed,
        }


def trial_seed(seed: int, trial: int) -> int:
    """Perturbation seed of one trial, derived from its own keyed stream"""
    return int(utils.keyed_rng(seed, constants.STREAM_TIEBREAK_TRIAL, trial).integers(0, 2 ** 63 - 1))


def certify_tie_breaking(
    mdp: TabularMDP,
    xi: float,
    delta: float,
    trials: int,
    seed: int,
    *,
    workers: int = 1,
    progress: Optional[Callable[[str], None]] = None,
) -> TieBreakReport:
    """
    Perturb the rewards of mdp with fresh noise per trial, solve each perturbed MDP exactly and count trials whose
    smallest pairwise action gap is at or below xi delta (1 - discount) / (4 |S| |A|^2)

    Works the same on an empirical MDP. xi = 0 is the unperturbed control run.

    :param mdp: a true or empirical MDP
    :param xi: perturbation width, nonnegative
    :param delta: target failure probability in (0, 1)
    :param trials: number of perturbations, at least 100
    :param seed: base seed; trial t uses its own keyed stream so parallel and sequential runs agree
    :param workers: threads to run trials with
    :param progress: optional callback receiving status messages
    :raises InvalidArgumentError: on bad arguments or a threshold too small to resolve
    """
    if isinstance(trials, bool) or not isinstance(trials, int) or trials < 100:
        raise InvalidArgumentError('at least 100 trials are needed', field='trials')
    if not (math.isfinite(xi) and xi >= 0):
        raise InvalidArgumentError('must be a nonnegative number', field='xi')
    if not 0.0 < delta < 1.0:
        raise InvalidArgumentError('must lie strictly between 0 and 1', field='delta')
    threshold = separation_threshold(xi, delta, mdp.discount, mdp.num_states, mdp.num_actions)
    if xi > 0 and threshold < constants.MIN_RESOLVABLE_THRESHOLD:
        raise InvalidArgumentError(
            f'threshold {threshold:.3e} is below what 64-bit arithmetic resolves; increase xi or delta', field='xi'
        )

    def run_trial(trial: int) -> bool:
        perturbed = perturb_rewards(mdp, PerturbationConfig(xi=xi, seed=trial_seed(seed, trial)))
        return min_pairwise_gap(solve_exact(perturbed).q_values) <= threshold

    if progress is not None:
        progress(f'Certifying tie-breaking over {trials} trials')
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
            outcomes = list(executor.map(run_trial, range(trials)))
    else:
        outcomes = [run_trial(t) for t in range(trials)]
    return TieBreakReport(xi=xi, delta=delta, threshold=threshold, trials=trials, failures=sum(outcomes))
