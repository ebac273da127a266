# coding=utf-8
# flake8: noqa E302
"""
Unit testing for mdpcert/tiebreak.py module.
"""
import numpy as np
import pytest
from hypothesis import (
    given,
)
from hypothesis import strategies as st
from hypothesis.extra.numpy import (
    arrays,
)

from mdpcert import (
    constants,
)
from mdpcert.bounds import (
    separation_gap,
)
from mdpcert.exceptions import (
    InvalidArgumentError,
)
from mdpcert.families import (
    symmetric_adversarial,
)
from mdpcert.mdp import (
    QVector,
)
from mdpcert.tiebreak import (
    TieBreakReport,
    certify_tie_breaking,
    min_pairwise_gap,
    separation_threshold,
    trial_seed,
)

from .conftest import (
    random_mdp,
    two_state_chain,
)


@pytest.fixture
def symmetric():
    return symmetric_adversarial(4, 3, 0.9, 0)


def test_separation_threshold():
    assert separation_threshold(0.1, 0.1, 0.9, 4, 3) == pytest.approx(0.1 * 0.1 * 0.1 / (4.0 * 4 * 9))


def test_min_pairwise_gap_example():
    assert min_pairwise_gap(QVector.from_table([[0.0, 1.0, 3.0]] * 2)) == 1.0


def test_min_pairwise_gap_tie():
    assert min_pairwise_gap(QVector.from_table([[0.0, 1.0, 3.0], [2.0, 5.0, 2.0]])) == 0.0


def test_min_pairwise_gap_single_action():
    assert min_pairwise_gap(QVector.from_table([[0.0], [1.0]])) == constants.INFINITY


@given(table=arrays(np.float64, (3, 4), elements=st.floats(min_value=-100, max_value=100)))
def test_min_pairwise_gap_below_separation_gap(table):
    q = QVector.from_table(table)
    assert min_pairwise_gap(q) <= separation_gap(q)[0]


def test_report_fields():
    report = TieBreakReport(xi=0.1, delta=0.1, threshold=1e-5, trials=100, failures=12)
    assert report.failure_rate == pytest.approx(0.12)
    assert report.allowed_rate == pytest.approx(0.19)
    assert report.passed
    data = report.to_dict()
    assert data['pass'] is True
    assert data['failures'] == 12
    assert not TieBreakReport(xi=0.1, delta=0.1, threshold=1e-5, trials=100, failures=25).passed


def test_trial_seeds_differ():
    seeds = {trial_seed(5, t) for t in range(50)}
    assert len(seeds) == 50
    assert trial_seed(5, 3) == trial_seed(5, 3)


@pytest.mark.parametrize('trials', [0, 99, 100.0, True])
def test_trials_rejected(symmetric, trials):
    with pytest.raises(InvalidArgumentError) as excinfo:
        certify_tie_breaking(symmetric, 0.1, 0.1, trials, 0)
    assert excinfo.value.field == 'trials'


@pytest.mark.parametrize(
    'xi, delta, field', [(-0.1, 0.1, 'xi'), (float('nan'), 0.1, 'xi'), (0.1, 0.0, 'delta'), (1e-8, 0.1, 'xi')]
)
def test_arguments_rejected(symmetric, xi, delta, field):
    with pytest.raises(InvalidArgumentError) as excinfo:
        certify_tie_breaking(symmetric, xi, delta, 100, 0)
    assert excinfo.value.field == field


def test_single_action_vacuous():
    report = certify_tie_breaking(two_state_chain(), 0.1, 0.1, 100, 0)
    assert report.failures == 0
    assert report.passed


def test_unperturbed_symmetric_control(symmetric):
    report = certify_tie_breaking(symmetric, 0.0, 0.1, 100, 0)
    assert report.threshold == 0.0
    assert report.failures == 100
    assert not report.passed


def test_symmetric_perturbed(symmetric):
    report = certify_tie_breaking(symmetric, 0.1, 0.1, 100, 7)
    assert report.passed


def test_deterministic(symmetric):
    first = certify_tie_breaking(symmetric, 0.01, 0.2, 100, 11)
    second = certify_tie_breaking(symmetric, 0.01, 0.2, 100, 11)
    assert first.failures == second.failures


def test_workers_match_sequential():
    mdp = random_mdp(3, 3, 2, 0.9)
    serial = certify_tie_breaking(mdp, 0.05, 0.2, 120, 4)
    parallel = certify_tie_breaking(mdp, 0.05, 0.2, 120, 4, workers=4)
    assert serial == parallel


def test_progress_callback(symmetric, mocker):
    progress = mocker.Mock()
    certify_tie_breaking(symmetric, 0.1, 0.1, 100, 0, progress=progress)
    progress.assert_called_once()


@pytest.mark.slow
def test_symmetric_certification(symmetric):
    report = certify_tie_breaking(symmetric, 0.1, 0.1, 1000, 0, workers=4)
    assert report.passed


@pytest.mark.slow
def test_doubling_xi(symmetric):
    trials = 1000
    narrow = certify_tie_breaking(symmetric, 0.05, 0.1, trials, 1)
    wide = certify_tie_breaking(symmetric, 0.1, 0.1, trials, 1)
    slack = 3.0 * np.sqrt(0.1 * 0.9 / trials)
    assert wide.failure_rate <= narrow.failure_rate + 2.0 * slack
