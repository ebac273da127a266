# coding=utf-8
"""
mdpcert unit/functional testing
"""
import json
import sys
from contextlib import (
    redirect_stderr,
    redirect_stdout,
)

import numpy as np
from pytest import (
    fixture,
)

from cmd2.utils import (
    StdSim,
)
from mdpcert import (
    TabularMDP,
    utils,
)
from mdpcert.cli import (
    MdpCertApp,
)


def normalize(block):
    """Normalize a block of text to perform comparison.

    Strip newlines from the very beginning and very end  Then split into separate lines and strip trailing whitespace
    from each line.
    """
    assert isinstance(block, str)
    block = block.strip('\n')
    return [line.rstrip() for line in block.splitlines()]


def run_cmd(app, cmd):
    """Clear out and err StdSim buffers, run the command, and return out and err"""
    saved_sysout = sys.stdout
    sys.stdout = app.stdout

    # This will be used to capture app.stdout and sys.stdout
    copy_cmd_stdout = StdSim(app.stdout)

    # This will be used to capture sys.stderr
    copy_stderr = StdSim(sys.stderr)

    try:
        app.stdout = copy_cmd_stdout
        with redirect_stdout(copy_cmd_stdout):
            with redirect_stderr(copy_stderr):
                app.onecmd_plus_hooks(cmd)
    finally:
        app.stdout = copy_cmd_stdout.inner_stream
        sys.stdout = saved_sysout

    out = copy_cmd_stdout.getvalue()
    err = copy_stderr.getvalue()
    return normalize(out), normalize(err)


def random_mdp(seed, num_states, num_actions, discount):
    """Seeded MDP with Dirichlet(1) kernel rows and Unif[0, 1] rewards"""
    rng = np.random.default_rng(seed)
    kernel = rng.dirichlet(np.ones(num_states), size=num_states * num_actions)
    kernel /= kernel.sum(axis=1, keepdims=True)
    reward = rng.uniform(size=num_states * num_actions)
    return TabularMDP(num_states=num_states, num_actions=num_actions, kernel=kernel, reward=reward, discount=discount)


def single_state_mdp(rewards, discount):
    """One state, one action per reward, every action loops"""
    return TabularMDP(
        num_states=1, num_actions=len(rewards), kernel=[[1.0]] * len(rewards), reward=rewards, discount=discount
    )


def two_state_chain(discount=0.9):
    """State 0 moves to absorbing state 1; reward 1 only in state 1"""
    return TabularMDP(
        num_states=2, num_actions=1, kernel=[[0.0, 1.0], [0.0, 1.0]], reward=[0.0, 1.0], discount=discount
    )


def write_json(path, data):
    path.write_text(json.dumps(data), encoding='utf-8')
    return str(path)


@fixture
def app():
    return MdpCertApp()


@fixture
def mdp_file(tmp_path):
    """The 1-state 1-action MDP with r = 1 and discount 0.5"""
    return write_json(
        tmp_path / 'one_state.json',
        {'num_states': 1, 'num_actions': 1, 'discount': 0.5, 'reward': [1.0], 'kernel': [[1.0]]},
    )


@fixture
def random_mdp_file(tmp_path):
    mdp = random_mdp(7, 3, 2, 0.8)
    return write_json(tmp_path / 'random.json', json.loads(utils.to_json(mdp.to_dict())))
