# coding=utf-8
# flake8: noqa E302
"""
Unit testing for mdpcert/exceptions.py module.
"""
import math

import pytest

from mdpcert.exceptions import (
    InternalError,
    InvalidArgumentError,
    LemmaViolation,
    MdpCertError,
)


def test_invalid_argument_str():
    assert str(InvalidArgumentError('must be positive', field='epsilon')) == 'epsilon: must be positive'
    assert str(InvalidArgumentError('must be positive')) == 'must be positive'


@pytest.mark.parametrize('exc_type, builtin', [(InvalidArgumentError, ValueError), (InternalError, ArithmeticError)])
def test_hierarchy(exc_type, builtin):
    assert issubclass(exc_type, MdpCertError)
    assert issubclass(exc_type, builtin)


def test_lemma_violation_margin():
    ex = LemmaViolation('too large', margin=-0.25)
    assert ex.margin == -0.25
    assert str(ex) == 'too large'
    assert isinstance(ex, AssertionError)
    assert math.isnan(LemmaViolation('no margin').margin)
