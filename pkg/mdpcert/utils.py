# coding=utf-8
"""Shared utility functions"""
import json
import math
from typing import (
    Any,
    Callable,
    Dict,
    Iterable,
    Mapping,
    Optional,
)

import attr
import numpy as np
from numpy.random import (
    PCG64,
    Generator,
    SeedSequence,
)

from .exceptions import (
    InvalidArgumentError,
)

SEED_MASK = (1 << 64) - 1


def keyed_rng(seed: int, tag: int, *key: int) -> Generator:
    """
    Build the random stream owned by one (seed, tag, key) combination.

    Streams are derived from a SeedSequence spawn key instead of being drawn from a shared generator, so the
    numbers a consumer sees do not depend on which other streams were used before it or on how many workers
    run at once.

    :param seed: user seed, reduced to 64 bits
    :param tag: stream tag from ``constants`` identifying the consumer
    :param key: further integers identifying the stream, e.g. a state-action pair or a trial number
    :return: a fresh numpy Generator
    """
    spawn_key = (int(tag),) + tuple(int(k) for k in key)
    return Generator(PCG64(SeedSequence(entropy=int(seed) & SEED_MASK, spawn_key=spawn_key)))


def sup_norm(x: Any) -> float:
    """Infinity norm of a vector, 0 for an empty one"""
    arr = np.asarray(x, dtype=np.float64)
    if arr.size == 0:
        return 0.0
    return float(np.max(np.abs(arr)))


def as_float_array(value: Any, *, field: str, ndim: int) -> np.ndarray:
    """
    Convert a value to a read-only float64 array of the given rank

    :param value: anything numpy can convert
    :param field: name reported if conversion fails
    :param ndim: required number of dimensions
    :return: a new array that does not share memory with the input
    :raises InvalidArgumentError: if the value is not numeric or has the wrong rank
    """
    try:
        arr = np.array(value, dtype=np.float64, copy=True)
    except (TypeError, ValueError) as ex:
        raise InvalidArgumentError(f'not a numeric array ({ex})', field=field) from None
    if arr.ndim != ndim:
        raise InvalidArgumentError(f'expected {ndim} dimension(s), got {arr.ndim}', field=field)
    arr.setflags(write=False)
    return arr


def discount_horizon(discount: float) -> float:
    """Effective horizon 1/(1-discount)"""
    return 1.0 / (1.0 - discount)


def log_horizon(discount: float) -> float:
    """log(e/(1-discount)), the number of variance levels the evaluation analysis needs"""
    return 1.0 + math.log(discount_horizon(discount))


############################################################################################################
# attrs validators. These raise InvalidArgumentError so that configuration mistakes surface with the same
# field diagnostic as JSON loading errors.
############################################################################################################


def _fail(attribute: 'attr.Attribute[Any]', msg: str, value: Any) -> None:
    raise InvalidArgumentError(f'{msg} (got {value!r})', field=attribute.name)


def positive(_instance: Any, attribute: 'attr.Attribute[Any]', value: Any) -> None:
    """Validator for a finite value > 0"""
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        _fail(attribute, 'must be a positive number', value)


def nonnegative(_instance: Any, attribute: 'attr.Attribute[Any]', value: Any) -> None:
    """Validator for a finite value >= 0"""
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value >= 0):
        _fail(attribute, 'must be a nonnegative number', value)


def nonnegative_or_infinite(_instance: Any, attribute: 'attr.Attribute[Any]', value: Any) -> None:
    """Validator for a value >= 0 where +inf is allowed"""
    if not (isinstance(value, (int, float)) and value >= 0):
        _fail(attribute, 'must be a nonnegative number or inf', value)


def positive_int(_instance: Any, attribute: 'attr.Attribute[Any]', value: Any) -> None:
    """Validator for an integer >= 1"""
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        _fail(attribute, 'must be a positive integer', value)


def open_unit_interval(_instance: Any, attribute: 'attr.Attribute[Any]', value: Any) -> None:
    """Validator for a value strictly between 0 and 1"""
    if not (isinstance(value, (int, float)) and 0.0 < value < 1.0):
        _fail(attribute, 'must lie strictly between 0 and 1', value)


def at_least(bound: float) -> Callable[[Any, 'attr.Attribute[Any]', Any], None]:
    """Build a validator for a finite value >= bound"""

    def validator(_instance: Any, attribute: 'attr.Attribute[Any]', value: Any) -> None:
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value >= bound):
            _fail(attribute, f'must be at least {bound}', value)

    return validator


def one_of(choices: Iterable[str]) -> Callable[[Any, 'attr.Attribute[Any]', Any], None]:
    """Build a validator accepting only the given strings"""
    allowed = list(choices)

    def validator(_instance: Any, attribute: 'attr.Attribute[Any]', value: Any) -> None:
        if value not in allowed:
            _fail(attribute, f"must be one of {', '.join(allowed)}", value)

    return validator


############################################################################################################
# JSON helpers
############################################################################################################


def load_json_file(path: str) -> Any:
    """
    Read a JSON document

    :param path: file to read
    :return: the decoded document
    :raises InvalidArgumentError: on a syntax error, naming the line and column
    :raises OSError: if the file cannot be read
    """
    with open(path, encoding='utf-8') as f:
        text = f.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as ex:
        raise InvalidArgumentError(
            f'invalid JSON at line {ex.lineno} column {ex.colno}: {ex.msg}', field=path
        ) from None


def to_json(data: Any) -> str:
    """Serialize plain data, numpy scalars and arrays included, as indented JSON"""

    def default(obj: Any) -> Any:
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, np.generic):
            return obj.item()
        raise TypeError(f'{type(obj).__name__} is not JSON serializable')

    return json.dumps(data, indent=2, default=default, allow_nan=True)


def require_mapping(data: Any, *, field: str) -> Mapping[str, Any]:
    """Make sure a decoded JSON value is an object"""
    if not isinstance(data, Mapping):
        raise InvalidArgumentError('expected a JSON object', field=field)
    return data


def check_fields(
    data: Mapping[str, Any], *, required: Iterable[str], optional: Iterable[str] = (), field: Optional[str] = None
) -> None:
    """
    Validate the keys of a JSON object

    :param data: the object
    :param required: keys that must be present
    :param optional: keys that may be present
    :param field: path of the object, used as a prefix in diagnostics
    :raises InvalidArgumentError: naming the first missing or unknown key
    """
    required = list(required)
    known = set(required) | set(optional)
    prefix = '' if field is None else field + '.'
    for key in required:
        if key not in data:
            raise InvalidArgumentError('missing required field', field=prefix + key)
    for key in data:
        if key not in known:
            raise InvalidArgumentError('unknown field', field=prefix + str(key))


def attrs_to_dict(inst: Any) -> Dict[str, Any]:
    """Shallow dict of an attrs instance's public fields"""
    return {a.name: getattr(inst, a.name) for a in attr.fields(type(inst)) if not a.name.startswith('_')}


def attrs_from_dict(cls: Any, data: Any, *, field: str) -> Any:
    """
    Build an attrs config class from a decoded JSON object, rejecting unknown keys

    :param cls: an attrs class whose fields mirror the JSON keys
    :param data: the decoded object
    :param field: name of the object for diagnostics
    :raises InvalidArgumentError: on missing, unknown or invalid fields
    """
    data = require_mapping(data, field=field)
    fields = [a for a in attr.fields(cls) if a.init]
    check_fields(
        data,
        required=[a.name for a in fields if a.default is attr.NOTHING],
        optional=[a.name for a in fields if a.default is not attr.NOTHING],
        field=field,
    )
    return cls(**data)
