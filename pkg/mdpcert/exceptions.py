# coding=utf-8
"""Custom exceptions for mdpcert"""

from typing import (
    Any,
    Optional,
)

############################################################################################################
# The following exceptions are part of the public API
############################################################################################################


class MdpCertError(Exception):
    """Base class for every error raised on purpose by mdpcert."""

    pass


class InvalidArgumentError(MdpCertError, ValueError):
    """
    Raised when an argument, a configuration value or a loaded document is outside of its valid range or has
    inconsistent dimensions. The optional field names the offending parameter or JSON path and is prefixed to
    the message so a user can find the bad entry in their file.
    """

    def __init__(self, *args: Any, field: Optional[str] = None) -> None:
        """
        Initializer for InvalidArgumentError
        :param field: name of the parameter or dotted path of the JSON field that failed validation
        """
        self.field = field

        # noinspection PyArgumentList
        super().__init__(*args)

    def __str__(self) -> str:
        msg = super().__str__()
        if self.field is None:
            return msg
        return f'{self.field}: {msg}'


class InternalError(MdpCertError, ArithmeticError):
    """
    Raised when a numeric result fails its own post-condition, such as a linear solve whose residual exceeds
    tolerance or a variance that is meaningfully negative. This indicates corrupted arithmetic, not bad input.
    """

    pass


############################################################################################################
# The following exceptions are NOT part of the public API and are intended for internal use only.
############################################################################################################


class LemmaViolation(MdpCertError, AssertionError):
    """Raised by a lemma battery check when a hard assertion fails on some instance"""

    def __init__(self, *args: Any, margin: float = float('nan')) -> None:
        """
        Initializer for LemmaViolation
        :param margin: bound minus observed value, negative for a violation
        """
        self.margin = margin

        # noinspection PyArgumentList
        super().__init__(*args)
