#!/usr/bin/env python3
"""
Exception hierarchy for the Koopman sampling toolkit

Every failure raised by the numerical modules derives from KoopmanError so the
CLI and the MCP tools can turn it into a structured error response. The two
category bases (ConfigError, NumericError) decide the CLI exit code.
"""

from typing import Any, Dict, Optional


class KoopmanError(Exception):
    """Base class for all toolkit errors"""

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.context = context or {}

    @property
    def error_type(self) -> str:
        return type(self).__name__


class ConfigError(KoopmanError):
    """Invalid experiment configuration or system definition"""

    def __init__(self, message: str, line: Optional[int] = None, context: Optional[Dict[str, Any]] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, context)
        self.line = line


class UnknownSystem(ConfigError):
    pass


class BadParams(ConfigError):
    pass


class NumericError(KoopmanError):
    """Numerical failure inside a computation"""


class NonFinite(NumericError):
    pass


class ShapeMismatch(NumericError):
    pass


class Singular(NumericError):
    pass


class BranchCut(NumericError):
    """Eigenvalue on (or numerically at) the closed negative real axis"""


class ComplexLogarithm(NumericError):
    """Logarithm of a real matrix came back with a non-negligible imaginary part"""


class PoleHit(NumericError):
    pass


class Divergence(NumericError):
    pass


class MissingStateObservable(NumericError):
    pass


class DuplicateBasis(NumericError):
    pass


class NotInvariant(NumericError):
    pass


class Defective(NumericError):
    pass


class RealEigenvalue(NumericError):
    pass


class AllZeroTruth(NumericError):
    pass
