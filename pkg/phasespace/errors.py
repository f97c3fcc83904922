#!/usr/bin/env python3
"""
Exception hierarchy for the phase-space toolkit
Each family maps onto one command-line exit code
"""

from typing import Optional

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_IO = 3


class PhaseSpaceError(Exception):
    """Base class for every error raised by the toolkit"""


class ValidationError(PhaseSpaceError, ValueError):
    """A precondition on arguments, grids or state specifications was violated"""


class GridError(ValidationError):
    """Grid parameters do not describe a valid quadrature grid"""


class GridMismatchError(ValidationError):
    """Two operands live on incompatible grids"""


class UnsupportedDirectionError(ValidationError):
    """Requested ordering parameter lies on the singular (s > 0) side"""


class ConfigError(ValidationError):
    """Configuration file or override could not be applied"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NumericalToleranceError(PhaseSpaceError):
    """A numerical guard tripped (residue, drift, instability, uncertain tail)"""


class TruncationError(NumericalToleranceError):
    """A state leaks off the grid or a Fock cutoff is too small"""


class FormatError(PhaseSpaceError):
    """Malformed input file; carries the line or byte offset of the problem"""

    def __init__(self, message: str, line: Optional[int] = None, offset: Optional[int] = None):
        self.line = line
        self.offset = offset
        if line is not None:
            message = f"line {line}: {message}"
        elif offset is not None:
            message = f"offset {offset}: {message}"
        super().__init__(message)


def exit_code_for(exc: BaseException) -> int:
    """Map an exception onto the documented process exit code"""
    if isinstance(exc, ValidationError):
        return EXIT_USAGE
    if isinstance(exc, NumericalToleranceError):
        return EXIT_NUMERIC
    if isinstance(exc, (FormatError, OSError)):
        return EXIT_IO
    return EXIT_NUMERIC if isinstance(exc, (FloatingPointError, ArithmeticError)) else EXIT_USAGE
