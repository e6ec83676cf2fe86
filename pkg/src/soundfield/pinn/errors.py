from pathlib import Path
from typing import (
    Optional,
    Union,
)

from click import ClickException
from pydantic import ValidationError
from pydantic.error_wrappers import display_errors


__all__ = [
    "DomainError",
    "NumericalError",
    "ArtifactParseError",
    "ConfigValidationError",
    "NumericalFailure",
    "MissingArtifactError",
    "ArtifactFormatError",
]


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


class NumericalError(ArithmeticError):
    """Raised when a computation produces non-finite values or a singular system."""


class ArtifactParseError(ValueError):
    """Base class for errors while reading CSV or checkpoint artifacts"""

    def __init__(
        self,
        path: Union[str, Path],
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
    ):
        """
        Args:
            path: The file that failed to parse
            message: Description of the problem
            line: The 1-based line number of the offending row if known
            column: The 1-based column number of the offending value if known
        """
        super().__init__(message)
        self.path = Path(path)
        self.line = line
        self.column = column

    def __str__(self):
        location = str(self.path)
        if self.line is not None:
            location += f":{self.line}"
            if self.column is not None:
                location += f":{self.column}"
        return f"{location}: {super().__str__()}"


class ConfigValidationError(ClickException):
    """CLI exception indicating that the configuration file was not valid"""

    exit_code = 2

    def __init__(self, cause: ValidationError):
        """
        Args:
            cause: Pydantic validation error that caused validation to fail.
        """
        formated_errors = display_errors(cause.errors())
        super().__init__(
            f"Failed to validate the configuration file.\n{formated_errors}"
        )
        self.__cause__ = cause


class NumericalFailure(ClickException):
    """CLI exception indicating that a numerical routine failed"""

    exit_code = 3

    def __init__(self, cause: Exception):
        """
        Args:
            cause: The library error that aborted the command.
        """
        super().__init__(f"Numerical failure: {cause}")
        self.__cause__ = cause


class MissingArtifactError(ClickException):
    """CLI exception indicating that a required input artifact does not exist"""

    def __init__(self, path: Path, producer: str):
        """
        Args:
            path: The missing file
            producer: The CLI command which creates the file
        """
        super().__init__(
            f"Required file '{path}' does not exist, run `soundfield-pinn {producer}` first."
        )


class ArtifactFormatError(ClickException):
    """CLI exception wrapping an artifact parse error"""

    def __init__(self, cause: ArtifactParseError):
        super().__init__(f"Invalid artifact file: {cause}")
        self.__cause__ = cause
