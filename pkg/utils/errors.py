"""Exception hierarchy; the CLI maps each class onto an exit status"""
from typing import Any, List, Optional


class FracminError(Exception):
    """Base class for all library failures"""
    exit_code = 1


class MalformedInputError(FracminError):
    """Unparsable file, bad flag value or schema mismatch"""
    exit_code = 1


class DomainError(FracminError):
    """A precondition of the requested operation does not hold"""
    exit_code = 2


class GeometryViolationError(DomainError):
    """A candidate set breaks a containment it was registered with"""
    exit_code = 2


class ConvergenceError(FracminError):
    """Quadrature or sampling did not reach the requested accuracy

    ``partial`` holds whatever estimate was available when the budget ran out.
    """
    exit_code = 3

    def __init__(self, message: str, partial: Optional[Any] = None):
        super().__init__(message)
        self.partial = partial


class SearchFailureError(ConvergenceError):
    """No certified supersolution radius below the search cap"""

    def __init__(self, message: str, certificates: Optional[List[Any]] = None):
        super().__init__(message, partial=certificates)
        self.certificates = list(certificates or [])


class SamplingResolutionError(ConvergenceError):
    """The touching set came out empty at the sampled resolution"""
