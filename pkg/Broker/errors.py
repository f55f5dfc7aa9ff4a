"""Exception types surfaced to the command line.

The CLI maps ConfigValidationError to exit code 2 and SolverError to
exit code 3; everything else is a programming error.
"""

from typing import List, Optional


class ConfigValidationError(ValueError):
    """Raised when an experiment config fails validation.

    Attributes:
        diagnostics: One ``section.key (line N): message`` entry per problem.
    """

    def __init__(self, diagnostics: List[str]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


class SolverError(RuntimeError):
    """Raised when a root finder cannot bracket a solution.

    Attributes:
        xi: The scheduled demand at which the solve failed, if any.
    """

    def __init__(self, message: str, xi: Optional[float] = None):
        self.xi = xi
        super().__init__(message if xi is None else f"{message} (xi={xi:.9g})")
