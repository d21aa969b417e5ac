class NessError(Exception):
    """base class of every error raised by ness_py"""


class DimensionError(NessError, ValueError):
    """qubit counts or matrix sizes do not match"""


class DenseLimitError(NessError, ValueError):
    """dense expansion requested beyond the configured qubit limit"""


class ConfigError(NessError, ValueError):
    """invalid run configuration or model file"""


class DegenerateAnsatzError(NessError, ValueError):
    """Gram matrix of the ansatz is numerically zero"""


class DegenerateSteadySpace(NessError, ValueError):
    """more than one steady state where a unique one was required"""


class ConvergenceError(NessError, RuntimeError):
    """iterative oracle did not reach its residual target"""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SolverError(NessError, RuntimeError):
    """feasibility solver stopped without a valid answer.

    The best iterate is kept in ``self.best`` (a BetaMatrix) so that
    callers can still report how close it came.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class InfeasibleError(SolverError):
    """residual stagnates above tolerance, or the affine set is empty"""


class IterationBudgetError(SolverError):
    """max_iter reached while still making progress"""


class SymmetryError(NessError, ValueError):
    """symmetry operator is not unitary, not strong, or has a degenerate
    eigenvalue list"""
