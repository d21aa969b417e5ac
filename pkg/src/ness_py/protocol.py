from .errors import (ConfigError, ConvergenceError, DegenerateSteadySpace,
                     DenseLimitError, DimensionError, InfeasibleError,
                     IterationBudgetError, NessError, SymmetryError)


class Protocol:
    """conventions shared by the command line, report files and sample scripts

    >>> Protocol.exit_code(InfeasibleError('no'))
    3
    >>> Protocol.exit_code(KeyError('x'))
    1
    """
    ok = 0
    unexpected = 1
    config = 2
    infeasible = 3
    iteration_budget = 4
    oracle = 5

    #: checked in order, first match wins
    exit_codes = [
        (InfeasibleError, infeasible),
        (IterationBudgetError, iteration_budget),
        (DenseLimitError, oracle),
        (ConvergenceError, oracle),
        (DegenerateSteadySpace, oracle),
        (ConfigError, config),
        (DimensionError, config),
        (SymmetryError, config),
        (FileNotFoundError, config),
        (ValueError, config),
        (NessError, unexpected),
    ]

    observables = 'site averages <X_j>, <Z_j>, <Z_j Z_j+1>'
    fidelity = 'Uhlmann (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2'
    vectorization = 'column-stacking'

    sweep_columns = [
        'ansatz_size', 'K', 'q', 'rng_seed', 'seed', 'status', 'feasible',
        'subspace_residual', 'true_residual', 'fidelity',
        'X_avg', 'Z_avg', 'ZZ_avg', 'iterations', 'mode', 'shots',
        'feas_tol', 'psd_tol', 'error',
    ]

    @staticmethod
    def exit_code(exc: BaseException) -> int:
        for cls, code in Protocol.exit_codes:
            if isinstance(exc, cls):
                return code
        return Protocol.unexpected

    @staticmethod
    def sweep_header(param: str):
        """CSV header: the swept parameter first, then the fixed columns"""
        return [param] + Protocol.sweep_columns
