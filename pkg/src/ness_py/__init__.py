from .errors import (NessError, DimensionError, DenseLimitError, ConfigError,
                     DegenerateAnsatzError, DegenerateSteadySpace, ConvergenceError,
                     SolverError, InfeasibleError, IterationBudgetError, SymmetryError)
from .pauli import PauliString, PauliSum
from .statevector import (StateVector, AnsatzSet, basis_state, product_state,
                          moment_states, moment_states_random, make_seed)
from .model import OpenSystemModel, tfim_chain, xxz_dephasing, xxz_boundary_driven
from .overlaps import OverlapSet, assemble, observable_matrix, add_shot_noise
from .sdp import (SolverOptions, FeasibilityProblem, BetaMatrix, solve,
                  solve_feasibility, solve_least_squares)
from .oracle import exact_ness, steady_states, physical_steady_states, fidelity
from .symmetry import SymmetrySpec, RhoCombination, extract_all_ness, sector_constraints
from .protocol import Protocol
from .report import Reporter
from .driver import RunConfig

__all__ = [
    'PauliString', 'PauliSum',
    'StateVector', 'AnsatzSet', 'basis_state', 'product_state',
    'moment_states', 'moment_states_random', 'make_seed',
    'OpenSystemModel', 'tfim_chain', 'xxz_dephasing', 'xxz_boundary_driven',
    'OverlapSet', 'assemble', 'observable_matrix', 'add_shot_noise',
    'SolverOptions', 'FeasibilityProblem', 'BetaMatrix',
    'solve', 'solve_feasibility', 'solve_least_squares',
    'exact_ness', 'steady_states', 'physical_steady_states', 'fidelity',
    'SymmetrySpec', 'RhoCombination', 'extract_all_ness', 'sector_constraints',
    'Protocol', 'Reporter',
    # for sample/ scripts
    'RunConfig',
    # errors
    'NessError', 'DimensionError', 'DenseLimitError', 'ConfigError',
    'DegenerateAnsatzError', 'DegenerateSteadySpace', 'ConvergenceError',
    'SolverError', 'InfeasibleError', 'IterationBudgetError', 'SymmetryError',
]
