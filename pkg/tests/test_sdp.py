from ness_py.sdp import (SolverOptions, FeasibilityProblem, BetaMatrix, AffineOperator,
                         DykstraSolver, LeastSquaresSolver, whiten, project_psd,
                         project_affine, project_unit_trace_psd, solve,
                         solve_feasibility, solve_least_squares)
from ness_py.overlaps import OverlapSet, assemble, add_shot_noise
from ness_py.model import tfim_chain, xxz_dephasing
from ness_py.statevector import AnsatzSet, StateVector, basis_state, moment_states
from ness_py.symmetry import sector_constraints
from ness_py.pauli import PauliSum
from ness_py.oracle import exact_ness, fidelity
from ness_py.errors import (DegenerateAnsatzError, DimensionError, InfeasibleError,
                            IterationBudgetError)
import numpy as np
import pytest


def fixed_ansatz(states):
    """ansatz from explicit states, words are placeholders"""
    return AnsatzSet(states, [(i,) for i in range(len(states))], [], states[0],
                     {'kind': 'vector'})


def basis_ansatz(n, bits):
    return fixed_ansatz([basis_state(n, b) for b in bits])


def test_options():
    opts = SolverOptions()
    assert opts.feas_tol == 1e-9 and opts.mode == 'auto'
    assert SolverOptions.from_dict(opts.to_dict()) == opts
    with pytest.raises(ValueError):
        SolverOptions(feas_tol=-1)
    with pytest.raises(ValueError):
        SolverOptions(mode='newton')
    with pytest.raises(ValueError):
        SolverOptions.from_dict({'tolerance': 1})


def test_projections():
    rng = np.random.default_rng(0)
    g = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    h = g + g.conj().T
    p = project_psd(h)
    assert np.linalg.eigvalsh(p)[0] >= -1e-12
    assert np.allclose(project_psd(p), p)
    rho = project_unit_trace_psd(h)
    assert np.trace(rho).real == pytest.approx(1)
    assert np.linalg.eigvalsh(rho)[0] >= -1e-12
    assert np.allclose(project_unit_trace_psd(rho), rho)


def test_whiten_drops_dependent_direction():
    a, b = basis_state(2, '00'), basis_state(2, '01')
    c = StateVector(2, (a.amplitudes + b.amplitudes) / np.sqrt(2))
    model = tfim_chain(2, 1.0, 1.0)
    problem = FeasibilityProblem(assemble(model, fixed_ansatz([a, b, c])))
    reduced, back = whiten(problem)
    assert reduced.size == 2
    assert np.allclose(reduced.overlaps.E, np.eye(2))
    assert back.W.shape == (3, 2)


def test_whiten_zero_gram():
    zero = OverlapSet(np.zeros((1, 1)), np.zeros((1, 1)), [], [], [])
    with pytest.raises(DegenerateAnsatzError):
        whiten(FeasibilityProblem(zero))


def test_problem_checks():
    model = tfim_chain(2, 1.0, 1.0)
    overlaps = assemble(model, basis_ansatz(2, ['11']))
    with pytest.raises(DimensionError):
        FeasibilityProblem(overlaps, rates=[1.0])
    with pytest.raises(DimensionError):
        FeasibilityProblem(overlaps, extra_constraints=[(np.eye(2), 1.0)])


def test_affine_adjoint():
    rng = np.random.default_rng(5)
    model = tfim_chain(2, 1.0, 1.0)
    ansatz = moment_states(model.hamiltonian, basis_state(2, '11'), 1)
    problem = FeasibilityProblem(assemble(model, ansatz))
    affine = AffineOperator(problem)
    for _ in range(5):
        x = rng.standard_normal(affine.n_vars)
        y = rng.standard_normal(affine.n_rows)
        assert np.dot(affine.matvec(x), y) == pytest.approx(
            np.dot(x, affine.rmatvec(y)), rel=1e-10, abs=1e-12)


def test_project_affine():
    # K=2 from |11> spans the whole space, so the affine set is non-empty
    model = tfim_chain(2, 1.0, 1.0)
    ansatz = moment_states(model.hamiltonian, basis_state(2, '11'), 2)
    reduced, _ = whiten(FeasibilityProblem(assemble(model, ansatz)))
    rng = np.random.default_rng(3)
    g = rng.standard_normal((reduced.size, reduced.size))
    x = project_affine((g + g.T) / 2, reduced)
    assert np.allclose(x, x.conj().T)
    assert reduced.affine.residual_norm(x) <= 1e-8
    assert reduced.trace(x) == pytest.approx(1, abs=1e-8)
    assert np.allclose(project_affine(x, reduced), x, atol=1e-8)


def test_fixed_point_single_state():
    # g = 0: |11><11| is the steady state
    model = tfim_chain(2, 0.0, 1.0)
    beta = solve_feasibility(FeasibilityProblem(assemble(model, basis_ansatz(2, ['11']))))
    assert beta.feasible
    assert np.allclose(beta.beta, [[1]])
    assert beta.subspace_residual <= 1e-9


def test_nested_ansatz():
    model = tfim_chain(2, 0.0, 1.0)
    ansatz = basis_ansatz(2, ['11', '01'])
    beta = solve_feasibility(FeasibilityProblem(assemble(model, ansatz)))
    assert beta.feasible
    assert np.allclose(beta.beta, [[1, 0], [0, 0]], atol=1e-8)


def near_dependent_ansatz(theta=1e-2):
    tilted = np.zeros(4, dtype=complex)
    tilted[3], tilted[1] = np.cos(theta), np.sin(theta)
    return fixed_ansatz([basis_state(2, '11'), StateVector(2, tilted)])


def test_whiten_cutoff_from_solver_options():
    model = tfim_chain(2, 0.0, 1.0)
    problem = FeasibilityProblem(assemble(model, near_dependent_ansatz()))
    assert whiten(problem)[0].size == 2
    assert whiten(problem, SolverOptions(whiten_cutoff=1e-4))[0].size == 1

    class Recording(DykstraSolver):
        def iterate(self, reduced, start):
            self.reduced_size = reduced.size
            return super().iterate(reduced, start)

    kept = Recording()
    assert kept.solve(problem).feasible
    assert kept.reduced_size == 2
    # the surviving direction mixes in |01>, so the steady state |11> is lost
    dropped = Recording(SolverOptions(whiten_cutoff=1e-4))
    with pytest.raises(InfeasibleError):
        dropped.solve(problem)
    assert dropped.reduced_size == 1


def test_zero_padded_solution_stays_feasible():
    # the small ansatz spans the whole space, so L[rho] itself vanishes
    model = tfim_chain(2, 1.0, 1.0)
    small = moment_states(model.hamiltonian, basis_state(2, '11'), 2)
    assert len(small) == 4
    beta = solve_feasibility(FeasibilityProblem(assemble(model, small)))
    rng = np.random.default_rng(8)
    extra = []
    for _ in range(2):
        v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        extra.append(StateVector(2, v / np.linalg.norm(v)))
    big = fixed_ansatz(small.states + extra)
    padded = np.zeros((6, 6), dtype=complex)
    padded[:4, :4] = beta.beta
    problem = FeasibilityProblem(assemble(model, big))
    assert np.linalg.norm(problem.residual(padded)) <= 1e-7
    assert problem.trace(padded) == pytest.approx(1, abs=1e-9)
    assert np.linalg.eigvalsh(padded)[0] >= -1e-9


def test_repeated_solves_are_identical():
    model = tfim_chain(2, 0.7, 1.0)
    ansatz = moment_states(model.hamiltonian, basis_state(2, '11'), 2)
    for options in (SolverOptions(), SolverOptions(init='random', init_seed=11)):
        a = solve_feasibility(FeasibilityProblem(assemble(model, ansatz)), options)
        b = solve_feasibility(FeasibilityProblem(assemble(model, ansatz)), options)
        assert np.array_equal(a.beta, b.beta)
        assert a.iterations == b.iterations


def test_inconsistent_constraints():
    model = tfim_chain(2, 0.0, 1.0)
    problem = FeasibilityProblem(assemble(model, basis_ansatz(2, ['00'])))
    with pytest.raises(InfeasibleError) as info:
        DykstraSolver().solve(problem)
    assert isinstance(info.value.best, BetaMatrix)
    assert info.value.best.status == 'infeasible'


def test_inner_budget():
    model = tfim_chain(2, 1.0, 1.0)
    ansatz = moment_states(model.hamiltonian, basis_state(2, '11'), 2)
    options = SolverOptions(inner_max_iter=1)
    with pytest.raises(IterationBudgetError):
        solve(FeasibilityProblem(assemble(model, ansatz), options=options))


def test_full_space_matches_oracle():
    model = tfim_chain(2, 1.0, 1.0)
    ansatz = moment_states(model.hamiltonian, basis_state(2, '11'), 2)
    beta = solve(FeasibilityProblem(assemble(model, ansatz)))
    assert beta.feasible and beta.mode == 'feasibility'
    rho = beta.density_matrix(ansatz)
    assert fidelity(rho, exact_ness(model)) >= 0.999999


def test_random_initial_point():
    model = tfim_chain(2, 1.0, 1.0)
    ansatz = moment_states(model.hamiltonian, basis_state(2, '11'), 2)
    options = SolverOptions(init='random', init_seed=3)
    start = DykstraSolver(options).initial_point(4)
    assert np.trace(start).real == pytest.approx(1)
    beta = solve(FeasibilityProblem(assemble(model, ansatz)), options)
    assert beta.feasible


def test_sector_constraint_selects_sector():
    model = xxz_dephasing(2, 1.0, 1.0)
    ansatz = basis_ansatz(2, ['00', '01', '10', '11'])
    constraints = sector_constraints(PauliSum([(1, 'ZI'), (1, 'IZ')]), 2, ansatz)
    problem = FeasibilityProblem(assemble(model, ansatz), extra_constraints=constraints)
    beta = solve(problem)
    assert beta.feasible
    assert np.allclose(beta.beta, np.diag([1, 0, 0, 0]), atol=1e-8)
    assert max(beta.constraint_errors) <= 1e-8


def test_least_squares():
    model = tfim_chain(2, 1.0, 1.0)
    ansatz = moment_states(model.hamiltonian, basis_state(2, '11'), 2)
    problem = FeasibilityProblem(assemble(model, ansatz))
    beta = solve_least_squares(problem)
    assert beta.mode == 'least-squares' and beta.status == 'least-squares'
    assert beta.psd_violation >= -1e-12
    assert beta.trace_error <= 1e-9
    assert fidelity(beta.density_matrix(ansatz), exact_ness(model)) >= 0.999


def test_auto_mode_on_noisy_overlaps():
    model = tfim_chain(2, 1.0, 1.0)
    ansatz = moment_states(model.hamiltonian, basis_state(2, '11'), 2)
    noisy = add_shot_noise(assemble(model, ansatz), 10 ** 8, rng_seed=0)
    beta = solve(FeasibilityProblem(noisy))
    assert beta.mode == 'least-squares'
    assert isinstance(LeastSquaresSolver().name(), str)


def test_beta_json():
    beta = BetaMatrix(np.array([[0.5, 0.1j], [-0.1j, 0.5]]), 1e-10, 0.0, 0.0, 12,
                      constraint_errors=[1e-9])
    loaded = BetaMatrix.from_json(beta.to_json())
    assert np.array_equal(loaded.beta, beta.beta)
    assert loaded.diagnostics() == beta.diagnostics()
    assert loaded.feasible and loaded.size == 2
