"""Feasibility over the Hermitian PSD cone for the Galerkin-projected
steady-state conditions.

All iterations run in whitened coordinates, where the Gram matrix is the
identity, and the answer is mapped back to the ansatz basis.
"""
import abc
import collections
import dataclasses
import functools
import json
import logging
import numpy as np
import scipy.sparse.linalg

from .errors import (DegenerateAnsatzError, DimensionError, InfeasibleError,
                     IterationBudgetError)
from .overlaps import (OverlapSet, ObservableMatrix, galerkin_residual,
                       galerkin_adjoint, hermitize)


MODES = ('auto', 'feasibility', 'least-squares')
INITS = ('identity', 'random')


@dataclasses.dataclass
class SolverOptions:
    """tolerances and switches shared by every solver"""
    feas_tol: float = 1e-9
    psd_tol: float = 1e-9
    max_iter: int = 10000
    whiten_cutoff: float = 1e-10   #: relative to the largest Gram eigenvalue
    inner_tol: float = 1e-12
    inner_max_iter: int = None     #: None means 10 x number of unknowns
    stall_window: int = 50
    stall_tol: float = 1e-6
    mode: str = 'auto'
    init: str = 'identity'
    init_seed: int = None
    log_every: int = 100

    def __post_init__(self):
        for name in ('feas_tol', 'psd_tol', 'whiten_cutoff', 'inner_tol', 'stall_tol'):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f'{name} must be positive, got {value}')
        if self.max_iter < 1 or self.stall_window < 1:
            raise ValueError('max_iter and stall_window must be positive')
        if self.mode not in MODES:
            raise ValueError(f'unknown solver mode {self.mode!r}, choose from {MODES}')
        if self.init not in INITS:
            raise ValueError(f'unknown initial point {self.init!r}, choose from {INITS}')

    def to_dict(self):
        return dataclasses.asdict(self)

    @staticmethod
    def from_dict(data):
        known = {f.name for f in dataclasses.fields(SolverOptions)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f'unknown solver options {sorted(unknown)}')
        return SolverOptions(**data)


def _as_matrix(observable):
    if isinstance(observable, ObservableMatrix):
        return observable.matrix
    return np.asarray(observable, dtype=complex)


class FeasibilityProblem:
    """find beta >= 0 with zero Galerkin residual, Tr(beta E) = 1 and
    Tr(beta N_k) = n_k for every extra constraint"""

    def __init__(self, overlaps: OverlapSet, rates=None, extra_constraints=(),
                 options: SolverOptions = None):
        self.overlaps = overlaps
        self.rates = list(overlaps.rates if rates is None else rates)
        self.extra_constraints = [(_as_matrix(n), float(target))
                                  for n, target in extra_constraints]
        self.options = options or SolverOptions()
        self.scale = 1.0
        L = overlaps.size
        if len(self.rates) != len(overlaps.R):
            raise DimensionError(
                f'{len(self.rates)} rates given for {len(overlaps.R)} dissipators')
        for n, _ in self.extra_constraints:
            if n.shape != (L, L):
                raise DimensionError(f'constraint matrix {n.shape} does not match L={L}')

    @property
    def size(self) -> int:
        return self.overlaps.size

    def residual(self, beta):
        return galerkin_residual(self.overlaps, self.rates, beta)

    def trace(self, beta) -> float:
        return float(np.trace(beta @ self.overlaps.E).real)

    def constraint_errors(self, beta):
        return [abs(float(np.trace(beta @ n).real) - target)
                for n, target in self.extra_constraints]

    @functools.cached_property
    def affine(self):
        return AffineOperator(self)

    def transformed(self, W):
        """the same problem with every matrix X replaced by W^H X W"""
        def t(m):
            return W.conj().T @ m @ W
        ov = self.overlaps
        reduced = OverlapSet(hermitize(t(ov.E)), hermitize(t(ov.D)),
                             [t(r) for r in ov.R], [hermitize(t(f)) for f in ov.F],
                             ov.rates, ov.metadata)
        return FeasibilityProblem(reduced, self.rates,
                                  [(hermitize(t(n)), target)
                                   for n, target in self.extra_constraints],
                                  self.options)


class BackTransform:
    """beta = W beta~ W^H"""

    def __init__(self, W):
        self.W = W

    def __call__(self, beta_tilde):
        return hermitize(self.W @ beta_tilde @ self.W.conj().T)


def whiten(problem: FeasibilityProblem, options: SolverOptions = None):
    """reduce to the numerically independent part of the ansatz.

    Returns (reduced problem, back transform).  In the reduced problem the
    Gram matrix is exactly the identity.
    """
    E = problem.overlaps.E
    L = problem.size
    w, V = np.linalg.eigh(E)
    lam_max = float(w[-1]) if L else 0.0
    if not lam_max > 0:
        raise DegenerateAnsatzError('Gram matrix of the ansatz is numerically zero')
    if np.allclose(E, np.eye(L), rtol=0, atol=1e-14):
        W = np.eye(L, dtype=complex)
    else:
        cutoff = (options or problem.options).whiten_cutoff
        keep = w > cutoff * lam_max
        W = V[:, keep] / np.sqrt(w[keep])
        if W.shape[1] < L:
            logging.debug(f'whitening dropped {L - W.shape[1]} dependent directions')
    reduced = problem.transformed(W)
    reduced.overlaps.E = np.eye(W.shape[1], dtype=complex)
    reduced.scale = max(1.0, lam_max)
    return reduced, BackTransform(W)


def project_psd(X):
    """nearest PSD matrix in Frobenius norm

    >>> project_psd(np.diag([1.0, -1.0])).real.tolist()
    [[1.0, 0.0], [0.0, 0.0]]
    """
    w, v = np.linalg.eigh(X)
    out = (v * np.maximum(w, 0)) @ v.conj().T
    return (out + out.conj().T) / 2


def project_unit_trace_psd(X):
    """nearest density matrix: eigenvalues projected on the probability simplex"""
    w, v = np.linalg.eigh(X)
    u = np.sort(w)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, len(u) + 1)
    rho = k[u - (css - 1) / k > 0][-1]
    theta = (css[rho - 1] - 1) / rho
    out = (v * np.maximum(w - theta, 0)) @ v.conj().T
    return (out + out.conj().T) / 2


def _flatten(X):
    return np.concatenate([X.real.ravel(), X.imag.ravel()])


def _unflatten(x, r):
    X = (x[:r * r] + 1j * x[r * r:]).reshape(r, r)
    return (X + X.conj().T) / 2


class AffineOperator:
    """constraint map C(X) = (G(X), Tr XE, Tr XN_k) on Hermitian matrices
    flattened as [Re, Im], with its adjoint and least-norm solves.

    Least-norm solves use LSQR, i.e. conjugate gradients on the normal
    equations, applied matrix-free.
    """

    def __init__(self, problem: FeasibilityProblem):
        self.problem = problem
        r = problem.size
        self.r = r
        self.n_vars = 2 * r * r
        self.n_rows = 2 * r * r + 1 + len(problem.extra_constraints)
        self.b = np.zeros(self.n_rows)
        self.b[2 * r * r] = 1
        for k, (_, target) in enumerate(problem.extra_constraints):
            self.b[2 * r * r + 1 + k] = target
        self.operator = scipy.sparse.linalg.LinearOperator(
            (self.n_rows, self.n_vars), matvec=self.matvec, rmatvec=self.rmatvec,
            dtype=float)
        options = problem.options
        self.tol = options.inner_tol
        self.iter_lim = options.inner_max_iter or 10 * self.n_vars
        self.offset, self.offset_residual = self.least_norm(self.b)

    def forward(self, X):
        p = self.problem
        G = p.residual(X)
        extras = [np.trace(X @ n).real for n, _ in p.extra_constraints]
        return np.concatenate([_flatten(G), [np.trace(X @ p.overlaps.E).real], extras])

    def adjoint(self, y):
        p = self.problem
        r2 = self.r * self.r
        Y = (y[:r2] + 1j * y[r2:2 * r2]).reshape(self.r, self.r)
        Z = galerkin_adjoint(p.overlaps, p.rates, Y) + y[2 * r2] * p.overlaps.E
        for k, (n, _) in enumerate(p.extra_constraints):
            Z = Z + y[2 * r2 + 1 + k] * n.conj().T
        return (Z + Z.conj().T) / 2

    def matvec(self, x):
        return self.forward(_unflatten(np.ravel(x), self.r))

    def rmatvec(self, y):
        return _flatten(self.adjoint(np.ravel(y)))

    def least_norm(self, rhs):
        """minimum-norm z with C z = rhs (least squares if inconsistent),
        with a few rounds of iterative refinement"""
        z = np.zeros(self.n_vars)
        residual = np.linalg.norm(rhs)
        target = self.tol * max(1.0, residual)
        for _ in range(3):
            if residual <= target:
                break
            step, istop, itn = scipy.sparse.linalg.lsqr(
                self.operator, rhs - self.operator.matvec(z),
                atol=self.tol, btol=self.tol, iter_lim=self.iter_lim)[:3]
            z = z + step
            new_residual = np.linalg.norm(rhs - self.operator.matvec(z))
            if istop == 7 and new_residual > self.problem.options.feas_tol:
                raise IterationBudgetError(
                    f'inner least-squares solve hit {self.iter_lim} iterations, '
                    f'residual {new_residual:.3g}')
            if new_residual >= residual:
                z = z - step
                break
            residual = new_residual
        return z, residual

    def residual_norm(self, X) -> float:
        return float(np.linalg.norm(self.forward(X) - self.b))

    def project(self, X):
        z, _ = self.least_norm(self.forward(X) - self.b)
        return X - _unflatten(z, self.r)


def project_affine(X, problem: FeasibilityProblem):
    """least-norm correction of X onto the affine constraint set of a
    whitened problem"""
    return problem.affine.project(X)


class BetaMatrix:
    """solution beta (ansatz basis) with its diagnostics"""

    def __init__(self, beta, subspace_residual: float, psd_violation: float,
                 trace_error: float, iterations: int, status: str = 'feasible',
                 constraint_errors=(), mode: str = 'feasibility'):
        self.beta = np.asarray(beta, dtype=complex)
        self.subspace_residual = float(subspace_residual)
        self.psd_violation = float(psd_violation)
        self.trace_error = float(trace_error)
        self.iterations = int(iterations)
        self.status = status
        self.constraint_errors = [float(e) for e in constraint_errors]
        self.mode = mode

    @property
    def feasible(self) -> bool:
        return self.status == 'feasible'

    @property
    def size(self) -> int:
        return self.beta.shape[0]

    def density_matrix(self, ansatz):
        """rho = sum_ij beta_ij |chi_i><chi_j| (dense, desk scale only)"""
        X = ansatz.matrix()
        rho = X @ self.beta @ X.conj().T
        return (rho + rho.conj().T) / 2

    def diagnostics(self):
        return {
            'status': self.status,
            'mode': self.mode,
            'subspace_residual': self.subspace_residual,
            'psd_violation': self.psd_violation,
            'trace_error': self.trace_error,
            'constraint_errors': self.constraint_errors,
            'iterations': self.iterations,
        }

    def to_json(self):
        data = self.diagnostics()
        data['beta'] = [[[v.real, v.imag] for v in row] for row in self.beta]
        return json.dumps(data)

    @staticmethod
    def from_json(msg):
        data = json.loads(msg)
        beta = np.array([[complex(*v) for v in row] for row in data['beta']])
        return BetaMatrix(beta, data['subspace_residual'], data['psd_violation'],
                          data['trace_error'], data['iterations'], data['status'],
                          data.get('constraint_errors', ()), data.get('mode', 'feasibility'))


def diagnose(problem: FeasibilityProblem, beta, iterations: int,
             status: str, mode: str) -> BetaMatrix:
    beta = hermitize(beta)
    return BetaMatrix(
        beta,
        subspace_residual=np.linalg.norm(problem.residual(beta)),
        psd_violation=min(0.0, float(np.linalg.eigvalsh(beta)[0])),
        trace_error=abs(problem.trace(beta) - 1),
        iterations=iterations,
        status=status,
        constraint_errors=problem.constraint_errors(beta),
        mode=mode)


Iterate = collections.namedtuple('Iterate', ['beta', 'iterations', 'status', 'message'])


class Solver(abc.ABC):
    """求解アルゴリズムの基底クラス．

    Typical sequence:
    - make a (subclass of) Solver with SolverOptions
    - call solve(problem)
      - the problem is whitened so that E becomes the identity
      - self.iterate(reduced, start) is internally called
      - the iterate is mapped back and diagnostics are computed
    - a BetaMatrix is returned, or InfeasibleError / IterationBudgetError
      is raised carrying it as ``best``
    """

    def __init__(self, options: SolverOptions = None):
        self.options = options or SolverOptions()

    @abc.abstractmethod
    def name(self) -> str:
        '''return the mode name recorded in diagnostics'''
        pass

    @abc.abstractmethod
    def iterate(self, reduced: FeasibilityProblem, start) -> Iterate:
        '''whitened iterations from start; return an Iterate

        status is one of feasible, least-squares, infeasible, budget
        '''
        pass

    def initial_point(self, r: int):
        '''Tr = 1 starting point: identity or an rng-seeded random PSD matrix'''
        if self.options.init == 'random':
            rng = np.random.default_rng(self.options.init_seed)
            g = rng.standard_normal((r, r)) + 1j * rng.standard_normal((r, r))
            x = g @ g.conj().T
            return x / np.trace(x).real
        return np.eye(r, dtype=complex) / r

    def solve(self, problem: FeasibilityProblem) -> BetaMatrix:
        reduced, back = whiten(problem, self.options)
        reduced.options = self.options
        start = self.initial_point(reduced.size)
        result = self.iterate(reduced, start)
        beta = diagnose(problem, back(result.beta), result.iterations,
                        result.status, self.name())
        logging.info(f'{self.name()} solve L={problem.size} r={reduced.size}: '
                     f'{result.status} after {result.iterations} iterations, '
                     f'residual {beta.subspace_residual:.3g}')
        if result.status == 'infeasible':
            raise InfeasibleError(result.message, best=beta)
        if result.status == 'budget':
            raise IterationBudgetError(result.message, best=beta)
        return beta


class DykstraSolver(Solver):
    """alternating projections between the affine set and the PSD cone with
    Dykstra's correction on the cone step"""

    def name(self):
        return 'feasibility'

    def iterate(self, reduced, start):
        opts = self.options
        affine = reduced.affine
        if affine.offset_residual > opts.feas_tol:
            return Iterate(start, 0, 'infeasible',
                           'linear constraints are inconsistent '
                           f'(residual {affine.offset_residual:.3g})')
        tol = opts.feas_tol / reduced.scale
        x = start
        q = np.zeros_like(start)
        best, best_gap = x, np.inf
        window_gap = np.inf
        for it in range(1, opts.max_iter + 1):
            # the affine step needs no correction term
            y = affine.project(x)
            x = project_psd(y + q)
            q = y + q - x
            gap = affine.residual_norm(x)
            if gap < best_gap:
                best, best_gap = x, gap
            if it % opts.log_every == 0:
                logging.debug(f'dykstra {it=} gap={gap:.3g}')
            if gap <= tol:
                return Iterate(x, it, 'feasible', '')
            if it % opts.stall_window == 0:
                if np.isfinite(window_gap) and window_gap - gap <= opts.stall_tol * window_gap:
                    return Iterate(best, it, 'infeasible',
                                   f'residual stagnated at {best_gap:.3g}')
                window_gap = gap
        return Iterate(best, opts.max_iter, 'budget',
                       f'max_iter {opts.max_iter} reached with residual {best_gap:.3g}')


class LeastSquaresSolver(Solver):
    """accelerated projected gradient on |C(beta) - b|^2 over density matrices;
    for overlaps whose constraints cannot be met exactly"""

    def name(self):
        return 'least-squares'

    @staticmethod
    def _lipschitz(affine, n_steps: int = 100):
        z = np.ones(affine.n_vars) / np.sqrt(affine.n_vars)
        norm = 1.0
        for _ in range(n_steps):
            z = affine.rmatvec(affine.matvec(z))
            norm = np.linalg.norm(z)
            if norm == 0:
                return 1.0
            z = z / norm
        return 1.1 * norm

    def iterate(self, reduced, start):
        opts = self.options
        affine = reduced.affine

        def objective(X):
            return 0.5 * affine.residual_norm(X) ** 2

        def gradient(X):
            return affine.adjoint(affine.forward(X) - affine.b)

        step = 1 / self._lipschitz(affine)
        x = project_unit_trace_psd(start)
        y, t = x, 1.0
        f_x = objective(x)
        for it in range(1, opts.max_iter + 1):
            x_new = project_unit_trace_psd(y - step * gradient(y))
            f_new = objective(x_new)
            if f_new > f_x and t > 1:
                # restart momentum
                y, t = x, 1.0
                continue
            t_new = (1 + np.sqrt(1 + 4 * t * t)) / 2
            y = x_new + ((t - 1) / t_new) * (x_new - x)
            moved = np.linalg.norm(x_new - x)
            x, f_x, t = x_new, f_new, t_new
            if it % opts.log_every == 0:
                logging.debug(f'least-squares {it=} objective={f_x:.3g}')
            if moved <= opts.feas_tol:
                return Iterate(x, it, 'least-squares', '')
        logging.warning(f'least-squares mode stopped at max_iter {opts.max_iter}')
        return Iterate(x, opts.max_iter, 'least-squares', '')


def solve_feasibility(problem: FeasibilityProblem, options: SolverOptions = None) -> BetaMatrix:
    return DykstraSolver(options or problem.options).solve(problem)


def solve_least_squares(problem: FeasibilityProblem, options: SolverOptions = None) -> BetaMatrix:
    return LeastSquaresSolver(options or problem.options).solve(problem)


def solve(problem: FeasibilityProblem, options: SolverOptions = None) -> BetaMatrix:
    """dispatch on options.mode; auto picks least squares for noisy overlaps"""
    options = options or problem.options
    mode = options.mode
    if mode == 'auto':
        mode = 'least-squares' if problem.overlaps.noisy else 'feasibility'
    if mode == 'least-squares':
        if problem.overlaps.noisy:
            logging.warning('noisy overlaps: solving in least-squares mode')
        return solve_least_squares(problem, options)
    return solve_feasibility(problem, options)
