"""Brute-force ground truth for small models.

Vectorization is column stacking: vec(B rho C) = (C^T kron B) vec(rho).
"""
import functools
import logging
import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .errors import ConvergenceError, DegenerateSteadySpace, DenseLimitError
from .overlaps import hermitize
from .statevector import StateVector


DENSE_LIMIT = 6                 #: default qubit limit for the d^2 x d^2 Liouvillian
SPARSE_LIMIT = 10
NULL_TOL = 1e-10                #: relative singular value cutoff of the null space
CENTRE_TOL = 1e-8
CONVENTION = 'column-stacking'


def vectorize(m):
    return np.asarray(m).flatten(order='F')


def unvectorize(v, d: int):
    return np.asarray(v).reshape((d, d), order='F')


@functools.lru_cache(maxsize=16)
def _dense_terms(model):
    H = model.hamiltonian.to_dense()
    terms = []
    for rate, jump in model.dissipators:
        A = jump.to_dense()
        terms.append((rate, A, A.conj().T @ A))
    return H, terms


def lindblad_apply(model, rho):
    """L[rho] = -i[H, rho] + sum_n g_n (A rho A^H - {A^H A, rho}/2)"""
    H, terms = _dense_terms(model)
    out = -1j * (H @ rho - rho @ H)
    for rate, A, AdA in terms:
        out = out + rate * (A @ rho @ A.conj().T - 0.5 * (AdA @ rho + rho @ AdA))
    return out


class LiouvillianDense:
    """d^2 x d^2 matrix of L acting on column-stacked density matrices"""

    def __init__(self, matrix, n_qubits: int):
        self.matrix = matrix
        self.n_qubits = n_qubits
        self.convention = CONVENTION

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    def apply(self, rho):
        return unvectorize(self.matrix @ vectorize(rho), self.dim)


def _check_limit(n: int, limit: int):
    if n > limit:
        raise DenseLimitError(f'{n} qubits exceed the dense oracle limit {limit}')
    if n > DENSE_LIMIT:
        mbytes = 16 * 4 ** (2 * n) / 2 ** 20
        logging.warning(f'dense Liouvillian for {n} qubits needs {mbytes:.0f} MB')


def build_liouvillian(model, limit: int = DENSE_LIMIT) -> LiouvillianDense:
    n = model.n_qubits
    _check_limit(n, limit)
    H, terms = _dense_terms(model)
    I = np.eye(2 ** n)
    L = -1j * (np.kron(I, H) - np.kron(H.T, I))
    for rate, A, AdA in terms:
        L = L + rate * (np.kron(A.conj(), A) - 0.5 * np.kron(I, AdA)
                        - 0.5 * np.kron(AdA.T, I))
    return LiouvillianDense(L, n)


def _normalize(m):
    m = hermitize(m)
    return m / np.trace(m).real


def _is_physical(m, tol: float = 1e-9) -> bool:
    t = np.trace(m).real
    if abs(t) < 1e-12:
        return False
    return bool(np.linalg.eigvalsh(hermitize(m / t))[0] >= -tol)


class NessBasis:
    """Hermitian, Frobenius-orthonormal basis of the Liouvillian null space.

    ``right`` and ``left`` keep the raw right and left null vectors for the
    spectral projector onto the steady-state space.
    """

    def __init__(self, matrices, physical, right=None, left=None):
        self.matrices = list(matrices)
        self.physical = list(physical)
        self.right = right
        self.left = left

    @property
    def dimension(self) -> int:
        return len(self.matrices)

    @property
    def dim(self) -> int:
        return self.matrices[0].shape[0]

    def long_time_limit(self, rho0):
        """P0 rho0 with P0 = R (L^H R)^-1 L^H, the t -> infinity image"""
        R, L = self.right, self.left
        coeffs = np.linalg.solve(L.conj().T @ R, L.conj().T @ vectorize(rho0))
        return hermitize(unvectorize(R @ coeffs, self.dim))

    def save(self, path):
        np.savez(path, matrices=np.array(self.matrices),
                 physical=np.array(self.physical))


def _hermitian_basis(right, d: int):
    """real span of the Hermitian parts of the null vectors"""
    N = right.shape[1]
    columns = []
    for k in range(N):
        m = unvectorize(right[:, k], d)
        for c in ((m + m.conj().T) / 2, (m - m.conj().T) / 2j):
            columns.append(np.concatenate([c.real.ravel(), c.imag.ravel()]))
    u, _, _ = np.linalg.svd(np.array(columns).T, full_matrices=False)
    basis = []
    for k in range(N):
        col = u[:, k]
        m = hermitize((col[:d * d] + 1j * col[d * d:]).reshape(d, d))
        if np.trace(m).real < 0:
            m = -m
        basis.append(m)
    return basis


def steady_states(model, tol: float = NULL_TOL, limit: int = DENSE_LIMIT) -> NessBasis:
    liouvillian = build_liouvillian(model, limit)
    U, s, Vh = np.linalg.svd(liouvillian.matrix)
    null = s <= tol * s[0] if s[0] > 0 else np.ones(len(s), dtype=bool)
    right = Vh[null].conj().T
    left = U[:, null]
    matrices = _hermitian_basis(right, liouvillian.dim)
    physical = [_is_physical(m) for m in matrices]
    logging.debug(f'null space dimension {len(matrices)}, '
                  f'{sum(physical)} physical basis elements')
    return NessBasis(matrices, physical, right, left)


def _centre(T, tol: float = CENTRE_TOL):
    """real coefficient vectors c with sum_i c_i T_i commuting with every T_j.

    The cutoff is absolute, tol * max(1, |T_k|)^2; when every commutator
    falls below it the whole span is central.
    """
    scale = max(1.0, max(np.linalg.norm(t) for t in T)) ** 2
    columns = []
    for t in T:
        blocks = [t @ u - u @ t for u in T]
        flat = np.concatenate([b.ravel() for b in blocks])
        columns.append(np.concatenate([flat.real, flat.imag]))
    _, s, vh = scipy.linalg.svd(np.array(columns).T)
    rank = int(np.sum(s > tol * scale))
    if rank == 0:
        return list(T)
    return [sum(c * t for c, t in zip(vec, T)) for vec in vh[rank:]]


def _cluster(values, tol: float):
    groups = [[0]]
    for i in range(1, len(values)):
        if values[i] - values[i - 1] > tol:
            groups.append([])
        groups[-1].append(i)
    return groups


def physical_steady_states(model, tol: float = NULL_TOL, limit: int = DENSE_LIMIT):
    """extreme physical steady states, one per minimal central projection of
    the fixed-point algebra seen from the long-time limit of I/d"""
    basis = steady_states(model, tol, limit)
    if basis.dimension == 1:
        return [_normalize(basis.matrices[0])]
    d = basis.dim
    rho_inf = basis.long_time_limit(np.eye(d) / d)
    w, v = np.linalg.eigh(rho_inf)
    keep = w > 1e-10 * w[-1]
    vs, s = v[:, keep], np.sqrt(w[keep])
    scale = np.outer(s, s)
    T = [(vs.conj().T @ b @ vs) / scale for b in basis.matrices]
    centre = _centre(T)
    if not centre:
        logging.warning('fixed-point algebra has a trivial centre; '
                        'returning the long-time limit of I/d only')
        return [_normalize(rho_inf)]
    rng = np.random.default_rng(0)
    Z = hermitize(sum(c * z for c, z in zip(rng.standard_normal(len(centre)), centre)))
    ew, ev = np.linalg.eigh(Z)
    groups = _cluster(ew, 1e-6 * max(1.0, np.abs(ew).max()))
    states = []
    for idx in groups:
        P = ev[:, idx] @ ev[:, idx].conj().T
        states.append(_normalize(vs @ (scale * P) @ vs.conj().T))
    logging.info(f'{len(states)} physical steady states')
    return states


def exact_ness(model, tol: float = NULL_TOL, limit: int = DENSE_LIMIT):
    """the unique steady state as a density matrix"""
    basis = steady_states(model, tol, limit)
    if basis.dimension > 1:
        raise DegenerateSteadySpace(
            f'{basis.dimension} steady states for {model.label}; use the symmetry tools')
    return _normalize(basis.matrices[0])


def sector_steady_state(model, V, tol: float = NULL_TOL):
    """unique steady state supported on the invariant subspace spanned by the
    orthonormal columns of V, from the restricted Liouvillian
    (V^T kron V^H) L (V^* kron V)"""
    V = np.asarray(V, dtype=complex)
    k = V.shape[1]
    columns = []
    for j in range(k * k):
        sigma = unvectorize(np.eye(k * k)[:, j], k)
        columns.append(vectorize(V.conj().T @ lindblad_apply(model, V @ sigma @ V.conj().T) @ V))
    restricted = np.array(columns).T
    _, s, Vh = np.linalg.svd(restricted)
    null = s <= tol * max(s[0], 1e-300)
    if null.sum() > 1:
        raise DegenerateSteadySpace(f'{null.sum()} steady states in the given subspace')
    if not null.any():
        logging.warning(f'subspace is not invariant: smallest singular value {s[-1]:.3g}')
    sigma = _normalize(unvectorize(Vh[-1].conj(), k))
    return hermitize(V @ sigma @ V.conj().T)


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2

    >>> fidelity(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
    0.0
    """
    w, v = np.linalg.eigh(hermitize(rho))
    root = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    inner = np.linalg.eigvalsh(hermitize(root @ sigma @ root))
    value = np.sum(np.sqrt(np.clip(inner, 0, None))) ** 2
    return float(np.clip(value, 0.0, 1.0))


def true_residual(rho, model) -> float:
    """Frobenius norm of L[rho]"""
    return float(np.linalg.norm(lindblad_apply(model, rho)))


def _sparse_terms(model):
    H = model.hamiltonian.to_sparse()
    terms = []
    for rate, jump in model.dissipators:
        A = jump.to_sparse()
        Ad = A.conj().T.tocsr()
        terms.append((rate, A, Ad, (Ad @ A).tocsr()))
    return H, terms


def sparse_steady_state(model, tol: float = 1e-8, max_iter: int = None,
                        limit: int = SPARSE_LIMIT):
    """matrix-free least squares for [L; Tr] x = [0; 1], refined on the residual.

    Refinement re-solves the bordered system against the current residual
    (iterative refinement) rather than running inverse iteration on L.
    For a unique steady state the bordered operator has full column rank,
    so both converge to the same normalized null vector; this one needs
    only matvecs and never factors the d^2 x d^2 superoperator.
    """
    n = model.n_qubits
    if n > limit:
        raise DenseLimitError(f'{n} qubits exceed the sparse oracle limit {limit}')
    d = 2 ** n
    H, terms = _sparse_terms(model)

    def forward(x):
        rho = unvectorize(x, d)
        out = -1j * (H @ rho - rho @ H)
        for rate, A, Ad, AdA in terms:
            out = out + rate * (A @ rho @ Ad - 0.5 * (AdA @ rho + rho @ AdA))
        return np.concatenate([vectorize(out), [np.trace(rho)]])

    def adjoint(y):
        X = unvectorize(y[:d * d], d)
        out = 1j * (H @ X - X @ H)
        for rate, A, Ad, AdA in terms:
            out = out + rate * (Ad @ X @ A - 0.5 * (AdA @ X + X @ AdA))
        return vectorize(out + y[d * d] * np.eye(d))

    op = scipy.sparse.linalg.LinearOperator((d * d + 1, d * d), matvec=forward,
                                            rmatvec=adjoint, dtype=complex)
    rhs = np.zeros(d * d + 1, dtype=complex)
    rhs[-1] = 1
    x = np.zeros(d * d, dtype=complex)
    residual = np.inf
    for sweep in range(4):
        step = scipy.sparse.linalg.lsqr(op, rhs - op.matvec(x), atol=1e-14, btol=1e-14,
                                        iter_lim=max_iter or 20 * d * d)[0]
        x = x + step
        rho = _normalize(unvectorize(x, d))
        residual = true_residual(rho, model)
        logging.debug(f'sparse oracle sweep {sweep}: residual {residual:.3g}')
        if residual <= tol:
            return rho
    raise ConvergenceError(f'sparse steady state residual {residual:.3g} above {tol}',
                           residual=residual)


def _steady_state(model):
    if model.n_qubits <= DENSE_LIMIT:
        return exact_ness(model)
    return sparse_steady_state(model)


def ness_seed(model) -> StateVector:
    """eigenvector of the unique steady state with the largest eigenvalue"""
    w, v = np.linalg.eigh(_steady_state(model))
    return StateVector(model.n_qubits, v[:, -1]).canonical_phase()


def seed_overlap(model) -> float:
    """largest eigenvalue of the unique steady state, i.e. the weight of the
    best single pure seed"""
    return float(np.linalg.eigvalsh(_steady_state(model))[-1])
