"""Galerkin overlap matrices between ansatz states."""
import concurrent.futures
import json
import logging
import numpy as np

from .errors import DimensionError
from .pauli import PauliSum
from .statevector import AnsatzSet


def hermitize(m):
    """mirror the upper triangle so that the result is exactly Hermitian

    >>> h = hermitize(np.array([[1 + 1j, 2], [5, 3]]))
    >>> h.tolist()
    [[(1+0j), (2+0j)], [(2+0j), (3+0j)]]
    """
    m = np.asarray(m, dtype=complex)
    upper = np.triu(m, 1)
    return upper + upper.conj().T + np.diag(np.diag(m).real).astype(complex)


class ObservableMatrix:
    """O~_ij = <chi_i|O|chi_j> for a named observable"""

    def __init__(self, name: str, matrix, hermitian: bool = True):
        self.name = name
        self.matrix = np.asarray(matrix, dtype=complex)
        self.hermitian = hermitian

    def __repr__(self):
        return f'ObservableMatrix({self.name!r}, L={self.matrix.shape[0]})'


class OverlapSet:
    """E, D, R_n and F_n for one (model, ansatz) pair.

    ``metadata`` records the ansatz fingerprint, model label, and the shot
    count (None for exact assembly).
    """

    def __init__(self, E, D, R, F, rates, metadata=None):
        self.E = np.asarray(E, dtype=complex)
        self.D = np.asarray(D, dtype=complex)
        self.R = [np.asarray(r, dtype=complex) for r in R]
        self.F = [np.asarray(f, dtype=complex) for f in F]
        self.rates = [float(g) for g in rates]
        self.metadata = dict(metadata or {})
        L = self.E.shape[0]
        shapes = [self.E.shape, self.D.shape] + [m.shape for m in self.R + self.F]
        if any(s != (L, L) for s in shapes):
            raise DimensionError(f'overlap matrices must all be {L}x{L}, got {shapes}')
        if not len(self.R) == len(self.F) == len(self.rates):
            raise DimensionError('one R, F and rate per dissipator is required')

    @property
    def size(self) -> int:
        return self.E.shape[0]

    @property
    def noisy(self) -> bool:
        return self.metadata.get('shots') is not None

    def save(self, path):
        """write an npz archive; metadata is stored as a JSON string"""
        L = self.size
        np.savez(path, E=self.E, D=self.D,
                 R=np.array(self.R).reshape(len(self.R), L, L),
                 F=np.array(self.F).reshape(len(self.F), L, L),
                 rates=np.array(self.rates, dtype=float),
                 metadata=np.array(json.dumps(self.metadata)))

    @staticmethod
    def load(path):
        with np.load(path) as data:
            return OverlapSet(data['E'], data['D'], list(data['R']),
                              list(data['F']), list(data['rates']),
                              json.loads(str(data['metadata'])))


def _check_ansatz(n_qubits, ansatz: AnsatzSet):
    if n_qubits != ansatz.n_qubits:
        raise DimensionError(
            f'{n_qubits} qubit operator used with a {ansatz.n_qubits} qubit ansatz')


def _dissipator_blocks(X, jump: PauliSum):
    AX = jump.apply(X)
    return X.conj().T @ AX, hermitize(AX.conj().T @ AX)


def assemble(model, ansatz: AnsatzSet, max_workers: int = None) -> OverlapSet:
    """exact overlaps from the statevector engine.

    Dissipator blocks are independent and are computed on a thread pool.
    """
    _check_ansatz(model.n_qubits, ansatz)
    X = ansatz.matrix()
    E = hermitize(X.conj().T @ X)
    D = hermitize(X.conj().T @ model.hamiltonian.apply(X))
    with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as pool:
        blocks = list(pool.map(lambda jump: _dissipator_blocks(X, jump), model.jumps))
    R = [r for r, _ in blocks]
    F = [f for _, f in blocks]
    logging.debug(f'assembled overlaps L={len(ansatz)} with {len(R)} dissipators')
    metadata = {
        'ansatz': ansatz.fingerprint(),
        'model': model.label,
        'shots': None,
    }
    return OverlapSet(E, D, R, F, model.rates, metadata)


def observable_matrix(op: PauliSum, ansatz: AnsatzSet, name: str = None) -> ObservableMatrix:
    """matrix of op between ansatz states

    >>> from ness_py.statevector import basis_state, moment_states
    >>> from ness_py.pauli import single_site
    >>> a = moment_states(PauliSum([(1, 'XI')]), basis_state(2, '00'), 1)
    >>> observable_matrix(single_site(2, 1, 'Z'), a).matrix.real.tolist()
    [[1.0, 0.0], [0.0, -1.0]]
    """
    _check_ansatz(op.n_qubits, ansatz)
    X = ansatz.matrix()
    m = X.conj().T @ op.apply(X)
    hermitian = op.is_hermitian()
    if hermitian:
        m = hermitize(m)
    return ObservableMatrix(name or str(op), m, hermitian)


def add_shot_noise(overlaps: OverlapSet, shots: int, rng_seed: int) -> OverlapSet:
    """emulate finite-shot estimation with Gaussian noise of std 1/sqrt(shots)
    on the real and imaginary part of every estimated entry"""
    if shots < 1:
        raise ValueError(f'shots must be positive, got {shots}')
    rng = np.random.default_rng(rng_seed)
    sigma = 1 / np.sqrt(shots)
    L = overlaps.size

    def noise():
        return sigma * (rng.standard_normal((L, L)) + 1j * rng.standard_normal((L, L)))

    E = hermitize(overlaps.E + noise())
    D = hermitize(overlaps.D + noise())
    R = [r + noise() for r in overlaps.R]
    F = [hermitize(f + noise()) for f in overlaps.F]
    metadata = dict(overlaps.metadata, shots=int(shots), noise_seed=rng_seed)
    logging.info(f'shot noise std {sigma:.3g} added to overlaps')
    return OverlapSet(E, D, R, F, overlaps.rates, metadata)


def galerkin_residual(overlaps: OverlapSet, rates, beta):
    """-i(D b E - E b D) + sum_n g_n (R_n b R_n^H - F_n b E / 2 - E b F_n / 2),
    the matrix <chi_i|L[rho]|chi_j> for rho = sum_ij b_ij |chi_i><chi_j|"""
    E, D = overlaps.E, overlaps.D
    out = -1j * (D @ beta @ E - E @ beta @ D)
    for gamma, R, F in zip(rates, overlaps.R, overlaps.F):
        out += gamma * (R @ beta @ R.conj().T - 0.5 * (F @ beta @ E + E @ beta @ F))
    return out


def galerkin_adjoint(overlaps: OverlapSet, rates, Y):
    """adjoint of galerkin_residual under <A, B> = Re Tr(A^H B)"""
    E, D = overlaps.E, overlaps.D
    out = 1j * (D @ Y @ E - E @ Y @ D)
    for gamma, R, F in zip(rates, overlaps.R, overlaps.F):
        out += gamma * (R.conj().T @ Y @ R - 0.5 * (F @ Y @ E + E @ Y @ F))
    return out


def expectation(beta, observable) -> float:
    """Tr(beta O~); real part for Hermitian observables"""
    matrix = observable.matrix if isinstance(observable, ObservableMatrix) else observable
    value = np.trace(beta @ matrix)
    if isinstance(observable, ObservableMatrix) and not observable.hermitian:
        return complex(value)
    return float(value.real)
