"""Dense statevector engine standing in for the quantum processor."""
import hashlib
import json
import logging
import numpy as np

from .errors import DimensionError
from .pauli import PauliSum, PauliString


DEDUP_TOL = 1e-10               #: |<a|b>| > 1 - DEDUP_TOL means duplicate
_LABELS = {
    '0': np.array([1, 0], dtype=complex),
    '1': np.array([0, 1], dtype=complex),
    '+': np.array([1, 1], dtype=complex) / np.sqrt(2),
    '-': np.array([1, -1], dtype=complex) / np.sqrt(2),
}


class StateVector:
    """2^n complex amplitudes, site 1 is the most significant bit.

    >>> s = basis_state(2, '10')
    >>> s.n_qubits, int(np.argmax(abs(s.amplitudes)))
    (2, 2)
    """

    def __init__(self, n_qubits: int, amplitudes):
        amplitudes = np.asarray(amplitudes, dtype=complex)
        if amplitudes.shape != (2 ** n_qubits,):
            raise DimensionError(
                f'expects {2 ** n_qubits} amplitudes for {n_qubits} qubits, '
                f'got shape {amplitudes.shape}')
        self.n_qubits = n_qubits
        self.amplitudes = amplitudes

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other) -> complex:
        """<self|other>"""
        _check(self, other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def normalized(self):
        return StateVector(self.n_qubits, self.amplitudes / self.norm())

    def canonical_phase(self, tol: float = 1e-12):
        """rescale so that the first nonzero amplitude is real positive"""
        nonzero = np.flatnonzero(abs(self.amplitudes) > tol)
        if len(nonzero) == 0:
            return self
        a = self.amplitudes[nonzero[0]]
        return StateVector(self.n_qubits, self.amplitudes * (abs(a) / a))

    def to_list(self):
        return [[a.real, a.imag] for a in self.amplitudes]


def _check(a, b):
    if a.n_qubits != b.n_qubits:
        raise DimensionError(
            f'{a.n_qubits} qubit object combined with {b.n_qubits} qubits')


def basis_state(n: int, bits: str) -> StateVector:
    if len(bits) != n or any(b not in '01' for b in bits):
        raise DimensionError(f'bitstring {bits!r} does not describe {n} qubits')
    amplitudes = np.zeros(2 ** n, dtype=complex)
    amplitudes[int(bits, 2)] = 1
    return StateVector(n, amplitudes)


def product_state(labels: str) -> StateVector:
    """tensor product of single-site states from the labels 0, 1, + and -

    >>> s = product_state('+0')
    >>> bool(np.allclose(s.amplitudes, np.array([1, 0, 1, 0]) / np.sqrt(2)))
    True
    """
    if len(labels) == 0 or any(c not in _LABELS for c in labels):
        raise ValueError(f'product state labels {labels!r} must be over 0, 1, +, -')
    amplitudes = np.array([1], dtype=complex)
    for c in labels:
        amplitudes = np.kron(amplitudes, _LABELS[c])
    return StateVector(len(labels), amplitudes)


def uniform_state(n: int) -> StateVector:
    return product_state('+' * n)


def apply_pauli_sum(op: PauliSum, s: StateVector) -> StateVector:
    """op|s>, unnormalized"""
    _check(op, s)
    return StateVector(s.n_qubits, op.apply(s.amplitudes))


def matrix_element(bra: StateVector, op: PauliSum, ket: StateVector) -> complex:
    """<bra|op|ket>"""
    return bra.inner(apply_pauli_sum(op, ket))


class AnsatzSet:
    """ordered ansatz states |chi_i> with the unitary word that made each one.

    ``words[i]`` lists indices into ``unitaries`` applied to the seed in
    order, so states[i] equals the phase-canonicalized
    U_{w[-1]} ... U_{w[0]} |seed>.
    """

    def __init__(self, states, words, unitaries, seed: StateVector,
                 seed_descriptor: dict, K: int = 0, q: int = None,
                 rng_seed: int = None):
        if len(states) != len(words):
            raise ValueError('one word per state is required')
        for s in states:
            _check(seed, s)
        self.states = list(states)
        self.words = [tuple(w) for w in words]
        self.unitaries = list(unitaries)
        self.seed = seed
        self.seed_descriptor = dict(seed_descriptor)
        self.K = K
        self.q = q
        self.rng_seed = rng_seed

    @property
    def n_qubits(self) -> int:
        return self.seed.n_qubits

    def __len__(self):
        return len(self.states)

    def matrix(self):
        """d x L matrix whose columns are the ansatz states"""
        return np.column_stack([s.amplitudes for s in self.states])

    def level_sizes(self):
        sizes = [0] * (self.K + 1)
        for w in self.words:
            sizes[len(w)] += 1
        return sizes

    def fingerprint(self) -> str:
        """short hash identifying the ansatz for report metadata"""
        payload = json.dumps({
            'seed': self.seed_descriptor,
            'unitaries': [str(u) for u in self.unitaries],
            'words': self.words,
        }, sort_keys=True)
        return hashlib.sha1(payload.encode()).hexdigest()[:12]

    def to_json(self):
        return json.dumps({
            'n_qubits': self.n_qubits,
            'seed_descriptor': self.seed_descriptor,
            'seed': self.seed.to_list(),
            'unitaries': [str(u) for u in self.unitaries],
            'words': [list(w) for w in self.words],
            'K': self.K,
            'q': self.q,
            'rng_seed': self.rng_seed,
        })

    @staticmethod
    def from_json(msg):
        """rebuild the states by replaying the recorded words on the seed"""
        data = json.loads(msg)
        n = data['n_qubits']
        seed = StateVector(n, [complex(*a) for a in data['seed']])
        unitaries = [PauliString(u) for u in data['unitaries']]
        states = []
        for w in data['words']:
            amplitudes = seed.amplitudes
            for i in w:
                amplitudes = unitaries[i].apply(amplitudes)
            states.append(StateVector(n, amplitudes).canonical_phase())
        return AnsatzSet(states, data['words'], unitaries, seed,
                         data['seed_descriptor'], data['K'], data['q'],
                         data['rng_seed'])


class _Retained:
    """growing set of states with the overlap dedup rule"""

    def __init__(self, dim):
        self.block = np.zeros((dim, 0), dtype=complex)
        self.states = []
        self.words = []

    def is_new(self, amplitudes, extra=()):
        if self.block.shape[1] and np.max(abs(self.block.conj().T @ amplitudes)) > 1 - DEDUP_TOL:
            return False
        return all(abs(np.vdot(e, amplitudes)) <= 1 - DEDUP_TOL for e in extra)

    def add(self, state: StateVector, word):
        self.states.append(state)
        self.words.append(tuple(word))
        self.block = np.column_stack([self.block, state.amplitudes])


def _unitaries(hamiltonian: PauliSum):
    return [s for _, s in hamiltonian.terms]


def _extensions(frontier, unitaries, retained: _Retained):
    """distinct one-step extensions of the frontier not yet retained"""
    candidates = []
    for parent, word in frontier:
        for i, u in enumerate(unitaries):
            state = StateVector(parent.n_qubits, u.apply(parent.amplitudes))
            state = state.canonical_phase()
            if retained.is_new(state.amplitudes,
                               [c.amplitudes for c, _ in candidates]):
                candidates.append((state, word + (i,)))
    return candidates


def moment_states(hamiltonian: PauliSum, seed: StateVector, K: int,
                  seed_descriptor: dict = None) -> AnsatzSet:
    """cumulative K-moment states: every word of at most K Hamiltonian
    Pauli strings applied to the seed, duplicates (up to phase) removed.

    >>> h = PauliSum([(0.5, 'ZZ'), (1, 'XI'), (1, 'IX')])
    >>> [len(moment_states(h, basis_state(2, '00'), k)) for k in range(3)]
    [1, 3, 4]
    """
    if K < 0:
        raise ValueError(f'K must be nonnegative, got {K}')
    _check(hamiltonian, seed)
    unitaries = _unitaries(hamiltonian)
    seed = seed.normalized()
    retained = _Retained(2 ** seed.n_qubits)
    retained.add(seed.canonical_phase(), ())
    frontier = [(retained.states[0], ())]
    for level in range(1, K + 1):
        frontier = _extensions(frontier, unitaries, retained)
        for state, word in frontier:
            retained.add(state, word)
        logging.debug(f'moment level {level}: {len(frontier)} new states')
        if not frontier:
            logging.debug(f'Krylov space saturated at level {level - 1}')
            break
    return AnsatzSet(retained.states, retained.words, unitaries, seed,
                     seed_descriptor or {'kind': 'vector'}, K)


def moment_states_random(hamiltonian: PauliSum, seed: StateVector, K: int,
                         q: int, rng_seed: int,
                         seed_descriptor: dict = None) -> AnsatzSet:
    """random-subset variant: at every level keep at most q of the distinct
    one-step extensions of the previous level's kept states"""
    if q < 1:
        raise ValueError(f'q must be positive, got {q}')
    if K < 0:
        raise ValueError(f'K must be nonnegative, got {K}')
    _check(hamiltonian, seed)
    rng = np.random.default_rng(rng_seed)
    unitaries = _unitaries(hamiltonian)
    seed = seed.normalized()
    retained = _Retained(2 ** seed.n_qubits)
    retained.add(seed.canonical_phase(), ())
    frontier = [(retained.states[0], ())]
    for level in range(1, K + 1):
        candidates = _extensions(frontier, unitaries, retained)
        if len(candidates) > q:
            picked = np.sort(rng.choice(len(candidates), size=q, replace=False))
            candidates = [candidates[i] for i in picked]
        for state, word in candidates:
            retained.add(state, word)
        logging.debug(f'random moment level {level}: kept {len(candidates)}')
        frontier = candidates
        if not frontier:
            break
    return AnsatzSet(retained.states, retained.words, unitaries, seed,
                     seed_descriptor or {'kind': 'vector'}, K, q, rng_seed)


def make_seed(n: int, descriptor: dict, model=None) -> StateVector:
    """seed state from a descriptor

    kinds: ``bits`` (basis state), ``product`` (labels over 0,1,+,-),
    ``uniform``, ``vector`` (explicit amplitudes) and ``ness`` (largest
    eigenvector of the exact steady state; benchmarking only because it
    consults the oracle).
    """
    kind = descriptor.get('kind')
    if kind == 'bits':
        return basis_state(n, descriptor['bits'])
    if kind == 'product':
        state = product_state(descriptor['labels'])
        if state.n_qubits != n:
            raise DimensionError(
                f'labels {descriptor["labels"]!r} do not describe {n} qubits')
        return state
    if kind == 'uniform':
        return uniform_state(n)
    if kind == 'vector':
        return StateVector(n, [complex(*a) for a in descriptor['amplitudes']])
    if kind == 'ness':
        if model is None:
            raise ValueError('the ness seed needs the model')
        from .oracle import ness_seed
        logging.warning('seed taken from the exact steady state (oracle-assisted)')
        return ness_seed(model)
    raise ValueError(f'unknown seed kind {kind!r}')
