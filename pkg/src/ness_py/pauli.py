import functools
import json
import numpy as np
import scipy.sparse

from .errors import DimensionError, DenseLimitError


DENSE_LIMIT = 12                #: default qubit limit for to_dense
PRUNE_TOL = 1e-14               #: coefficients below this magnitude are dropped

_SINGLE = {
    'I': np.array([[1, 0], [0, 1]], dtype=complex),
    'X': np.array([[0, 1], [1, 0]], dtype=complex),
    'Y': np.array([[0, -1j], [1j, 0]], dtype=complex),
    'Z': np.array([[1, 0], [0, -1]], dtype=complex),
}


def _site_table():
    table = {}
    cyclic = {('X', 'Y'): 'Z', ('Y', 'Z'): 'X', ('Z', 'X'): 'Y'}
    for a in 'IXYZ':
        for b in 'IXYZ':
            if a == 'I':
                table[a, b] = (1, b)
            elif b == 'I':
                table[a, b] = (1, a)
            elif a == b:
                table[a, b] = (1, 'I')
            elif (a, b) in cyclic:
                table[a, b] = (1j, cyclic[a, b])
            else:
                table[a, b] = (-1j, cyclic[b, a])
    return table


_SITE_PRODUCT = _site_table()   #: (a, b) -> (phase, c) with a.b = phase c


class PauliString:
    """Tensor product of single-qubit Paulis, site 1 is the leftmost letter.

    >>> p = PauliString('XZ')
    >>> p.n_qubits
    2
    >>> phase, q = p.mul(PauliString('ZZ'))
    >>> phase == -1j, q
    (True, PauliString('YI'))
    >>> PauliString('X') == PauliString('X')
    True
    """

    def __init__(self, codes: str):
        if not isinstance(codes, str) or len(codes) == 0:
            raise ValueError(f'invalid Pauli word {codes!r}')
        if any(c not in 'IXYZ' for c in codes):
            raise ValueError(f'Pauli word {codes!r} must be over I, X, Y, Z')
        self._codes = codes

    @property
    def codes(self) -> str:
        return self._codes

    @property
    def n_qubits(self) -> int:
        return len(self._codes)

    def __eq__(self, other):
        return isinstance(other, PauliString) and self._codes == other._codes

    def __hash__(self):
        return hash(self._codes)

    def __repr__(self):
        return f'PauliString({self._codes!r})'

    def __str__(self):
        return self._codes

    @staticmethod
    def identity(n: int):
        """I...I on n qubits

        >>> PauliString.identity(3)
        PauliString('III')
        """
        return PauliString('I' * n)

    @staticmethod
    def single(n: int, site: int, code: str):
        """code on site (1-based), identity elsewhere

        >>> PauliString.single(3, 2, 'X')
        PauliString('IXI')
        """
        if not 1 <= site <= n:
            raise ValueError(f'site {site} out of range for {n} qubits')
        return PauliString('I' * (site - 1) + code + 'I' * (n - site))

    def mul(self, other):
        """return (phase, string) with self.other = phase string"""
        if self.n_qubits != other.n_qubits:
            raise DimensionError(
                f'cannot multiply {self.n_qubits} and {other.n_qubits} qubit strings')
        phase = 1
        codes = []
        for a, b in zip(self._codes, other._codes):
            p, c = _SITE_PRODUCT[a, b]
            phase *= p
            codes.append(c)
        return complex(phase), PauliString(''.join(codes))

    def commutes(self, other) -> bool:
        """True when self and other commute

        >>> PauliString('XX').commutes(PauliString('ZZ'))
        True
        >>> PauliString('XI').commutes(PauliString('ZI'))
        False
        """
        anti = sum(1 for a, b in zip(self._codes, other._codes)
                   if a != 'I' and b != 'I' and a != b)
        return anti % 2 == 0

    def _masks(self):
        n = self.n_qubits
        x_mask = z_mask = 0
        for j, c in enumerate(self._codes):
            bit = 1 << (n - 1 - j)
            if c in 'XY':
                x_mask |= bit
            if c in 'ZY':
                z_mask |= bit
        return x_mask, z_mask

    @functools.cached_property
    def _action(self):
        """permutation and phases such that P|b> = phase[b] |perm[b]>"""
        n = self.n_qubits
        x_mask, z_mask = self._masks()
        idx = np.arange(2 ** n)
        parity = np.zeros(2 ** n, dtype=np.int64)
        for pos in range(n):
            if z_mask >> pos & 1:
                parity ^= (idx >> pos) & 1
        n_y = self._codes.count('Y')
        phases = (1j ** n_y) * (1 - 2 * parity)
        return idx ^ x_mask, phases

    def apply(self, amplitudes):
        """apply to a vector (or to the columns of a matrix) of amplitudes

        >>> PauliString('X').apply(np.array([1, 0]))
        array([0.+0.j, 1.+0.j])
        """
        amplitudes = np.asarray(amplitudes)
        if amplitudes.shape[0] != 2 ** self.n_qubits:
            raise DimensionError(
                f'{self.n_qubits} qubit string applied to '
                f'length {amplitudes.shape[0]} amplitudes')
        perm, phases = self._action
        if amplitudes.ndim == 2:
            phases = phases[:, None]
        # perm is an involution, so gathering equals scattering
        return (phases * amplitudes)[perm]

    def to_dense(self, limit: int = DENSE_LIMIT):
        if self.n_qubits > limit:
            raise DenseLimitError(
                f'{self.n_qubits} qubits exceed dense limit {limit}')
        return functools.reduce(np.kron, [_SINGLE[c] for c in self._codes])

    def to_sparse(self):
        perm, phases = self._action
        d = 2 ** self.n_qubits
        return scipy.sparse.csr_matrix(
            (phases.astype(complex), (perm, np.arange(d))), shape=(d, d))


def _as_string(s) -> PauliString:
    return s if isinstance(s, PauliString) else PauliString(s)


class PauliSum:
    """Complex linear combination of PauliStrings in canonical form.

    Terms keep the order in which their strings first appeared; duplicates
    are merged and coefficients below PRUNE_TOL are dropped.

    >>> h = PauliSum([(0.5, 'ZZ'), (1, 'XI'), (1, 'IX')])
    >>> len(h)
    3
    >>> (PauliSum([(1, 'X'), (1, 'Z')]) @ PauliSum([(1, 'X'), (1, 'Z')]))
    PauliSum([(2, 'I')])
    """

    def __init__(self, terms=(), n_qubits: int = None):
        coeffs = {}
        for coeff, string in terms:
            string = _as_string(string)
            if n_qubits is None:
                n_qubits = string.n_qubits
            elif string.n_qubits != n_qubits:
                raise DimensionError(
                    f'term {string} does not act on {n_qubits} qubits')
            coeffs[string] = coeffs.get(string, 0) + complex(coeff)
        if n_qubits is None:
            raise ValueError('n_qubits is required for an empty PauliSum')
        self._n = n_qubits
        self._coeffs = {s: c for s, c in coeffs.items() if abs(c) >= PRUNE_TOL}

    @property
    def n_qubits(self) -> int:
        return self._n

    @property
    def terms(self):
        """list of (coeff, PauliString)"""
        return [(c, s) for s, c in self._coeffs.items()]

    @property
    def strings(self):
        return list(self._coeffs)

    def coeff(self, string) -> complex:
        return self._coeffs.get(_as_string(string), 0j)

    def __len__(self):
        return len(self._coeffs)

    def __iter__(self):
        return iter(self.terms)

    def __eq__(self, other):
        return (isinstance(other, PauliSum) and self._n == other._n
                and self._coeffs == other._coeffs)

    def __repr__(self):
        def fmt(c):
            if c.imag == 0:
                return f'{c.real:g}'
            return f'{c:g}'
        body = ', '.join(f'({fmt(c)}, {str(s)!r})' for c, s in self.terms)
        return f'PauliSum([{body}])'

    def allclose(self, other, atol: float = 1e-12) -> bool:
        strings = set(self._coeffs) | set(other._coeffs)
        return self._n == other._n and all(
            abs(self.coeff(s) - other.coeff(s)) <= atol for s in strings)

    def _check(self, other):
        if self._n != other.n_qubits:
            raise DimensionError(
                f'{self._n} qubit sum combined with {other.n_qubits} qubits')

    def __add__(self, other):
        self._check(other)
        return PauliSum(self.terms + other.terms, self._n)

    def __sub__(self, other):
        return self + (-1) * other

    def __neg__(self):
        return (-1) * self

    def __mul__(self, scalar):
        if isinstance(scalar, (PauliSum, PauliString)):
            return NotImplemented
        return PauliSum([(scalar * c, s) for c, s in self.terms], self._n)

    __rmul__ = __mul__

    def __matmul__(self, other):
        self._check(other)
        terms = []
        for ca, sa in self.terms:
            for cb, sb in other.terms:
                phase, s = sa.mul(sb)
                terms.append((ca * cb * phase, s))
        return PauliSum(terms, self._n)

    def dagger(self):
        return PauliSum([(c.conjugate(), s) for c, s in self.terms], self._n)

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        """every canonical coefficient is real

        >>> PauliSum([(1j, 'Z')]).is_hermitian()
        False
        """
        return all(abs(c.imag) <= atol for c, _ in self.terms)

    def power(self, k: int):
        if k < 0:
            raise ValueError('negative power of a PauliSum')
        result = identity(self._n)
        for _ in range(k):
            result = result @ self
        return result

    def apply(self, amplitudes):
        amplitudes = np.asarray(amplitudes, dtype=complex)
        if amplitudes.shape[0] != 2 ** self._n:
            raise DimensionError(
                f'{self._n} qubit operator applied to '
                f'length {amplitudes.shape[0]} amplitudes')
        out = np.zeros_like(amplitudes)
        for c, s in self.terms:
            out += c * s.apply(amplitudes)
        return out

    def to_dense(self, limit: int = DENSE_LIMIT):
        if self._n > limit:
            raise DenseLimitError(f'{self._n} qubits exceed dense limit {limit}')
        d = 2 ** self._n
        out = np.zeros((d, d), dtype=complex)
        for c, s in self.terms:
            out += c * s.to_dense(limit)
        return out

    def to_sparse(self):
        d = 2 ** self._n
        out = scipy.sparse.csr_matrix((d, d), dtype=complex)
        for c, s in self.terms:
            out = out + c * s.to_sparse()
        return out

    def to_list(self):
        return [{'coeff': [c.real, c.imag], 'pauli': str(s)}
                for c, s in self.terms]

    @staticmethod
    def from_list(data, n_qubits: int = None):
        try:
            terms = [(complex(*t['coeff']), t['pauli']) for t in data]
        except (KeyError, TypeError) as e:
            raise ValueError(f'malformed Pauli term list: {e}') from e
        return PauliSum(terms, n_qubits)

    def to_json(self):
        return json.dumps(self.to_list())

    @staticmethod
    def from_json(msg, n_qubits: int = None):
        return PauliSum.from_list(json.loads(msg), n_qubits)


def identity(n: int, coeff: complex = 1):
    return PauliSum([(coeff, PauliString.identity(n))], n)


def single_site(n: int, site: int, code: str, coeff: complex = 1):
    """coeff times code acting on site (1-based)

    >>> single_site(2, 1, 'Z')
    PauliSum([(1, 'ZI')])
    """
    return PauliSum([(coeff, PauliString.single(n, site, code))], n)


def lowering(n: int, site: int):
    """sigma_- = (X - iY)/2, maps |0> to |1>"""
    return single_site(n, site, 'X', 0.5) + single_site(n, site, 'Y', -0.5j)


def raising(n: int, site: int):
    """sigma_+ = (X + iY)/2, maps |1> to |0>"""
    return single_site(n, site, 'X', 0.5) + single_site(n, site, 'Y', 0.5j)


def pauli_mul(a: PauliString, b: PauliString):
    return a.mul(b)


def paulisum_mul(a: PauliSum, b: PauliSum) -> PauliSum:
    return a @ b


def paulisum_dagger(a: PauliSum) -> PauliSum:
    return a.dagger()


def to_dense(a, limit: int = DENSE_LIMIT):
    return a.to_dense(limit)


def commutator(a: PauliSum, b: PauliSum) -> PauliSum:
    return a @ b - b @ a


def exp_pauli_generator(generator: PauliSum, phi: float) -> PauliSum:
    """e^{i phi G} for a Hermitian G whose strings commute pairwise.

    Each commuting term contributes cos(phi c) I + i sin(phi c) P.

    >>> u = exp_pauli_generator(single_site(1, 1, 'Z'), np.pi)
    >>> u.allclose(identity(1, -1))
    True
    """
    if not generator.is_hermitian():
        raise ValueError('generator must be Hermitian')
    strings = generator.strings
    for i, a in enumerate(strings):
        for b in strings[i + 1:]:
            if not a.commutes(b):
                raise ValueError(f'generator terms {a} and {b} do not commute')
    n = generator.n_qubits
    result = identity(n)
    for c, s in generator.terms:
        theta = phi * c.real
        factor = PauliSum([(np.cos(theta), PauliString.identity(n)),
                           (1j * np.sin(theta), s)], n)
        result = result @ factor
    return result
