"""Several steady states from a strong symmetry U.

Two routes are offered: linear sector constraints added to the feasibility
problem, and the twirl / Vandermonde pipeline which takes any feasible
solution apart into one physical steady state per eigenvalue sector of U.
"""
import collections
import logging
import numpy as np

from .errors import SymmetryError
from .overlaps import assemble, hermitize, observable_matrix
from .pauli import PauliSum, exp_pauli_generator, identity
from .sdp import FeasibilityProblem, SolverOptions, solve
from . import oracle


TRACE_FLOOR = 1e-8              #: |Tr| at or below this marks a sector as missing
EIG_TOL = 1e-8


def _distinct(values, tol: float = EIG_TOL) -> bool:
    return all(abs(a - b) > tol for i, a in enumerate(values) for b in values[i + 1:])


class SymmetrySpec:
    """unitary U with its distinct eigenvalues, optionally a Pauli expansion
    of U and a generator G with U = e^{i phi G}.

    >>> spec = SymmetrySpec.from_generator(PauliSum([(1, 'ZI'), (1, 'IZ')]), np.pi / 3)
    >>> spec.n_sectors, spec.labels
    (3, [2.0, 0.0, -2.0])
    """

    def __init__(self, operator, eigenvalues, pauli: PauliSum = None,
                 generator: PauliSum = None, phi: float = None, labels=None,
                 name: str = ''):
        operator = np.asarray(operator, dtype=complex)
        eigenvalues = [complex(z) for z in eigenvalues]
        d = operator.shape[0]
        if not np.allclose(operator @ operator.conj().T, np.eye(d), atol=1e-10):
            raise SymmetryError(f'symmetry {name!r} is not unitary')
        if not _distinct(eigenvalues):
            raise SymmetryError(f'eigenvalues {eigenvalues} of {name!r} are not distinct')
        spectrum = np.linalg.eigvals(operator)
        gaps = [min(abs(z - e) for e in eigenvalues) for z in spectrum]
        if max(gaps) > 1e-8:
            raise SymmetryError(f'listed eigenvalues of {name!r} miss part of the spectrum')
        if any(min(abs(z - e) for z in spectrum) > 1e-8 for e in eigenvalues):
            raise SymmetryError(f'a listed eigenvalue of {name!r} is not in the spectrum')
        self.operator = operator
        self.eigenvalues = eigenvalues
        self.pauli = pauli
        self.generator = generator
        self.phi = phi
        self.labels = list(labels) if labels is not None else eigenvalues
        self.name = name
        self._pauli_powers = {}

    @property
    def n_sectors(self) -> int:
        return len(self.eigenvalues)

    @property
    def n_qubits(self) -> int:
        return int(np.log2(self.operator.shape[0]))

    @staticmethod
    def from_generator(generator: PauliSum, phi: float, name: str = ''):
        """U = e^{i phi G}; sectors ordered by decreasing eigenvalue of G"""
        pauli = exp_pauli_generator(generator, phi)
        g = np.sort(np.linalg.eigvalsh(generator.to_dense()))[::-1]
        labels = []
        for value in g:
            if not labels or labels[-1] - value > EIG_TOL:
                labels.append(float(np.round(value, 10)) + 0.0)
        eigenvalues = [np.exp(1j * phi * value) for value in labels]
        if not _distinct(eigenvalues):
            raise SymmetryError(f'phi={phi} maps distinct sectors of {name!r} '
                                'to the same eigenvalue')
        return SymmetrySpec(pauli.to_dense(), eigenvalues, pauli, generator, phi,
                            labels, name)

    @staticmethod
    def from_operator(pauli: PauliSum, eigenvalues, name: str = ''):
        return SymmetrySpec(pauli.to_dense(), eigenvalues, pauli, name=name)

    @staticmethod
    def trivial(n: int):
        """U = I, a single sector"""
        return SymmetrySpec.from_operator(identity(n), [1], 'identity')

    @staticmethod
    def from_model(model, name: str = None):
        """build from the symmetries section of a model"""
        if not model.symmetries:
            raise SymmetryError(f'model {model.label!r} declares no symmetry')
        if name is None:
            name = next(iter(model.symmetries))
        if name not in model.symmetries:
            raise SymmetryError(f'model has no symmetry {name!r}, '
                                f'choose from {sorted(model.symmetries)}')
        sym = model.symmetries[name]
        if 'operator' in sym:
            if 'eigenvalues' not in sym:
                raise SymmetryError(f'symmetry {name!r} lists no eigenvalues')
            return SymmetrySpec.from_operator(sym['operator'], sym['eigenvalues'], name)
        if 'generator' in sym and 'phi' in sym:
            return SymmetrySpec.from_generator(sym['generator'], sym['phi'], name)
        raise SymmetryError(f'symmetry {name!r} needs an operator or a generator and phi')

    def check_strong(self, model, atol: float = 1e-10):
        """U commutes with H and with every jump operator"""
        U = self.operator
        ops = [('hamiltonian', model.hamiltonian)]
        ops += [(f'jump {k}', jump) for k, jump in enumerate(model.jumps)]
        for label, op in ops:
            m = op.to_dense()
            if not np.allclose(U @ m, m @ U, atol=atol):
                raise SymmetryError(f'{self.name!r} does not commute with the {label}')

    def power(self, k: int):
        """dense U^k, negative k meaning powers of U^H"""
        if k >= 0:
            return np.linalg.matrix_power(self.operator, k)
        return np.linalg.matrix_power(self.operator.conj().T, -k)

    def pauli_power(self, k: int) -> PauliSum:
        if k not in self._pauli_powers:
            if self.generator is not None:
                self._pauli_powers[k] = exp_pauli_generator(self.generator, k * self.phi)
            elif self.pauli is None:
                raise SymmetryError(f'symmetry {self.name!r} has no Pauli expansion')
            elif k >= 0:
                self._pauli_powers[k] = self.pauli.power(k)
            else:
                self._pauli_powers[k] = self.pauli.dagger().power(-k)
        return self._pauli_powers[k]

    def projector(self, alpha: int):
        """spectral projector onto sector alpha by Lagrange interpolation"""
        d = self.operator.shape[0]
        P = np.eye(d, dtype=complex)
        for beta, z in enumerate(self.eigenvalues):
            if beta != alpha:
                P = P @ (self.operator - z * np.eye(d)) / (self.eigenvalues[alpha] - z)
        return P

    def block(self, rho, alpha: int, beta: int):
        return self.projector(alpha) @ rho @ self.projector(beta)


def subspace(projector, tol: float = 1e-8):
    """orthonormal columns spanning the range of a Hermitian projector"""
    w, v = np.linalg.eigh(hermitize(projector))
    return v[:, w > 1 - tol]


def qm_expectation(beta, ansatz, left: PauliSum, observable: PauliSum,
                   right: PauliSum = None) -> complex:
    """Tr(left rho right O) for rho = sum beta_ij |chi_i><chi_j|, from
    <chi_i|right O left|chi_j> matrices only"""
    n = observable.n_qubits
    op = (right if right is not None else identity(n)) @ observable @ left
    Q = observable_matrix(op, ansatz).matrix
    return complex(np.trace(beta @ Q))


class RhoCombination:
    """sum_{k,k'} c_{kk'} U^k rho1 U^-k', kept both as the weights ``terms``
    and as the dense matrix ``dense``"""

    def __init__(self, spec: SymmetrySpec, terms, dense, rho1,
                 beta=None, ansatz=None):
        self.spec = spec
        self.terms = {key: complex(c) for key, c in terms.items() if abs(c) > 1e-15}
        self.dense = np.asarray(dense, dtype=complex)
        self.rho1 = rho1
        self.beta = beta
        self.ansatz = ansatz

    @staticmethod
    def from_beta(beta, ansatz, spec: SymmetrySpec):
        X = ansatz.matrix()
        rho1 = hermitize(X @ beta @ X.conj().T)
        return RhoCombination(spec, {(0, 0): 1}, rho1, rho1, beta, ansatz)

    @staticmethod
    def from_dense(rho1, spec: SymmetrySpec):
        rho1 = np.asarray(rho1, dtype=complex)
        return RhoCombination(spec, {(0, 0): 1}, rho1, rho1)

    def _derived(self, terms, dense):
        return RhoCombination(self.spec, terms, dense, self.rho1, self.beta, self.ansatz)

    def expand(self):
        """evaluate the weights explicitly; equals ``dense``"""
        out = np.zeros_like(self.rho1)
        for (k, kk), c in self.terms.items():
            out += c * self.spec.power(k) @ self.rho1 @ self.spec.power(-kk)
        return out

    def conjugated(self):
        """U rho U^H"""
        U = self.spec.operator
        return self._derived({(k + 1, kk + 1): c for (k, kk), c in self.terms.items()},
                             U @ self.dense @ U.conj().T)

    def left_multiplied(self, j: int):
        """U^j rho"""
        return self._derived({(k + j, kk): c for (k, kk), c in self.terms.items()},
                             self.spec.power(j) @ self.dense)

    def combine(self, a: complex, other, b: complex):
        """a self + b other"""
        terms = collections.defaultdict(complex)
        for key, c in self.terms.items():
            terms[key] += a * c
        for key, c in other.terms.items():
            terms[key] += b * c
        return self._derived(terms, a * self.dense + b * other.dense)

    def expectation(self, observable: PauliSum) -> complex:
        """Tr(rho O); from beta and ansatz matrices when available"""
        if self.beta is None:
            return complex(np.trace(self.dense @ observable.to_dense()))
        return sum(c * qm_expectation(self.beta, self.ansatz, self.spec.pauli_power(k),
                                      observable, self.spec.pauli_power(-kk))
                   for (k, kk), c in self.terms.items())

    def trace(self) -> complex:
        return self.expectation(identity(self.spec.n_qubits))


def sector_constraint(generator: PauliSum, m: float, ansatz):
    """(N~, m) meaning Tr(beta N~) = m"""
    if not generator.is_hermitian():
        raise ValueError('sector generator must be Hermitian')
    return observable_matrix(generator, ansatz, name=f'{generator}'), float(m)


def sector_constraints(generator: PauliSum, m: float, ansatz):
    """mean and variance pinning, Tr(beta N~) = m and Tr(beta N~^2) = m^2,
    which confine a PSD solution to the m eigenspace"""
    first = sector_constraint(generator, m, ansatz)
    square = observable_matrix(generator @ generator, ansatz, name=f'({generator})^2')
    return [first, (square, float(m) ** 2)]


def twirl_eliminate(rc: RhoCombination, spec: SymmetrySpec, pair) -> RhoCombination:
    """rho - (rho - U rho U^H) / (1 - l_m conj(l_n)), which removes the
    (m, n) block and leaves diagonal blocks untouched"""
    m, n = pair
    if m == n:
        raise SymmetryError(f'twirl needs two distinct sectors, got ({m}, {n})')
    denom = 1 - spec.eigenvalues[m] * np.conj(spec.eigenvalues[n])
    if abs(denom) < 1e-12:
        raise SymmetryError(f'sectors {m} and {n} share the eigenvalue')
    return rc.combine(1 - 1 / denom, rc.conjugated(), 1 / denom)


def sector_pairs(n_sectors: int):
    """ordered off-diagonal pairs in lexicographic order"""
    return [(m, n) for m in range(n_sectors) for n in range(n_sectors) if m != n]


def eliminate_all(rc: RhoCombination, spec: SymmetrySpec, order=None) -> RhoCombination:
    for pair in (order if order is not None else sector_pairs(spec.n_sectors)):
        rc = twirl_eliminate(rc, spec, pair)
    U = spec.operator
    leftover = np.linalg.norm(rc.dense - U @ rc.dense @ U.conj().T)
    logging.debug(f'off-diagonal remainder after twirl {leftover:.3g}')
    return rc


SectorState = collections.namedtuple(
    'SectorState',
    ['index', 'eigenvalue', 'label', 'weight', 'state', 'missing', 'residual',
     'psd_violation'])


def vandermonde_extract(rho_phys: RhoCombination, spec: SymmetrySpec, model=None,
                        trace_floor: float = TRACE_FLOOR):
    """split a block-diagonal combination into c_a rho_aa by inverting
    V_ka = l_a^k against U^k rho_phys, k = 0 .. n_U - 1"""
    n_u = spec.n_sectors
    lam = np.array(spec.eigenvalues)
    V = lam[None, :] ** np.arange(n_u)[:, None]
    logging.debug(f'Vandermonde condition number {np.linalg.cond(V):.3g}')
    Vinv = np.linalg.inv(V)
    powers = [rho_phys.left_multiplied(k) for k in range(n_u)]
    sectors = []
    for alpha in range(n_u):
        comp = powers[0].combine(Vinv[alpha, 0], powers[0], 0)
        for k in range(1, n_u):
            comp = comp.combine(1, powers[k], Vinv[alpha, k])
        weight = comp.trace().real
        if abs(weight) <= trace_floor:
            logging.warning(
                f'sector {spec.labels[alpha]} has trace weight {weight:.2g}; '
                're-run the feasibility program from a random initial point')
            sectors.append(SectorState(alpha, spec.eigenvalues[alpha], spec.labels[alpha],
                                       weight, None, True, None, None))
            continue
        state = hermitize(comp.dense / weight)
        psd = min(0.0, float(np.linalg.eigvalsh(state)[0]))
        residual = oracle.true_residual(state, model) if model is not None else None
        sectors.append(SectorState(alpha, spec.eigenvalues[alpha], spec.labels[alpha],
                                   weight, state, False, residual, psd))
    return sectors


def extract_sectors(model, spec: SymmetrySpec, ansatz, options: SolverOptions = None,
                    constraints=(), order=None):
    """solve, twirl every off-diagonal pair, then Vandermonde;
    returns (BetaMatrix, list of SectorState)"""
    spec.check_strong(model)
    options = options or SolverOptions()
    problem = FeasibilityProblem(assemble(model, ansatz), extra_constraints=constraints,
                                 options=options)
    beta = solve(problem, options)
    rc = RhoCombination.from_beta(beta.beta, ansatz, spec)
    rc = eliminate_all(rc, spec, order)
    return beta, vandermonde_extract(rc, spec, model)


def extract_all_ness(model, spec: SymmetrySpec, ansatz, options: SolverOptions = None,
                     constraints=(), order=None):
    """physical steady states recovered from one feasible solution"""
    _, sectors = extract_sectors(model, spec, ansatz, options, constraints, order)
    found = [s for s in sectors if not s.missing]
    logging.info(f'recovered {len(found)} of {len(sectors)} sectors')
    return found
