import collections
import json
import math
import numpy as np

from .pauli import (PauliSum, PauliString, single_site, identity,
                    lowering, raising)


Violation = collections.namedtuple('Violation', ['kind', 'detail'])


class OpenSystemModel:
    """Lindblad model: Hamiltonian, (rate, jump) dissipators and optional
    strong symmetries.

    ``symmetries`` maps a name to a dict holding any of ``generator``
    (Hermitian PauliSum G with U = e^{i phi G}), ``phi``, ``operator``
    (Pauli expansion of U) and ``eigenvalues`` (distinct eigenvalues of U).

    >>> m = tfim_chain(2, 1.0, 1.0)
    >>> m.n_qubits, len(m.hamiltonian), len(m.dissipators)
    (2, 3, 4)
    """

    def __init__(self, n_qubits: int, hamiltonian: PauliSum, dissipators,
                 label: str = '', symmetries=None, builder=None):
        if n_qubits < 1:
            raise ValueError(f'n_qubits must be positive, got {n_qubits}')
        self.n_qubits = n_qubits
        self.hamiltonian = hamiltonian
        self.dissipators = [(float(rate), jump) for rate, jump in dissipators]
        self.label = label
        self.symmetries = dict(symmetries or {})
        self.builder = builder

    @property
    def rates(self):
        return [rate for rate, _ in self.dissipators]

    @property
    def jumps(self):
        return [jump for _, jump in self.dissipators]

    def to_json(self):
        data = {
            'n_qubits': self.n_qubits,
            'label': self.label,
            'hamiltonian': self.hamiltonian.to_list(),
            'dissipators': [{'rate': rate, 'operator': jump.to_list()}
                            for rate, jump in self.dissipators],
        }
        if self.builder:
            data['builder'] = self.builder
        if self.symmetries:
            data['symmetries'] = {name: _symmetry_to_dict(sym)
                                  for name, sym in self.symmetries.items()}
        return json.dumps(data, indent=1)

    @staticmethod
    def from_json(msg):
        data = json.loads(msg)
        n = data['n_qubits']
        hamiltonian = PauliSum.from_list(data['hamiltonian'], n)
        dissipators = [(d['rate'], PauliSum.from_list(d['operator'], n))
                       for d in data.get('dissipators', [])]
        symmetries = {name: _symmetry_from_dict(sym, n)
                      for name, sym in data.get('symmetries', {}).items()}
        return OpenSystemModel(n, hamiltonian, dissipators,
                               data.get('label', ''), symmetries,
                               data.get('builder'))


def _symmetry_to_dict(sym):
    out = {}
    for key, value in sym.items():
        if isinstance(value, PauliSum):
            out[key] = value.to_list()
        elif key == 'eigenvalues':
            out[key] = [[complex(v).real, complex(v).imag] for v in value]
        else:
            out[key] = value
    return out


def _symmetry_from_dict(data, n):
    out = {}
    for key, value in data.items():
        if key in ('generator', 'operator'):
            out[key] = PauliSum.from_list(value, n)
        elif key == 'eigenvalues':
            out[key] = [complex(*v) if isinstance(v, list) else complex(v)
                        for v in value]
        else:
            out[key] = value
    return out


def validate(model: OpenSystemModel):
    """list of Violation(kind, detail); empty when the model is sound"""
    violations = []
    operators = [('hamiltonian', model.hamiltonian)]
    operators += [(f'dissipator {k}', jump)
                  for k, (_, jump) in enumerate(model.dissipators)]
    for name, op in operators:
        if op.n_qubits != model.n_qubits:
            violations.append(Violation(
                'qubits', f'{name} acts on {op.n_qubits} qubits, '
                f'model has {model.n_qubits}'))
    if not model.hamiltonian.is_hermitian():
        bad = [str(s) for c, s in model.hamiltonian.terms if abs(c.imag) > 1e-12]
        violations.append(Violation(
            'hermiticity', f'non-real coefficients on {bad}'))
    for k, rate in enumerate(model.rates):
        if not math.isfinite(rate) or rate < 0:
            violations.append(Violation('rate', f'dissipator {k} has rate {rate}'))
    for name, sym in model.symmetries.items():
        for key in ('generator', 'operator'):
            op = sym.get(key)
            if op is not None and op.n_qubits != model.n_qubits:
                violations.append(Violation(
                    'qubits', f'symmetry {name} {key} acts on {op.n_qubits} qubits'))
    return violations


def magnetization(n: int) -> PauliSum:
    """M = sum_j Z_j"""
    return PauliSum([(1, PauliString.single(n, j, 'Z')) for j in range(1, n + 1)], n)


def swap_operator(n: int, i: int, j: int) -> PauliSum:
    """SWAP of sites i and j = (II + XX + YY + ZZ)/2"""
    terms = [(0.5, PauliString.identity(n))]
    for code in 'XYZ':
        codes = ['I'] * n
        codes[i - 1] = codes[j - 1] = code
        terms.append((0.5, ''.join(codes)))
    return PauliSum(terms, n)


def reflection_operator(n: int) -> PauliSum:
    """P exchanging site j with site n + 1 - j"""
    result = identity(n)
    for j in range(1, n // 2 + 1):
        result = result @ swap_operator(n, j, n + 1 - j)
    return result


def global_flip(n: int) -> PauliSum:
    return PauliSum([(1, 'X' * n)], n)


def _bond_terms(n, code, coeff):
    terms = []
    for j in range(1, n):
        codes = ['I'] * n
        codes[j - 1] = codes[j] = code
        terms.append((coeff, ''.join(codes)))
    return terms


def _xxz_hamiltonian(n, delta):
    terms = []
    for j in range(1, n):
        for code, coeff in (('X', 1), ('Y', 1), ('Z', delta)):
            codes = ['I'] * n
            codes[j - 1] = codes[j] = code
            terms.append((coeff, ''.join(codes)))
    return PauliSum(terms, n)


def tfim_chain(n: int, g: float, gamma: float) -> OpenSystemModel:
    """open nearest-neighbour transverse field Ising chain,
    H = 1/2 sum Z_j Z_{j+1} + g sum X_j, with Z_j dephasing and
    (X_j - iY_j)/2 damping on every site at the shared rate gamma"""
    if n < 2:
        raise ValueError(f'tfim chain needs at least 2 qubits, got {n}')
    terms = _bond_terms(n, 'Z', 0.5)
    terms += [(g, PauliString.single(n, j, 'X')) for j in range(1, n + 1)]
    dissipators = []
    for j in range(1, n + 1):
        dissipators.append((gamma, single_site(n, j, 'Z')))
        dissipators.append((gamma, lowering(n, j)))
    return OpenSystemModel(
        n, PauliSum(terms, n), dissipators,
        f'tfim n={n} g={g} gamma={gamma} (open chain, ZZ coupling 1/2)',
        builder={'name': 'tfim', 'params': {'n': n, 'g': g, 'gamma': gamma}})


def xxz_dephasing(n: int, delta: float, gamma: float) -> OpenSystemModel:
    """XXZ chain with Z_j dephasing; strong symmetry e^{i phi M}"""
    if n < 2:
        raise ValueError(f'xxz chain needs at least 2 qubits, got {n}')
    dissipators = [(gamma, single_site(n, j, 'Z')) for j in range(1, n + 1)]
    symmetries = {
        'magnetization': {'generator': magnetization(n),
                          'phi': 2 * np.pi / (2 * n + 2)},
    }
    return OpenSystemModel(
        n, _xxz_hamiltonian(n, delta), dissipators,
        f'xxz-dephasing n={n} delta={delta} gamma={gamma}', symmetries,
        builder={'name': 'xxz-dephasing',
                 'params': {'n': n, 'delta': delta, 'gamma': gamma}})


def xxz_boundary_driven(n: int, delta: float, Gamma: float, mu: float) -> OpenSystemModel:
    """XXZ chain driven by sqrt(Gamma(1-mu)) s+_1 s-_n and
    sqrt(Gamma(1+mu)) s-_1 s+_n; symmetries e^{i phi M} and S = P prod X"""
    if n < 2:
        raise ValueError(f'xxz chain needs at least 2 qubits, got {n}')
    if not Gamma > 0:
        raise ValueError(f'Gamma must be positive, got {Gamma}')
    if not 0 <= mu <= 1:
        raise ValueError(f'mu must lie in [0, 1], got {mu}')
    a1 = math.sqrt(Gamma * (1 - mu)) * (raising(n, 1) @ lowering(n, n))
    a2 = math.sqrt(Gamma * (1 + mu)) * (lowering(n, 1) @ raising(n, n))
    s = reflection_operator(n) @ global_flip(n)
    symmetries = {
        'magnetization': {'generator': magnetization(n),
                          'phi': 2 * np.pi / (2 * n + 2)},
        'reflection_flip': {'operator': s, 'eigenvalues': [1, -1]},
    }
    return OpenSystemModel(
        n, _xxz_hamiltonian(n, delta), [(1.0, a1), (1.0, a2)],
        f'xxz-boundary n={n} delta={delta} Gamma={Gamma} mu={mu}', symmetries,
        builder={'name': 'xxz-boundary',
                 'params': {'n': n, 'delta': delta, 'Gamma': Gamma, 'mu': mu}})


BUILDERS = {
    'tfim': (tfim_chain, ('n', 'g', 'gamma')),
    'xxz-dephasing': (xxz_dephasing, ('n', 'delta', 'gamma')),
    'xxz-boundary': (xxz_boundary_driven, ('n', 'delta', 'Gamma', 'mu')),
}


def build(name: str, params: dict) -> OpenSystemModel:
    """build a model by builder name from a parameter dict"""
    if name not in BUILDERS:
        raise ValueError(f'unknown model builder {name!r}, '
                         f'choose from {sorted(BUILDERS)}')
    func, keys = BUILDERS[name]
    missing = [k for k in keys if k not in params]
    if missing:
        raise ValueError(f'builder {name} is missing parameters {missing}')
    return func(*[params[k] for k in keys])
