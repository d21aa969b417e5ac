from ness_py.statevector import (StateVector, AnsatzSet, basis_state, product_state,
                                 uniform_state, apply_pauli_sum, matrix_element,
                                 moment_states, moment_states_random, make_seed)
from ness_py.pauli import PauliSum, single_site
from ness_py.model import tfim_chain
from ness_py.errors import DimensionError
import numpy as np
import pytest


def test_basis_state():
    s = basis_state(3, '101')
    assert s.amplitudes[5] == 1
    assert s.norm() == 1
    with pytest.raises(DimensionError):
        basis_state(3, '10')
    with pytest.raises(DimensionError):
        basis_state(2, '1x')
    with pytest.raises(DimensionError):
        StateVector(2, np.ones(3))


def test_product_state():
    s = product_state('+-')
    assert np.allclose(s.amplitudes, np.array([1, -1, 1, -1]) / 2)
    assert abs(uniform_state(4).norm() - 1) < 1e-12
    with pytest.raises(ValueError):
        product_state('0a')


def test_inner_and_elements():
    a = basis_state(2, '00')
    b = apply_pauli_sum(single_site(2, 1, 'X'), a)
    assert b.inner(basis_state(2, '10')) == 1
    x = PauliSum([(1, 'XI'), (1, 'IX')])
    assert matrix_element(basis_state(2, '01'), x, a) == 1
    with pytest.raises(DimensionError):
        a.inner(basis_state(1, '0'))


def test_canonical_phase():
    s = StateVector(1, [0, 1j]).canonical_phase()
    assert np.allclose(s.amplitudes, [0, 1])


def test_moment_sizes():
    h = tfim_chain(2, 1.0, 1.0).hamiltonian
    sizes = [len(moment_states(h, basis_state(2, '11'), k)) for k in range(4)]
    assert sizes == [1, 3, 4, 4]
    a = moment_states(h, basis_state(2, '11'), 2)
    assert a.level_sizes() == [1, 2, 1]
    assert a.words[0] == ()


def test_moment_zero_field():
    # at g = 0 only ZZ remains, and ZZ|11> = |11>
    h = tfim_chain(2, 0.0, 1.0).hamiltonian
    assert len(h) == 1
    assert len(moment_states(h, basis_state(2, '11'), 3)) == 1


def test_moment_states_are_words():
    h = tfim_chain(3, 0.7, 1.0).hamiltonian
    seed = product_state('+01')
    a = moment_states(h, seed, 2)
    for state, word in zip(a.states, a.words):
        amplitudes = seed.amplitudes
        for i in word:
            amplitudes = a.unitaries[i].apply(amplitudes)
        assert abs(abs(np.vdot(state.amplitudes, amplitudes)) - 1) < 1e-12
    X = a.matrix()
    assert X.shape == (8, len(a))
    gram = X.conj().T @ X
    off = gram - np.diag(np.diag(gram))
    assert np.max(abs(off)) <= 1 - 1e-10


def test_random_variant():
    h = tfim_chain(4, 0.5, 1.0).hamiltonian
    seed = basis_state(4, '1111')
    a = moment_states_random(h, seed, 3, 2, rng_seed=5)
    b = moment_states_random(h, seed, 3, 2, rng_seed=5)
    assert a.words == b.words
    assert all(size <= 2 for size in a.level_sizes()[1:])
    full = moment_states(h, seed, 3).matrix()
    for state in a.states:
        assert np.max(abs(full.conj().T @ state.amplitudes)) > 1 - 1e-10
    with pytest.raises(ValueError):
        moment_states_random(h, seed, 3, 0, rng_seed=5)


def test_ansatz_json():
    h = tfim_chain(3, 1.0, 1.0).hamiltonian
    a = moment_states_random(h, basis_state(3, '110'), 2, 3, rng_seed=2,
                             seed_descriptor={'kind': 'bits', 'bits': '110'})
    b = AnsatzSet.from_json(a.to_json())
    assert b.words == a.words
    assert b.q == 3 and b.rng_seed == 2
    assert b.fingerprint() == a.fingerprint()
    assert np.allclose(b.matrix(), a.matrix())


def test_make_seed():
    assert make_seed(2, {'kind': 'bits', 'bits': '10'}).amplitudes[2] == 1
    assert make_seed(2, {'kind': 'product', 'labels': '+0'}).n_qubits == 2
    assert make_seed(3, {'kind': 'uniform'}).n_qubits == 3
    v = make_seed(1, {'kind': 'vector', 'amplitudes': [[0, 0], [1, 0]]})
    assert np.allclose(v.amplitudes, [0, 1])
    with pytest.raises(DimensionError):
        make_seed(3, {'kind': 'product', 'labels': '+0'})
    with pytest.raises(ValueError):
        make_seed(2, {'kind': 'ness'})
    with pytest.raises(ValueError):
        make_seed(2, {'kind': 'coin'})


def test_ness_seed():
    # g = 0: the steady state is |11><11|
    model = tfim_chain(2, 0.0, 1.0)
    s = make_seed(2, {'kind': 'ness'}, model)
    assert abs(abs(s.amplitudes[3]) - 1) < 1e-8
