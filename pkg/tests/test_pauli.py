from ness_py.pauli import (PauliString, PauliSum, identity, single_site, lowering,
                           raising, commutator, exp_pauli_generator, paulisum_mul,
                           pauli_mul, paulisum_dagger)
from ness_py.errors import DimensionError, DenseLimitError
import numpy as np
import pytest


def test_string():
    p = PauliString('XYZ')
    assert p.n_qubits == 3
    assert str(p) == 'XYZ'
    with pytest.raises(ValueError):
        _ = PauliString('XA')
    with pytest.raises(ValueError):
        _ = PauliString('')


def test_mul_table():
    phase, s = PauliString('X').mul(PauliString('Y'))
    assert phase == 1j and s == PauliString('Z')
    phase, s = PauliString('Y').mul(PauliString('X'))
    assert phase == -1j and s == PauliString('Z')
    phase, s = PauliString('ZZ').mul(PauliString('ZZ'))
    assert phase == 1 and s == PauliString('II')
    with pytest.raises(DimensionError):
        PauliString('X').mul(PauliString('XX'))


def test_mul_matches_dense():
    codes = ['IX', 'XY', 'ZZ', 'YI', 'YZ']
    for a in codes:
        for b in codes:
            phase, s = PauliString(a).mul(PauliString(b))
            lhs = PauliString(a).to_dense() @ PauliString(b).to_dense()
            assert np.allclose(lhs, phase * s.to_dense())


def test_module_level_products():
    assert pauli_mul(PauliString('XZ'), PauliString('ZZ')) == (-1j, PauliString('YI'))
    assert pauli_mul(PauliString('II'), PauliString('XY')) == (1, PauliString('XY'))
    a = PauliSum([(1j, 'Z')])
    assert paulisum_dagger(a).coeff('Z') == -1j
    assert paulisum_dagger(paulisum_dagger(a)).allclose(a)
    assert paulisum_dagger(lowering(1, 1)).allclose(PauliSum([(0.5, 'X'), (0.5j, 'Y')]))


def test_product_associativity():
    codes = ['IX', 'XY', 'ZZ', 'YI', 'YZ']
    for a in codes:
        for b in codes:
            for c in codes:
                pa, pb, pc = PauliString(a), PauliString(b), PauliString(c)
                p1, ab = pauli_mul(pa, pb)
                p2, left = pauli_mul(ab, pc)
                p3, bc = pauli_mul(pb, pc)
                p4, right = pauli_mul(pa, bc)
                assert left == right and p1 * p2 == p4 * p3
    x = PauliSum([(1, 'XI'), (0.5j, 'ZY')])
    y = PauliSum([(2, 'YY'), (1, 'II')])
    z = PauliSum([(1, 'XZ'), (-1, 'IY')])
    assert paulisum_mul(paulisum_mul(x, y), z).allclose(paulisum_mul(x, paulisum_mul(y, z)))


def test_apply_matches_dense():
    rng = np.random.default_rng(1)
    v = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    for codes in ['XYZ', 'IIY', 'ZXI', 'YYY']:
        p = PauliString(codes)
        assert np.allclose(p.apply(v), p.to_dense() @ v)
        assert np.allclose(p.to_sparse().toarray(), p.to_dense())
    m = rng.standard_normal((8, 3))
    assert np.allclose(PauliString('XZY').apply(m), PauliString('XZY').to_dense() @ m)


def test_site_order():
    # site 1 is the most significant bit, Z|0> = |0>
    z1 = single_site(2, 1, 'Z').to_dense()
    assert np.allclose(np.diag(z1), [1, 1, -1, -1])


def test_sum_canonical():
    h = PauliSum([(1, 'XI'), (2, 'ZZ'), (-1, 'XI')])
    assert len(h) == 1
    assert h.coeff('ZZ') == 2
    assert h.coeff('XI') == 0
    assert PauliSum(h.terms, 2) == h
    assert PauliSum([(1, 'X'), (1, 'Z')]) == PauliSum([(1, 'X')]) + PauliSum([(1, 'Z')])
    with pytest.raises(DimensionError):
        _ = PauliSum([(1, 'X'), (1, 'XX')])
    with pytest.raises(ValueError):
        _ = PauliSum([])


def test_arithmetic():
    a = PauliSum([(1, 'XI'), (0.5j, 'ZY')])
    b = PauliSum([(2, 'YY'), (1, 'II')])
    assert np.allclose((a + b).to_dense(), a.to_dense() + b.to_dense())
    assert np.allclose((a - b).to_dense(), a.to_dense() - b.to_dense())
    assert np.allclose((3 * a).to_dense(), 3 * a.to_dense())
    assert np.allclose((a @ b).to_dense(), a.to_dense() @ b.to_dense())
    assert np.allclose(a.dagger().to_dense(), a.to_dense().conj().T)
    assert np.allclose(a.power(3).to_dense(), np.linalg.matrix_power(a.to_dense(), 3))
    with pytest.raises(DimensionError):
        _ = a + PauliSum([(1, 'X')])


def test_lowering_erratum():
    # sigma_- = |1><0| and sigma_-^dagger sigma_- = |0><0| = (I + Z)/2
    n = 1
    sm = lowering(n, 1)
    assert np.allclose(sm.to_dense(), [[0, 0], [1, 0]])
    number = paulisum_mul(sm.dagger(), sm)
    expected = PauliSum([(0.5, 'I'), (0.5, 'Z')])
    assert number.allclose(expected)
    assert raising(1, 1).allclose(sm.dagger())


def test_commutator():
    x = single_site(1, 1, 'X')
    y = single_site(1, 1, 'Y')
    assert commutator(x, y).allclose(single_site(1, 1, 'Z', 2j))
    assert len(commutator(identity(2), PauliSum([(1, 'XZ')]))) == 0


def test_exp_generator():
    g = PauliSum([(1, 'ZI'), (1, 'IZ')])
    phi = 0.3
    u = exp_pauli_generator(g, phi)
    dense = np.diag(np.exp(1j * phi * np.diag(g.to_dense())))
    assert np.allclose(u.to_dense(), dense)
    with pytest.raises(ValueError):
        exp_pauli_generator(PauliSum([(1, 'X'), (1, 'Z')]), phi)
    with pytest.raises(ValueError):
        exp_pauli_generator(PauliSum([(1j, 'Z')]), phi)


def test_hermitian():
    assert PauliSum([(1, 'XY'), (2, 'ZZ')]).is_hermitian()
    assert not lowering(2, 1).is_hermitian()


def test_json():
    a = PauliSum([(1 + 2j, 'XZ'), (-0.5, 'YY')])
    assert PauliSum.from_json(a.to_json()) == a
    with pytest.raises(ValueError):
        PauliSum.from_list([{'pauli': 'X'}])


def test_limits():
    with pytest.raises(DenseLimitError):
        PauliString('X' * 4).to_dense(limit=3)
    big = single_site(14, 3, 'X')
    assert big.to_sparse().shape == (2 ** 14, 2 ** 14)
    with pytest.raises(DenseLimitError):
        big.to_dense()
