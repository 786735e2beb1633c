import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kahlercrit.backend import Backend
from kahlercrit.calabi import CoefficientMatrix
from kahlercrit.errors import CertificateError, DimensionError, NotHermitianError
from kahlercrit.psdcert import (NO_OBSTRUCTION, OBSTRUCTED, NegativityWitness,
                                psd_check, rank_lower_bound,
                                validate_certificate)

import oracles


def mat(rows, backend=Backend.exact()):
    return CoefficientMatrix.from_rows(rows, backend)


def random_hermitian(rng, size):
    kind = rng.random()
    if kind < 0.5:
        # Gram matrix of random low-rank factors: PSD, often singular
        r = rng.randint(0, size)
        B = [[F(rng.randint(-3, 3), rng.randint(1, 2)) for _ in range(r)] for _ in range(size)]
        M = [[sum((B[i][k] * B[j][k] for k in range(r)), F(0)) for j in range(size)]
             for i in range(size)]
        if kind < 0.2 and size > 1:
            i = rng.randrange(size)
            M[i][i] -= F(1, rng.randint(1, 50))
        return M
    M = [[F(0)] * size for _ in range(size)]
    for i in range(size):
        for j in range(i, size):
            v = F(rng.randint(-4, 4), rng.randint(1, 3)) if rng.random() < 0.6 else F(0)
            M[i][j] = M[j][i] = v
    return M


def test_flat_degree1():
    v = psd_check(mat([[0, 0, 0], [0, F(1, 2), 0], [0, 0, F(1, 2)]]))
    assert v.status == NO_OBSTRUCTION and v.rank_lower_bound == 2
    assert v.margin == F(1, 2)


def test_ale_flat_negative_mass_block():
    a11, a13, a33 = F(4999, 10000), F(1, 10**5), F(-1, 10**6)
    assert oracles.det([[a11, a13], [a13, a33]]) == F(-5, 10**7)
    M = mat([[0, 0, 0, 0], [0, a11, 0, a13], [0, 0, a11, 0], [0, a13, 0, a33]])
    v = psd_check(M)
    assert v.status == OBSTRUCTED
    assert validate_certificate(M, v.certificate)
    assert v.certificate.vector[0] == v.certificate.vector[2] == 0
    # Schur pivot equals det / a11
    assert v.margin == F(-5, 10**7) / a11


def test_ale_hyperbolic_block():
    a11, a13 = F(5001, 10000), F(-1, 10**5)
    b33 = F(1, 10**6) - F(1, 2) * a11 ** 2
    v = psd_check(mat([[a11, a13], [a13, b33]]))
    assert v.status == OBSTRUCTED


def test_rank_lower_bound():
    assert rank_lower_bound(mat([[0, 0, 0], [0, F(1, 2), 0], [0, 0, F(1, 2)]])) == 2
    assert rank_lower_bound(mat([[0] * 3] * 3)) == 0
    with pytest.raises(CertificateError):
        rank_lower_bound(mat([[1, 0], [0, -1]]))


def test_validate_certificate():
    M = mat([[1, 0], [0, -1]])
    assert validate_certificate(M, NegativityWitness((F(0), F(1)), F(-1)))
    ident = mat([[1, 0], [0, 1]])
    assert not validate_certificate(ident, NegativityWitness((F(2), F(-3)), F(0)))
    with pytest.raises(DimensionError):
        validate_certificate(ident, NegativityWitness((F(1),), F(0)))


def test_zero_pivot_with_nonzero_row():
    M = mat([[0, 1], [1, 0]])
    v = psd_check(M)
    assert v.status == OBSTRUCTED and validate_certificate(M, v.certificate)
    M = mat([[0, 1, 0], [1, 2, 0], [0, 0, 1]])
    v = psd_check(M)
    assert v.status == OBSTRUCTED and validate_certificate(M, v.certificate)


def test_non_hermitian_rejected():
    with pytest.raises(NotHermitianError):
        psd_check(mat([[1, 2], [0, 1]]))


def test_oracle_agreement_many():
    rng = random.Random(2024)
    for _ in range(200):
        M = random_hermitian(rng, rng.randint(1, 8))
        v = psd_check(mat(M))
        assert (v.status == NO_OBSTRUCTION) == oracles.is_psd_by_minors(M)
        if v.certificate:
            assert validate_certificate(mat(M), v.certificate)


@given(st.integers(0, 10**6), st.integers(1, 7))
def test_monotone_under_extension(seed, size):
    rng = random.Random(seed)
    big = random_hermitian(rng, size + 1)
    small = [row[:size] for row in big[:size]]
    vs = psd_check(mat(small))
    vb = psd_check(mat(big))
    if vs.status == OBSTRUCTED:
        assert vb.status == OBSTRUCTED
        padded = NegativityWitness(vs.certificate.vector + (F(0),), vs.certificate.value)
        assert validate_certificate(mat(big), padded)


@given(st.integers(0, 10**6), st.integers(1, 6),
       st.fractions(min_value=F(1, 100), max_value=100, max_denominator=100))
def test_positive_scaling_preserves_status(seed, size, c):
    M = random_hermitian(random.Random(seed), size)
    scaled = [[c * x for x in row] for row in M]
    assert psd_check(mat(M)).status == psd_check(mat(scaled)).status


def test_float_backend_agrees_on_clear_margins():
    rng = random.Random(9)
    fb = Backend.float()
    checked = 0
    for _ in range(60):
        M = random_hermitian(rng, rng.randint(1, 6))
        ve = psd_check(mat(M))
        vf = psd_check(mat(M, fb))
        if ve.status == OBSTRUCTED or abs(ve.margin) > 1e-9:
            assert ve.status == vf.status
            checked += 1
    assert checked > 40


def test_float_marginal_pivot_not_obstructed():
    fb = Backend.float(64)
    M = mat([[1, 0], [0, -1e-30]], fb)
    v = psd_check(M)
    assert v.status == NO_OBSTRUCTION
    assert any("marginal" in n for n in v.notes)


def test_complex_hermitian_float():
    fb = Backend.float(128)
    M = mat([[2, 1 + 1j], [1 - 1j, 1]], fb)        # det = 0
    assert psd_check(M).status == NO_OBSTRUCTION
    M = mat([[1, 1 + 1j], [1 - 1j, 1]], fb)        # det = -1
    v = psd_check(M)
    assert v.status == OBSTRUCTED and validate_certificate(M, v.certificate)
