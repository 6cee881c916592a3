import numpy as np
import pytest

from rankexit.galois import DEFAULT_PRIMITIVE_POLYS, FieldSpec, gf_add, gf_inv, gf_mul


def clmul_mod(a, b, poly, m):
    """Shift-and-add polynomial product reduced mod poly, bit by bit."""
    out = 0
    for k in range(m):
        if (b >> k) & 1:
            out ^= a << k
    for k in range(2 * m - 2, m - 1, -1):
        if (out >> k) & 1:
            out ^= poly << (k - m)
    return out


def test_add_examples(gf4, gf64):
    assert gf_add(gf4, 3, 3) == 0
    assert gf_add(gf4, 0, 2) == 2
    assert gf_add(gf64, 21, 42) == 63


def test_mul_examples(gf4):
    assert gf_mul(gf4, 2, 2) == 3
    for a in range(4):
        assert gf_mul(gf4, 1, a) == a
        assert gf_mul(gf4, 0, a) == 0


def test_inv_examples(gf4):
    assert gf_inv(gf4, 1) == 1
    assert gf_inv(gf4, 2) == 3
    with pytest.raises(ZeroDivisionError):
        gf_inv(gf4, 0)


def test_default_polynomials():
    assert DEFAULT_PRIMITIVE_POLYS[2] == 0b111
    assert DEFAULT_PRIMITIVE_POLYS[4] == 0b10011
    assert DEFAULT_PRIMITIVE_POLYS[6] == 0b1000011


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5, 6])
def test_mul_matches_polynomial_oracle(m):
    gf = FieldSpec(m)
    a = np.arange(gf.q)
    table = gf.mul(a[:, None], a[None, :])
    expected = np.array([[clmul_mod(x, y, gf.prim_poly, m) for y in range(gf.q)] for x in range(gf.q)])
    np.testing.assert_array_equal(table, expected)


@pytest.mark.parametrize("m", [2, 4, 6])
def test_field_axioms_exhaustive(m):
    gf = FieldSpec(m)
    a = np.arange(gf.q)
    A, B, C = np.meshgrid(a, a, a, indexing="ij")
    np.testing.assert_array_equal(gf.mul(A, gf.add(B, C)), gf.add(gf.mul(A, B), gf.mul(A, C)))
    np.testing.assert_array_equal(gf.mul(A, B), gf.mul(B, A))
    np.testing.assert_array_equal(gf.mul(gf.mul(A, B), C), gf.mul(A, gf.mul(B, C)))
    nz = a[1:]
    np.testing.assert_array_equal(gf.mul(nz, gf.inv(nz)), np.ones_like(nz))


@pytest.mark.parametrize("m", range(1, 17))
def test_generator_powers_enumerate_nonzero(m):
    gf = FieldSpec(m)
    powers = gf.exp_table[: gf.q - 1]
    assert len(set(powers.tolist())) == gf.q - 1
    assert 0 not in set(powers.tolist())
    nz = np.arange(1, gf.q)
    np.testing.assert_array_equal(gf.exp_table[gf.log_table[nz]], nz)


def test_rejects_bad_polynomials():
    with pytest.raises(ValueError):
        FieldSpec(4, 0b11111)  # x^4+x^3+x^2+x+1: irreducible but order 5
    with pytest.raises(ValueError):
        FieldSpec(4, 0b111)  # wrong degree
    with pytest.raises(ValueError):
        FieldSpec(0)


def test_rejects_out_of_range(gf4):
    with pytest.raises(ValueError):
        gf_add(gf4, 4, 1)
    with pytest.raises(ValueError):
        gf_mul(gf4, -1, 1)


def test_bits_msb_first(gf4):
    np.testing.assert_array_equal(gf4.bits([0, 1, 2, 3]), [[0, 0], [0, 1], [1, 0], [1, 1]])
