import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zptower.gf import FieldCtx, FieldError, default_modulus, field, parse_element

FIELDS = [(2, 1), (3, 1), (5, 1), (7, 1), (11, 1), (13, 1),
          (2, 2), (2, 3), (2, 8), (3, 2), (3, 4), (5, 2), (7, 2), (13, 2)]


def test_prime_field_examples():
    F3 = field(3)
    assert (F3.elem(2) + F3.elem(2)) == F3.elem(1)
    assert F3.elem(2).inverse() == F3.elem(2)


def test_gf4_modulus_and_product():
    F4 = field(2, 2)
    assert F4.modulus == (1, 1)  # t^2 + t + 1
    t = F4.gen()
    assert t * t == F4.elem([1, 1])


def test_frobenius_examples():
    F3 = field(3)
    assert F3.elem(2).frobenius_inverse() == F3.elem(2)
    F4 = field(2, 2)
    t = F4.gen()
    assert t.frobenius() == t * t
    F9 = field(3, 2)
    assert F9.modulus == (1, 0)  # t^2 + 1
    t9 = F9.gen()
    assert (t9 ** 3).frobenius_inverse() == t9


def test_inversion_of_zero_rejected():
    with pytest.raises(ZeroDivisionError):
        field(5).zero().inverse()


def test_unsupported_parameters_rejected():
    with pytest.raises(FieldError):
        field(17)
    with pytest.raises(FieldError):
        field(2, 9)
    with pytest.raises(FieldError):
        FieldCtx(2, 2, (0, 1))  # t^2 + t is reducible


@pytest.mark.parametrize("p,k", FIELDS)
def test_frobenius_roundtrip_bulk(p, k):
    # sigma^-1 then sigma is the identity on >= 10^3 random elements per field
    F = field(p, k)
    rng = np.random.default_rng(p * 100 + k)
    for _ in range(1000):
        a = F.random_element(rng)
        assert a.frobenius_inverse().frobenius() == a
        assert a.frobenius().frobenius_inverse() == a


@pytest.mark.parametrize("p,k", [(2, 3), (3, 2), (5, 2)])
def test_frobenius_is_field_automorphism(p, k):
    F = field(p, k)
    rng = np.random.default_rng(1)
    for _ in range(200):
        a, b = F.random_element(rng), F.random_element(rng)
        assert (a + b).frobenius() == a.frobenius() + b.frobenius()
        assert (a * b).frobenius() == a.frobenius() * b.frobenius()
    # sigma^k = identity
    for a in F.elements():
        x = a
        for _ in range(k):
            x = x.frobenius()
        assert x == a


@given(st.integers(0, 3 ** 4 - 1), st.integers(0, 3 ** 4 - 1), st.integers(0, 3 ** 4 - 1))
@settings(max_examples=60, deadline=None)
def test_field_axioms_gf81(ca, cb, cc):
    F = field(3, 4)

    def elem(code):
        coeffs = []
        for _ in range(4):
            coeffs.append(code % 3)
            code //= 3
        return F.elem(coeffs)

    a, b, c = elem(ca), elem(cb), elem(cc)
    assert (a + b) * c == a * c + b * c
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    if not a.is_zero():
        assert (a * a.inverse()).is_one()


def test_exhaustive_small_field_inverses():
    for p, k in [(2, 2), (3, 2), (2, 3)]:
        F = field(p, k)
        for a in F.elements():
            if not a.is_zero():
                assert (a * a.inverse()).is_one()


def test_deterministic_default_moduli():
    # recomputation picks the same (least) irreducible every time
    for p, k in [(2, 4), (3, 3), (5, 2), (13, 2)]:
        assert default_modulus(p, k) == default_modulus(p, k)


def test_serialization_roundtrip():
    F9 = field(3, 2)
    a = F9.elem([2, 1])
    assert parse_element(F9, a.serialize()) == a
    F5 = field(5)
    assert field(5).elem(3).serialize() == 3
    assert parse_element(F5, 3) == F5.elem(3)


def test_frob_matrices_match_elementwise_power():
    F8 = field(2, 3)
    for e in range(3):
        M = F8.frob_matrix(e)
        for a in F8.elements():
            got = tuple((M @ np.array(a.coeffs)) % 2)
            assert got == (a ** (2 ** e)).coeffs
    Minv = F8.inv_frob_matrix()
    for a in F8.elements():
        assert tuple((Minv @ np.array(a.coeffs)) % 2) == a.frobenius_inverse().coeffs
