"""Unit tests for cyclo module."""

from fractions import Fraction
from typing import Callable

import pytest

from newformology import cyclo
from newformology import exceptions
from newformology.cyclo import CyclotomicNumber


def _zeta(exponent: int, modulus: int) -> CyclotomicNumber:
    return CyclotomicNumber.root_of_unity(exponent, modulus)


TEST_CASES = {
    "equality": {
        "sum of fifth roots is zero": {
            "args": [CyclotomicNumber(5, {k: 1 for k in range(5)}), 0],
            "returns": True,
        },
        "i squared": {
            "args": [_zeta(1, 4) * _zeta(1, 4), -1],
            "returns": True,
        },
        "different moduli": {
            "args": [_zeta(2, 6), _zeta(1, 3)],
            "returns": True,
        },
        "third root plus square": {
            "args": [_zeta(1, 3) + _zeta(2, 3), -1],
            "returns": True,
        },
        "distinct roots": {
            "args": [_zeta(1, 8), _zeta(3, 8)],
            "returns": False,
        },
        "rational fraction": {
            "args": [CyclotomicNumber.rational(Fraction(1, 2)) * 4, 2],
            "returns": True,
        },
    },
    "sqrt_prime": {
        "p=2": {"args": [2]},
        "p=3": {"args": [3]},
        "p=5": {"args": [5]},
        "p=7": {"args": [7]},
        "p=11": {"args": [11]},
    },
    "cyclo_arith": {
        "add": {
            "args": [_zeta(1, 4), _zeta(3, 4), "add"],
            "returns": CyclotomicNumber.zero(),
        },
        "mul": {
            "args": [_zeta(1, 3), _zeta(2, 3), "mul"],
            "returns": CyclotomicNumber.one(),
        },
        "conj": {
            "args": [_zeta(1, 8), None, "conj"],
            "returns": _zeta(7, 8),
        },
        "unknown": {
            "args": [_zeta(1, 8), None, "pow"],
            "raises": ValueError,
        },
    },
    "inverse": {
        "monomial": {
            "args": [CyclotomicNumber(9, {2: Fraction(3, 2)})],
            "returns": CyclotomicNumber(9, {7: Fraction(2, 3)}),
        },
        "rational with two raw terms": {
            "args": [CyclotomicNumber(3, {1: 1, 2: 1})],
            "returns": CyclotomicNumber.rational(-1),
        },
        "zero": {
            "args": [CyclotomicNumber.zero()],
            "raises": exceptions.NotInvertibleError,
        },
        "zero with raw terms": {
            "args": [CyclotomicNumber(3, {0: 1, 1: 1, 2: 1})],
            "raises": exceptions.NotInvertibleError,
        },
        "gaussian": {
            "args": [CyclotomicNumber(4, {0: 1, 1: Fraction(-1, 2)})],
            "returns": CyclotomicNumber(4, {0: Fraction(4, 5), 1: Fraction(2, 5)}),
        },
    },
    "inverse_product": {
        "unit of Q(zeta_5)": {
            "args": [CyclotomicNumber(5, {0: 1, 1: 1})],
            "returns": 1,
        },
        "geometric ratio at p=3": {
            "args": [1 - CyclotomicNumber(12, {1: Fraction(1, 3), 5: Fraction(1, 3)})],
            "returns": 1,
        },
        "dense element of Q(zeta_9)": {
            "args": [CyclotomicNumber(9, {0: 2, 1: -1, 4: Fraction(1, 3), 7: 5})],
            "returns": 1,
        },
    },
}


@pytest.mark.parametrize_test_case("test", TEST_CASES["equality"])
def test_equality(test: dict, function_tester: Callable) -> None:
    """Test exact zero testing through equality."""
    function_tester(test, lambda left, right: left == right)


@pytest.mark.parametrize_test_case("test", TEST_CASES["sqrt_prime"])
def test_sqrt_prime(test: dict) -> None:
    """Test that the exact square root squares to the prime and embeds as the positive root."""
    (p,) = test["args"]
    root = cyclo.sqrt_prime(p)
    assert root * root == p
    assert abs(root.to_complex() - p**0.5) < 1e-9


@pytest.mark.parametrize_test_case("test", TEST_CASES["cyclo_arith"])
def test_cyclo_arith(test: dict, function_tester: Callable) -> None:
    """Test the canonical arithmetic entry point."""
    function_tester(test, cyclo.cyclo_arith)


@pytest.mark.parametrize_test_case("test", TEST_CASES["inverse"])
def test_inverse(test: dict, function_tester: Callable) -> None:
    """Test inverses of monomials, rationals and general elements."""
    function_tester(test, CyclotomicNumber.inverse)


@pytest.mark.parametrize_test_case("test", TEST_CASES["inverse_product"])
def test_inverse_product(test: dict, function_tester: Callable) -> None:
    """Test that general elements times their inverse give one."""
    function_tester(test, lambda value: value * value.inverse())


def test_canonical_form() -> None:
    """Test that canonical coefficients have exponents below the degree of the cyclotomic polynomial."""
    value = CyclotomicNumber(12, {k: k + 1 for k in range(12)})
    assert max(value.coefficients) < 4
    assert abs(value.to_complex() - sum((k + 1) * _zeta(k, 12).to_complex() for k in range(12))) < 1e-9
    assert str(CyclotomicNumber.zero()) == "0"
    assert CyclotomicNumber(4, {0: 1, 2: 1}).is_zero()


def test_half_power_and_powers() -> None:
    """Test exact half powers and integer powers."""
    assert cyclo.half_power(3, 3) == cyclo.sqrt_prime(3) * 3
    assert cyclo.half_power(2, -2) == Fraction(1, 2)
    assert _zeta(1, 5) ** 5 == 1
    assert _zeta(1, 5) ** -1 == _zeta(4, 5)
    assert (_zeta(1, 8) * 2).abs2() == 4


def test_promote() -> None:
    """Test rewriting a number over a multiple of its modulus."""
    value = _zeta(1, 3).promote(12)
    assert value.modulus == 12
    assert value == _zeta(4, 12)
    with pytest.raises(ValueError):
        _zeta(1, 3).promote(8)


def test_modulus_cap() -> None:
    """Test that moduli beyond the cap are refused."""
    with pytest.raises(exceptions.ModulusOverflowError):
        CyclotomicNumber(cyclo.MODULUS_CAP + 1, {1: 1})


def test_rings() -> None:
    """Test the exact and complex value rings."""
    exact = cyclo.get_ring("exact")
    numeric = cyclo.get_ring("complex")
    value = _zeta(1, 4) * 3
    assert exact.close(exact.convert(value), value)
    assert numeric.close(numeric.convert(value), 3j)
    assert numeric.is_zero(numeric.convert(CyclotomicNumber(6, {k: 1 for k in range(6)})))
    assert exact.modulus(value) == pytest.approx(3.0)
    assert numeric.root(1, 4) == pytest.approx(1j)
    with pytest.raises(ValueError):
        cyclo.get_ring("float")
