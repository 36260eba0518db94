"""Unit tests for padic module."""

from fractions import Fraction
from typing import Callable

import pytest

from newformology import exceptions
from newformology import padic
from newformology.padic import GL2Element

TEST_CASES = {
    "valuation": {
        "integer": {
            "args": [24, 2],
            "returns": 3,
        },
        "fraction": {
            "args": [Fraction(5, 18), 3],
            "returns": -2,
        },
        "unit": {
            "args": [Fraction(7, 5), 2],
            "returns": 0,
        },
        "zero": {
            "args": [0, 5],
            "returns": padic.INFINITY,
        },
    },
    "residue": {
        "integer": {
            "args": [13, 2, 3],
            "returns": 5,
        },
        "inverse denominator": {
            "args": [Fraction(1, 3), 2, 2],
            "returns": 3,
        },
        "modulus one": {
            "args": [Fraction(4, 3), 3, 0],
            "returns": 0,
        },
        "not integral": {
            "args": [Fraction(1, 2), 2, 1],
            "raises": exceptions.ParameterRangeError,
        },
    },
    "unit_residues": {
        "level zero": {
            "args": [3, 0],
            "returns": [1],
        },
        "p=2 r=2": {
            "args": [2, 2],
            "returns": [1, 3],
        },
        "p=3 r=1": {
            "args": [3, 1],
            "returns": [1, 2],
        },
    },
    "coset": {
        "identity coset n=0": {
            "args": [0, 0, 1, 2, 0],
        },
        "l=0": {
            "args": [1, 0, 1, 3, 2],
        },
        "middle 2-adic": {
            "args": [1, 1, 1, 2, 2],
        },
        "middle 3-adic unit v": {
            "args": [-2, 1, 2, 3, 3],
        },
        "l=n": {
            "args": [2, 3, 1, 2, 3],
        },
        "l=2 of n=4": {
            "args": [0, 2, 5, 3, 4],
        },
        "l=1 of n=4": {
            "args": [3, 1, 7, 2, 4],
        },
    },
    "compact_cell": {
        "identity": {
            "args": [GL2Element.identity(3)],
            "returns": "N",
        },
        "weyl": {
            "args": [GL2Element.weyl(3)],
            "returns": "w",
        },
        "lower unipotent": {
            "args": [GL2Element.lower_unipotent(1, 2)],
            "returns": "N",
        },
        "not compact": {
            "args": [GL2Element.diagonal(2, 2)],
            "raises": exceptions.ParameterRangeError,
        },
    },
}


@pytest.mark.parametrize_test_case("test", TEST_CASES["valuation"])
def test_valuation(test: dict, function_tester: Callable) -> None:
    """Test valuations of rationals, including zero."""
    function_tester(test, padic.valuation)


@pytest.mark.parametrize_test_case("test", TEST_CASES["residue"])
def test_residue(test: dict, function_tester: Callable) -> None:
    """Test reduction of p-integral rationals."""
    function_tester(test, padic.residue)


@pytest.mark.parametrize_test_case("test", TEST_CASES["unit_residues"])
def test_unit_residues(test: dict, function_tester: Callable) -> None:
    """Test unit residue enumeration."""
    function_tester(test, padic.unit_residues)


@pytest.mark.parametrize_test_case("test", TEST_CASES["coset"])
def test_coset_position(test: dict) -> None:
    """Test that the representative g_{t,l,v} is located in its own double coset."""
    t, l, v, p, n = test["args"]
    g = padic.g_tlv(t, l, v, p)
    position = padic.coset_position(g, n)
    assert (position.t, position.l) == (t, min(l, n) if n else 0)
    assert position.witness.in_k1(n)
    assert position.reconstruct() == g
    if n and l <= n:
        assert position.v_class == padic.residue(v, p, min(l, n - l))


@pytest.mark.parametrize_test_case("test", TEST_CASES["coset"])
def test_coset_position_invariant(test: dict) -> None:
    """Test that the position is unchanged by the left and right factors of the decomposition."""
    t, l, v, p, n = test["args"]
    g = padic.g_tlv(t, l, v, p)
    moved = (
        GL2Element.central(Fraction(p) ** 2 * 7, p)
        @ GL2Element.unipotent(Fraction(3, p), p)
        @ g
        @ GL2Element(1, 1, p**n, 1 + p**n, p)
    )
    assert moved.prime == p
    before = padic.coset_position(g, n)
    after = padic.coset_position(moved, n)
    assert (after.t, after.l, after.v_class) == (before.t, before.l, before.v_class)


@pytest.mark.parametrize_test_case("test", TEST_CASES["compact_cell"])
def test_compact_cell(test: dict, function_tester: Callable) -> None:
    """Test the two cell partition of the maximal compact."""
    function_tester(test, padic.compact_cell)


def test_iwasawa_decompose() -> None:
    """Test that the Iwasawa factors multiply back to the input."""
    p = 3
    g = GL2Element(Fraction(1, 3), 2, 9, Fraction(5, 9), p)
    parts = padic.iwasawa_decompose(g)
    assert parts.k.in_maximal_compact()
    rebuilt = (
        GL2Element.central(parts.z.value, p)
        @ GL2Element.unipotent(parts.x.value, p)
        @ GL2Element.diagonal(parts.y.value, p)
        @ parts.k
    )
    assert rebuilt == g


def test_matrix_invariants() -> None:
    """Test t, l, n0(g) and q(g) of a representative."""
    invariants = padic.matrix_invariants(padic.g_tlv(-1, 2, 1, 2), 4, 0)
    assert invariants == padic.MatrixInvariants(t=-1, l=2, n0g=2, qg=2)


def test_compact_residues() -> None:
    """Test the size of GL2(Z/p) and the identity enumeration at r = 0."""
    assert len(list(padic.compact_residues(2, 1))) == 6
    assert len(list(padic.compact_residues(3, 1))) == 48
    assert list(padic.compact_residues(5, 0)) == [(1, 0, 0, 1)]


def test_scalar_and_matrix_errors() -> None:
    """Test the failures of non-invertible values and negative levels."""
    with pytest.raises(exceptions.NotInvertibleError):
        GL2Element(1, 2, 2, 4, 3)
    with pytest.raises(exceptions.NotInvertibleError):
        padic.PAdicScalar(Fraction(3), 3) / 0
    with pytest.raises(exceptions.ParameterRangeError):
        padic.coset_position(GL2Element.identity(2), -1)
    scalar = padic.PAdicScalar(Fraction(18, 5), 3)
    assert (scalar.valuation, scalar.norm, scalar.unit_part) == (2, Fraction(1, 9), Fraction(2, 5))
    assert not scalar.is_unit and scalar.is_integral
