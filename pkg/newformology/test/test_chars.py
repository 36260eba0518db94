"""Unit tests for chars module."""

import json
from fractions import Fraction
from pathlib import Path
from typing import Callable

import pytest

from newformology import chars
from newformology import exceptions
from newformology.chars import AdditiveCharacter
from newformology.chars import ResidueCharacter

TEST_CASES = {
    "combine_roots": {
        "none": {
            "args": [],
            "returns": (0, 1),
        },
        "coprime moduli": {
            "args": [(1, 2), (1, 3)],
            "returns": (5, 6),
        },
        "cancelling": {
            "args": [(1, 4), (3, 4)],
            "returns": (0, 4),
        },
    },
    "additive exponent": {
        "integral": {
            "args": [3, 2],
            "returns": (0, 1),
        },
        "depth one": {
            "args": [3, Fraction(1, 3)],
            "returns": (1, 3),
        },
        "depth two": {
            "args": [3, Fraction(5, 9)],
            "returns": (5, 9),
        },
        "negative numerator": {
            "args": [2, Fraction(-1, 4)],
            "returns": (3, 4),
        },
    },
    "unit_group": {
        "p=2 level 1": {
            "args": [2, 1],
            "attributes": {"generators": (), "orders": ()},
        },
        "p=2 level 2": {
            "args": [2, 2],
            "attributes": {"generators": (3,), "orders": (2,)},
        },
        "p=2 level 3": {
            "args": [2, 3],
            "attributes": {"generators": (7, 5), "orders": (2, 2)},
        },
        "p=3 level 2": {
            "args": [3, 2],
            "attributes": {"generators": (2,), "orders": (6,)},
        },
    },
    "tilde count": {
        "p=2 a=3": {
            "args": [2, 3],
            "returns": 4,
        },
        "p=3 a=2": {
            "args": [3, 2],
            "returns": 6,
        },
        "p=5 a=1": {
            "args": [5, 1],
            "returns": 4,
        },
        "a=0": {
            "args": [7, 0],
            "returns": 1,
        },
        "negative": {
            "args": [3, -1],
            "raises": exceptions.ParameterRangeError,
        },
    },
    "primitive count": {
        "p=2 a=1": {
            "args": [2, 1],
            "returns": 0,
        },
        "p=2 a=2": {
            "args": [2, 2],
            "returns": 1,
        },
        "p=2 a=3": {
            "args": [2, 3],
            "returns": 2,
        },
        "p=3 a=1": {
            "args": [3, 1],
            "returns": 1,
        },
        "p=3 a=2": {
            "args": [3, 2],
            "returns": 4,
        },
        "p=5 a=1": {
            "args": [5, 1],
            "returns": 3,
        },
    },
    "epsilon modulus": {
        "p=2 a=2": {"args": [2, 2]},
        "p=2 a=3": {"args": [2, 3]},
        "p=3 a=1": {"args": [3, 1]},
        "p=3 a=2": {"args": [3, 2]},
        "p=5 a=1": {"args": [5, 1]},
    },
}


@pytest.mark.parametrize_test_case("test", TEST_CASES["combine_roots"])
def test_combine_roots(test: dict, function_tester: Callable) -> None:
    """Test multiplication of roots of unity given as exponent pairs."""
    function_tester(test, chars.combine_roots)


@pytest.mark.parametrize_test_case("test", TEST_CASES["additive exponent"])
def test_additive_exponent(test: dict, function_tester: Callable) -> None:
    """Test that psi is trivial on Z_p and reads the fractional part otherwise."""

    def _exponent(p: int, x: Fraction) -> tuple[int, int]:
        return AdditiveCharacter(p).exponent(x)

    function_tester(test, _exponent)


@pytest.mark.parametrize_test_case("test", TEST_CASES["unit_group"])
def test_unit_group(test: dict, function_tester: Callable) -> None:
    """Test the generator presentation of residue unit groups."""
    function_tester(test, chars.ResidueUnitGroup)


@pytest.mark.parametrize_test_case("test", TEST_CASES["tilde count"])
def test_enumerate_tilde_characters(test: dict, function_tester: Callable) -> None:
    """Test that every character of the residue unit group is enumerated once."""
    function_tester(test, lambda p, a: len(chars.enumerate_tilde_characters(p, a)))


@pytest.mark.parametrize_test_case("test", TEST_CASES["primitive count"])
def test_primitive_characters(test: dict, function_tester: Callable) -> None:
    """Test the number of characters of exact conductor."""
    function_tester(test, lambda p, a: len(chars.primitive_characters(p, a)))


@pytest.mark.parametrize_test_case("test", TEST_CASES["epsilon modulus"])
def test_gl1_epsilon_modulus(test: dict) -> None:
    """Test that epsilon factors of primitive characters have absolute value one, exactly."""
    p, a = test["args"]
    for mu in chars.primitive_characters(p, a):
        assert chars.gl1_epsilon(mu).abs2() == 1
        beta = chars.CyclotomicNumber.root_of_unity(1, 3)
        assert chars.gl1_epsilon(mu, beta).abs2() == 1


def test_gauss_sum_values() -> None:
    """Test Gauss sums of the trivial character and of primitive characters at integral points."""
    trivial = ResidueCharacter.trivial(5, 1)
    assert chars.gauss_sum(Fraction(1, 5), trivial) == Fraction(-1, 4)
    assert chars.gauss_sum(Fraction(1, 25), trivial) == 0
    assert chars.gauss_sum(1, trivial) == 1
    (mu,) = chars.primitive_characters(3, 1)
    assert chars.gauss_sum(3, mu) == 0
    assert chars.gl1_epsilon(ResidueCharacter.trivial(3)) == 1


def test_residue_character_algebra() -> None:
    """Test products, inverses, levels and labels of residue characters."""
    mu = chars.primitive_characters(3, 2)[0]
    assert mu.conductor == 2
    assert (mu * mu.inverse()).is_trivial
    lifted = mu.at_level(3)
    assert lifted.same_as(mu)
    assert lifted.label == mu.label
    assert lifted(4) == mu(4)
    with pytest.raises(ValueError):
        mu.at_level(1)
    legendre = chars.legendre_character(3)
    assert legendre.conductor == 1
    assert legendre(2) == -1
    assert legendre(4) == 1
    with pytest.raises(exceptions.UnsupportedError):
        chars.legendre_character(2)


def test_character_cache(tmp_path: Path) -> None:
    """Test round trips, stale entries and disabled caches."""
    cache = chars.CharacterCache(tmp_path / "cache")
    assert cache.load(("tilde", 3, 2)) is None
    first = chars.enumerate_tilde_characters(3, 2, cache)
    assert (tmp_path / "cache" / "tilde-3-2.json").exists()
    assert chars.enumerate_tilde_characters(3, 2, cache) == first

    path = tmp_path / "cache" / "tilde-3-2.json"
    entry = json.loads(path.read_text(encoding="utf-8"))
    entry["version"] = chars.CACHE_VERSION + 1
    path.write_text(json.dumps(entry), encoding="utf-8")
    assert cache.load(("tilde", 3, 2)) is None

    path.write_text("{", encoding="utf-8")
    with pytest.raises(exceptions.CacheError):
        cache.load(("tilde", 3, 2))

    disabled = chars.CharacterCache(None)
    disabled.store(("tilde", 3, 2), [])
    assert disabled.load(("tilde", 3, 2)) is None


def test_quadratic_extension() -> None:
    """Test invariants of unramified and ramified extensions."""
    unramified = chars.QuadraticExtension(3, "unramified")
    ramified = chars.QuadraticExtension(5, "ramified")
    assert (unramified.discriminant, unramified.residue_cardinality, unramified.eta_at_prime()) == (2, 9, -1)
    assert (ramified.discriminant, ramified.residue_cardinality, ramified.different_exponent) == (5, 5, 1)
    assert len(unramified.units(1)) == 8
    assert len(ramified.units(2)) == 20
    assert unramified.multiply((0, 1), (0, 1), 1) == (2, 0)
    with pytest.raises(exceptions.UnsupportedError):
        chars.QuadraticExtension(2, "ramified")
    with pytest.raises(ValueError):
        chars.QuadraticExtension(3, "split")


def test_supercuspidal_characters() -> None:
    """Test the regular characters of the unramified extension at p = 3 and their epsilon factors."""
    extension = chars.QuadraticExtension(3, "unramified")
    characters = list(chars.supercuspidal_characters(extension, 1))
    assert len(characters) == 6
    for xi in characters:
        assert xi.conductor == 1
        assert not xi.is_galois_invariant()
        assert xi.epsilon().abs2() == 1
