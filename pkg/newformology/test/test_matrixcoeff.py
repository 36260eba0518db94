"""Unit tests for matrixcoeff module."""

from fractions import Fraction
from typing import Callable

import pytest

from newformology import chars
from newformology import exceptions
from newformology import matrixcoeff
from newformology import pytest_utils
from newformology import reps
from newformology.cyclo import ComplexRing
from newformology.cyclo import ExactRing
from newformology.padic import GL2Element
from newformology.padic import g_tlv
from newformology.reports import FLOOR
from newformology.reports import STATUS_INFO

TEST_CASES = {
    "integ_constants_verify": {
        "q=2 n=1": {"args": [2, 1]},
        "q=2 n=3": {"args": [2, 3]},
        "q=3 n=2": {"args": [3, 2]},
        "q=5 n=2": {"args": [5, 2]},
    },
    "truncation_length": {
        "no roots": {
            "args": [0.0],
            "returns": 0,
        },
        "no decay": {
            "args": [1.0],
            "raises": exceptions.ParameterRangeError,
        },
    },
    "delta": {
        "unramified p=3": {"args": [3, reps.UNRAMIFIED_PS, 0]},
        "steinberg p=2": {"args": [2, reps.STEINBERG, 1]},
        "steinberg p=3": {"args": [3, reps.STEINBERG, 1]},
        "ramified p=2 n=2": {"args": [2, reps.RAMIFIED_PS, 2]},
        "ramified p=3 n=1": {"args": [3, reps.RAMIFIED_PS, 1]},
    },
    "exact_delta": {
        "unramified p=3": {
            "args": [3, reps.UNRAMIFIED_PS, 0],
            "returns": (Fraction(1), Fraction(1)),
        },
        "steinberg p=2": {
            "args": [2, reps.STEINBERG, 1],
            "returns": (Fraction(1, 3), Fraction(1)),
        },
        "steinberg p=3": {
            "args": [3, reps.STEINBERG, 1],
            "returns": (Fraction(1, 4), Fraction(1)),
        },
        "ramified p=3 n=1": {
            "args": [3, reps.RAMIFIED_PS, 1],
            "returns": (Fraction(1, 4), Fraction(1)),
        },
    },
    "borel_volume": {
        "j=0 k=0": {
            "args": [2, 0, 0, 1],
            "returns": Fraction(1),
        },
        "j=0 k=1": {
            "args": [2, 0, 1, 1],
            "returns": Fraction(1, 4),
        },
        "j=1 k=0": {
            "args": [2, 1, 0, 1],
            "returns": Fraction(0),
        },
        "j=2 k=1": {
            "args": [3, 2, 1, 2],
            "returns": Fraction(0),
        },
        "j=1 k=2": {
            "args": [3, 1, 2, 2],
            "returns": Fraction(1, 81),
        },
    },
}


@pytest.mark.parametrize_test_case("test", TEST_CASES["integ_constants_verify"])
def test_integ_constants_verify(test: dict) -> None:
    """Test the volume identity against the enumerated Borel integrals."""
    q, n = test["args"]
    report = matrixcoeff.integ_constants_verify(q, n)
    assert report.passed, report.details
    assert report.details["j=0"] == 1
    for j in range(n + 1):
        expected = [Fraction(1, q ** (2 * k)) if k >= j else 0 for k in range(n + 1)]
        assert report.details[f"borel[j={j}]"] == expected


@pytest.mark.parametrize_test_case("test", TEST_CASES["borel_volume"])
def test_borel_volume(test: dict, function_tester: Callable) -> None:
    """Test single Borel integrals of the indicator of K0(p^j)."""
    function_tester(test, matrixcoeff.borel_volume)


@pytest.mark.parametrize_test_case("test", TEST_CASES["truncation_length"])
def test_truncation_length(test: dict, function_tester: Callable) -> None:
    """Test the tail length of diagonal sums."""
    function_tester(test, matrixcoeff._truncation_length)  # pylint: disable=protected-access


def test_truncation_length_decay() -> None:
    """Test that the truncated tail is below the threshold."""
    rho = 3**-0.5
    length = matrixcoeff._truncation_length(rho)  # pylint: disable=protected-access
    assert (length + 1) * rho**length < matrixcoeff.TRUNCATION


@pytest.mark.parametrize_test_case("test", TEST_CASES["delta"])
def test_delta_pi(test: dict, locked_constants: pytest_utils.LockedConstantsFixture) -> None:
    """Test that delta_pi gives an integral dimension, clears the 1/8 floor and keeps its locked floor."""
    pi = reps.representation_for(*test["args"])
    report = matrixcoeff.delta_pi(pi)
    assert report.passed, report.details
    assert report.measured_constant >= 1 / 8
    assert locked_constants(report, FLOOR).passed, report.details


@pytest.mark.parametrize_test_case("test", TEST_CASES["exact_delta"])
def test_exact_delta(test: dict, function_tester: Callable) -> None:
    """Test exact delta_pi and dim(pi') where Phi' is known in closed form."""

    def delta_and_dimension(*args: int) -> tuple:
        details = matrixcoeff.delta_pi(reps.representation_for(*args)).details
        return details["delta"], details["dimension"]

    function_tester(test, delta_and_dimension)


@pytest.mark.parametrize_test_case("test", TEST_CASES["delta"])
def test_convolution_verify(test: dict) -> None:
    """Test the idempotency Phi' * Phi' = delta Phi' and the eigenvector property of W'."""
    pi = reps.representation_for(*test["args"])
    report = matrixcoeff.convolution_verify(pi, samples=4, seed=3, eigen_samples=2)
    assert report.passed, report.details


def test_unramified_coefficient() -> None:
    """Test the exact coefficient of an unramified representation."""
    pi = reps.representation_for(3, reps.UNRAMIFIED_PS, 0)
    coefficient = matrixcoeff.TruncatedCoefficient(pi)
    assert coefficient.exact
    assert coefficient.delta() == 1
    assert coefficient.compact_size == 1
    assert coefficient.phi_prime(GL2Element.diagonal(3, 3)) == 0
    assert coefficient.phi_prime(GL2Element.central(Fraction(1, 3), 3)) == 1


def test_ring_selection() -> None:
    """Test exact and complex evaluation choices."""
    steinberg = reps.representation_for(2, reps.STEINBERG, 1)
    dihedral = reps.representation_for(3, reps.DIHEDRAL, 2)
    trivial = chars.ResidueCharacter.trivial(3)
    repeated = reps.PrincipalSeries(reps.GL1Character(trivial), reps.GL1Character(trivial))
    assert isinstance(matrixcoeff.ring_for(steinberg), ExactRing)
    assert isinstance(matrixcoeff.ring_for(dihedral), ExactRing)
    assert isinstance(matrixcoeff.ring_for(repeated), ComplexRing)
    with pytest.raises(exceptions.ParameterRangeError):
        matrixcoeff.TruncatedCoefficient(repeated, "exact")
    assert matrixcoeff.TruncatedCoefficient(repeated).tail_bound < 1e-9
    catalog = reps.build_catalog(2, 4)
    assert all(pi.conductor <= 3 for pi in matrixcoeff.exact_sublist(catalog))
    assert len(matrixcoeff.exact_sublist(catalog)) == 5


def test_exact_sublist_rings() -> None:
    """Test that every fully enumerated entry is evaluated in the exact ring."""
    for p in (2, 3):
        for pi in matrixcoeff.exact_sublist(reps.build_catalog(p, 3)):
            assert isinstance(matrixcoeff.ring_for(pi), ExactRing), pi.label


@pytest.mark.slow
def test_exact_sublist_is_exact() -> None:
    """Test that every fully enumerated entry gets an exact delta and an integral dimension."""
    for p in (2, 3):
        for pi in matrixcoeff.exact_sublist(reps.build_catalog(p, 3)):
            report = matrixcoeff.delta_pi(pi)
            assert report.passed, report.details
            assert report.params["ring"] == "exact"
            assert isinstance(report.details["delta"], Fraction)
            assert report.details["dimension"].denominator == 1
            assert report.details["tail_bound"] == 0


def test_steinberg_coefficient() -> None:
    """Test that Phi' of the Steinberg representation is 1 on K0 and vanishes with its square off Z K0."""
    pi = reps.representation_for(2, reps.STEINBERG, 1)
    coefficient = matrixcoeff.TruncatedCoefficient(pi)
    assert coefficient.compact_size == 6
    assert len(coefficient.table()) == 2
    assert coefficient.phi_prime(GL2Element.lower_unipotent(1, 2)) == 1
    assert coefficient.phi_prime(GL2Element.unipotent(1, 2)) == 0
    for h in matrixcoeff.off_support(2, 1):
        assert coefficient.phi_prime(h) == 0
        assert coefficient.convolve_at(h) == 0
    assert coefficient.convolve_at(GL2Element.identity(2)) == coefficient.delta()


def test_eigenvalue_dichotomy() -> None:
    """Test that R(Phi') acts by 0 or delta on translates of the newform."""
    coefficient = matrixcoeff.TruncatedCoefficient(reps.representation_for(2, reps.STEINBERG, 1))
    report = matrixcoeff.eigenvalue_dichotomy(coefficient, seed=1, vectors=2)
    assert report.passed, report.details


def test_supercuspidal_formula() -> None:
    """Test the closed formula against the inner product backend for a dihedral representation."""
    pi = reps.representation_for(3, reps.DIHEDRAL, 2)
    report = matrixcoeff.formula_cross_check(pi, x_values=(0, 1))
    assert report.passed, report.details
    assert report.details["points"] == 2 * (2 + 2) * 9
    g = g_tlv(-2, 1, 1, 3)
    assert matrixcoeff.phi_value(pi, g, matrixcoeff.FORMULA) == matrixcoeff.phi_value(pi, g)
    assert matrixcoeff.phi_value(pi, GL2Element.identity(3)) == 1
    with pytest.raises(ValueError):
        matrixcoeff.phi_value(pi, g, "series")


def test_cross_term_orthogonality() -> None:
    """Test that the cross terms of the second moment vanish exactly."""
    pi = reps.representation_for(3, reps.DIHEDRAL, 2)
    report = matrixcoeff.cross_term_orthogonality(pi)
    assert report.passed, report.details
    assert report.details["diagonal"] > 0
    with pytest.raises(exceptions.UnsupportedError):
        matrixcoeff.cross_term_orthogonality(reps.representation_for(3, reps.STEINBERG, 1))


def test_non_supercuspidal_formula() -> None:
    """Test that the closed formula refuses principal series and out of range cosets."""
    coefficient = matrixcoeff.TruncatedCoefficient(reps.representation_for(3, reps.RAMIFIED_PS, 1))
    with pytest.raises(exceptions.UnsupportedError):
        coefficient.phi_formula(0, 0, 1, 0)
    dihedral = matrixcoeff.TruncatedCoefficient(reps.representation_for(3, reps.DIHEDRAL, 2))
    with pytest.raises(exceptions.ParameterRangeError):
        dihedral.phi_formula(0, 2, 1, 0)


def test_dimension_bound_check() -> None:
    """Test the dimension ratio of principal series and the informational result of supercuspidals."""
    report = matrixcoeff.dimension_bound_check(reps.representation_for(2, reps.STEINBERG, 1))
    assert report.passed, report.details
    assert report.measured_constant > 0
    dihedral = reps.representation_for(3, reps.DIHEDRAL, 2)
    assert matrixcoeff.dimension_bound_check(dihedral).status == STATUS_INFO


@pytest.mark.slow
def test_dihedral_delta_and_idempotency() -> None:
    """Test the exact delta and idempotency of a dihedral representation at p = 3."""
    pi = reps.representation_for(3, reps.DIHEDRAL, 2)
    delta = matrixcoeff.delta_pi(pi)
    assert delta.passed, delta.details
    assert isinstance(delta.details["delta"], Fraction)
    convolution = matrixcoeff.convolution_verify(pi, samples=3, seed=0, eigen_samples=1)
    assert convolution.passed, convolution.details
