"""Unit tests for counting module."""

from fractions import Fraction
from typing import Callable

import pytest

from newformology import counting
from newformology import exceptions
from newformology.counting import HalfPlanePoint
from newformology.counting import LatticeMatrix

_I = HalfPlanePoint(Fraction(0), Fraction(1))

TEST_CASES = {
    "hecke_convolution_expand": {
        "identity": {
            "args": [1, 1],
            "returns": {1: 1},
        },
        "same prime": {
            "args": [2, 2],
            "returns": {1: 1, 4: 1},
        },
        "distinct primes": {
            "args": [2, 3],
            "returns": {6: 1},
        },
        "prime power against prime": {
            "args": [4, 2],
            "returns": {2: 1, 8: 1},
        },
        "same prime with central character": {
            "args": [2, 2, {2: -1}],
            "returns": {1: 1, 4: -1},
        },
        "zero index": {
            "args": [0, 1],
            "raises": exceptions.ParameterRangeError,
        },
    },
    "amplifier_primes": {
        "Lambda=2": {
            "args": [2, 1],
            "returns": [2, 3],
        },
        "level removes every prime": {
            "args": [2, 6],
            "returns": [],
        },
        "Lambda=10 N=7": {
            "args": [10, 7],
            "returns": [11, 13, 17, 19],
        },
        "fractional Lambda": {
            "args": [2.5, 1],
            "returns": [3, 5],
        },
    },
    "check_hecke_relation": {
        "extremal": {
            "args": [{2: (0, -1)}, {2: 1}],
            "returns": None,
        },
        "relation broken": {
            "args": [{2: (1, 1)}, {2: 1}],
            "raises": exceptions.ConstraintError,
        },
        "omega not unitary": {
            "args": [{2: (2, 2)}, {2: 2}],
            "raises": exceptions.ConstraintError,
        },
    },
    "point_pair_invariant": {
        "identity": {
            "args": [_I, LatticeMatrix(c=0, d=1, a=1, b=0)],
            "returns": 0,
        },
        "rotation fixing i": {
            "args": [_I, LatticeMatrix(c=-1, d=1, a=1, b=1)],
            "returns": 0,
        },
        "dilation to 2i": {
            "args": [_I, LatticeMatrix(c=0, d=1, a=2, b=0)],
            "returns": Fraction(1, 8),
        },
        "translation": {
            "args": [_I, LatticeMatrix(c=0, d=1, a=1, b=1)],
            "returns": Fraction(1, 4),
        },
    },
    "count_close_lattice": {
        "identity only": {
            "args": ["1i", 1, 0, 1],
            "returns": 1,
        },
        "two rotations of determinant 2": {
            "args": ["1i", 2, 0, 1],
            "returns": 2,
        },
        "level two": {
            "args": ["1i", 1, 0, 2],
            "returns": 1,
        },
        "delta too large": {
            "args": ["1i", 1, 1, 1],
            "raises": exceptions.ParameterRangeError,
        },
        "l not coprime to level": {
            "args": ["1i", 2, 0.1, 2],
            "raises": exceptions.ParameterRangeError,
        },
    },
    "fundamental_membership": {
        "2i": {
            "args": ["2i", 1],
            "returns": True,
        },
        "i": {
            "args": ["1i", 1],
            "returns": True,
        },
        "too low": {
            "args": ["0.1i", 1],
            "returns": False,
        },
        "corner of the modular domain": {
            "args": [HalfPlanePoint(Fraction(1, 2), Fraction(3, 4)), 1],
            "returns": True,
        },
        "boundary height under a circle at L=6": {
            "args": [HalfPlanePoint(Fraction(1, 2), Fraction(1, 48)), 6],
            "returns": False,
        },
        "below a circle": {
            "args": ["0.5+0.8i", 1],
            "returns": False,
        },
        "non-positive bound": {
            "args": ["1i", 0],
            "raises": exceptions.ParameterRangeError,
        },
    },
    "counting_bound": {
        "delta zero": {
            "args": [1, 0, 1, 1],
            "returns": 1.0,
        },
        "all terms one": {
            "args": [1, 1, 1, 1],
            "returns": 5.0,
        },
    },
}


class _FlatKernel:
    """Kernel of constant size one on u <= 1."""

    height = 1.0

    def __call__(self, u: float) -> float:
        return 1.0 if u <= 1 else 0.0


@pytest.mark.parametrize_test_case("test", TEST_CASES["hecke_convolution_expand"])
def test_hecke_convolution_expand(test: dict, function_tester: Callable) -> None:
    """Test the expansion of kappa_m * kappa_n^* into single Hecke operators."""
    function_tester(test, counting.hecke_convolution_expand)


@pytest.mark.parametrize_test_case("test", TEST_CASES["amplifier_primes"])
def test_amplifier_primes(test: dict, function_tester: Callable) -> None:
    """Test the prime set of the amplifier."""
    function_tester(test, counting.amplifier_primes)


@pytest.mark.parametrize_test_case("test", TEST_CASES["check_hecke_relation"])
def test_check_hecke_relation(test: dict, function_tester: Callable) -> None:
    """Test validation of Hecke eigenvalue inputs."""
    function_tester(test, counting.check_hecke_relation)


@pytest.mark.parametrize_test_case("test", TEST_CASES["point_pair_invariant"])
def test_point_pair_invariant(test: dict, function_tester: Callable) -> None:
    """Test the exact point pair invariant u(z, gamma z)."""
    function_tester(test, counting.point_pair_invariant)


@pytest.mark.parametrize_test_case("test", TEST_CASES["count_close_lattice"])
def test_count_close_lattice(test: dict, function_tester: Callable) -> None:
    """Test counts of lattice matrices close to the identity."""
    function_tester(test, counting.count_close_lattice)


@pytest.mark.parametrize_test_case("test", TEST_CASES["fundamental_membership"])
def test_fundamental_membership(test: dict, function_tester: Callable) -> None:
    """Test exact membership in F_L."""
    function_tester(test, counting.fundamental_membership)


@pytest.mark.parametrize_test_case("test", TEST_CASES["counting_bound"])
def test_counting_bound(test: dict, function_tester: Callable) -> None:
    """Test the comparison bound at unit parameters."""
    function_tester(test, counting.counting_bound)


def test_half_plane_point() -> None:
    """Test parsing of points and rejection of the lower half plane."""
    point = HalfPlanePoint.from_complex("0.3+0.9i")
    assert point.x == Fraction(3, 10)
    assert point.y_squared == Fraction(81, 100)
    assert str(HalfPlanePoint.from_complex(2j)) == "0+2i"
    with pytest.raises(exceptions.ParameterRangeError):
        HalfPlanePoint.from_complex("1-1i")
    with pytest.raises(exceptions.ParameterRangeError):
        HalfPlanePoint(Fraction(0), Fraction(0))


def test_enumeration_order_and_action() -> None:
    """Test that enumerated matrices fix i when delta is zero and come ordered by (c, d, a, b)."""
    found = counting.enumerate_close_lattice("1i", 2, 0)
    assert found == [LatticeMatrix(c=-1, d=1, a=1, b=1), LatticeMatrix(c=1, d=1, a=1, b=-1)]
    for gamma in found:
        assert gamma.det == 2
        assert abs(gamma.act(1j) - 1j) < 1e-12


def test_double_box_recount() -> None:
    """Test that a wider enumeration box finds nothing new."""
    report = counting.double_box_recount(HalfPlanePoint.from_complex("0.3+0.9i"), 1, 0.5, 1)
    assert report.passed, report.details
    assert report.details["count"] > 0
    assert counting.random_recount_check(configurations=5, seed=2).passed


def test_build_amplifier_extremal() -> None:
    """Test the amplifier built from the extremal eigenvalues lambda(l) = 0."""
    values = {2: (0, -1), 3: (0, -1)}
    amplifier = counting.build_amplifier(2, 1, values=values, omega={2: 1, 3: 1})
    assert amplifier.primes == [2, 3]
    assert amplifier.lower_bound == 2
    assert set(amplifier.c) == {2, 3, 4, 9}
    assert abs(amplifier.y[1] - 4) < 1e-12
    report = counting.amplifier_check(amplifier)
    assert report.passed, report.details
    with pytest.raises(exceptions.ConstraintError):
        counting.build_amplifier(2, 1, values={2: (1, 1), 3: (0, -1)}, omega={2: 1, 3: 1})
    with pytest.raises(exceptions.ParameterRangeError):
        counting.build_amplifier(0.5, 1)


def test_build_amplifier_sampled() -> None:
    """Test the support shapes of y_l for sampled eigenvalues."""
    amplifier = counting.build_amplifier(10, 7, seed=4)
    assert amplifier.primes == [11, 13, 17, 19]
    assert amplifier.lower_bound >= 4 - 1e-9
    report = counting.amplifier_check(amplifier)
    assert report.passed, report.details
    assert counting.build_amplifier(10, 7, seed=4).y == amplifier.y


def test_sampler_check() -> None:
    """Test |lambda(l)| + |lambda(l^2)| >= 1 over Sato-Tate draws."""
    report = counting.sampler_check(draws=200, seed=1, primes=(2, 3))
    assert report.passed, report.details
    assert report.details["minimum"] >= 1 - 1e-12


def test_hecke_identity_check() -> None:
    """Test that kappa_1 acts as the identity."""
    report = counting.hecke_identity_check(((2, 2), (4, 2), (3, 5), (9, 3)), {2: -1, 3: 1j, 5: 1})
    assert report.passed, report.details


def test_monotonicity() -> None:
    """Test monotonicity of N in delta and along level chains."""
    report = counting.monotonicity_check(HalfPlanePoint.from_complex("1i"), l_max=4, deltas=(0.01, 0.1))
    assert report.passed, report.details
    sweep = counting.counting_sweep(points=("2i",), l_max=3, deltas=(0.01, 0.1), levels=(1, 2))
    assert sweep.passed, sweep.details
    assert sweep.measured_constant > 0


def test_geometric_side() -> None:
    """Test the geometric side with a flat kernel and the rejection of points outside F_N2."""
    value, report = counting.geometric_side("2i", 1, 1, _FlatKernel())
    assert value > 0
    assert report.details["matrices"] > 0
    assert report.measured_constant == pytest.approx(value / report.details["bound"])
    with pytest.raises(exceptions.ParameterRangeError):
        counting.geometric_side("0.1i", 1, 1, _FlatKernel())


@pytest.mark.slow
def test_random_recount_full() -> None:
    """Test double-box recounts over a hundred random configurations."""
    assert counting.random_recount_check(configurations=100, seed=0).passed
