"""Unit tests for archimedean module."""

import math
from typing import Callable

import pytest

from newformology import archimedean
from newformology import exceptions

TEST_CASES = {
    "bessel_k_it": {
        "order zero at one": {
            "args": [0, 1],
            "returns": pytest.approx(0.42102443824070834, rel=1e-8),
        },
        "order zero at two": {
            "args": [0, 2],
            "returns": pytest.approx(0.11389387274953344, rel=1e-8),
        },
        "argument too large": {
            "args": [1, 600],
            "raises": exceptions.ParameterRangeError,
        },
        "argument zero": {
            "args": [1, 0],
            "raises": exceptions.ParameterRangeError,
        },
        "order too large": {
            "args": [101, 1],
            "raises": exceptions.ParameterRangeError,
        },
    },
    "envelope": {
        "transition": {
            "args": [8, 8],
            "returns": 2.0,
        },
        "far from transition": {
            "args": [16, 8],
            "returns": 1.0,
        },
        "capped": {
            "args": [9, 8],
            "returns": 2.0,
        },
    },
    "bessel_bound_ratio": {
        "order below one": {
            "args": [0.5, 1],
            "raises": exceptions.ParameterRangeError,
        },
        "non-positive argument": {
            "args": [1, 0],
            "raises": exceptions.ParameterRangeError,
        },
    },
    "bessel_oracle_check": {
        "t=0 y=1": {"args": [0, 1]},
        "t=2 y=3": {"args": [2, 3]},
        "t=4 y=20": {"args": [4, 20]},
    },
}


@pytest.mark.parametrize_test_case("test", TEST_CASES["bessel_k_it"])
def test_bessel_k_it(test: dict, function_tester: Callable) -> None:
    """Test K_it(y) against known values and the validated range."""
    function_tester(test, archimedean.bessel_k_it)


@pytest.mark.parametrize_test_case("test", TEST_CASES["envelope"])
def test_envelope(test: dict, function_tester: Callable) -> None:
    """Test f(y) = min(T^1/3, |y / T - 1|^-1/2)."""
    function_tester(test, archimedean.envelope)


@pytest.mark.parametrize_test_case("test", TEST_CASES["bessel_bound_ratio"])
def test_bessel_bound_ratio_range(test: dict, function_tester: Callable) -> None:
    """Test the parameter range of the Bessel bound ratio."""
    function_tester(test, archimedean.bessel_bound_ratio)


@pytest.mark.parametrize_test_case("test", TEST_CASES["bessel_oracle_check"])
def test_bessel_oracle_check(test: dict) -> None:
    """Test quadrature against the trapezoidal oracle at two steps and the arbitrary precision reference."""
    report = archimedean.bessel_oracle_check(*test["args"])
    assert report.passed, report.details


def test_bessel_regimes() -> None:
    """Test the tail envelope, the cancellation switch and the cross check of both evaluators."""
    assert abs(archimedean.bessel_k_it(10, 100)) <= 10 * math.exp(-100)
    evaluator = archimedean.BesselEvaluator(8)
    assert evaluator.cancels(1)
    assert not evaluator.cancels(20)
    assert isinstance(evaluator(1), float)
    assert archimedean.BesselEvaluator(3).cross_check((1.0, 5.0, 30.0)) < archimedean.RELATIVE_ACCURACY


def test_bessel_bound_ratio() -> None:
    """Test that the exponential regime is small and the transition region is finite."""
    assert archimedean.bessel_bound_ratio(3, 9) < 1
    assert math.isfinite(archimedean.bessel_bound_ratio(10, 10))
    report = archimedean.envelope_sweep(orders=(1, 2), ratios=(0.5, 1.0, 3.0))
    assert report.passed, report.details
    assert len(report.details["rows"]) == 6
    assert report.measured_constant > 0


def test_kernel_closed_forms() -> None:
    """Test the support, profile and spherical transform of an untabulated kernel."""
    kernel = archimedean.ArchKernel(height=2.0)
    assert kernel.support == pytest.approx((math.sqrt(2) - 1) / 2)
    assert kernel.profile(1.0) == 0
    assert kernel.g(1.0) == 0
    assert kernel.profile(0.1) == pytest.approx(kernel.profile(-0.1))
    assert kernel.spherical_transform(2.0) > 0
    assert min(kernel.spherical_transform(t) for t in (0.0, 0.5, 1.0, 4.0, 8.0)) >= 0
    with pytest.raises(exceptions.ParameterRangeError):
        archimedean.kernel_build(0.5)


def test_kernel_build_and_verify() -> None:
    """Test the tabulated kernel against its support, envelope and spectral properties."""
    kernel = archimedean.kernel_build(2.0, points=80)
    assert kernel.envelope_ratio() == pytest.approx(1.0)
    assert kernel(1.5) == 0
    report = archimedean.kernel_verify(kernel, spectral=(0.0, 1.0, 2.0, 4.0))
    assert report.passed, report.details
    assert report.measured_constant == pytest.approx(kernel.spherical_transform(2.0))


def test_tail_mass() -> None:
    """Test that widening the truncation window shrinks the Bessel tail."""
    wide = archimedean.tail_mass(5, 0.5, 1, 32)
    assert 0 <= wide < 1e-12
    assert archimedean.tail_mass(5, 0.5, 1, 1) > wide


@pytest.mark.slow
def test_chain_consistency() -> None:
    """Test the transform chain of the tabulated kernel against the closed form."""
    kernel = archimedean.kernel_build(2.0)
    report = archimedean.chain_consistency(kernel)
    assert report.passed, report.details


@pytest.mark.slow
def test_tail_criterion() -> None:
    """Test that a finite multiplier suffices for every default configuration."""
    report = archimedean.tail_criterion()
    assert report.passed, report.details
    assert report.measured_constant > 0
