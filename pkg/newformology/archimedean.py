"""K-Bessel functions of imaginary order and the archimedean test kernel.

The kernel is a point pair invariant k(u) built backwards through the radial transform chain

    Q(v) = integral over u >= v of k(u) (u - v)^-1/2 du,   g(r) = 2 Q(sinh^2(r / 2)),   h(t) = integral g(r) e^(irt) dr,

from g(r) = c cos(T r) B(r) with B = b * b the self-convolution of a smooth bump b supported on |r| <= R0 / 4,
R0 = 2 arcsinh(1). Then h(t) = c (b^(t - T)^2 + b^(t + T)^2) / 2 is non-negative for real t and of size c b^(0)^2 / 2
at t = T. Since g vanishes for |r| >= R0 / 2, k vanishes for u > sinh^2(R0 / 4).
The constant c is the largest value keeping |k(u)| <= min(T, T^1/2 u^-1/4) on the tabulation grid.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from dataclasses import field
from functools import cached_property
from functools import lru_cache

import mpmath
import numpy as np
from scipy import integrate
from scipy import interpolate

from newformology.exceptions import ParameterRangeError
from newformology.logging import get_logger
from newformology.reports import CheckReport

# Validated range of the evaluator.
MAX_ORDER = 100.0
MAX_ARGUMENT = 500.0

# Integrand cut: e^(-y (cosh u - 1)) below e^-CUTOFF relative to its peak.
CUTOFF = 60.0

RELATIVE_ACCURACY = 1e-8

# Support radius in r of g = g0 * g0, matching u <= 1.
SUPPORT_RADIUS = 2 * math.asinh(1.0)

# Points of the u grid on which k is tabulated.
GRID_POINTS = 600

# Slack on the non-negativity of the spherical transform.
SPECTRAL_SLACK = 1e-8


@dataclass(frozen=True)
class BesselEvaluator:
    """K_it(y) for a fixed real order t.

    Attributes:
        order: The order parameter t.
        limit: Subdivision limit of the quadrature.
        relative: Requested relative accuracy.
    """

    order: float
    limit: int = 400
    relative: float = 1e-11

    def __post_init__(self) -> None:
        if not 0 <= self.order <= MAX_ORDER:
            raise ParameterRangeError(f"Order outside the validated range [0, {MAX_ORDER}]: {self.order}")

    def _check(self, y: float) -> None:
        if not 0 < y <= MAX_ARGUMENT:
            raise ParameterRangeError(f"Argument outside the validated range (0, {MAX_ARGUMENT}]: {y}")

    def cancels(self, y: float) -> bool:
        """Whether the cosine integral loses more than the requested accuracy to cancellation."""
        return self.order > 5 and y < 1.5 * self.order

    def integral(self, y: float) -> float:
        """K_it(y) = integral over u >= 0 of e^(-y cosh u) cos(t u) du, truncated where the integrand is negligible."""
        self._check(y)
        end = math.acosh(1 + CUTOFF / y)
        value, _ = integrate.quad(
            lambda u: math.exp(-y * (math.cosh(u) - 1)),
            0,
            end,
            weight="cos",
            wvar=self.order,
            limit=self.limit,
            epsabs=0,
            epsrel=self.relative,
        )
        return value * math.exp(-y)

    def reference(self, y: float) -> mpmath.mpf:
        """K_it(y) in arbitrary precision, with enough digits to absorb the e^(-pi t / 2) cancellation."""
        self._check(y)
        with mpmath.workdps(20 + int(self.order * 1.4)):
            return +mpmath.re(mpmath.besselk(1j * self.order, y))

    def __call__(self, y: float) -> float:
        """K_it(y) in double precision."""
        if self.cancels(y):
            return float(self.reference(y))
        return self.integral(y)

    def cross_check(self, points: tuple[float, ...]) -> float:
        """Largest relative difference between quadrature and the reference where quadrature is reliable."""
        worst = 0.0
        for y in points:
            if self.cancels(y):
                continue
            reference = float(self.reference(y))
            worst = max(worst, abs(self.integral(y) - reference) / max(abs(reference), 1e-300))
        return worst


def bessel_k_it(t: float, y: float) -> float:
    """K_it(y) for real t in [0, 100] and y in (0, 500]."""
    return BesselEvaluator(t)(y)


def step_size_oracle(t: float, y: float, step: float) -> float:
    """K_it(y) by the trapezoidal rule on the cosine integral with a fixed step, for oracle comparisons."""
    end = math.acosh(1 + CUTOFF / y)
    grid = np.arange(0.0, end + step, step)
    values = np.exp(-y * np.cosh(grid)) * np.cos(t * grid)
    return float(integrate.trapezoid(values, grid))


def envelope(y: float, height: float) -> float:
    """f(y) = min(T^1/3, |y / T - 1|^-1/2)."""
    gap = abs(y / height - 1)
    return height ** (1 / 3) if gap == 0 else min(height ** (1 / 3), gap**-0.5)


def bessel_bound_ratio(t: float, y: float) -> float:
    """t e^(pi t) |K_it(y)|^2 / f(y) with T = t."""
    if t < 1 or y <= 0:
        raise ParameterRangeError(f"Need t >= 1 and y > 0: t={t}, y={y}")
    value = BesselEvaluator(t).reference(y)
    with mpmath.workdps(30):
        scaled = t * mpmath.exp(mpmath.pi * t) * value * value
    return float(scaled) / envelope(y, t)


def envelope_sweep(
    orders: tuple[float, ...] = (1, 2, 5, 10, 20, 35, 50),
    ratios: tuple[float, ...] = (0.01, 0.1, 0.5, 0.8, 0.95, 1.0, 1.05, 1.2, 1.5, 2.0, 3.0),
) -> CheckReport:
    """Largest bessel_bound_ratio over the grid of orders and y / T, the measured envelope constant."""
    report = CheckReport("archimedean/envelope", params={"orders": list(orders), "ratios": list(ratios)})
    rows = []
    for t in orders:
        for ratio in ratios:
            value = bessel_bound_ratio(t, ratio * t)
            rows.append({"t": t, "y_over_T": ratio, "ratio": value})
            report.require(math.isfinite(value), "ratio is not finite", t=t, y=ratio * t)
    report.measured_constant = max(row["ratio"] for row in rows)
    exponential = [row["ratio"] for row in rows if row["y_over_T"] >= 2]
    if exponential:
        report.require(max(exponential) < 1, "ratio not small in the exponential regime", worst=max(exponential))
    report.details["rows"] = rows
    return report


def _bump(r: float, radius: float) -> float:
    s = r / radius
    return math.exp(-1 / (1 - s * s)) if abs(s) < 1 else 0.0


def _bump_derivative(r: float, radius: float) -> float:
    s = r / radius
    if abs(s) >= 1:
        return 0.0
    w = 1 - s * s
    return math.exp(-1 / w) * (-2 * s / (w * w)) / radius


@lru_cache(maxsize=None)
def _bump_fourier(t: float, radius: float) -> float:
    value, _ = integrate.quad(lambda r: _bump(r, radius), -radius, radius, weight="cos", wvar=t, limit=200)
    return value


@dataclass
class ArchKernel:
    """The archimedean kernel at spectral height T.

    Attributes:
        height: T >= 1.
        grid: Points u at which k is tabulated, increasing from 0.
        values: k on the grid.
        scale: The normalizing constant c.
    """

    height: float
    grid: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))
    values: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))
    scale: float = 1.0

    @property
    def radius(self) -> float:
        """Support radius of the bump b."""
        return SUPPORT_RADIUS / 4

    @cached_property
    def support(self) -> float:
        """Largest u where k can be nonzero."""
        return math.sinh(SUPPORT_RADIUS / 4) ** 2

    @cached_property
    def _profile_spline(self) -> interpolate.CubicSpline:
        """B on [0, 2 radius], where B vanishes beyond; B is even."""
        radius = self.radius
        points = np.linspace(0, 2 * radius, 1201)
        values = []
        for r in points:
            lower, upper = max(-radius, r - radius), min(radius, r + radius)
            value, _ = integrate.quad(lambda s, r=r: _bump(s, radius) * _bump(r - s, radius), lower, upper, limit=200)
            values.append(value)
        return interpolate.CubicSpline(points, values, bc_type=((1, 0.0), (1, 0.0)))

    def profile(self, r: float) -> float:
        """B(r) = (b * b)(r)."""
        if abs(r) >= 2 * self.radius:
            return 0.0
        return float(self._profile_spline(abs(r)))

    def profile_derivative(self, r: float) -> float:
        if abs(r) >= 2 * self.radius:
            return 0.0
        return math.copysign(float(self._profile_spline(abs(r), 1)), r)

    def g(self, r: float) -> float:
        """g(r) = c cos(T r) B(r)."""
        return self.scale * math.cos(self.height * r) * self.profile(r)

    def q_derivative(self, v: float) -> float:
        """Q'(v) for Q(v) = g(2 arcsinh sqrt(v)) / 2, before scaling."""
        if v <= 0:
            v = 1e-300
        root = math.sqrt(v)
        r = 2 * math.asinh(root)
        slope = -self.height * math.sin(self.height * r) * self.profile(r) + math.cos(
            self.height * r
        ) * self.profile_derivative(r)
        return slope / (2 * root * math.sqrt(1 + v))

    def raw_value(self, u: float) -> float:
        """k(u) / c = -(1 / pi) integral over v >= u of Q'(v) (v - u)^-1/2 dv."""
        if u >= self.support:
            return 0.0
        value, _ = integrate.quad(
            self.q_derivative, u, self.support, weight="alg", wvar=(-0.5, 0), limit=400, epsabs=1e-13
        )
        return -value / math.pi

    def __call__(self, u: float) -> float:
        """k(u), interpolated on the tabulation grid; zero for u > 1."""
        if u > self.support or u > 1:
            return 0.0
        return float(np.interp(u, self.grid, self.values))

    def spherical_transform(self, t: float | complex) -> float:
        """h(t) = c (b^(t - T)^2 + b^(t + T)^2) / 2, continued analytically to imaginary t."""
        if isinstance(t, complex) and t.imag:
            s, radius = t.imag, self.radius
            parts = [
                integrate.quad(
                    lambda r, phase=phase: _bump(r, radius) * math.exp(-s * r) * phase(self.height * r),
                    -radius,
                    radius,
                    limit=200,
                )[0]
                for phase in (math.cos, math.sin)
            ]
            transform = complex(*parts)
            return self.scale * (transform * transform).real
        t = float(t.real if isinstance(t, complex) else t)
        left, right = _bump_fourier(t - self.height, self.radius), _bump_fourier(t + self.height, self.radius)
        return self.scale * (left * left + right * right) / 2

    def chain_transform(self, t: float, points: int = 801) -> float:
        """h(t) through the chain k -> Q -> g -> h from the tabulated k, for comparison with the closed form."""
        radii = np.linspace(-SUPPORT_RADIUS / 2, SUPPORT_RADIUS / 2, points)
        g_values = np.array([2 * self._abel(math.sinh(r / 2) ** 2) for r in radii])
        return float(integrate.simpson(g_values * np.cos(t * radii), x=radii))

    def _abel(self, v: float) -> float:
        if v >= self.support:
            return 0.0
        value, _ = integrate.quad(self, v, self.support, weight="alg", wvar=(-0.5, 0), limit=400)
        return value

    def envelope_ratio(self) -> float:
        """Largest |k(u)| / min(T, T^1/2 u^-1/4) on the grid."""
        bound = np.minimum(self.height, math.sqrt(self.height) * np.maximum(self.grid, 1e-300) ** -0.25)
        return float(np.max(np.abs(self.values) / bound))


def kernel_build(height: float, points: int = GRID_POINTS, logger: logging.Logger | None = None) -> ArchKernel:
    """Tabulate the kernel at height T and fix its normalizing constant.

    Args:
        height: T >= 1.
        points: Number of grid points; half are spaced geometrically down to T^-2 / 100.
        logger: Optional logger.
    """
    logger = get_logger(logger)
    if height < 1:
        raise ParameterRangeError(f"T must be at least 1: {height}")
    kernel = ArchKernel(height=height)
    support = kernel.support
    small = np.geomspace(height**-2 / 100, support, points // 2)
    grid = np.unique(np.concatenate([[0.0], small, np.linspace(0, support, points - points // 2)]))
    kernel.grid = grid
    kernel.values = np.array([kernel.raw_value(float(u)) for u in grid])
    kernel.scale = 1.0
    ratio = kernel.envelope_ratio()
    kernel.scale = 1 / ratio if ratio > 0 else 1.0
    kernel.values = kernel.values * kernel.scale
    logger.info(f"Built kernel at T={height}: scale {kernel.scale:.6g}, peak {kernel.values[0]:.6g}")
    return kernel


def kernel_verify(kernel: ArchKernel, spectral: tuple[float, ...] | None = None) -> CheckReport:
    """Check support, the pointwise envelope, non-negativity of h, and record h(T) as the spectral floor."""
    height = kernel.height
    report = CheckReport("archimedean/kernel", params={"T": height})
    for u in (1.0, 1.5, 10.0, kernel.support + 1e-9):
        report.require(kernel(u) == 0, "kernel nonzero beyond its support", u=u)
    report.require(kernel.envelope_ratio() <= 1 + 1e-9, "kernel above min(T, T^1/2 u^-1/4)")
    spectral = spectral or tuple(np.linspace(0, 3 * height, 61))
    minimum = min(kernel.spherical_transform(t) for t in spectral)
    report.require(minimum >= -SPECTRAL_SLACK, "spherical transform negative on the tempered grid", minimum=minimum)
    peak = kernel.spherical_transform(height)
    report.require(peak > 0, "spherical transform vanishes at T")
    report.measured_constant = peak
    report.details.update(
        {
            "minimum": minimum,
            "peak": peak,
            "scale": kernel.scale,
            "complementary": {s: kernel.spherical_transform(complex(0, s)) for s in (0.1, 0.25, 0.5)},
        }
    )
    return report


def chain_consistency(kernel: ArchKernel, spectral: tuple[float, ...] = (0.0, 1.0)) -> CheckReport:
    """Compare the chain transform of the tabulated kernel with the closed form at a few spectral points."""
    report = CheckReport("archimedean/chain", params={"T": kernel.height})
    spectral = spectral + (kernel.height,)
    for t in spectral:
        direct, chained = kernel.spherical_transform(t), kernel.chain_transform(t)
        scale = max(abs(kernel.spherical_transform(kernel.height)), 1e-300)
        report.require(
            abs(direct - chained) <= 1e-3 * scale, "chain transform disagrees", t=t, direct=direct, chain=chained
        )
    return report


def tail_mass(height: float, y: float, level: float, multiplier: float, epsilon: float = 0.01) -> float:
    """Relative mass of |K_iT(2 pi n y / Q)| beyond 2 pi n y / Q > T + multiplier T^(1/3 + eps).

    The coefficients are taken of size 1, so this is the relative weight the Bessel factor gives to the tail of the
    truncated expansion.
    """
    evaluator = BesselEvaluator(height)
    step = 2 * math.pi * y / level
    cut = height + multiplier * height ** (1 / 3 + epsilon)
    head = tail = mpmath.mpf(0)
    n = 1
    while n * step <= MAX_ARGUMENT:
        value = abs(evaluator.reference(n * step))
        if n * step > cut:
            tail += value
            if value < mpmath.mpf(10) ** -40 * max(head, mpmath.mpf(10) ** -300):
                break
        else:
            head += value
        n += 1
    return float(tail / head) if head else 0.0


def tail_criterion(
    configurations: tuple[tuple[float, float, float], ...] = ((10, 0.05, 1), (20, 0.1, 2), (40, 0.2, 3)),
    threshold: float = 1e-12,
    multipliers: tuple[float, ...] = (1, 2, 4, 8, 16, 32),
) -> CheckReport:
    """Smallest multiplier on the T^(1/3 + eps) window putting the tail mass below the threshold, per configuration."""
    report = CheckReport("archimedean/tail", params={"threshold": threshold})
    needed = 0.0
    for height, y, level in configurations:
        for multiplier in multipliers:
            if tail_mass(height, y, level, multiplier) < threshold:
                needed = max(needed, multiplier)
                report.details[f"T={height},y={y},Q={level}"] = multiplier
                break
        else:
            report.fail("tail mass never drops below the threshold", T=height, y=y, Q=level)
    report.measured_constant = needed
    return report


def bessel_oracle_check(t: float = 0.0, y: float = 1.0) -> CheckReport:
    """Compare K_it(y) with the trapezoidal oracle at two step sizes and with the arbitrary precision reference."""
    report = CheckReport("archimedean/bessel", params={"t": t, "y": y})
    value = bessel_k_it(t, y)
    coarse, fine = step_size_oracle(t, y, 1e-3), step_size_oracle(t, y, 5e-4)
    reference = float(BesselEvaluator(t).reference(y))
    tolerance = RELATIVE_ACCURACY * abs(fine)
    report.require(abs(coarse - fine) <= tolerance, "oracle step sizes disagree", coarse=coarse, fine=fine)
    report.require(abs(value - fine) <= tolerance, "quadrature disagrees with the oracle", value=value)
    report.require(abs(value - reference) <= RELATIVE_ACCURACY * abs(reference), "quadrature disagrees with reference")
    report.details.update({"value": value, "oracle": fine, "reference": reference})
    return report
