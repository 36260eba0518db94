"""Unramified Hecke algebra, amplifier coefficients, and hyperbolic lattice point counts.

Points of the upper half plane are carried as (x, y^2) with both coordinates rational, so that every membership and
distance test below is decided exactly. The point pair invariant u(z, gz) of g = [[a, b], [c, d]] with det g = l is
read off the conjugate h = s^-1 g s, s = n(x) a(y) scaled into SL2:

    2 + 4 u(z, gz) = (A^2 + B^2 + C^2 + D^2) / l,
    A = a - c x,  B = (a x + b - c x^2 - d x) / y,  C = c y,  D = c x + d.

Each of |A|, |B|, |C|, |D| is therefore at most R = sqrt(l (2 + 4 delta)) on the set u <= delta, which gives the
integer box used for enumeration: |c| <= R / y, then d within R of -c x, a within R of c x, and b fixed by the
determinant (or, for c = 0, within R y of c x^2 + d x - a x).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from dataclasses import field
from fractions import Fraction
from typing import Any
from typing import Mapping

import numpy as np
import sympy

from newformology.exceptions import ConstraintError
from newformology.exceptions import ParameterRangeError
from newformology.logging import get_logger
from newformology.parallel import run_keyed_jobs
from newformology.reports import CheckReport

# Exponent of the (Lambda N2)^eps factor in the counting comparison.
EPSILON = 0.01

# Slack on the relation lambda(l)^2 - lambda(l^2) = omega(l) for floating inputs.
CONSTRAINT_TOLERANCE = 1e-10

# Square-free exponent patterns of the support of y_l, as sorted tuples of prime exponents.
AMPLIFIER_SHAPES = frozenset({(), (1,), (2,), (3,), (4,), (1, 1), (1, 2), (2, 2)})


@dataclass(frozen=True)
class HalfPlanePoint:
    """A point x + i y of the upper half plane with rational x and rational y^2."""

    x: Fraction
    y_squared: Fraction

    def __post_init__(self) -> None:
        if self.y_squared <= 0:
            raise ParameterRangeError(f"Point is not in the upper half plane: y^2 = {self.y_squared}")

    @classmethod
    def from_complex(cls, z: complex | str) -> HalfPlanePoint:
        """Build a point from a complex number or text such as "0.3+0.9i", reading decimals exactly."""
        if isinstance(z, str):
            z = complex(z.replace(" ", "").replace("i", "j"))
        if z.imag <= 0:
            raise ParameterRangeError(f"Point is not in the upper half plane: {z}")
        imag = Fraction(repr(float(z.imag)))
        return cls(Fraction(repr(float(z.real))), imag * imag)

    @property
    def y(self) -> float:
        return math.sqrt(self.y_squared)

    def to_complex(self) -> complex:
        return complex(float(self.x), self.y)

    def __str__(self) -> str:
        return f"{float(self.x):g}+{self.y:g}i"


@dataclass(frozen=True, order=True)
class LatticeMatrix:
    """An integral matrix of M(l, N2), ordered by (c, d, a, b)."""

    c: int
    d: int
    a: int
    b: int

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def entries(self) -> tuple[int, int, int, int]:
        return self.a, self.b, self.c, self.d

    def act(self, z: complex) -> complex:
        return (self.a * z + self.b) / (self.c * z + self.d)


@dataclass(frozen=True)
class HeckeSymbol:
    """A multiple of the normalized Hecke operator kappa_l; kappa_1 is the identity."""

    index: int
    coefficient: Any = 1

    @classmethod
    def identity(cls) -> HeckeSymbol:
        return cls(1, 1)

    @classmethod
    def from_expansion(cls, expansion: Mapping[int, Any]) -> list[HeckeSymbol]:
        return [cls(index, value) for index, value in sorted(expansion.items())]


@dataclass
class AmplifierCoefficients:
    """The amplifier and its square.

    Attributes:
        scale: Lambda.
        level: N.
        primes: The primes l coprime to N with Lambda <= l <= 2 Lambda.
        c: Coefficients c_r, nonzero only at r = l and r = l^2.
        y: Coefficients y_l of the square, supported on l <= 16 Lambda^4.
        lower_bound: The certified lower bound sum over S of |lambda(l)| + |lambda(l^2)|.
    """

    scale: float
    level: int
    primes: list[int]
    c: dict[int, complex] = field(default_factory=dict)
    y: dict[int, complex] = field(default_factory=dict)
    lower_bound: float = 0.0


def _inverse(value: Any) -> Any:
    return value.inverse() if hasattr(value, "inverse") else 1 / value


def _omega_power(omega: Mapping[int, Any], m: int, sign: int) -> Any:
    """prod over p | m of omega_p(m)^sign, with omega_p unramified so omega_p(m) = omega(p)^v_p(m)."""
    total: Any = 1
    for p, exponent in sympy.factorint(m).items():
        value = omega.get(p, 1)
        total = total * (value if sign > 0 else _inverse(value)) ** exponent
    return total


def hecke_convolution_expand(m: int, n: int, omega: Mapping[int, Any] | None = None) -> dict[int, Any]:
    """Expand kappa_m * kappa_n^* as a combination of kappa_l.

    Args:
        m: Positive index coprime to the level.
        n: Positive index coprime to the level.
        omega: Central character values omega(p) at primes; missing primes count as 1.

    Returns:
        Map from l to its coefficient, over l = m n / t^2 for t | gcd(m, n).
    """
    if m < 1 or n < 1:
        raise ParameterRangeError(f"Hecke indices must be positive: {m}, {n}")
    omega = omega or {}
    expansion: dict[int, Any] = {}
    conjugate = _omega_power(omega, n, -1)
    for t in sympy.divisors(math.gcd(m, n)):
        index = m * n // (t * t)
        expansion[index] = expansion.get(index, 0) + _omega_power(omega, t, 1) * conjugate
    return dict(sorted(expansion.items()))


def convolve_combinations(
    left: Mapping[int, Any],
    right: Mapping[int, Any],
    omega: Mapping[int, Any] | None = None,
) -> dict[int, Any]:
    """(sum a_m kappa_m) * (sum b_n kappa_n)^* expanded termwise, with conjugated right coefficients."""
    total: dict[int, Any] = {}
    for m, a in left.items():
        for n, b in right.items():
            weight = a * (b.conjugate() if hasattr(b, "conjugate") else b)
            for index, value in hecke_convolution_expand(m, n, omega).items():
                total[index] = total.get(index, 0) + weight * value
    return dict(sorted(total.items()))


def amplifier_primes(scale: float, level: int) -> list[int]:
    """S = primes l with gcd(l, N) = 1 and Lambda <= l <= 2 Lambda."""
    return [int(l) for l in sympy.primerange(math.ceil(scale), math.floor(2 * scale) + 1) if level % l]


def check_hecke_relation(values: Mapping[int, tuple[complex, complex]], omega: Mapping[int, complex]) -> None:
    """Reject inputs violating lambda(l)^2 - lambda(l^2) = omega(l) with |omega(l)| = 1.

    Raises:
        ConstraintError: On the first violating prime.
    """
    for l, (first, second) in values.items():
        character = complex(omega.get(l, 1))
        if abs(abs(character) - 1) > CONSTRAINT_TOLERANCE:
            raise ConstraintError(f"|omega({l})| = {abs(character)} is not 1")
        if abs(complex(first) ** 2 - complex(second) - character) > CONSTRAINT_TOLERANCE:
            raise ConstraintError(f"lambda({l})^2 - lambda({l}^2) != omega({l})")


def sato_tate_sample(
    primes: list[int],
    rng: np.random.Generator,
    unitary_omega: bool = True,
) -> tuple[dict[int, tuple[complex, complex]], dict[int, complex]]:
    """Draw Hecke eigenvalues from the Sato-Tate law subject to lambda(l)^2 - lambda(l^2) = omega(l).

    The angle theta has density (2 / pi) sin^2 theta on [0, pi], sampled by rejection, and
    lambda(l) = 2 omega^(1/2) cos theta.

    Returns:
        The (lambda(l), lambda(l^2)) pairs and the omega(l) values.
    """
    values: dict[int, tuple[complex, complex]] = {}
    omega: dict[int, complex] = {}
    for l in primes:
        while True:
            theta, height = rng.uniform(0, np.pi), rng.uniform(0, 1)
            if height <= np.sin(theta) ** 2:
                break
        phase = rng.uniform(0, 2 * np.pi) if unitary_omega else 0.0
        character = complex(np.exp(1j * phase))
        first = complex(2 * np.exp(0.5j * phase) * np.cos(theta))
        values[l] = (first, first * first - character)
        omega[l] = character
    return values, omega


def _shape(l: int, primes: set[int]) -> tuple[int, ...] | None:
    factors = sympy.factorint(l)
    if any(p not in primes for p in factors):
        return None
    return tuple(sorted(factors.values()))


def build_amplifier(
    scale: float,
    level: int,
    values: Mapping[int, tuple[complex, complex]] | None = None,
    omega: Mapping[int, complex] | None = None,
    seed: int = 0,
) -> AmplifierCoefficients:
    """Build c_r and y_l from Hecke eigenvalues, sampling them under the Hecke relation when none are given.

    Args:
        scale: Lambda >= 1.
        level: N.
        values: Map l -> (lambda(l), lambda(l^2)).
        omega: Map l -> omega(l).
        seed: Seed of the Sato-Tate sampler.

    Raises:
        ConstraintError: If the inputs violate the Hecke relation.
    """
    if scale < 1:
        raise ParameterRangeError(f"Lambda must be at least 1: {scale}")
    primes = amplifier_primes(scale, level)
    if values is None:
        values, omega = sato_tate_sample(primes, np.random.default_rng(seed))
    omega = dict(omega or {})
    values = {l: values[l] for l in primes}
    check_hecke_relation(values, omega)
    amplifier = AmplifierCoefficients(scale=scale, level=level, primes=primes)
    for l, (first, second) in values.items():
        for r, value in ((l, first), (l * l, second)):
            amplifier.c[r] = abs(value) / value if value != 0 else 1 + 0j
        amplifier.lower_bound += abs(first) + abs(second)
    amplifier.y = convolve_combinations(amplifier.c, amplifier.c, omega)
    return amplifier


def amplifier_check(amplifier: AmplifierCoefficients) -> CheckReport:
    """Check the support and size of c_r and y_l and the lower bound |S| <= lambda'."""
    report = CheckReport("counting/amplifier", params={"Lambda": amplifier.scale, "N": amplifier.level})
    primes = set(amplifier.primes)
    for r, value in amplifier.c.items():
        root = math.isqrt(r)
        report.require(r in primes or (root * root == r and root in primes), "c_r supported off l, l^2", r=r)
        report.require(abs(abs(value) - 1) < 1e-12, "|c_r| != 1", r=r)
    bound = 16 * amplifier.scale**4
    largest = 0.0
    for l, value in amplifier.y.items():
        if abs(value) < 1e-12:
            continue
        report.require(l <= bound, "y_l supported beyond 16 Lambda^4", l=l)
        report.require(_shape(l, primes) in AMPLIFIER_SHAPES, "y_l supported off the four product shapes", l=l)
        if l > 1:
            largest = max(largest, abs(value))
    report.require(amplifier.lower_bound >= len(primes) - 1e-9, "lambda' below |S|", value=amplifier.lower_bound)
    report.measured_constant = max(abs(amplifier.y.get(1, 0)) / amplifier.scale, largest)
    report.details.update({"primes": amplifier.primes, "y1": amplifier.y.get(1, 0), "largest_y": largest})
    return report


def sampler_check(draws: int = 10_000, seed: int = 0, primes: tuple[int, ...] = (2,)) -> CheckReport:
    """Check |lambda(l)| + |lambda(l^2)| >= 1 over Sato-Tate draws."""
    rng = np.random.default_rng(seed)
    report = CheckReport("counting/sampler", params={"draws": draws, "seed": seed})
    smallest = math.inf
    for _ in range(draws):
        values, _ = sato_tate_sample(list(primes), rng)
        for first, second in values.values():
            total = abs(first) + abs(second)
            smallest = min(smallest, total)
            report.require(total >= 1 - 1e-12, "|lambda(l)| + |lambda(l^2)| < 1", value=total)
    report.details["minimum"] = smallest
    return report


def point_pair_invariant(z: HalfPlanePoint, gamma: LatticeMatrix) -> Fraction:
    """u(z, gamma z) exactly."""
    x, y2 = z.x, z.y_squared
    a, b, c, d = gamma.entries
    norm = (a - c * x) ** 2 + (a * x + b - c * x * x - d * x) ** 2 / y2 + c * c * y2 + (c * x + d) ** 2
    return (norm / gamma.det - 2) / 4


def _radius(l: int, delta: float) -> float:
    return math.sqrt(l * (2 + 4 * delta))


def _band(z: HalfPlanePoint, l: int, delta: Fraction, level: int, c: int, radius: float) -> list[LatticeMatrix]:
    """Matrices of M(l, N2) with the given c inside the enumeration box and u <= delta."""
    x = float(z.x)
    found = []
    d_values = np.arange(math.floor(-c * x - radius) - 1, math.ceil(-c * x + radius) + 2)
    a_values = np.arange(max(1, math.floor(c * x - radius) - 1), math.ceil(c * x + radius) + 2)
    if c:
        grid_a, grid_d = np.meshgrid(a_values, d_values, indexing="ij")
        numerator = grid_a * grid_d - l
        mask = numerator % c == 0
        candidates = zip(grid_a[mask].tolist(), grid_d[mask].tolist(), (numerator[mask] // c).tolist())
    else:
        candidates = []  # type: ignore[assignment]
        width = radius * z.y + 1
        for a in a_values.tolist():
            if l % a:
                continue
            d = l // a
            centre = d * x - a * x
            candidates.extend((a, d, b) for b in range(math.floor(centre - width), math.ceil(centre + width) + 1))
    for a, d, b in candidates:
        gamma = LatticeMatrix(c=c, d=d, a=a, b=b)
        if point_pair_invariant(z, gamma) <= delta:
            found.append(gamma)
    return found


def _enumerate(
    z: HalfPlanePoint,
    l: int,
    delta: Fraction,
    level: int,
    widen: float = 1.0,
    max_workers: int | None = 1,
) -> list[LatticeMatrix]:
    radius = _radius(l, float(delta)) * widen
    c_max = math.floor(radius / z.y) + 1
    jobs = {
        c: (_band, (z, l, delta, level, c, radius))
        for c in range(-c_max - (-c_max % level), c_max + 1, level)
    }
    found: list[LatticeMatrix] = []
    for result in run_keyed_jobs(jobs, max_workers=max_workers).values():
        if isinstance(result, Exception):
            raise result
        found.extend(result)
    return sorted(found)


def enumerate_close_lattice(
    z: HalfPlanePoint | complex | str,
    l: int,
    delta: float | Fraction,
    level: int = 1,
    max_workers: int | None = 1,
) -> list[LatticeMatrix]:
    """All gamma in M(l, N2) with u(z, gamma z) <= delta, ordered by (c, d, a, b).

    Args:
        z: The point.
        l: Determinant, coprime to N2.
        delta: Radius in the point pair invariant, 0 <= delta < 1.
        level: N2, dividing c.
        max_workers: Workers for the c bands.
    """
    z = z if isinstance(z, HalfPlanePoint) else HalfPlanePoint.from_complex(z)
    delta = Fraction(delta) if not isinstance(delta, float) else Fraction(repr(delta))
    if not 0 <= delta < 1:
        raise ParameterRangeError(f"delta must lie in [0, 1): {delta}")
    if l < 1 or math.gcd(l, level) != 1:
        raise ParameterRangeError(f"l must be positive and coprime to N2: l={l}, N2={level}")
    return _enumerate(z, l, delta, level, max_workers=max_workers)


def count_close_lattice(z: HalfPlanePoint | complex | str, l: int, delta: float | Fraction, level: int = 1) -> int:
    """N(z, l, delta, N2)."""
    return len(enumerate_close_lattice(z, l, delta, level))


def double_box_recount(
    z: HalfPlanePoint,
    l: int,
    delta: float | Fraction,
    level: int = 1,
) -> CheckReport:
    """Recount over a box twice as wide and require the identical matrix list."""
    delta = Fraction(repr(delta)) if isinstance(delta, float) else Fraction(delta)
    report = CheckReport("counting/box", params={"z": str(z), "l": l, "delta": delta, "N2": level})
    narrow = _enumerate(z, l, delta, level)
    wide = _enumerate(z, l, delta, level, widen=2.0)
    report.require(narrow == wide, "enumeration box misses matrices", missing=sorted(set(wide) - set(narrow))[:5])
    classes = {_projective_class(gamma) for gamma in narrow}
    report.require(len(classes) == len(narrow), "two enumerated matrices are positive multiples of each other")
    report.details["count"] = len(narrow)
    return report


def _projective_class(gamma: LatticeMatrix) -> tuple[int, int, int, int]:
    divisor = math.gcd(*gamma.entries)
    return tuple(x // divisor for x in gamma.entries)  # type: ignore[return-value]


def random_recount_check(configurations: int = 100, seed: int = 0) -> CheckReport:
    """Double-box recounts over random (z, l, delta, N2)."""
    rng = np.random.default_rng(seed)
    report = CheckReport("counting/recount", params={"configurations": configurations, "seed": seed})
    for _ in range(configurations):
        level = int(rng.choice([1, 2, 3, 5, 6]))
        l = int(rng.integers(1, 30))
        while math.gcd(l, level) != 1:
            l += 1
        z = HalfPlanePoint(Fraction(int(rng.integers(-50, 51)), 100), Fraction(int(rng.integers(30, 300)), 100) ** 2)
        delta = Fraction(int(rng.integers(1, 100)), 200)
        report.merge(double_box_recount(z, l, delta, level), f"{z}/{l}/{delta}/{level}")
    return report


def fundamental_membership(z: HalfPlanePoint | complex | str, bound: int) -> bool:
    """Whether z lies in F_L: y >= sqrt(3) / (2 L) and |c z + d|^2 >= 1 / L for every nonzero integer pair.

    With |c z + d|^2 = (c x + d)^2 + c^2 y^2, only |c| < 1 / (y sqrt(L)) can fail, and for such c only the two
    integers d nearest to -c x matter; (c, d) and (-c, -d) give the same value and c = 0 is never a failure.
    """
    z = z if isinstance(z, HalfPlanePoint) else HalfPlanePoint.from_complex(z)
    if bound < 1:
        raise ParameterRangeError(f"L must be positive: {bound}")
    threshold = Fraction(1, bound)
    if z.y_squared < Fraction(3, 4 * bound * bound):
        return False
    c = 1
    while c * c * z.y_squared < threshold:
        centre = -c * z.x
        for d in (math.floor(centre), math.ceil(centre)):
            if (c * z.x + d) ** 2 + c * c * z.y_squared < threshold:
                return False
        c += 1
    return True


def counting_bound(scale: float, delta: float, level: int, y: float, epsilon: float = EPSILON) -> float:
    """The comparison bound for A(z, Lambda, delta, N2)."""
    root = math.sqrt(delta)
    return (scale * level) ** epsilon * (
        scale
        + scale * math.sqrt(level) * root * y
        + scale**2.5 * root / math.sqrt(level)
        + scale**2.5 * root * y
        + scale**4 * delta / level
    )


def dyadic_bound(height: float, scale: float, level: int, y: float) -> float:
    """Bound the integral of |kappa(delta)| dA over the dyadic pieces (2^-(j+1), 2^-j] of [0, 1]."""
    total = 0.0
    floor = height**-2 / 64
    delta = 1.0
    while delta > floor:
        total += min(height, math.sqrt(height) * (delta / 2) ** -0.25) * counting_bound(scale, delta, level, y)
        delta /= 2
    return total + height * counting_bound(scale, delta, level, y)


def geometric_side(
    z: HalfPlanePoint | complex | str,
    scale: float,
    level: int,
    kernel: Any,
    amplifier: AmplifierCoefficients | None = None,
    seed: int = 0,
    logger: logging.Logger | None = None,
) -> tuple[float, CheckReport]:
    """Sum over l of |y_l| / sqrt(l) times the sum of |kappa(u(z, gamma z))| over M(l, N2), with its comparison.

    Args:
        z: A point of F_N2.
        scale: Lambda.
        level: N2.
        kernel: The archimedean kernel: callable on u, with its spectral height as attribute "height".
        amplifier: Amplifier coefficients; sampled under the Hecke relation when omitted.
        seed: Seed of the sampler.
        logger: Optional logger.

    Raises:
        ParameterRangeError: If z lies outside F_N2.
    """
    logger = get_logger(logger)
    z = z if isinstance(z, HalfPlanePoint) else HalfPlanePoint.from_complex(z)
    if not fundamental_membership(z, level):
        raise ParameterRangeError(f"{z} is not in F_{level}")
    amplifier = amplifier or build_amplifier(scale, level, seed=seed)
    value = 0.0
    counted = 0
    for l, coefficient in amplifier.y.items():
        if abs(coefficient) < 1e-12:
            continue
        matrices = _enumerate(z, l, Fraction(1), level)
        counted += len(matrices)
        value += abs(coefficient) / math.sqrt(l) * sum(abs(kernel(float(point_pair_invariant(z, g)))) for g in matrices)
    bound = dyadic_bound(kernel.height, scale, level, z.y)
    report = CheckReport("counting/geometric", params={"z": str(z), "Lambda": scale, "N2": level})
    report.measured_constant = value / bound
    report.details.update({"value": value, "bound": bound, "matrices": counted})
    logger.info(f"Geometric side at {z}: {value:.6g} against {bound:.6g}")
    return value, report


def count_ratio(z: HalfPlanePoint, l: int, delta: float, level: int, count: int | None = None) -> float:
    """N(z, l, delta, N2) / sqrt(l) against the comparison bound at Lambda = max(1, l^(1/4) / 2)."""
    count = count_close_lattice(z, l, delta, level) if count is None else count
    return count / math.sqrt(l) / counting_bound(max(1.0, l**0.25 / 2), delta, level, z.y)


def counting_sweep(
    points: tuple[str, ...] = ("1i", "2i", "0.3+0.9i"),
    l_max: int = 50,
    deltas: tuple[float, ...] = (1e-4, 1e-2, 1e-1),
    levels: tuple[int, ...] = (1, 2, 3, 5, 6),
) -> CheckReport:
    """Largest count ratio over the grid, with the monotonicity of N in delta and along divisor chains of N2."""
    report = CheckReport("counting/sweep", params={"l_max": l_max})
    largest = 0.0
    for text in points:
        z = HalfPlanePoint.from_complex(text)
        for level in levels:
            if not fundamental_membership(z, level):
                report.details.setdefault("skipped", []).append([text, level])
                continue
            for l in range(1, l_max + 1):
                if math.gcd(l, level) != 1:
                    continue
                ordered = sorted(deltas)
                counts = [count_close_lattice(z, l, delta, level) for delta in ordered]
                report.require(counts == sorted(counts), "N decreases in delta", z=text, l=l, N2=level)
                for delta, count in zip(ordered, counts):
                    largest = max(largest, count_ratio(z, l, delta, level, count))
        report.merge(monotonicity_check(z, l_max=min(l_max, 12), deltas=deltas), f"monotone/{text}")
    report.measured_constant = largest
    return report


def monotonicity_check(
    z: HalfPlanePoint,
    l_max: int = 12,
    deltas: tuple[float, ...] = (1e-2, 1e-1, 0.5),
    chains: tuple[tuple[int, ...], ...] = ((1, 2, 6), (1, 3, 6), (1, 5)),
) -> CheckReport:
    """N(z, l, delta, N2) is non-decreasing in delta and non-increasing along N2 | N2'."""
    report = CheckReport("counting/monotone", params={"z": str(z), "l_max": l_max})
    for chain in chains:
        for l in range(1, l_max + 1):
            if math.gcd(l, chain[-1]) != 1:
                continue
            for delta in deltas:
                counts = [count_close_lattice(z, l, delta, level) for level in chain]
                report.require(counts == sorted(counts, reverse=True), "N increases along N2", l=l, chain=chain)
    return report


def hecke_identity_check(pairs: tuple[tuple[int, int], ...], omega: Mapping[int, Any]) -> CheckReport:
    """(kappa_m * kappa_n^*) * kappa_1 = kappa_m * kappa_n^* exactly."""
    report = CheckReport("counting/hecke", params={"pairs": pairs})
    for m, n in pairs:
        expansion = hecke_convolution_expand(m, n, omega)
        report.require(
            convolve_combinations(expansion, {1: 1}, omega) == expansion, "kappa_1 is not an identity", m=m, n=n
        )
    return report
