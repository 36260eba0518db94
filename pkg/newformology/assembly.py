"""Global assembly of the local results.

Level invariants of N and M, the length Q^g of the Whittaker expansion, the products of local Whittaker values that
form its coefficients, an exact exponent algebra for the closing case split of the sup norm bound, and the prime
power table of upper and lower bounds.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any
from typing import Callable
from typing import Hashable
from typing import Iterable
from typing import Mapping
from typing import NamedTuple

import sympy

from newformology import archimedean
from newformology import counting
from newformology import matrixcoeff
from newformology import reps
from newformology import whittaker
from newformology.config import RunConfig
from newformology.cyclo import CyclotomicNumber
from newformology.cyclo import get_ring
from newformology.exceptions import ConstraintError
from newformology.exceptions import ParameterRangeError
from newformology.exceptions import UnsupportedError
from newformology.exceptions import VerificationError
from newformology.logging import get_logger
from newformology.padic import CosetPosition
from newformology.padic import GL2Element
from newformology.padic import matrix_invariants
from newformology.parallel import run_keyed_jobs
from newformology.reports import FLOOR
from newformology.reports import STATUS_FAIL
from newformology.reports import STATUS_INFO
from newformology.reports import UPPER
from newformology.reports import CheckReport
from newformology.reports import LockedConstants
from newformology.reps import LocalRepresentation

Rational = int | Fraction

SYMBOLS = ("N0", "N1", "N2", "M1", "Qg", "N0g", "T", "y", "Lambda")
FREE_SYMBOLS = ("y", "Lambda")

# Upper bound N0^(1/6) N1^(1/3) M1^(1/2) lambda^(5/24); the Laplace eigenvalue enters as T^2.
THEOREM_EXPONENTS = {"N0": Fraction(1, 6), "N1": Fraction(1, 3), "M1": Fraction(1, 2)}
EIGENVALUE_EXPONENT = Fraction(5, 24)
LOWER_EIGENVALUE_EXPONENT = Fraction(1, 12)

# Checks whose measured constant is a floor rather than a ceiling.
FLOOR_CHECKS = frozenset({"matrixcoeff/delta"})


class ReferenceRow(NamedTuple):
    """One row of the prime power table: exponents of p in N, M, N0, N1, M1, and exponents of N in the bounds."""

    n: int
    m_values: tuple[int, ...]
    n0: int
    n1: int
    m1: int
    upper: Fraction
    lower: Fraction
    conjectured_sharp: bool


REFERENCE_TABLE = (
    ReferenceRow(1, (0, 1), 0, 1, 0, Fraction(1, 3), Fraction(0), True),
    ReferenceRow(2, (0, 1), 1, 1, 0, Fraction(1, 4), Fraction(0), True),
    ReferenceRow(2, (2,), 1, 1, 1, Fraction(1, 2), Fraction(1, 4), True),
    ReferenceRow(3, (0, 1, 2), 1, 2, 0, Fraction(5, 18), Fraction(0), True),
    ReferenceRow(3, (3,), 1, 2, 1, Fraction(4, 9), Fraction(1, 6), True),
    ReferenceRow(4, (0, 1, 2), 2, 2, 0, Fraction(1, 4), Fraction(0), True),
    ReferenceRow(4, (3,), 2, 2, 1, Fraction(3, 8), Fraction(0), False),
    ReferenceRow(4, (4,), 2, 2, 2, Fraction(1, 2), Fraction(1, 4), True),
    ReferenceRow(5, (0, 1, 2, 3), 2, 3, 0, Fraction(4, 15), Fraction(0), True),
    ReferenceRow(5, (4,), 2, 3, 1, Fraction(11, 30), Fraction(1, 10), True),
    ReferenceRow(5, (5,), 2, 3, 2, Fraction(7, 15), Fraction(1, 5), True),
)

TABLE_COLUMNS = ["N", "M", "N0", "N1", "M1", "upper", "lower", "conjectured_sharp"]


def _power_text(symbol: str, power: Fraction) -> str:
    if power == 1:
        return symbol
    return f"{symbol}^{power}" if power.denominator == 1 else f"{symbol}^({power})"


@dataclass(frozen=True)
class ExponentVector:
    """A monomial in the size parameters, stored as rational exponents.

    Every symbol other than y and Lambda is at least 1, so X^a <= X^b holds uniformly when a <= b coordinatewise.
    The arbitrary (NT)^eps loss is tracked as a separate coefficient and compared last.

    Attributes:
        powers: Non-zero exponents in SYMBOLS order.
        eps: Coefficient of eps in the exponent of NT.
    """

    powers: tuple[tuple[str, Fraction], ...] = ()
    eps: Fraction = Fraction(0)

    @classmethod
    def of(cls, eps: Rational = 0, **powers: Rational) -> ExponentVector:
        """Build a monomial from keyword exponents, such as of(T=Fraction(5, 6), N2=Fraction(-1, 3))."""
        unknown = set(powers) - set(SYMBOLS)
        if unknown:
            raise ParameterRangeError(f"Unknown exponent symbols: {sorted(unknown)}")
        cleaned = tuple((symbol, Fraction(powers[symbol])) for symbol in SYMBOLS if powers.get(symbol, 0) != 0)
        return cls(cleaned, Fraction(eps))

    def __getitem__(self, symbol: str) -> Fraction:
        return dict(self.powers).get(symbol, Fraction(0))

    def __mul__(self, other: ExponentVector) -> ExponentVector:
        combined = {symbol: self[symbol] + other[symbol] for symbol in SYMBOLS}
        return ExponentVector.of(eps=self.eps + other.eps, **combined)

    def __truediv__(self, other: ExponentVector) -> ExponentVector:
        return self * other ** -1

    def __pow__(self, exponent: Rational) -> ExponentVector:
        exponent = Fraction(exponent)
        return ExponentVector.of(eps=self.eps * exponent, **{symbol: power * exponent for symbol, power in self.powers})

    def __str__(self) -> str:
        parts = [_power_text(symbol, power) for symbol, power in self.powers]
        if self.eps:
            parts.append("(NT)^eps" if self.eps == 1 else f"(NT)^({self.eps} eps)")
        return " ".join(parts) or "1"

    def without(self, symbol: str) -> ExponentVector:
        """The monomial with one symbol set to 1."""
        return ExponentVector.of(eps=self.eps, **{name: power for name, power in self.powers if name != symbol})

    def substitute(self, symbol: str, replacement: ExponentVector) -> ExponentVector:
        """Replace a symbol by a monomial."""
        power = self[symbol]
        if power == 0:
            return self
        return self.without(symbol) * replacement**power

    def dominated_by(self, other: ExponentVector) -> bool:
        """Whether self <= other for all admissible sizes, up to the eps loss when some exponent is strictly smaller.

        y and Lambda range on both sides of 1, so their exponents must agree.
        """
        if any(self[symbol] != other[symbol] for symbol in FREE_SYMBOLS):
            return False
        gaps = [other[symbol] - self[symbol] for symbol in SYMBOLS]
        if any(gap < 0 for gap in gaps):
            return False
        return any(gap > 0 for gap in gaps) or self.eps <= other.eps


Bound = tuple[ExponentVector, ...]


def substitute_terms(terms: Iterable[ExponentVector], symbol: str, replacement: ExponentVector) -> Bound:
    """Substitute a monomial for a symbol in every term of a sum."""
    return tuple(term.substitute(symbol, replacement) for term in terms)


def reduce_levels(terms: Iterable[ExponentVector]) -> Bound:
    """Eliminate N1 through N1 = N0 N2."""
    return substitute_terms(terms, "N1", ExponentVector.of(N0=1, N2=1))


def leading_terms(terms: Iterable[ExponentVector]) -> Bound:
    """Drop every term dominated by another one; the survivors are the maximal monomials of the sum."""
    terms = list(dict.fromkeys(terms))
    return tuple(term for term in terms if not any(term.dominated_by(other) for other in terms if other != term))


def regime_substitute(terms: Iterable[ExponentVector], symbol: str, limit: ExponentVector, upper: bool) -> Bound:
    """Bound a sum on the regime symbol <= limit (upper) or symbol >= limit, term by term.

    Terms increasing in the symbol take their value at an upper limit, decreasing terms at a lower limit; terms of
    the wrong monotonicity keep the symbol and are flagged by any later domination test.
    """
    bounded = []
    for term in terms:
        power = term[symbol]
        bounded.append(term.substitute(symbol, limit) if (power > 0) == upper and power != 0 else term)
    return tuple(bounded)


def dominance_failures(terms: Iterable[ExponentVector], target: ExponentVector) -> list[str]:
    """Terms of a sum not dominated by the target, as text."""
    return [str(term) for term in terms if not term.dominated_by(target)]


def amplification_bound() -> Bound:
    """Squared amplification bound N1 M1 [(T + N2^(1/2) T^(1/2) y) / Lambda + Lambda^(1/2) T^(1/2) (N2^(-1/2) + y)
    + Lambda^2 T^(1/2) / N2]."""
    prefix = ExponentVector.of(eps=1, N1=1, M1=1)
    half = Fraction(1, 2)
    bracket = (
        ExponentVector.of(T=1, Lambda=-1),
        ExponentVector.of(N2=half, T=half, y=1, Lambda=-1),
        ExponentVector.of(Lambda=half, T=half, N2=-half),
        ExponentVector.of(Lambda=half, T=half, y=1),
        ExponentVector.of(Lambda=2, T=half, N2=-1),
    )
    return tuple(prefix * term for term in bracket)


def whittaker_bound() -> Bound:
    """Squared Whittaker expansion bound N1 M1 T / (N2 y) + N1 T^(1/3) / N2."""
    return (
        ExponentVector.of(eps=1, N1=1, M1=1, T=1, N2=-1, y=-1),
        ExponentVector.of(eps=1, N1=1, T=Fraction(1, 3), N2=-1),
    )


def local_whittaker_bound() -> Bound:
    """Squared Whittaker expansion bound in local lengths, Q^g T / y + N0^g T^(1/3)."""
    return (
        ExponentVector.of(eps=1, Qg=1, T=1, y=-1),
        ExponentVector.of(eps=1, N0g=1, T=Fraction(1, 3)),
    )


def theorem_target() -> ExponentVector:
    """Squared bound N1 M1 N2^(-1/3) T^(5/6) required at points of J_N times F_N2."""
    return ExponentVector.of(eps=2, N1=1, M1=1, N2=Fraction(-1, 3), T=Fraction(5, 6))


# The amplifier length and the y threshold as claimed alongside the case split.
AMPLIFIER_LENGTH = ExponentVector.of(T=Fraction(1, 6), N2=Fraction(1, 3))
CLAIMED_LEADING = (
    ExponentVector.of(eps=1, N1=1, M1=1, T=Fraction(5, 6), N2=Fraction(-1, 3)),
    ExponentVector.of(eps=1, N1=1, M1=1, T=Fraction(7, 12), N2=Fraction(-1, 6), y=1),
)
CLAIMED_THRESHOLD = ExponentVector.of(T=Fraction(1, 4), N2=Fraction(-1, 6))


def balancing_threshold(terms: Iterable[ExponentVector], target: ExponentVector, symbol: str = "y") -> ExponentVector:
    """The largest monomial limit on a symbol keeping every term increasing in it below the target.

    Each increasing term a * symbol^k gives the limit (target / a)^(1/k); the limits must be comparable.
    """
    limits = [(target / term.without(symbol)) ** Fraction(1, term[symbol]) for term in terms if term[symbol] > 0]
    if not limits:
        raise ConstraintError(f"No term increases in {symbol}")
    limits = [ExponentVector.of(**dict(limit.powers)) for limit in limits]
    smallest = limits[0]
    for limit in limits[1:]:
        if limit.dominated_by(smallest):
            smallest = limit
        elif not smallest.dominated_by(limit):
            raise ConstraintError(f"Thresholds {smallest} and {limit} are not comparable")
    return smallest


def exponent_casecheck(square_level: bool = False) -> CheckReport:
    """Verify the closing case split of the sup norm bound as exact exponent comparisons.

    The amplification bound at Lambda = T^(1/6) N2^(1/3) is reduced to its leading monomials; on y <= y0 it must be
    dominated by the target, and on y >= y0 the Whittaker expansion bound must be. The threshold y0 is derived from
    the leading y term. The claimed monomials and threshold are evaluated too, and any disagreement is recorded
    with the offending monomial.

    Args:
        square_level: Specialize to N2 = 1, a perfect square level.
    """
    report = CheckReport("assembly/caseorder", params={"square_level": square_level})

    def specialize(terms: Iterable[ExponentVector]) -> Bound:
        if not square_level:
            return tuple(terms)
        return tuple(term.without("N2") for term in reduce_levels(terms))

    target = specialize([theorem_target()])[0]
    half_target = target ** Fraction(1, 2)
    theorem = ExponentVector.of(eps=1, T=Fraction(5, 12), **THEOREM_EXPONENTS)
    local_form = reduce_levels(specialize([half_target]))[0]
    global_form = reduce_levels(specialize([theorem]))[0]
    report.require(local_form == global_form, "target differs from the theorem", target=local_form, theorem=global_form)

    from_lengths = specialize(
        substitute_terms(
            substitute_terms(local_whittaker_bound(), "Qg", ExponentVector.of(N0=1, M1=1)),
            "N0g",
            ExponentVector.of(N0=1),
        )
    )
    report.require(
        reduce_levels(from_lengths) == reduce_levels(specialize(whittaker_bound())),
        "local Whittaker lengths do not reproduce the global expansion bound",
        local=[str(term) for term in from_lengths],
    )

    substituted = specialize(substitute_terms(amplification_bound(), "Lambda", AMPLIFIER_LENGTH))
    leading = leading_terms(substituted)
    report.details["substituted"] = [str(term) for term in substituted]
    report.details["leading"] = [str(term) for term in leading]
    claimed = specialize(CLAIMED_LEADING)
    mismatched = [str(term) for term in leading if term not in claimed]
    report.details["claimed_leading_matches"] = not mismatched
    if mismatched:
        report.details["claimed_leading_mismatches"] = mismatched

    threshold = balancing_threshold(leading, target)
    report.details["threshold"] = str(threshold)
    amplified_case = regime_substitute(leading, "y", threshold, upper=True)
    for term in dominance_failures(amplified_case, target):
        report.fail("amplification case exceeds the target", monomial=term, threshold=str(threshold))
    whittaker_case = regime_substitute(specialize(whittaker_bound()), "y", threshold, upper=False)
    for term in dominance_failures(whittaker_case, target):
        report.fail("Whittaker case exceeds the target", monomial=term, threshold=str(threshold))

    claimed_threshold = specialize([CLAIMED_THRESHOLD])[0]
    claimed_amplified = regime_substitute(leading, "y", claimed_threshold, upper=True)
    report.details["claimed_threshold_failures"] = dominance_failures(claimed_amplified, target)
    claimed_whittaker = regime_substitute(specialize(whittaker_bound()), "y", claimed_threshold, upper=False)
    report.details["whittaker_case_at_claimed_threshold"] = str(leading_terms(claimed_whittaker)[0] ** Fraction(1, 2))
    return report


@dataclass(frozen=True)
class LevelInvariants:
    """Invariants of a level N and character conductor M.

    Attributes:
        level: N.
        character_level: M, a divisor of N.
        n0: Largest integer whose square divides N.
        n1: N / N0.
        n2: N1 / N0, squarefree.
        m1: M / gcd(M, N1), a divisor of N0.
        local: (p, v_p(N), v_p(M)) for every p | N.
    """

    level: int
    character_level: int
    n0: int
    n1: int
    n2: int
    m1: int
    local: tuple[tuple[int, int, int], ...]

    @property
    def upper_exponent(self) -> Fraction | None:
        """Exponent of N in the upper bound when N is a prime power, None otherwise."""
        if len(self.local) != 1:
            return None
        p, n, _ = self.local[0]
        weights = {"N0": self.n0, "N1": self.n1, "M1": self.m1}
        return sum(
            (THEOREM_EXPONENTS[symbol] * int(sympy.multiplicity(p, value)) for symbol, value in weights.items()),
            Fraction(0),
        ) / n

    def bound_text(self) -> str:
        """The upper bound as text, with symbols equal to 1 left out."""
        eigenvalue = _power_text("lambda", EIGENVALUE_EXPONENT)
        exponent = self.upper_exponent
        if exponent is not None:
            return f"{_power_text('N', exponent)} {eigenvalue}"
        values = {"N0": self.n0, "N1": self.n1, "M1": self.m1}
        parts = [_power_text(symbol, THEOREM_EXPONENTS[symbol]) for symbol, value in values.items() if value > 1]
        return " ".join(parts + [eigenvalue])

    def to_json(self) -> dict:
        return {
            "N": self.level,
            "M": self.character_level,
            "N0": self.n0,
            "N1": self.n1,
            "N2": self.n2,
            "M1": self.m1,
            "bound": self.bound_text(),
        }


def level_invariants(level: int, character_level: int = 1) -> LevelInvariants:
    """Factor N and M into the invariants of the sup norm bound.

    Args:
        level: N >= 1.
        character_level: M >= 1 with M | N.

    Raises:
        ConstraintError: If M does not divide N.
    """
    if level < 1 or character_level < 1:
        raise ParameterRangeError(f"levels must be positive: N={level}, M={character_level}")
    if level % character_level:
        raise ConstraintError(f"M={character_level} does not divide N={level}")
    n0 = 1
    local = []
    for p, n in sorted(sympy.factorint(level).items()):
        n0 *= p ** (n // 2)
        local.append((int(p), int(n), int(sympy.multiplicity(p, character_level))))
    n1 = level // n0
    n2 = n1 // n0
    m1 = character_level // math.gcd(character_level, n1)
    if any(power > 1 for power in sympy.factorint(n2).values()) or n0 % m1:
        raise VerificationError(f"inconsistent invariants for N={level}, M={character_level}", witness=(n0, n2, m1))
    return LevelInvariants(level, character_level, n0, n1, n2, m1, tuple(local))


class TableRow(NamedTuple):
    """A computed row of the prime power table."""

    n: int
    m_values: tuple[int, ...]
    n0: int
    n1: int
    m1: int
    upper: Fraction
    lower: Fraction
    conjectured_sharp: bool

    def to_csv(self) -> dict:
        return {
            "N": _power_text("p", Fraction(self.n)),
            "M": " or ".join(_power_text("p", Fraction(m)) if m else "1" for m in self.m_values),
            "N0": _power_text("p", Fraction(self.n0)) if self.n0 else "1",
            "N1": _power_text("p", Fraction(self.n1)),
            "M1": _power_text("p", Fraction(self.m1)) if self.m1 else "1",
            "upper": _power_text("N", self.upper),
            "lower": _power_text("N", self.lower) if self.lower else "1",
            "conjectured_sharp": "yes" if self.conjectured_sharp else "no",
        }


def intro_table(prime: int = 2, n_max: int = 5) -> list[TableRow]:
    """Compute the rows N = p^n, n <= n_max, grouping the M = p^m that share N0, N1 and M1.

    The lower bound column and its conjectured sharpness are recorded data keyed by (n, m1).
    """
    reference = {(row.n, row.m1): row for row in REFERENCE_TABLE}
    rows = []
    for n in range(1, n_max + 1):
        groups: dict[tuple[int, int, int], list[int]] = {}
        for m in range(n + 1):
            invariants = level_invariants(prime**n, prime**m)
            sizes = (invariants.n0, invariants.n1, invariants.m1)
            key = tuple(int(sympy.multiplicity(prime, value)) for value in sizes)
            groups.setdefault(key, []).append(m)
        for (n0, n1, m1), m_values in groups.items():
            exponent = level_invariants(prime**n, prime ** m_values[0]).upper_exponent
            recorded = reference.get((n, m1))
            rows.append(
                TableRow(
                    n=n,
                    m_values=tuple(m_values),
                    n0=n0,
                    n1=n1,
                    m1=m1,
                    upper=exponent if exponent is not None else Fraction(0),
                    lower=recorded.lower if recorded else Fraction(0),
                    conjectured_sharp=recorded.conjectured_sharp if recorded else False,
                )
            )
    return rows


def intro_table_check(primes: Iterable[int] = (2, 3, 5)) -> CheckReport:
    """Every computed row of the prime power table matches the reference one exactly, for each prime."""
    primes = tuple(primes)
    report = CheckReport("assembly/table", params={"primes": primes})
    reference = [tuple(row) for row in REFERENCE_TABLE]
    for prime in primes:
        computed = [tuple(row) for row in intro_table(prime)]
        report.require(len(computed) == len(reference), "row count differs", p=prime, rows=len(computed))
        for row, expected in zip(computed, reference):
            report.require(row == expected, "row differs", p=prime, computed=row, reference=expected)
    report.details["rows"] = len(reference)
    return report


class WhittakerLength(NamedTuple):
    """Global lengths of the Whittaker expansion at g, with the local exponents per prime."""

    qg: int
    n0g: int
    local: dict[int, tuple[int, int]]


def _as_matrix(g: GL2Element | CosetPosition) -> GL2Element:
    return g.reconstruct() if isinstance(g, CosetPosition) else g


def _level_of(local_reps: Mapping[int, LocalRepresentation]) -> LevelInvariants:
    level = math.prod(p**pi.conductor for p, pi in local_reps.items())
    character_level = math.prod(p**pi.m for p, pi in local_reps.items())
    return level_invariants(level, character_level)


def whittaker_length(
    g_data: Mapping[int, GL2Element | CosetPosition],
    local_reps: Mapping[int, LocalRepresentation],
) -> WhittakerLength:
    """Q^g = prod p^q(g_p) and N0^g = prod p^n0(g_p) over the primes dividing N.

    Args:
        g_data: The local component g_p in K a(p^n1) for every p | N.
        local_reps: The local representation at every p | N.

    Raises:
        ConstraintError: If a component lies outside K a(p^n1), or has odd conductor and l(g_p) > n0.
        VerificationError: If Q^g does not divide N0 M1 or N0^g does not divide N0.
    """
    if set(g_data) != set(local_reps):
        raise ConstraintError(
            f"g_data primes {sorted(g_data)} differ from the representation primes {sorted(local_reps)}"
        )
    qg = n0g = 1
    local = {}
    for p, pi in sorted(local_reps.items()):
        if pi.prime != p:
            raise ConstraintError(f"representation {pi.label} is not at p={p}")
        g = _as_matrix(g_data[p])
        if not (g @ GL2Element.diagonal(Fraction(1, p**pi.n1), p)).in_maximal_compact():
            raise ConstraintError(f"g_{p} = {g} is not in K a(p^{pi.n1})")
        invariants = matrix_invariants(g, pi.conductor, pi.m)
        if not whittaker.j_condition(pi.conductor, invariants.l):
            raise ConstraintError(f"l(g_{p}) = {invariants.l} exceeds n0 = {pi.n0} at odd conductor {pi.conductor}")
        local[p] = (invariants.qg, invariants.n0g)
        qg *= p**invariants.qg
        n0g *= p**invariants.n0g
    invariants = _level_of(local_reps)
    if (invariants.n0 * invariants.m1) % qg or invariants.n0 % n0g:
        raise VerificationError(f"Q^g={qg}, N0^g={n0g} do not divide N0 M1={invariants.n0 * invariants.m1}", local)
    return WhittakerLength(qg, n0g, local)


def local_coefficient_product(
    n: Rational,
    g_data: Mapping[int, GL2Element | CosetPosition],
    local_reps: Mapping[int, LocalRepresentation],
    ring: str = "exact",
) -> Any:
    """lambda_pi(n; g) = prod over p | N of W_p(a(n p^-q(g_p)) g_p), in the chosen value ring.

    Local engines are shared across calls, so sweeping n reuses the coefficient tables of each representation.
    """
    n = Fraction(n)
    if n == 0:
        raise ParameterRangeError("n must be non-zero")
    length = whittaker_length(g_data, local_reps)
    value_ring = get_ring(ring)
    product = value_ring.convert(CyclotomicNumber.one())
    for p, pi in sorted(local_reps.items()):
        qg = length.local[p][0]
        g = _as_matrix(g_data[p])
        product = product * whittaker.get_engine(pi, ring).value(GL2Element.diagonal(n / p**qg, p) @ g)
    return product


def _coprime_units(level: int, count: int) -> list[int]:
    return [u for u in range(1, count + 1) if math.gcd(u, level) == 1]


def periodicity_check(
    g_data: Mapping[int, GL2Element | CosetPosition],
    local_reps: Mapping[int, LocalRepresentation],
    periods: int = 3,
) -> CheckReport:
    """|lambda_pi(n1 n0; g)| depends on the part n0 prime to N only through n0 modulo N0^g, exactly.

    Every N-part n1 = prod p^(q(g_p) + r), r in {0, 1}, is tried against all n0 prime to N in a window of
    `periods` full periods.
    """
    length = whittaker_length(g_data, local_reps)
    level = _level_of(local_reps).level
    report = CheckReport(
        "assembly/periodicity",
        params={"reps": [pi.label for _, pi in sorted(local_reps.items())], "N0g": length.n0g},
    )
    primes = sorted(local_reps)
    evaluations = 0
    for shifts in _shift_grid(len(primes), 2):
        part = math.prod(p ** (length.local[p][0] + r) for p, r in zip(primes, shifts))
        seen: dict[int, CyclotomicNumber] = {}
        for u in _coprime_units(level, periods * length.n0g):
            size = local_coefficient_product(part * u, g_data, local_reps).abs2()
            evaluations += 1
            first = seen.setdefault(u % length.n0g, size)
            report.require(first == size, "modulus is not periodic", n1=part, n0=u, residue=u % length.n0g)
    report.details["evaluations"] = evaluations
    return report


def _shift_grid(primes: int, extent: int) -> list[tuple[int, ...]]:
    grid: list[tuple[int, ...]] = [()]
    for _ in range(primes):
        grid = [shift + (r,) for shift in grid for r in range(extent)]
    return grid


def block_average_check(
    g_data: Mapping[int, GL2Element | CosetPosition],
    local_reps: Mapping[int, LocalRepresentation],
    extent: int = 3,
) -> CheckReport:
    """Measure C in sum over a block of N0^g consecutive n0 prime to N of |lambda_pi(n1 n0; g)|^2 <= C N0^g n1^(-1/2).

    n1 runs over the N-parts prod p^e with e <= q(g_p) + extent; the largest normalized block sum is the measured
    constant.
    """
    length = whittaker_length(g_data, local_reps)
    level = _level_of(local_reps).level
    report = CheckReport(
        "assembly/blockaverage",
        params={"reps": [pi.label for _, pi in sorted(local_reps.items())], "N0g": length.n0g},
    )
    primes = sorted(local_reps)
    block = _coprime_units(level, length.n0g)
    largest = 0.0
    for exponents in _shift_grid(len(primes), max(length.local[p][0] for p in primes) + extent + 1):
        n1 = math.prod(p**e for p, e in zip(primes, exponents))
        total = sum(abs(local_coefficient_product(n1 * u, g_data, local_reps, "complex")) ** 2 for u in block)
        largest = max(largest, total * math.sqrt(n1) / length.n0g)
    report.measured_constant = largest
    return report


class FourierBound(NamedTuple):
    """The Whittaker expansion bound at concrete sizes.

    Attributes:
        value: (Q^g T / y + N0^g T^(1/3))^(1/2) (Q^g T)^eps.
        form: The squared bound as text.
        crossover: The y at which both terms are equal, T^(2/3) Q^g / N0^g.
    """

    value: float
    form: str
    crossover: float


def fourier_bound_eval(qg: int, n0g: int, height: float, y: float, eps: float = 0.01) -> FourierBound:
    """Evaluate the bound from local Whittaker lengths Q^g, N0^g at spectral height T and imaginary part y."""
    if y <= 0:
        raise ParameterRangeError(f"y must be positive: {y}")
    if height < 1 or qg < 1 or n0g < 1:
        raise ParameterRangeError(f"T, Q^g and N0^g must be at least 1: {height}, {qg}, {n0g}")
    squared = qg * height / y + n0g * height ** (1 / 3)
    form = f"{qg} T / y + {n0g} T^(1/3)"
    return FourierBound(math.sqrt(squared) * (qg * height) ** eps, form, height ** (2 / 3) * qg / n0g)


def fourier_bound_check(
    qg: int,
    n0g: int,
    height: float,
    ys: Iterable[float] = (math.sqrt(3) / 2, 1.0, 2.0, 5.0, 20.0, 100.0),
    eps: float = 0.01,
) -> CheckReport:
    """Tabulate the Whittaker expansion bound over y and confirm it decreases."""
    ys = sorted(ys)
    report = CheckReport("assembly/fourier", params={"Qg": qg, "N0g": n0g, "T": height})
    values = [fourier_bound_eval(qg, n0g, height, y, eps) for y in ys]
    for (y, bound), (later_y, later) in zip(zip(ys, values), zip(ys[1:], values[1:])):
        report.require(later.value < bound.value, "bound does not decrease in y", y=y, next_y=later_y)
    report.details["values"] = {f"{y:.6g}": bound.value for y, bound in zip(ys, values)}
    report.details["form"] = values[0].form
    report.details["crossover"] = values[0].crossover
    report.status = STATUS_INFO if report.status != STATUS_FAIL else STATUS_FAIL
    return report


def _catalog(config: RunConfig, logger: logging.Logger) -> list[LocalRepresentation]:
    catalog = []
    for p in config.primes:
        catalog.extend(reps.build_catalog(p, config.n_max_for(p), logger=logger))
    return catalog


def _twist_report(pi: LocalRepresentation) -> CheckReport:
    report = CheckReport("reps/twistcond", params={"pi": pi.label})
    for l in range(pi.n0 + 1):
        report.merge(reps.twist_count_bound_check(pi, l), f"l={l}")
    return report


def _assembly_sample() -> tuple[dict[int, GL2Element], dict[int, LocalRepresentation]]:
    """A two prime level 4 * 9 with non-trivial J components."""
    local_reps = {2: reps.representation_for(2, reps.RAMIFIED_PS, 2), 3: reps.representation_for(3, reps.STEINBERG, 2)}
    g_data = {
        p: GL2Element.lower_unipotent(p, p) @ GL2Element.diagonal(Fraction(p) ** pi.n1, p)
        for p, pi in local_reps.items()
    }
    return g_data, local_reps


def _sample_periodicity() -> CheckReport:
    return periodicity_check(*_assembly_sample())


def _sample_block_average() -> CheckReport:
    return block_average_check(*_assembly_sample())


def _kernel_report(height: float) -> CheckReport:
    kernel = archimedean.kernel_build(height)
    report = archimedean.kernel_verify(kernel)
    report.merge(archimedean.chain_consistency(kernel), "chain")
    return report


def _hecke_report() -> CheckReport:
    return counting.hecke_identity_check(((2, 2), (4, 4), (2, 4), (2, 3)), {2: 1, 3: 1})


def _support_report(pi: LocalRepresentation) -> CheckReport:
    report = CheckReport("whittaker/support", params={"p": pi.prime, "pi": pi.label})
    for part in (whittaker.verify_support(pi), whittaker.verify_j_support(pi)):
        report.merge(part, part.check.split("/")[-1])
    return report


# Per representation checks over the whole catalog.
CATALOG_CHECKS: dict[str, Callable[[LocalRepresentation, RunConfig], tuple[Callable, tuple] | None]] = {
    "normalization": lambda pi, config: (whittaker.verify_normalization, (pi,)),
    "support": lambda pi, config: (_support_report, (pi,)),
    "avgsize": lambda pi, config: (whittaker.verify_average_size, (pi,)),
    "transform": lambda pi, config: (whittaker.verify_transformations, (pi, 20, config.seed)),
    "unittranslation": lambda pi, config: (whittaker.verify_unit_translation, (pi,)),
    "al": lambda pi, config: (whittaker.atkin_lehner_verify, (pi,)),
    "alphadecay": lambda pi, config: (whittaker.alpha_decay_constant, (pi,)),
    "supscan": lambda pi, config: (whittaker.sup_scan, (pi,)),
    "twistcond": lambda pi, config: (_twist_report, (pi,)),
    "coefficients": lambda pi, config: (
        (whittaker.verify_supercuspidal_coefficients, (pi,)) if pi.is_supercuspidal else None
    ),
    "langlands": lambda pi, config: (
        (whittaker.langlands_consistency, (pi,)) if pi.variant == reps.DIHEDRAL else None
    ),
}

# Checks over the sublist where matrix coefficient tables are exact.
EXACT_CHECKS: dict[str, Callable[[LocalRepresentation, RunConfig], tuple[Callable, tuple] | None]] = {
    "delta": lambda pi, config: (matrixcoeff.delta_pi, (pi,)),
    "idempotency": lambda pi, config: (
        matrixcoeff.convolution_verify,
        (pi, config.samples, config.seed, config.eigen_samples),
    ),
    "dimbound": lambda pi, config: (matrixcoeff.dimension_bound_check, (pi,)),
    "orthogonality": lambda pi, config: (
        (matrixcoeff.cross_term_orthogonality, (pi,)) if pi.is_supercuspidal else None
    ),
    "formula": lambda pi, config: ((matrixcoeff.formula_cross_check, (pi,)) if pi.is_supercuspidal else None),
}

# Checks that do not depend on the catalog.
GLOBAL_CHECKS: dict[str, Callable[[RunConfig], dict[str, tuple[Callable, tuple]]]] = {
    "integlemma": lambda config: {
        f"{q}/{n}": (matrixcoeff.integ_constants_verify, (q, n)) for q in (2, 3, 5) for n in range(1, 4)
    },
    "count": lambda config: {
        "recount": (counting.random_recount_check, (config.recounts, config.seed)),
        "sweep": (counting.counting_sweep, (("1i", "2i", "0.3+0.9i"), config.l_max)),
        "monotone": (counting.monotonicity_check, (counting.HalfPlanePoint.from_complex("1i"),)),
        "sampler": (counting.sampler_check, (config.draws, config.seed)),
        "hecke": (_hecke_report, ()),
    },
    "bessel": lambda config: {
        "oracle": (archimedean.bessel_oracle_check, ()),
        "envelope": (archimedean.envelope_sweep, ()),
        "kernel": (_kernel_report, (10.0,)),
        "tail": (archimedean.tail_criterion, ()),
    },
    "caseorder": lambda config: {
        "general": (exponent_casecheck, (False,)),
        "square": (exponent_casecheck, (True,)),
        "table": (intro_table_check, ()),
    },
    "lambda": lambda config: {
        "periodicity": (_sample_periodicity, ()),
        "blockaverage": (_sample_block_average, ()),
    },
}

VERIFY_CHECKS = tuple(CATALOG_CHECKS) + tuple(EXACT_CHECKS) + tuple(GLOBAL_CHECKS)


def verification_jobs(
    config: RunConfig,
    checks: Iterable[str] | None = None,
    logger: logging.Logger | None = None,
) -> dict[Hashable, tuple[Callable, tuple]]:
    """Jobs of the selected checks, keyed "check/item" so merged reports have a stable order.

    Args:
        config: The run configuration.
        checks: Names from VERIFY_CHECKS; None selects every check.
        logger: Optional logger for catalog construction.

    Raises:
        UnsupportedError: If a check name is unknown.
    """
    logger = get_logger(logger)
    selected = list(VERIFY_CHECKS if checks is None else checks)
    unknown = [name for name in selected if name not in VERIFY_CHECKS]
    if unknown:
        raise UnsupportedError(f"Unknown checks: {unknown}; choose from {list(VERIFY_CHECKS)}")
    jobs: dict[Hashable, tuple[Callable, tuple]] = {}
    if any(name in CATALOG_CHECKS or name in EXACT_CHECKS for name in selected):
        catalog = _catalog(config, logger)
        for name in selected:
            builder = CATALOG_CHECKS.get(name) or EXACT_CHECKS.get(name)
            if builder is None:
                continue
            for pi in catalog if name in CATALOG_CHECKS else matrixcoeff.exact_sublist(catalog):
                job = builder(pi, config)
                if job is not None:
                    jobs[f"{name}/{pi.prime}:{pi.label}"] = job
    for name in selected:
        if name in GLOBAL_CHECKS:
            jobs.update({f"{name}/{key}": job for key, job in GLOBAL_CHECKS[name](config).items()})
    return jobs


def apply_locked(reports: Iterable[CheckReport], locked: LockedConstants) -> list[CheckReport]:
    """Record or compare the measured constant of every report that carries one."""
    applied = []
    for report in reports:
        if report.status != STATUS_FAIL:
            locked.apply(report, FLOOR if report.check in FLOOR_CHECKS else UPPER)
        applied.append(report)
    return applied


def run_all(
    config: RunConfig,
    jobs: Mapping[Hashable, tuple[Callable, tuple]] | None = None,
    locked: LockedConstants | None = None,
    logger: logging.Logger | None = None,
) -> list[CheckReport]:
    """Run verification jobs across the worker pool and merge their reports by job key.

    A job raising instead of reporting becomes a failed report naming the exception.

    Args:
        config: The run configuration.
        jobs: Jobs to run; defaults to every check.
        locked: Store of locked constants applied to the merged reports.
        logger: Optional logger for job outcomes.

    Returns:
        Reports in job key order.
    """
    logger = get_logger(logger)
    jobs = dict(jobs) if jobs is not None else verification_jobs(config, logger=logger)
    logger.info(f"Running {len(jobs)} verification jobs with seed {config.seed} on {config.workers} workers")
    results = run_keyed_jobs(jobs, max_workers=config.workers, use_threads=config.use_threads, logger=logger)
    reports = []
    for key, result in results.items():
        if isinstance(result, BaseException):
            result = CheckReport(str(key), status=STATUS_FAIL, details={"error": f"{type(result).__name__}: {result}"})
        logger.info(f"{key}: {result.status}")
        reports.append(result)
    if locked is not None:
        apply_locked(reports, locked)
    return reports
