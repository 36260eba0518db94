"""Catalog of generic irreducible unitary representations of GL2(Q_p) and their local invariants."""

from __future__ import annotations

import logging
from abc import ABC
from abc import abstractmethod
from dataclasses import dataclass
from dataclasses import field
from fractions import Fraction
from functools import cached_property
from typing import Any

from newformology.chars import QuadExtCharacter
from newformology.chars import QuadraticExtension
from newformology.chars import ResidueCharacter
from newformology.chars import combine_roots
from newformology.chars import gl1_epsilon
from newformology.chars import primitive_characters
from newformology.chars import supercuspidal_characters
from newformology.cyclo import CyclotomicNumber
from newformology.cyclo import half_power
from newformology.exceptions import ConstraintError
from newformology.exceptions import ParameterRangeError
from newformology.exceptions import UnsupportedError
from newformology.logging import get_logger
from newformology.reports import CheckReport

UNRAMIFIED_PS = "UnramifiedPS"
RAMIFIED_PS = "RamifiedPS"
STEINBERG = "SteinbergTwist"
DIHEDRAL = "DihedralSupercuspidal"
VARIANTS = (UNRAMIFIED_PS, RAMIFIED_PS, STEINBERG, DIHEDRAL)


def complete_homogeneous(roots: list[CyclotomicNumber], degree: int) -> CyclotomicNumber:
    """The complete homogeneous symmetric polynomial of the given degree in the roots.

    These are the coefficients of prod (1 - r X)^-1, so they expand L-factors into power series.
    """
    if degree < 0:
        return CyclotomicNumber.zero()
    if not roots:
        return CyclotomicNumber.one() if degree == 0 else CyclotomicNumber.zero()
    *rest, last = roots
    if not rest:
        return last**degree
    total = CyclotomicNumber.zero()
    power = CyclotomicNumber.one()
    for i in range(degree + 1):
        total = total + power * complete_homogeneous(rest, degree - i)
        power = power * last
    return total


def geometric_parts(roots: list[CyclotomicNumber]) -> list[tuple[CyclotomicNumber, CyclotomicNumber]]:
    """Partial fractions of prod (1 - r X)^-1: pairs (D, r) with complete_homogeneous(roots, k) = sum of D r^k.

    The identity holds for every k >= 1, and for k = 0 too unless roots is empty.

    Raises:
        UnsupportedError: If two roots coincide.
    """
    parts = []
    for i, root in enumerate(roots):
        denominator = CyclotomicNumber.one()
        for j, other in enumerate(roots):
            if j == i:
                continue
            difference = root - other
            if difference.is_zero():
                raise UnsupportedError(f"repeated L-root {root}")
            denominator = denominator * difference
        parts.append((root ** (len(roots) - 1) / denominator, root))
    return parts


def distinct_roots(roots: list[CyclotomicNumber]) -> bool:
    return all(not (left - right).is_zero() for i, left in enumerate(roots) for right in roots[i + 1 :])


@dataclass(frozen=True, eq=False)
class GL1Character:
    """A character chi of Q_p^x, given by its restriction mu to the units and its value at p."""

    mu: ResidueCharacter
    unramified: CyclotomicNumber = field(default_factory=CyclotomicNumber.one)

    @property
    def prime(self) -> int:
        return self.mu.prime

    @property
    def conductor(self) -> int:
        return self.mu.conductor

    def twist(self, nu: ResidueCharacter) -> GL1Character:
        return GL1Character(self.mu * nu, self.unramified)

    def inverse(self) -> GL1Character:
        return GL1Character(self.mu.inverse(), self.unramified.inverse())

    def epsilon(self) -> CyclotomicNumber:
        return gl1_epsilon(self.mu, self.unramified)

    def l_root(self, shift: int = 1) -> CyclotomicNumber | None:
        """Inverse root chi(p) q^(-shift/2) of the L-factor in X = q^(1/2 - s), None when ramified."""
        if self.conductor:
            return None
        return self.unramified * half_power(self.prime, -shift)

    @property
    def label(self) -> str:
        return f"{self.mu.label}@{self.unramified}"

    def to_json(self) -> dict:
        return {"mu": self.mu.label, "conductor": self.conductor, "value_at_p": str(self.unramified)}


class LocalRepresentation(ABC):
    """A generic irreducible unitary representation pi of GL2(Q_p) with omega_pi(p) = 1."""

    variant: str = ""

    @property
    @abstractmethod
    def prime(self) -> int:
        """The residue characteristic."""

    @property
    @abstractmethod
    def conductor(self) -> int:
        """The exponent n = a(pi)."""

    @property
    @abstractmethod
    def central_character(self) -> ResidueCharacter:
        """Restriction of omega_pi to the units."""

    @abstractmethod
    def l_roots(self) -> list[CyclotomicNumber]:
        """Inverse roots gamma_j with L(s, pi) = prod (1 - gamma_j X)^-1, X = q^(1/2 - s)."""

    @abstractmethod
    def epsilon(self) -> CyclotomicNumber:
        """The epsilon factor eps(1/2, pi) for the additive character of conductor Z_p."""

    @abstractmethod
    def twist(self, nu: ResidueCharacter) -> LocalRepresentation:
        """The twist nu pi by a character with nu(p) = 1."""

    @abstractmethod
    def parameters(self) -> dict:
        """Defining data for reports."""

    @property
    def is_supercuspidal(self) -> bool:
        return False

    @property
    def is_complementary(self) -> bool:
        return False

    @property
    def n1(self) -> int:
        return (self.conductor + 1) // 2

    @property
    def n0(self) -> int:
        return self.conductor // 2

    @cached_property
    def m(self) -> int:
        return self.central_character.conductor

    @property
    def m1(self) -> int:
        return max(0, self.m - self.n1)

    def contragredient(self) -> LocalRepresentation:
        """pi~, realized as omega_pi^-1 pi."""
        return self.twist(self.central_character.inverse())

    def twist_conductor(self, nu: ResidueCharacter) -> int:
        return self.twist(nu).conductor

    def l_coefficient(self, i: int) -> CyclotomicNumber:
        """Coefficient of X^i in L(s, pi)."""
        return complete_homogeneous(self.l_roots(), i)

    @cached_property
    def _contragredient_roots(self) -> list[CyclotomicNumber]:
        return self.contragredient().l_roots()

    def diagonal(self, a: int) -> CyclotomicNumber:
        """W_pi(a(p^a)), the coefficient of X^a in L(s, pi~); zero for a < 0."""
        return complete_homogeneous(self._contragredient_roots, a)

    @property
    def label(self) -> str:
        return f"{self.variant}(p={self.prime},n={self.conductor},{self._label_data()})"

    def _label_data(self) -> str:
        return ",".join(f"{key}={value}" for key, value in sorted(self.parameters().items()))

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "label": self.label,
            "prime": self.prime,
            "n": self.conductor,
            "n0": self.n0,
            "n1": self.n1,
            "m": self.m,
            "m1": self.m1,
            "supercuspidal": self.is_supercuspidal,
            "complementary": self.is_complementary,
            "parameters": self.parameters(),
        }

    def __repr__(self) -> str:
        return self.label


class PrincipalSeries(LocalRepresentation):
    """The induced representation chi1 x chi2, unramified when both characters are."""

    def __init__(self, chi1: GL1Character, chi2: GL1Character, complementary: bool = False) -> None:
        """Validate and store the inducing characters.

        Args:
            chi1: First inducing character.
            chi2: Second inducing character.
            complementary: Whether the characters are a real deformation |.|^s, |.|^-s off the unitary axis.
        """
        self.chi1 = chi1
        self.chi2 = chi2
        self.complementary = complementary
        p = chi1.prime
        if chi1.unramified * chi2.unramified != 1:
            raise ConstraintError("central character must be trivial at p")
        # chi2(p) = chi1(p)^-1 here, so the ratio is chi1(p)^2.
        ratio = chi1.unramified * chi1.unramified
        if chi1.mu.same_as(chi2.mu) and (ratio == p or ratio == Fraction(1, p)):
            raise ConstraintError("chi1 / chi2 = |.|^(+-1) gives a reducible principal series")
        if complementary:
            modulus = chi1.unramified.abs2().to_complex().real
            if not chi1.mu.same_as(chi2.mu) or not 1 / p < modulus < p:
                raise ConstraintError("complementary series needs chi1 = chi2 |.|^(2s) with 0 < s < 1/2")
        elif any(chi.unramified.abs2() != 1 for chi in (chi1, chi2)):
            raise ConstraintError("tempered principal series needs unitary characters")

    @property
    def variant(self) -> str:  # type: ignore[override]
        return UNRAMIFIED_PS if self.conductor == 0 else RAMIFIED_PS

    @property
    def prime(self) -> int:
        return self.chi1.prime

    @cached_property
    def conductor(self) -> int:
        return self.chi1.conductor + self.chi2.conductor

    @cached_property
    def central_character(self) -> ResidueCharacter:
        return self.chi1.mu * self.chi2.mu

    @property
    def is_complementary(self) -> bool:
        return self.complementary

    def l_roots(self) -> list[CyclotomicNumber]:
        return [root for root in (self.chi1.l_root(), self.chi2.l_root()) if root is not None]

    def epsilon(self) -> CyclotomicNumber:
        return self.chi1.epsilon() * self.chi2.epsilon()

    def twist(self, nu: ResidueCharacter) -> PrincipalSeries:
        return PrincipalSeries(self.chi1.twist(nu), self.chi2.twist(nu), self.complementary)

    def parameters(self) -> dict:
        return {"chi1": self.chi1.label, "chi2": self.chi2.label}


class SteinbergTwist(LocalRepresentation):
    """The twisted Steinberg representation chi St."""

    variant = STEINBERG

    def __init__(self, chi: GL1Character) -> None:
        """Store the twisting character; chi(p)^2 = 1 keeps the central character trivial at p."""
        self.chi = chi
        if chi.unramified**2 != 1:
            raise ConstraintError("chi(p) must be +1 or -1")

    @property
    def prime(self) -> int:
        return self.chi.prime

    @cached_property
    def conductor(self) -> int:
        return max(2 * self.chi.conductor, 1)

    @cached_property
    def central_character(self) -> ResidueCharacter:
        return self.chi.mu**2

    def l_roots(self) -> list[CyclotomicNumber]:
        root = self.chi.l_root(shift=2)
        return [] if root is None else [root]

    def epsilon(self) -> CyclotomicNumber:
        if self.chi.conductor == 0:
            return -self.chi.unramified
        return self.chi.epsilon() ** 2

    def twist(self, nu: ResidueCharacter) -> SteinbergTwist:
        return SteinbergTwist(self.chi.twist(nu))

    def parameters(self) -> dict:
        return {"chi": self.chi.label}


class DihedralSupercuspidal(LocalRepresentation):
    """The supercuspidal representation pi_xi attached to a character xi of a quadratic extension E."""

    variant = DIHEDRAL

    def __init__(self, xi: QuadExtCharacter, langlands: CyclotomicNumber | None = None) -> None:
        """Validate and store the inducing character.

        Args:
            xi: A character of E^x different from its Galois conjugate.
            langlands: The constant relating eps(pi_xi) to eps(xi); None until it has been pinned by W(1) = 1.
        """
        if xi.is_galois_invariant():
            raise ConstraintError("xi factors through the norm; pi_xi would not be supercuspidal")
        self.xi = xi
        self.langlands = langlands
        ext = xi.extension
        value_at_p = combine_roots(xi.uniformizer, xi.uniformizer) if ext.kind == "ramified" else xi.uniformizer
        eta_at_p = (0, 1) if ext.eta_at_prime() == 1 else (1, 2)
        if combine_roots(value_at_p, eta_at_p)[0] != 0:
            raise ConstraintError("central character must be trivial at p")

    @property
    def extension(self) -> QuadraticExtension:
        return self.xi.extension

    @property
    def prime(self) -> int:
        return self.xi.extension.prime

    @cached_property
    def conductor(self) -> int:
        ext = self.extension
        return ext.residue_degree * self.xi.conductor + ext.different_exponent

    @cached_property
    def central_character(self) -> ResidueCharacter:
        ext = self.extension
        level = max(1, -(-self.xi.conductor // ext.ramification))
        return ResidueCharacter.from_function(
            self.prime, level, lambda u: combine_roots(ext.eta_exponent(u), self.xi.restricted_to_base(u))
        )

    @property
    def is_supercuspidal(self) -> bool:
        return True

    def l_roots(self) -> list[CyclotomicNumber]:
        return []

    def epsilon(self) -> CyclotomicNumber:
        constant = self.langlands if self.langlands is not None else CyclotomicNumber.one()
        return constant * self.xi.epsilon()

    def twist(self, nu: ResidueCharacter) -> DihedralSupercuspidal:
        return DihedralSupercuspidal(self.xi.twisted(nu), self.langlands)

    def with_langlands(self, constant: CyclotomicNumber) -> DihedralSupercuspidal:
        return DihedralSupercuspidal(self.xi, constant)

    def parameters(self) -> dict:
        return {"extension": self.extension.kind, "xi": self.xi.label}


def twist_conductor(pi: LocalRepresentation, mu: ResidueCharacter) -> int:
    """The conductor exponent a(mu pi)."""
    return pi.twist_conductor(mu)


def twist_count_bound_check(pi: LocalRepresentation, l: int) -> CheckReport:
    """Count twists of a fixed conductor by their conductor drop and compare with q^(l - r/2).

    For every mu with mu(p) = 1 and a(mu) = l, a(mu pi) <= max(n, l + m); the number of mu reaching
    max(n, l + m) - r is at most q^(l - r/2).

    Args:
        pi: The representation.
        l: Conductor exponent of the twisting characters, 0 <= l <= n0.

    Returns:
        A report listing the counts per r.
    """
    if not 0 <= l <= pi.n0:
        raise ParameterRangeError(f"l must lie in [0, {pi.n0}]: {l}")
    q = pi.prime
    top = max(pi.conductor, l + pi.m)
    report = CheckReport("reps/twistcond", params={"pi": pi.label, "l": l})
    counts: dict[int, int] = {}
    for mu in primitive_characters(q, l):
        a = pi.twist_conductor(mu)
        report.require(a <= top, "twist conductor above max(n, l + m)", mu=mu.label, conductor=a, bound=top)
        if a <= top:
            counts[top - a] = counts.get(top - a, 0) + 1
    for r, count in sorted(counts.items()):
        report.require(
            Fraction(count) ** 2 <= Fraction(q) ** (2 * l - r),
            "count exceeds q^(l - r/2)",
            r=r,
            count=count,
        )
    report.details["counts"] = {str(r): count for r, count in sorted(counts.items())}
    return report


def diagonal_whittaker(pi: LocalRepresentation, a: int) -> CyclotomicNumber:
    """The diagonal value W_pi(a(p^a)); zero when a < 0."""
    return pi.diagonal(a)


def _first(characters: list[ResidueCharacter]) -> ResidueCharacter | None:
    return characters[0] if characters else None


def _dihedral_entries(p: int, n_max: int, logger: logging.Logger) -> list[DihedralSupercuspidal]:
    entries = []
    for kind in ("unramified", "ramified"):
        extension = QuadraticExtension(p, kind)
        for a in range(1, n_max + 1):
            n = extension.residue_degree * a + extension.different_exponent
            if n > n_max:
                break
            xi = next(supercuspidal_characters(extension, a), None)
            if xi is None:
                logger.info(f"No {kind} dihedral supercuspidal of conductor {n} at p={p}")
                continue
            entries.append(DihedralSupercuspidal(xi))
    return entries


def build_catalog(
    p: int,
    n_max: int,
    include_complementary: bool = False,
    logger: logging.Logger | None = None,
) -> list[LocalRepresentation]:
    """Build representatives of every variant and conductor up to n_max that can be realized at p.

    Args:
        p: The prime.
        n_max: Largest conductor exponent.
        include_complementary: Also add a complementary series entry.
        logger: Optional logger for coverage notes.

    Returns:
        The catalog ordered by conductor and then by variant.
    """
    if n_max < 0:
        raise ParameterRangeError(f"n_max must be non-negative: {n_max}")
    logger = get_logger(logger)
    one = CyclotomicNumber.one()
    trivial = ResidueCharacter.trivial(p)
    catalog: list[LocalRepresentation] = [
        PrincipalSeries(
            GL1Character(trivial, CyclotomicNumber.root_of_unity(1, 4)),
            GL1Character(trivial, CyclotomicNumber.root_of_unity(3, 4)),
        )
    ]
    if include_complementary:
        r = Fraction(2 * p + 1, 2 * p)
        catalog.append(
            PrincipalSeries(
                GL1Character(trivial, CyclotomicNumber.rational(r)),
                GL1Character(trivial, CyclotomicNumber.rational(1 / r)),
                complementary=True,
            )
        )
    for n in range(1, n_max + 1):
        chi = _first(primitive_characters(p, n))
        if chi is not None:
            catalog.append(PrincipalSeries(GL1Character(chi), GL1Character(trivial)))
        split = (1, n - 1) if p != 2 else (2, n - 2)
        left = _first(primitive_characters(p, split[0])) if min(split) >= 1 else None
        right = _first(primitive_characters(p, split[1])) if min(split) >= 1 else None
        if left is not None and right is not None:
            catalog.append(PrincipalSeries(GL1Character(left), GL1Character(right)))
        if n == 1:
            catalog.append(SteinbergTwist(GL1Character(trivial, one)))
            catalog.append(SteinbergTwist(GL1Character(trivial, -one)))
        elif n % 2 == 0:
            chi = _first(primitive_characters(p, n // 2))
            if chi is not None:
                catalog.append(SteinbergTwist(GL1Character(chi)))
    if p != 2:
        catalog.extend(_dihedral_entries(p, n_max, logger))
    catalog.sort(key=lambda pi: (pi.conductor, VARIANTS.index(pi.variant)))
    for entry in catalog:
        if entry.m > entry.conductor:
            raise ConstraintError(f"central conductor exceeds the conductor for {entry.label}")
    logger.info(f"Built catalog p={p} n_max={n_max}: {len(catalog)} representations")
    return catalog


def catalog_coverage(p: int, n_max: int, catalog: list[LocalRepresentation]) -> dict[str, Any]:
    """Summarize which variants and conductors are present, and why gaps exist."""
    present: dict[str, list[int]] = {variant: [] for variant in VARIANTS}
    for entry in catalog:
        present[entry.variant].append(entry.conductor)
    gaps = {}
    if p == 2:
        gaps[DIHEDRAL] = "unsupported at p=2"
    return {
        "prime": p,
        "n_max": n_max,
        "present": {variant: sorted(set(conductors)) for variant, conductors in present.items()},
        "gaps": gaps,
    }


def representation_for(p: int, variant: str, n: int) -> LocalRepresentation:
    """The first catalog entry of a variant and conductor."""
    if variant == DIHEDRAL and p == 2:
        raise UnsupportedError("dihedral supercuspidals at p = 2 are unsupported")
    for entry in build_catalog(p, n):
        if entry.variant == variant and entry.conductor == n:
            return entry
    raise UnsupportedError(f"no {variant} representation of conductor {n} at p={p}")


