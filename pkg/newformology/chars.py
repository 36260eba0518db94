"""Additive and multiplicative characters, Gauss sums, and GL1 epsilon factors over Q_p and its quadratic extensions."""

from __future__ import annotations

import itertools
import json
import logging
import math
import os
import tempfile
import threading
from dataclasses import dataclass
from dataclasses import field
from fractions import Fraction
from functools import cached_property
from functools import lru_cache
from pathlib import Path
from typing import Any
from typing import Callable
from typing import Iterator

import sympy

from newformology.cyclo import CyclotomicNumber
from newformology.cyclo import ExactRing
from newformology.cyclo import half_power
from newformology.exceptions import CacheError
from newformology.exceptions import ParameterRangeError
from newformology.exceptions import UnsupportedError
from newformology.logging import get_logger
from newformology.padic import INFINITY
from newformology.padic import Rational
from newformology.padic import residue
from newformology.padic import unit_residues
from newformology.padic import valuation

CACHE_VERSION = 1

# An exponent pair (k, M) stands for the root of unity zeta_M^k.
RootExponent = tuple[int, int]


def combine_roots(*roots: RootExponent) -> RootExponent:
    """Multiply roots of unity given as exponent pairs."""
    modulus = math.lcm(*(m for _, m in roots)) if roots else 1
    return sum(k * (modulus // m) for k, m in roots) % modulus, modulus


@dataclass(frozen=True)
class AdditiveCharacter:
    """The character psi(x) = exp(2 pi i {x}_p) of Q_p, trivial on Z_p and nontrivial on p^-1 Z_p."""

    prime: int

    def exponent(self, x: Rational) -> RootExponent:
        """Root-of-unity exponent of psi(x)."""
        p = self.prime
        v = valuation(x, p)
        if v >= 0:
            return 0, 1
        depth = int(-v)
        return residue(Fraction(x) * p**depth, p, depth), p**depth

    def __call__(self, x: Rational) -> CyclotomicNumber:
        return CyclotomicNumber.root_of_unity(*self.exponent(x))

    def value(self, x: Rational, ring: Any = None) -> Any:
        return (ring or ExactRing()).root(*self.exponent(x))


class ResidueUnitGroup:
    """Presentation of (Z/p^level)^x by generators, orders, and discrete logarithms."""

    def __init__(self, prime: int, level: int) -> None:
        """Build the presentation: a cyclic generator for odd p, and {-1} x <5> for p = 2."""
        self.prime = prime
        self.level = level
        self.modulus = prime**level
        self._logs: dict[int, tuple[int, ...]] = {}
        if level == 0 or (prime == 2 and level == 1):
            self.generators: tuple[int, ...] = ()
            self.orders: tuple[int, ...] = ()
            self._logs[1 % self.modulus] = ()
        elif prime == 2:
            five_order = 2 ** (level - 2)
            self.generators = (self.modulus - 1, 5 % self.modulus) if level > 2 else (self.modulus - 1,)
            self.orders = (2, five_order) if level > 2 else (2,)
            power = 1
            for k in range(five_order):
                for sign in (0, 1):
                    element = power if sign == 0 else (-power) % self.modulus
                    self._logs[element] = (sign, k) if level > 2 else (sign,)
                power = power * 5 % self.modulus
        else:
            order = (prime - 1) * prime ** (level - 1)
            generator = next(g for g in range(2, self.modulus) if g % prime and sympy.n_order(g, self.modulus) == order)
            self.generators = (generator,)
            self.orders = (order,)
            power = 1
            for k in range(order):
                self._logs[power] = (k,)
                power = power * generator % self.modulus
        self.exponent = math.lcm(*self.orders) if self.orders else 1

    def __len__(self) -> int:
        return len(self._logs)

    def elements(self) -> list[int]:
        return sorted(self._logs)

    def dlog(self, u: int) -> tuple[int, ...]:
        """Exponents of u with respect to the generators."""
        return self._logs[u % self.modulus]


@lru_cache(maxsize=None)
def unit_group(prime: int, level: int) -> ResidueUnitGroup:
    """Shared presentation of (Z/p^level)^x."""
    return ResidueUnitGroup(prime, level)


@dataclass(frozen=True)
class ResidueCharacter:
    """A character mu of Q_p^x with mu(p) = 1, given on (Z/p^level)^x by exponents on the generators.

    Attributes:
        prime: The prime p.
        level: Exponent of the modulus the character is written on; at least its conductor.
        values: For each generator g_i of order o_i, the integer k_i with mu(g_i) = zeta_{o_i}^{k_i}.
    """

    prime: int
    level: int
    values: tuple[int, ...]

    @property
    def group(self) -> ResidueUnitGroup:
        return unit_group(self.prime, self.level)

    @classmethod
    def trivial(cls, prime: int, level: int = 0) -> ResidueCharacter:
        return cls(prime, level, tuple(0 for _ in unit_group(prime, level).generators))

    @classmethod
    def from_function(cls, prime: int, level: int, func: Callable[[int], RootExponent]) -> ResidueCharacter:
        """Build a character from its values on the generators, given as root exponents."""
        group = unit_group(prime, level)
        values = []
        for generator, order in zip(group.generators, group.orders):
            k, modulus = func(generator)
            if (k * order) % modulus:
                raise ValueError(f"Value zeta_{modulus}^{k} at {generator} is not an order {order} root of unity")
            values.append(k * order // modulus % order)
        return cls(prime, level, tuple(values))

    def exponent_at(self, u: Rational) -> RootExponent:
        """Root exponent of mu(u) for a p-adic unit u."""
        group = self.group
        if not group.generators:
            return 0, 1
        logs = group.dlog(residue(u, self.prime, self.level))
        e = group.exponent
        return sum(k * x * (e // o) for k, x, o in zip(self.values, logs, group.orders)) % e, e

    def __call__(self, u: Rational) -> CyclotomicNumber:
        return CyclotomicNumber.root_of_unity(*self.exponent_at(u))

    def value(self, u: Rational, ring: Any = None) -> Any:
        return (ring or ExactRing()).root(*self.exponent_at(u))

    @property
    def is_trivial(self) -> bool:
        return not any(self.values)

    @cached_property
    def conductor(self) -> int:
        """Exponent a(mu) of the conductor."""
        if self.is_trivial:
            return 0
        p = self.prime
        for c in range(1, self.level):
            if p == 2 and c == 1:
                continue
            if self.exponent_at(1 + p**c)[0] == 0:
                return c
        return self.level

    def at_level(self, level: int) -> ResidueCharacter:
        """The same character written on (Z/p^level)^x; level must be at least the conductor."""
        if level == self.level:
            return self
        if level < self.conductor:
            raise ValueError(f"Cannot write a conductor {self.conductor} character at level {level}")
        return ResidueCharacter.from_function(self.prime, level, self.exponent_at)

    def canonical(self) -> ResidueCharacter:
        """The character written at its conductor."""
        return self.at_level(self.conductor)

    def __mul__(self, other: ResidueCharacter) -> ResidueCharacter:
        level = max(self.level, other.level)
        left, right = self.at_level(level), other.at_level(level)
        orders = left.group.orders
        return ResidueCharacter(
            self.prime, level, tuple((a + b) % o for a, b, o in zip(left.values, right.values, orders))
        )

    def __pow__(self, exponent: int) -> ResidueCharacter:
        orders = self.group.orders
        return ResidueCharacter(self.prime, self.level, tuple(k * exponent % o for k, o in zip(self.values, orders)))

    def inverse(self) -> ResidueCharacter:
        return self**-1

    def same_as(self, other: ResidueCharacter) -> bool:
        """Equality of characters regardless of the level they are written on."""
        return self.prime == other.prime and self.canonical() == other.canonical()

    @property
    def label(self) -> str:
        canonical = self.canonical()
        return f"{self.prime}.{canonical.level}.{'-'.join(str(v) for v in canonical.values) or '1'}"

    def to_json(self) -> dict:
        return {"prime": self.prime, "conductor": self.conductor, "label": self.label}


def legendre_character(p: int) -> ResidueCharacter:
    """The quadratic character u -> (u/p) for odd p."""
    if p == 2:
        raise UnsupportedError("the Legendre character needs an odd prime")
    return ResidueCharacter.from_function(p, 1, lambda u: (0 if sympy.legendre_symbol(u % p, p) == 1 else 1, 2))


class CharacterCache:
    """Versioned JSON cache of character tables and epsilon values.

    Entries are keyed by tuples such as (p, a, variant) and written atomically.
    """

    def __init__(self, directory: str | os.PathLike | None, logger: logging.Logger | None = None) -> None:
        """Create a cache rooted at the directory; None disables the cache."""
        self.directory = Path(directory) if directory is not None else None
        self.logger = get_logger(logger)
        self._lock = threading.Lock()

    def _path(self, key: tuple) -> Path:
        return self.directory / ("-".join(str(part) for part in key) + ".json")

    def load(self, key: tuple) -> Any:
        """Return a cached payload, or None when absent or written by another version."""
        if self.directory is None:
            return None
        path = self._path(key)
        if not path.exists():
            return None
        try:
            with open(path, encoding="utf-8") as file:
                entry = json.load(file)
        except (OSError, json.JSONDecodeError) as error:
            raise CacheError(f"Unreadable cache entry {path}: {error}") from error
        if entry.get("version") != CACHE_VERSION or entry.get("key") != [str(part) for part in key]:
            self.logger.info(f"Ignoring stale cache entry {path}")
            return None
        return entry["payload"]

    def store(self, key: tuple, payload: Any) -> None:
        """Write a payload through a temporary file and an atomic rename."""
        if self.directory is None:
            return
        entry = {"version": CACHE_VERSION, "key": [str(part) for part in key], "payload": payload}
        with self._lock:
            self.directory.mkdir(parents=True, exist_ok=True)
            handle, temp_path = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
            try:
                with os.fdopen(handle, "w", encoding="utf-8") as file:
                    json.dump(entry, file, sort_keys=True)
                os.replace(temp_path, self._path(key))
            except OSError as error:
                Path(temp_path).unlink(missing_ok=True)
                raise CacheError(f"Cannot write cache entry {key}: {error}") from error


def enumerate_tilde_characters(p: int, a_max: int, cache: CharacterCache | None = None) -> list[ResidueCharacter]:
    """All characters mu of Q_p^x with mu(p) = 1 and a(mu) <= a_max, written at level a_max.

    Args:
        p: The prime.
        a_max: Largest conductor exponent.
        cache: Optional on-disk cache for the enumeration.

    Returns:
        The characters ordered by conductor, then by generator exponents.
    """
    if a_max < 0:
        raise ParameterRangeError(f"a_max must be non-negative: {a_max}")
    key = ("tilde", p, a_max)
    cached = cache.load(key) if cache else None
    if cached is not None:
        return [ResidueCharacter(p, a_max, tuple(values)) for values in cached]
    group = unit_group(p, a_max)
    characters = [ResidueCharacter(p, a_max, values) for values in itertools.product(*(range(o) for o in group.orders))]
    characters.sort(key=lambda mu: (mu.conductor, mu.values))
    if cache:
        cache.store(key, [list(mu.values) for mu in characters])
    return characters


def primitive_characters(p: int, a: int, level: int | None = None) -> list[ResidueCharacter]:
    """Characters of conductor exactly a, written at the given level (default a)."""
    level = a if level is None else level
    return [mu for mu in enumerate_tilde_characters(p, level) if mu.conductor == a]


@lru_cache(maxsize=65536)
def _gauss_sum_terms(x: Fraction, mu: ResidueCharacter) -> tuple[int, tuple[tuple[int, Fraction], ...]]:
    p = mu.prime
    v = valuation(x, p)
    r = max(mu.conductor, 1 if v == INFINITY else int(-v), 1)
    psi = AdditiveCharacter(p)
    counts: dict[RootExponent, int] = {}
    units = unit_residues(p, r)
    for u in units:
        root = combine_roots(psi.exponent(x * u), mu.exponent_at(u))
        counts[root] = counts.get(root, 0) + 1
    modulus = math.lcm(*(m for _, m in counts))
    terms: dict[int, Fraction] = {}
    for (k, m), count in counts.items():
        key = k * (modulus // m)
        terms[key] = terms.get(key, Fraction(0)) + Fraction(count, len(units))
    value = CyclotomicNumber(modulus, terms)
    return value.modulus, tuple(sorted(value.coefficients.items()))


def gauss_sum(x: Rational, mu: ResidueCharacter) -> CyclotomicNumber:
    """The normalized Gauss sum G(x, mu), the average of psi(xu) mu(u) over u in (Z/p^r)^x.

    Here r = max(a(mu), -v(x), 1), which makes the average equal to the integral over Z_p^x with total volume 1.
    """
    modulus, terms = _gauss_sum_terms(Fraction(x), mu)
    return CyclotomicNumber(modulus, dict(terms))


def gl1_epsilon(
    eta: ResidueCharacter | QuadExtCharacter,
    unramified_value: CyclotomicNumber | None = None,
) -> CyclotomicNumber:
    """Epsilon factor at s = 1/2 of a character of Q_p^x or of a quadratic extension.

    For a character chi of Q_p^x with chi|units = mu of conductor a >= 1 and chi(p) = beta,
    eps(1/2, chi) = beta^a q^(a/2) (1 - 1/q) G(p^-a, mu^-1); unramified characters give 1.

    Args:
        eta: The character restricted to units (over Q_p) or the full character (over the extension).
        unramified_value: The value chi(p) for characters of Q_p^x; defaults to 1.

    Returns:
        The epsilon factor, of modulus 1.
    """
    if isinstance(eta, QuadExtCharacter):
        return eta.epsilon()
    a = eta.conductor
    if a == 0:
        return CyclotomicNumber.one()
    p = eta.prime
    beta = unramified_value if unramified_value is not None else CyclotomicNumber.one()
    return (beta**a) * half_power(p, a) * Fraction(p - 1, p) * gauss_sum(Fraction(1, p**a), eta.inverse())


ExtElement = tuple[int, int]


@dataclass(frozen=True)
class QuadraticExtension:
    """A quadratic extension E = Q_p(sqrt(D)) of Q_p for odd p.

    Elements of o_E are pairs (x, y) standing for x + y sqrt(D). Unramified: D is the least quadratic non-residue
    and the uniformizer is p. Ramified: D = p and the uniformizer is sqrt(p).
    """

    prime: int
    kind: str

    def __post_init__(self) -> None:
        if self.kind not in ("unramified", "ramified"):
            raise ValueError(f"Unknown extension kind: {self.kind}")
        if self.prime == 2:
            raise UnsupportedError(f"{self.kind} quadratic extensions at p = 2 are unsupported")

    @cached_property
    def discriminant(self) -> int:
        """The integer D."""
        if self.kind == "ramified":
            return self.prime
        return next(d for d in range(2, self.prime) if sympy.legendre_symbol(d, self.prime) == -1)

    @property
    def ramification(self) -> int:
        return 2 if self.kind == "ramified" else 1

    @property
    def residue_degree(self) -> int:
        return 1 if self.kind == "ramified" else 2

    @property
    def different_exponent(self) -> int:
        """Exponent d of the different, which is also the conductor exponent of psi_E."""
        return 1 if self.kind == "ramified" else 0

    @property
    def residue_cardinality(self) -> int:
        return self.prime**self.residue_degree

    def moduli(self, level: int) -> tuple[int, int]:
        """Moduli of the two coordinates of o_E / p_E^level."""
        p = self.prime
        if self.kind == "unramified":
            return p**level, p**level
        return p ** ((level + 1) // 2), p ** (level // 2)

    def reduce(self, element: ExtElement, level: int) -> ExtElement:
        mod_x, mod_y = self.moduli(level)
        return element[0] % mod_x, element[1] % mod_y

    def multiply(self, left: ExtElement, right: ExtElement, level: int) -> ExtElement:
        x1, y1 = left
        x2, y2 = right
        return self.reduce((x1 * x2 + self.discriminant * y1 * y2, x1 * y2 + x2 * y1), level)

    def is_unit(self, element: ExtElement) -> bool:
        x, y = element
        if self.kind == "ramified":
            return x % self.prime != 0
        return x % self.prime != 0 or y % self.prime != 0

    def units(self, level: int) -> list[ExtElement]:
        """Representatives of (o_E / p_E^level)^x in lexicographic order."""
        mod_x, mod_y = self.moduli(level)
        return [(x, y) for x in range(mod_x) for y in range(mod_y) if level == 0 or self.is_unit((x, y))]

    def galois(self, element: ExtElement, level: int) -> ExtElement:
        """The nontrivial automorphism sqrt(D) -> -sqrt(D)."""
        return self.reduce((element[0], -element[1]), level)

    def norm(self, element: ExtElement) -> int:
        x, y = element
        return x * x - self.discriminant * y * y

    def uniformizer_norm(self) -> int:
        """Norm of the uniformizer: p^2 (unramified) or -p (ramified)."""
        return self.prime**2 if self.kind == "unramified" else -self.prime

    def eta_exponent(self, u: Rational) -> RootExponent:
        """Root exponent of the quadratic character of Q_p^x attached to E, at a unit u."""
        if self.kind == "unramified":
            return 0, 1
        return (0 if sympy.legendre_symbol(residue(u, self.prime, 1), self.prime) == 1 else 1), 2

    def eta_at_prime(self) -> int:
        """Value of the quadratic character attached to E at p."""
        if self.kind == "unramified":
            return -1
        return int(sympy.legendre_symbol(self.prime - 1, self.prime))

    def trace_psi_exponent(self, element: ExtElement, k: int) -> RootExponent:
        """Root exponent of psi(Tr(varpi_E^-k u)) for u = (x, y)."""
        psi = AdditiveCharacter(self.prime)
        x, y = element
        if self.kind == "unramified":
            return psi.exponent(Fraction(2 * x, self.prime**k))
        half, odd = divmod(k, 2)
        if odd:
            return psi.exponent(Fraction(2 * y, self.prime**half))
        return psi.exponent(Fraction(2 * x, self.prime**half))


class FiniteAbelianGroup:
    """A finite abelian group given by its elements and multiplication, with a generator basis and character lifts.

    Generators g_1, ..., g_s are chosen greedily so every element is uniquely prod g_i^j_i with 0 <= j_i < r_i,
    where r_i is the order of g_i modulo the subgroup generated by the previous generators.
    """

    def __init__(self, elements: list, multiply: Callable[[Any, Any], Any], identity: Any) -> None:
        """Compute the generator basis of the group."""
        self.elements = list(elements)
        self.generators: list = []
        self.relative_orders: list[int] = []
        self.relations: list[tuple[int, ...]] = []
        orders: list[int] = []
        coords: dict[Any, tuple[int, ...]] = {identity: ()}
        for candidate in self.elements:
            if candidate in coords:
                continue
            power, r = candidate, 1
            while power not in coords:
                power = multiply(power, candidate)
                r += 1
            relation = coords[power]
            new_coords: dict[Any, tuple[int, ...]] = {}
            shifted = identity
            for j in range(r):
                for element, coordinate in coords.items():
                    new_coords[multiply(element, shifted)] = coordinate + (j,)
                shifted = multiply(shifted, candidate)
            coords = new_coords
            self.generators.append(candidate)
            self.relative_orders.append(r)
            self.relations.append(relation)
            orders.append(self._element_order(candidate, multiply, identity))
            if len(coords) == len(self.elements):
                break
        rank = len(self.generators)
        self.coordinates = {element: coord + (0,) * (rank - len(coord)) for element, coord in coords.items()}
        self.exponent = math.lcm(*orders) if orders else 1

    @staticmethod
    def _element_order(element: Any, multiply: Callable[[Any, Any], Any], identity: Any) -> int:
        power, order = element, 1
        while power != identity:
            power = multiply(power, element)
            order += 1
        return order

    def __len__(self) -> int:
        return len(self.coordinates)

    def character_count(self) -> int:
        return math.prod(self.relative_orders)

    def characters(self) -> Iterator[dict[Any, int]]:
        """Yield every character as a map element -> exponent k, meaning zeta_exponent^k."""
        e = self.exponent
        for choices in itertools.product(*(range(r) for r in self.relative_orders)):
            images: list[int] = []
            for relation, r, choice in zip(self.relations, self.relative_orders, choices):
                target = sum(k * x for k, x in zip(relation, images)) % e
                images.append((target // r + choice * (e // r)) % e)
            yield {
                element: sum(j * x for j, x in zip(coordinate, images)) % e
                for element, coordinate in self.coordinates.items()
            }


@dataclass(frozen=True, eq=False)
class QuadExtCharacter:
    """A character xi of E^x, given by a table on (o_E / p_E^level)^x and its value at the uniformizer.

    Attributes:
        extension: The quadratic extension E.
        level: The level the unit table is written at.
        table: Map from unit residue to exponent k with xi(u) = zeta_modulus^k.
        modulus: Common order of the table values.
        uniformizer: Root exponent of xi at the uniformizer of E.
    """

    extension: QuadraticExtension
    level: int
    table: dict = field(hash=False, compare=False)
    modulus: int = 1
    uniformizer: RootExponent = (0, 1)

    def exponent_at(self, element: ExtElement) -> RootExponent:
        return self.table[self.extension.reduce(element, self.level)], self.modulus

    def __call__(self, element: ExtElement) -> CyclotomicNumber:
        return CyclotomicNumber.root_of_unity(*self.exponent_at(element))

    @cached_property
    def conductor(self) -> int:
        """Exponent of the conductor over E."""
        if not any(self.table.values()):
            return 0
        for c in range(1, self.level):
            if all(
                k == 0
                for element, k in self.table.items()
                if self.extension.reduce((element[0] - 1, element[1]), c) == (0, 0)
            ):
                return c
        return self.level

    def is_galois_invariant(self) -> bool:
        """Whether xi equals its conjugate xi o sigma."""
        ext = self.extension
        if any(self.table[ext.galois(element, self.level)] != k for element, k in self.table.items()):
            return False
        if ext.kind == "ramified":
            return self.exponent_at((-1, 0))[0] == 0
        return True

    def restricted_to_base(self, u: Rational) -> RootExponent:
        """Root exponent of xi at the unit u of Q_p."""
        return self.exponent_at((residue(u, self.extension.prime, self.level), 0))

    def twisted(self, nu: ResidueCharacter) -> QuadExtCharacter:
        """The character xi * (nu o Norm)."""
        ext = self.extension
        level = max(self.level, nu.conductor * ext.ramification - (ext.ramification - 1) if nu.conductor else 0)
        modulus = math.lcm(self.modulus, nu.group.exponent)
        table = {}
        for element in ext.units(level):
            table[element] = combine_roots(
                self.exponent_at(element), nu.exponent_at(ext.norm(element)), (0, modulus)
            )[0]
        norm = ext.uniformizer_norm()
        uniformizer = combine_roots(self.uniformizer, nu.exponent_at(norm // ext.prime ** valuation(norm, ext.prime)))
        return QuadExtCharacter(ext, level, table, modulus, uniformizer)

    def inverse(self) -> QuadExtCharacter:
        table = {element: -k % self.modulus for element, k in self.table.items()}
        k, m = self.uniformizer
        return QuadExtCharacter(self.extension, self.level, table, self.modulus, (-k % m, m))

    def epsilon(self) -> CyclotomicNumber:
        """eps(1/2, xi, psi o Tr) as a normalized Gauss sum over the units of o_E modulo p_E^a.

        The sum is q_E^(-a/2) sum over u of xi^-1(varpi_E^-k u) psi_E(varpi_E^-k u) with k = a + d.
        """
        ext = self.extension
        a = self.conductor
        if a == 0:
            return CyclotomicNumber.one()
        k = a + ext.different_exponent
        uk, um = self.uniformizer
        counts: dict[RootExponent, int] = {}
        for element in ext.units(a):
            xi_k, xi_m = self.exponent_at(element)
            root = combine_roots((uk * k, um), (-xi_k, xi_m), ext.trace_psi_exponent(element, k))
            counts[root] = counts.get(root, 0) + 1
        total = CyclotomicNumber.zero()
        for (root_k, root_m), count in counts.items():
            total = total + CyclotomicNumber.root_of_unity(root_k, root_m) * count
        return total * half_power(ext.prime, -a * ext.residue_degree)

    @property
    def label(self) -> str:
        return f"{self.extension.kind}.{self.conductor}.{self.modulus}.{self.uniformizer[0]}"


def uniformizer_exponent(extension: QuadraticExtension) -> RootExponent:
    """Value of xi at the uniformizer making the central character trivial at p.

    Unramified: xi(p) = -1 so that eta(p) xi(p) = 1. Ramified: xi(sqrt p)^2 = (-1/p).
    """
    if extension.kind == "unramified":
        return 1, 2
    return (0, 1) if extension.prime % 4 == 1 else (1, 4)


def supercuspidal_characters(extension: QuadraticExtension, conductor: int) -> Iterator[QuadExtCharacter]:
    """Yield the characters xi of E^x of the given conductor that are not Galois invariant, in a fixed order."""
    level = conductor
    elements = extension.units(level)
    identity = extension.reduce((1, 0), level)
    group = FiniteAbelianGroup(elements, lambda x, y: extension.multiply(x, y, level), identity)
    uniformizer = uniformizer_exponent(extension)
    for table in group.characters():
        xi = QuadExtCharacter(extension, level, table, group.exponent, uniformizer)
        if xi.conductor == conductor and not xi.is_galois_invariant():
            yield xi
