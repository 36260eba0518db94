"""Exact arithmetic in cyclotomic fields Q(zeta_M) with exact zero tests and a complex embedding."""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache
from typing import Any
from typing import Mapping

import numpy as np
import sympy

from newformology.exceptions import ModulusOverflowError
from newformology.exceptions import NotInvertibleError

MODULUS_CAP = 10**6
COMPLEX_TOLERANCE = 1e-9

Rational = Fraction | int


@lru_cache(maxsize=None)
def cyclotomic_coefficients(modulus: int) -> tuple[int, ...]:
    """Coefficients of the modulus-th cyclotomic polynomial, lowest degree first."""
    x = sympy.Symbol("x")
    poly = sympy.Poly(sympy.cyclotomic_poly(modulus, x), x)
    return tuple(int(coefficient) for coefficient in reversed(poly.all_coeffs()))


class CyclotomicNumber:
    """An element of Q(zeta_M) stored as a sparse polynomial in zeta_M.

    Raw terms live in Q[x]/(x^M - 1); the canonical form (reduced modulo the M-th cyclotomic polynomial, exponents
    in [0, phi(M))) is computed lazily and cached, and drives equality and zero tests.
    """

    __slots__ = ("_modulus", "_terms", "_canonical")

    def __init__(self, modulus: int = 1, terms: Mapping[int, Rational] | None = None) -> None:
        """Create a cyclotomic number.

        Args:
            modulus: The order M of the root of unity zeta_M.
            terms: Map from exponent to rational coefficient. Exponents are read modulo M.
        """
        if modulus < 1:
            raise ValueError(f"Cyclotomic modulus must be positive: {modulus}")
        if modulus > MODULUS_CAP:
            raise ModulusOverflowError(f"Cyclotomic modulus {modulus} exceeds the cap {MODULUS_CAP}")
        self._modulus = modulus
        reduced: dict[int, Fraction] = {}
        for exponent, coefficient in (terms or {}).items():
            exponent %= modulus
            value = reduced.get(exponent, Fraction(0)) + Fraction(coefficient)
            if value:
                reduced[exponent] = value
            else:
                reduced.pop(exponent, None)
        self._terms = reduced
        self._canonical: dict[int, Fraction] | None = None

    @classmethod
    def zero(cls) -> CyclotomicNumber:
        return cls(1)

    @classmethod
    def one(cls) -> CyclotomicNumber:
        return cls(1, {0: 1})

    @classmethod
    def rational(cls, value: Rational) -> CyclotomicNumber:
        return cls(1, {0: value})

    @classmethod
    def root_of_unity(cls, exponent: int, modulus: int) -> CyclotomicNumber:
        """The number zeta_modulus^exponent."""
        return cls(modulus, {exponent: 1})

    @property
    def modulus(self) -> int:
        return self._modulus

    @property
    def terms(self) -> dict[int, Fraction]:
        """Raw sparse terms, exponents in [0, M)."""
        return dict(self._terms)

    @property
    def coefficients(self) -> dict[int, Fraction]:
        """Canonical form: coefficients of the remainder modulo the M-th cyclotomic polynomial."""
        if self._canonical is None:
            self._canonical = _reduce(self._modulus, self._terms)
        return dict(self._canonical)

    def _coerce(self, other: Any) -> CyclotomicNumber:
        if isinstance(other, CyclotomicNumber):
            return other
        if isinstance(other, (int, Fraction)):
            return CyclotomicNumber.rational(other)
        raise TypeError(f"Cannot combine CyclotomicNumber with {type(other).__name__}")

    def promote(self, modulus: int) -> CyclotomicNumber:
        """Rewrite the number over a multiple of its modulus."""
        if modulus % self._modulus:
            raise ValueError(f"{modulus} is not a multiple of {self._modulus}")
        factor = modulus // self._modulus
        return CyclotomicNumber(modulus, {k * factor: c for k, c in self._dense_terms().items()})

    def _dense_terms(self) -> dict[int, Fraction]:
        """The shorter of the raw and canonical term maps."""
        if self._canonical is not None or len(self._terms) > _totient(self._modulus):
            return self.coefficients
        return self._terms

    def __add__(self, other: Any) -> CyclotomicNumber:
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        modulus = math.lcm(self._modulus, other._modulus)
        merged: dict[int, Fraction] = {}
        for source in (self, other):
            factor = modulus // source._modulus
            for exponent, coefficient in source._terms.items():
                key = exponent * factor
                merged[key] = merged.get(key, Fraction(0)) + coefficient
        return CyclotomicNumber(modulus, merged)

    __radd__ = __add__

    def __neg__(self) -> CyclotomicNumber:
        return CyclotomicNumber(self._modulus, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other: Any) -> CyclotomicNumber:
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Any) -> CyclotomicNumber:
        return (-self) + other

    def __mul__(self, other: Any) -> CyclotomicNumber:
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return CyclotomicNumber.zero()
            return CyclotomicNumber(self._modulus, {k: c * other for k, c in self._terms.items()})
        if not isinstance(other, CyclotomicNumber):
            return NotImplemented
        modulus = math.lcm(self._modulus, other._modulus)
        left = self._dense_terms()
        right = other._dense_terms()
        left_factor = modulus // self._modulus
        right_factor = modulus // other._modulus
        product: dict[int, Fraction] = {}
        for k1, c1 in left.items():
            e1 = k1 * left_factor
            for k2, c2 in right.items():
                key = (e1 + k2 * right_factor) % modulus
                product[key] = product.get(key, Fraction(0)) + c1 * c2
        return CyclotomicNumber(modulus, product)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> CyclotomicNumber:
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise NotInvertibleError("division by zero")
            return self * (1 / Fraction(other))
        if isinstance(other, CyclotomicNumber):
            return self * other.inverse()
        return NotImplemented

    def __pow__(self, exponent: int) -> CyclotomicNumber:
        if exponent < 0:
            return self.inverse() ** -exponent
        result = CyclotomicNumber.one()
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = CyclotomicNumber.rational(other)
        if not isinstance(other, CyclotomicNumber):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None  # Equal values may carry different moduli.

    def __repr__(self) -> str:
        return f"CyclotomicNumber({self})"

    def __str__(self) -> str:
        terms = self.coefficients
        if not terms:
            return "0"
        parts = []
        for exponent in sorted(terms):
            coefficient = terms[exponent]
            parts.append(str(coefficient) if exponent == 0 else f"{coefficient}*z{self._modulus}^{exponent}")
        return " + ".join(parts)

    def conjugate(self) -> CyclotomicNumber:
        """Complex conjugation, zeta -> zeta^-1."""
        return CyclotomicNumber(self._modulus, {-k: c for k, c in self._terms.items()})

    def abs2(self) -> CyclotomicNumber:
        """The element z * conj(z) of the real subfield."""
        return self * self.conjugate()

    def is_zero(self) -> bool:
        return not self.coefficients

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def is_rational(self) -> bool:
        return set(self.coefficients) <= {0}

    def to_fraction(self) -> Fraction:
        """The value as a rational; raises when the number is not rational."""
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.coefficients.get(0, Fraction(0))

    def galois(self, a: int) -> CyclotomicNumber:
        """The image under the automorphism zeta -> zeta^a, for a coprime to the modulus."""
        if math.gcd(a, self._modulus) != 1:
            raise ValueError(f"{a} is not a unit modulo {self._modulus}")
        return CyclotomicNumber(self._modulus, {k * a: c for k, c in self._terms.items()})

    def inverse(self) -> CyclotomicNumber:
        """Multiplicative inverse.

        Monomials and rationals invert directly; anything else is divided into the product of its other Galois
        conjugates, which leaves the rational field norm as the denominator.
        """
        if self.is_zero():
            raise NotInvertibleError("zero has no inverse")
        if self.is_monomial():
            ((exponent, coefficient),) = self._terms.items()
            return CyclotomicNumber(self._modulus, {-exponent: 1 / coefficient})
        if self.is_rational():
            return CyclotomicNumber.rational(1 / self.to_fraction())
        conjugates = CyclotomicNumber.one()
        for a in range(2, self._modulus):
            if math.gcd(a, self._modulus) == 1:
                conjugates = conjugates * self.galois(a)
        norm = (self * conjugates).to_fraction()
        return conjugates * (1 / norm)

    def to_complex(self) -> complex:
        """Evaluate at zeta_M = exp(2 pi i / M)."""
        terms = self._dense_terms()
        if not terms:
            return 0j
        exponents = np.fromiter(terms.keys(), dtype=float, count=len(terms))
        coefficients = np.fromiter((float(c) for c in terms.values()), dtype=float, count=len(terms))
        return complex(np.sum(coefficients * np.exp(2j * np.pi * exponents / self._modulus)))

    def to_json(self) -> str:
        return str(self)


@lru_cache(maxsize=None)
def _totient(modulus: int) -> int:
    return int(sympy.totient(modulus))


def _reduce(modulus: int, terms: Mapping[int, Fraction]) -> dict[int, Fraction]:
    """Remainder of a polynomial in zeta modulo the cyclotomic polynomial of the modulus."""
    poly = cyclotomic_coefficients(modulus)
    degree = len(poly) - 1
    if not terms or max(terms) < degree:
        return {k: c for k, c in terms.items() if c}
    dense = [Fraction(0)] * modulus
    for exponent, coefficient in terms.items():
        dense[exponent] += coefficient
    nonzero = [(j, c) for j, c in enumerate(poly[:-1]) if c]
    for index in range(modulus - 1, degree - 1, -1):
        top = dense[index]
        if top:
            dense[index] = Fraction(0)
            shift = index - degree
            for j, c in nonzero:
                dense[shift + j] -= top * c
    return {k: c for k, c in enumerate(dense[:degree]) if c}


def cyclo_arith(a: CyclotomicNumber, b: CyclotomicNumber | None, op: str) -> CyclotomicNumber:
    """Apply add, mul or conj (unary, b ignored) and return the result in canonical form."""
    if op == "add":
        result = a + b
    elif op == "mul":
        result = a * b
    elif op == "conj":
        result = a.conjugate()
    else:
        raise ValueError(f"Unknown cyclotomic operation: {op}")
    return CyclotomicNumber(result.modulus, result.coefficients)


def to_complex(z: CyclotomicNumber) -> complex:
    """Complex embedding zeta_M -> exp(2 pi i / M)."""
    return z.to_complex()


@lru_cache(maxsize=None)
def _sqrt_prime_terms(p: int) -> tuple[int, tuple[tuple[int, Fraction], ...]]:
    if p == 2:
        return 8, ((1, Fraction(1)), (7, Fraction(1)))
    gauss = CyclotomicNumber(p, {x: sympy.legendre_symbol(x, p) for x in range(1, p)})
    if p % 4 == 3:
        # The quadratic Gauss sum is i * sqrt(p) here.
        gauss = gauss * CyclotomicNumber.root_of_unity(3, 4)
    return gauss.modulus, tuple(sorted(gauss.coefficients.items()))


def sqrt_prime(p: int) -> CyclotomicNumber:
    """The positive square root of a prime as an exact cyclotomic number."""
    modulus, terms = _sqrt_prime_terms(p)
    return CyclotomicNumber(modulus, dict(terms))


def half_power(p: int, k: int) -> CyclotomicNumber:
    """The exact value p^(k/2) for any integer k."""
    whole, odd = divmod(k, 2)
    value = CyclotomicNumber.rational(Fraction(p) ** whole)
    return value * sqrt_prime(p) if odd else value


class ExactRing:
    """Values kept as exact cyclotomic numbers."""

    name = "exact"

    @staticmethod
    def convert(value: CyclotomicNumber) -> CyclotomicNumber:
        return value

    @staticmethod
    def root(exponent: int, modulus: int) -> CyclotomicNumber:
        return CyclotomicNumber.root_of_unity(exponent, modulus)

    @staticmethod
    def zero() -> CyclotomicNumber:
        return CyclotomicNumber.zero()

    @staticmethod
    def is_zero(value: CyclotomicNumber) -> bool:
        return value.is_zero()

    @staticmethod
    def close(left: CyclotomicNumber, right: CyclotomicNumber) -> bool:
        return left == right

    @staticmethod
    def modulus(value: CyclotomicNumber) -> float:
        return math.sqrt(max(value.abs2().to_complex().real, 0.0))


class ComplexRing:
    """Values embedded into complex doubles."""

    name = "complex"

    def __init__(self, tolerance: float = COMPLEX_TOLERANCE) -> None:
        """Create the ring with an absolute comparison tolerance."""
        self.tolerance = tolerance

    @staticmethod
    def convert(value: CyclotomicNumber) -> complex:
        return value.to_complex()

    @staticmethod
    def root(exponent: int, modulus: int) -> complex:
        return cmath.exp(2j * math.pi * exponent / modulus)

    @staticmethod
    def zero() -> complex:
        return 0j

    def is_zero(self, value: complex) -> bool:
        return abs(value) <= self.tolerance

    def close(self, left: complex, right: complex) -> bool:
        return abs(left - right) <= self.tolerance

    @staticmethod
    def modulus(value: complex) -> float:
        return abs(value)


def get_ring(name: str) -> ExactRing | ComplexRing:
    """Look up a value ring by its configuration name."""
    if name == "exact":
        return ExactRing()
    if name == "complex":
        return ComplexRing()
    raise ValueError(f"Unknown value ring: {name}")
