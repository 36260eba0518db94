"""Exact p-adic scalars and 2x2 matrices over Q, interpreted at a fixed prime.

Every quantity of interest (valuations, coset invariants, congruence membership) is determined by finitely many
valuations, so values are stored as exact rationals and never as truncated p-adic expansions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable
from typing import Iterator
from typing import NamedTuple

from newformology.exceptions import NotInvertibleError
from newformology.exceptions import ParameterRangeError
from newformology.exceptions import VerificationError

# Valuation of zero. Compares greater than every integer, so min(v(0), n) == n.
INFINITY = math.inf

Rational = Fraction | int


def valuation(x: Rational, p: int) -> int | float:
    """Exponent of p in the factorization of a rational, or INFINITY for zero."""
    x = Fraction(x)
    if x == 0:
        return INFINITY
    num, den = x.numerator, x.denominator
    v = 0
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def unit_part(x: Rational, p: int) -> Fraction:
    """The rational x / p^v(x)."""
    x = Fraction(x)
    if x == 0:
        raise NotInvertibleError("zero has no unit part")
    return x / Fraction(p) ** valuation(x, p)


def residue(x: Rational, p: int, r: int) -> int:
    """Reduce a p-integral rational modulo p^r to a representative in [0, p^r)."""
    x = Fraction(x)
    if valuation(x, p) < 0:
        raise ParameterRangeError(f"{x} is not {p}-integral")
    modulus = p**r
    if modulus == 1:
        return 0
    return x.numerator * pow(x.denominator, -1, modulus) % modulus


def unit_residues(p: int, r: int) -> list[int]:
    """Representatives in [1, p^r) of the units modulo p^r; [1] when r is 0."""
    if r <= 0:
        return [1]
    return [u for u in range(1, p**r) if u % p]


@dataclass(frozen=True)
class PAdicScalar:
    """A rational number viewed as an element of Q_p."""

    value: Fraction
    prime: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", Fraction(self.value))

    def __add__(self, other: PAdicScalar | Rational) -> PAdicScalar:
        return PAdicScalar(self.value + _raw(other), self.prime)

    __radd__ = __add__

    def __sub__(self, other: PAdicScalar | Rational) -> PAdicScalar:
        return PAdicScalar(self.value - _raw(other), self.prime)

    def __mul__(self, other: PAdicScalar | Rational) -> PAdicScalar:
        return PAdicScalar(self.value * _raw(other), self.prime)

    __rmul__ = __mul__

    def __truediv__(self, other: PAdicScalar | Rational) -> PAdicScalar:
        divisor = _raw(other)
        if divisor == 0:
            raise NotInvertibleError("division by zero")
        return PAdicScalar(self.value / divisor, self.prime)

    def __neg__(self) -> PAdicScalar:
        return PAdicScalar(-self.value, self.prime)

    def __str__(self) -> str:
        return str(self.value)

    @property
    def valuation(self) -> int | float:
        """Exponent of the prime in the value, INFINITY for zero."""
        return valuation(self.value, self.prime)

    @property
    def norm(self) -> Fraction:
        """The normalized absolute value q^-v(x)."""
        if self.value == 0:
            return Fraction(0)
        return Fraction(self.prime) ** -self.valuation

    @property
    def unit_part(self) -> Fraction:
        """The value divided by the prime power of its valuation."""
        return unit_part(self.value, self.prime)

    @property
    def is_integral(self) -> bool:
        """Whether the scalar lies in Z_p."""
        return self.valuation >= 0

    @property
    def is_unit(self) -> bool:
        """Whether the scalar lies in Z_p^x."""
        return self.valuation == 0

    def residue(self, r: int) -> int:
        """Residue modulo p^r of an integral scalar."""
        return residue(self.value, self.prime, r)


def _raw(value: PAdicScalar | Rational) -> Fraction:
    """Strip a scalar wrapper to its rational value."""
    return value.value if isinstance(value, PAdicScalar) else Fraction(value)


@dataclass(frozen=True)
class GL2Element:
    """An invertible matrix [[a, b], [c, d]] with rational entries, read p-adically at the given prime."""

    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction
    prime: int

    def __post_init__(self) -> None:
        for name in ("a", "b", "c", "d"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.a * self.d - self.b * self.c == 0:
            raise NotInvertibleError(f"not invertible: {self.entries}")

    def __matmul__(self, other: GL2Element) -> GL2Element:
        if other.prime != self.prime:
            raise ValueError(f"Matrices read at different primes: {self.prime}/{other.prime}")
        return GL2Element(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
            self.prime,
        )

    def __str__(self) -> str:
        return f"[[{self.a}, {self.b}], [{self.c}, {self.d}]]"

    @classmethod
    def identity(cls, p: int) -> GL2Element:
        return cls(1, 0, 0, 1, p)

    @classmethod
    def weyl(cls, p: int) -> GL2Element:
        """The element w = [[0, 1], [-1, 0]]."""
        return cls(0, 1, -1, 0, p)

    @classmethod
    def diagonal(cls, y: Rational, p: int) -> GL2Element:
        """The element a(y) = diag(y, 1)."""
        return cls(y, 0, 0, 1, p)

    @classmethod
    def unipotent(cls, x: Rational, p: int) -> GL2Element:
        """The element n(x) = [[1, x], [0, 1]]."""
        return cls(1, x, 0, 1, p)

    @classmethod
    def lower_unipotent(cls, c: Rational, p: int) -> GL2Element:
        return cls(1, 0, c, 1, p)

    @classmethod
    def central(cls, t: Rational, p: int) -> GL2Element:
        """The element z(t) = diag(t, t)."""
        return cls(t, 0, 0, t, p)

    @property
    def det(self) -> Fraction:
        return self.a * self.d - self.b * self.c

    @property
    def entries(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return self.a, self.b, self.c, self.d

    def inverse(self) -> GL2Element:
        det = self.det
        return GL2Element(self.d / det, -self.b / det, -self.c / det, self.a / det, self.prime)

    def scale(self, t: Rational) -> GL2Element:
        """Multiply by the central element z(t)."""
        return GL2Element(self.a * t, self.b * t, self.c * t, self.d * t, self.prime)

    def in_maximal_compact(self) -> bool:
        """Whether the matrix lies in K = GL2(Z_p)."""
        p = self.prime
        return all(valuation(entry, p) >= 0 for entry in self.entries) and valuation(self.det, p) == 0

    def in_k1(self, n: int) -> bool:
        """Whether the matrix lies in K1(p^n): c = 0 and a = 1 modulo p^n."""
        p = self.prime
        return self.in_maximal_compact() and valuation(self.c, p) >= n and valuation(self.a - 1, p) >= n

    def in_k0(self, n: int) -> bool:
        """Whether the matrix lies in K_0(p^n): c = 0 modulo p^n."""
        return self.in_maximal_compact() and valuation(self.c, self.prime) >= n

    def in_upper_k0(self, n: int) -> bool:
        """Whether the matrix lies in K^0(p^n): b = 0 modulo p^n."""
        return self.in_maximal_compact() and valuation(self.b, self.prime) >= n

    def residues(self, r: int) -> tuple[int, int, int, int]:
        """Entries of a matrix in K reduced modulo p^r."""
        return tuple(residue(entry, self.prime, r) for entry in self.entries)


class IwasawaParts(NamedTuple):
    """Factors of g = z(z) n(x) a(y) k with k in GL2(Z_p)."""

    z: PAdicScalar
    x: PAdicScalar
    y: PAdicScalar
    k: GL2Element


class MatrixInvariants(NamedTuple):
    """Coset invariants used by the support and size statements."""

    t: int
    l: int
    n0g: int
    qg: int


@dataclass(frozen=True)
class CosetPosition:
    """Position of g in the decomposition g = z(zfactor) n(xshift) a(p^t) w n(p^-l v) k1 with k1 in K1(p^n).

    Attributes:
        t: Exponent of the diagonal part.
        l: Index in [0, n] of the double coset.
        v: Exact unit whose class modulo p^min(l, n - l) labels the coset.
        zfactor: Central factor.
        xshift: Unipotent shift.
        witness: The element k1 of K1(p^n) completing the identity.
        level: The exponent n.
    """

    t: int
    l: int
    v: Fraction
    zfactor: PAdicScalar
    xshift: PAdicScalar
    witness: GL2Element
    level: int

    @property
    def prime(self) -> int:
        return self.witness.prime

    @property
    def n0g(self) -> int:
        return min(self.l, self.level - self.l)

    @property
    def v_class(self) -> int:
        """Residue of v modulo p^min(l, n - l), in [0, p^min(l, n - l))."""
        return residue(self.v, self.prime, self.n0g)

    def reconstruct(self) -> GL2Element:
        """Multiply the factors back together."""
        p = self.prime
        return (
            GL2Element.central(self.zfactor.value, p)
            @ GL2Element.unipotent(self.xshift.value, p)
            @ g_tlv(self.t, self.l, self.v, p)
            @ self.witness
        )


def g_tlv(t: int, l: int, v: Rational, p: int) -> GL2Element:
    """The coset representative a(p^t) w n(p^-l v)."""
    p_frac = Fraction(p)
    return GL2Element.diagonal(p_frac**t, p) @ GL2Element.weyl(p) @ GL2Element.unipotent(p_frac**-l * Fraction(v), p)


def iwasawa_decompose(g: GL2Element) -> IwasawaParts:
    """Split g into z(z) n(x) a(y) k with k in GL2(Z_p).

    Args:
        g: The matrix to decompose.

    Returns:
        The central, unipotent, and diagonal parameters together with the compact factor.
    """
    p = g.prime
    upper, k = _upper_times_compact(g)
    alpha, beta, _, delta = upper.entries
    parts = IwasawaParts(
        z=PAdicScalar(delta, p),
        x=PAdicScalar(beta / delta, p),
        y=PAdicScalar(alpha / delta, p),
        k=k,
    )
    return parts


def _upper_times_compact(g: GL2Element) -> tuple[GL2Element, GL2Element]:
    """Write g = B k with B upper triangular and k in K."""
    p = g.prime
    a, b, c, d = g.entries
    det = g.det
    if valuation(c, p) >= valuation(d, p):
        return GL2Element(det / d, b, 0, d, p), GL2Element.lower_unipotent(c / d, p)
    return GL2Element(-det / c, -a, 0, -c, p), GL2Element.weyl(p) @ GL2Element.unipotent(d / c, p)


def _compact_position(k: GL2Element, n: int) -> tuple[GL2Element, int, Fraction, GL2Element]:
    """Write k in K as B w n(p^-l v) k1 with B upper triangular and k1 in K1(p^n)."""
    p = k.prime
    a, b, c, d = k.entries
    det = k.det
    w_n_one = GL2Element.weyl(p) @ GL2Element.unipotent(1, p)
    if n == 0:
        return GL2Element.identity(p), 0, Fraction(1), w_n_one.inverse() @ k
    vc = valuation(c, p)
    if vc >= n:
        # c/d - p^n lies in p^n, so the remaining lower unipotent factor is in K1(p^n).
        left = GL2Element(det / d, b, 0, d, p) @ _lower_to_weyl_factor(n, Fraction(1), p)
        return left, n, Fraction(1), GL2Element.lower_unipotent(c / d - Fraction(p) ** n, p)
    if valuation(d, p) == 0:
        v = Fraction(p) ** vc * d / c
        left = GL2Element(det / d, b, 0, d, p) @ _lower_to_weyl_factor(vc, v, p)
        return left, vc, v, GL2Element.identity(p)
    # d not a unit forces c to be a unit, so l = 0 and v = 1.
    left = GL2Element(-det / c, -a, 0, -c, p)
    return left, 0, Fraction(1), GL2Element.unipotent(d / c - 1, p)


def _lower_to_weyl_factor(l: int, v: Fraction, p: int) -> GL2Element:
    """The upper triangular B with [[1, 0], [p^l / v, 1]] = B w n(p^-l v)."""
    s = Fraction(p) ** -l * v
    return GL2Element(-s, -1, 0, -1 / s, p)


def coset_position(g: GL2Element, n: int) -> CosetPosition:
    """Locate g in the double coset decomposition of GL2(Q_p) relative to K1(p^n).

    Args:
        g: The element to locate.
        n: Level exponent, n >= 0.

    Returns:
        The coset data with an exact witness in K1(p^n).
    """
    if n < 0:
        raise ParameterRangeError(f"level must be non-negative: {n}")
    p = g.prime
    z0, x0, y0, k = iwasawa_decompose(g)
    left, l, v, k1 = _compact_position(k, n)
    alpha, beta, _, delta = left.entries
    big_y = y0.value * alpha / delta
    t = valuation(big_y, p)
    u = unit_part(big_y, p)
    position = CosetPosition(
        t=int(t),
        l=l,
        v=v / u,
        zfactor=PAdicScalar(z0.value * delta, p),
        xshift=PAdicScalar(x0.value + y0.value * beta / delta, p),
        witness=GL2Element(1, 0, 0, u, p) @ k1,
        level=n,
    )
    if not position.witness.in_k1(n) or position.reconstruct() != g:
        raise VerificationError(f"coset witness failed to reconstruct {g}", witness=position)
    return position


def matrix_invariants(g: GL2Element, n: int, m: int) -> MatrixInvariants:
    """Compute t(g), l(g), n0(g) and q(g) for a representation of conductor p^n and central conductor p^m."""
    position = coset_position(g, n)
    n1 = (n + 1) // 2
    n0g = position.n0g
    return MatrixInvariants(t=position.t, l=position.l, n0g=n0g, qg=max(n // 2, n0g - n1 + m))


def compact_residues(
    p: int,
    r: int,
    predicate: Callable[[tuple[int, int, int, int]], bool] | None = None,
) -> Iterator[tuple[int, int, int, int]]:
    """Enumerate GL2(Z/p^r) as entry tuples in [0, p^r) with unit determinant, in lexicographic order.

    Args:
        p: The prime.
        r: Exponent of the modulus; r = 0 yields the identity alone.
        predicate: Optional filter applied to each tuple.

    Yields:
        Matching (a, b, c, d) tuples.
    """
    if r <= 0:
        yield 1, 0, 0, 1
        return
    modulus = p**r
    for a, b, c, d in itertools.product(range(modulus), repeat=4):
        if (a * d - b * c) % p and (predicate is None or predicate((a, b, c, d))):
            yield a, b, c, d


def compact_cell(k: GL2Element) -> str:
    """Classify k in K as lying in N(o)K^0(p) ("N") or in wK^0(p) ("w"); the two cells partition K."""
    if not k.in_maximal_compact():
        raise ParameterRangeError(f"{k} is not in GL2(Z_p)")
    return "N" if valuation(k.d, k.prime) == 0 else "w"
