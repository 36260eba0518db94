"""Matrix coefficients of newforms, the truncated test function, and its convolution eigenvalue.

The coefficient is Phi(g) = <W, pi(g) W> / <W, W> with the Whittaker inner product over the diagonal, linear in the
first slot, so Phi(z(u)) = omega^-1(u). The truncated coefficient Phi'(g) = Phi(a(p^-n1) g a(p^n1)) on Z K0 and 0
elsewhere, where K0 = K for even n and K0 = {k in K : k_12 in p} for odd n. It is bi-invariant under the principal
congruence subgroup K(p^n), so every integral over K is a finite average over GL2(Z/p^n).
"""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Any
from typing import Iterator

import numpy as np

from newformology.chars import gauss_sum
from newformology.chars import ResidueCharacter
from newformology.chars import primitive_characters
from newformology.cyclo import ComplexRing
from newformology.cyclo import CyclotomicNumber
from newformology.cyclo import ExactRing
from newformology.exceptions import ParameterRangeError
from newformology.exceptions import RefinementError
from newformology.exceptions import UnsupportedError
from newformology.logging import get_logger
from newformology.padic import INFINITY
from newformology.padic import GL2Element
from newformology.padic import compact_residues
from newformology.padic import coset_position
from newformology.padic import g_tlv
from newformology.padic import unit_part
from newformology.padic import unit_residues
from newformology.padic import valuation
from newformology.reports import STATUS_INFO
from newformology.reports import CheckReport
from newformology.reps import LocalRepresentation
from newformology.reps import distinct_roots
from newformology.reps import geometric_parts
from newformology.whittaker import WhittakerEngine

Residues = tuple[int, int, int, int]

# Relative size below which diagonal terms are dropped from infinite sums.
TRUNCATION = 1e-13

# Largest |K0 mod p^R| for which the eigenvalue dichotomy check applies R(Phi') twice.
DICHOTOMY_CAP = 64

INNER = "inner"
FORMULA = "formula"


def _mul_mod(left: Residues, right: Residues, modulus: int) -> Residues:
    a1, b1, c1, d1 = left
    a2, b2, c2, d2 = right
    return (
        (a1 * a2 + b1 * c2) % modulus,
        (a1 * b2 + b1 * d2) % modulus,
        (c1 * a2 + d1 * c2) % modulus,
        (c1 * b2 + d1 * d2) % modulus,
    )


def _inv_mod(k: Residues, modulus: int) -> Residues:
    a, b, c, d = k
    det_inverse = pow((a * d - b * c) % modulus, -1, modulus)
    return tuple(entry * det_inverse % modulus for entry in (d, -b, -c, a))


def _truncation_length(rho: float) -> int:
    """Smallest B with (b + 1) rho^b below the truncation threshold for every b >= B."""
    if rho == 0:
        return 0
    if rho >= 1:
        raise ParameterRangeError(f"diagonal values do not decay (root modulus {rho}); the coefficient diverges")
    b = 1
    while (b + 1) * rho**b >= TRUNCATION or b < 1 / (1 - rho):
        b += 1
    return b


class TruncatedCoefficient:
    """Matrix coefficient Phi and truncated coefficient Phi' of one representation.

    Values are exact whenever the L-roots of pi~ are distinct: the diagonal sums then split into geometric series
    that are summed in closed form. A repeated root falls back to complex doubles with a truncated tail.
    """

    def __init__(
        self,
        pi: LocalRepresentation,
        ring: str | None = None,
        logger: logging.Logger | None = None,
    ) -> None:
        """Prepare the coefficient.

        Args:
            pi: The representation.
            ring: "exact" or "complex"; None picks exact whenever the sums have a closed form.
            logger: Optional logger for table construction.
        """
        self.logger = get_logger(logger)
        summable = _summable(pi)
        if ring is None:
            ring = "exact" if summable else "complex"
        if ring == "exact" and not summable:
            raise ParameterRangeError(f"exact evaluation of {pi.label} needs distinct L-roots of pi~")
        self.engine = WhittakerEngine(pi, ring, logger=logger)
        self.pi = self.engine.pi
        self.ring = self.engine.ring
        self.exact = isinstance(self.ring, ExactRing)
        self.prime = pi.prime
        self.n = pi.conductor
        self.n1 = pi.n1
        self.level = self.n
        self.modulus = self.prime**self.level
        self.index = self.prime + 1 if self.n % 2 else 1
        roots = self.pi.contragredient().l_roots()
        self._sums: dict[tuple[str, str], CyclotomicNumber] = {}
        if self.exact:
            self.diagonal_parts = geometric_parts(roots)
            self.length = 0
            self.diagonal = [self.ring.convert(self.pi.diagonal(0))]
            self.norm = self._exact_norm()
            self.tail_bound = 0.0
        else:
            self.diagonal_parts = []
            rho = max((abs(root.to_complex()) for root in roots), default=0.0)
            self.length = _truncation_length(rho)
            self.diagonal = [self.ring.convert(self.pi.diagonal(b)) for b in range(self.length + 1)]
            self.norm = sum(value * value.conjugate() for value in self.diagonal)
            self.tail_bound = (self.length + 2) * rho ** (self.length + 1) / max(1 - rho, 1e-300) if rho else 0.0
        self._table: dict[Residues, Any] | None = None

    def _one(self) -> Any:
        return CyclotomicNumber.one() if self.exact else 1 + 0j

    def _divide_by_norm(self, value: Any) -> Any:
        if self.exact:
            return value * self.norm.to_fraction() ** -1
        return value / self.norm.real

    def _exact_norm(self) -> CyclotomicNumber:
        """<W, W> = sum over b >= 0 of |W(a(p^b))|^2, rational."""
        if not self.diagonal_parts:
            return CyclotomicNumber.one()
        total = CyclotomicNumber.zero()
        for weight, root in self.diagonal_parts:
            for other, other_root in self.diagonal_parts:
                total = total + weight * other.conjugate() * self._geometric_sum(root, other_root)
        return total

    def _geometric_sum(self, root: CyclotomicNumber, other: CyclotomicNumber) -> CyclotomicNumber:
        """1 / (1 - root conj(other)), the sum of (root conj(other))^b over b >= 0."""
        key = (root.to_json(), other.to_json())
        value = self._sums.get(key)
        if value is None:
            value = (1 - root * other.conjugate()).inverse()
            self._sums[key] = value
        return value

    def _pairing(self, g: GL2Element) -> Any:
        """Sum over b >= 0 of W(a(p^b)) conj(W(a(p^b) g)), from a single coset decomposition.

        In the exact ring the terms past the geometric range of the coset are summed in closed form; otherwise the
        sum stops at the truncation length.
        """
        p = self.prime
        position = coset_position(g, self.n)
        engine = self.engine
        t, l, v = position.t, position.l, position.v
        shift = position.xshift.value
        central = engine.omega.value(unit_part(position.zfactor.value, p), self.ring)
        if self.diagonal_parts:
            floor = 0 if shift == 0 else -int(valuation(shift, p))
            head = max(0, engine.tail_start(l) - t, floor)
        else:
            head = self.length + 1
        total = self.ring.zero()
        for b in range(head):
            value = central * engine.psi.value(shift * Fraction(p) ** b, self.ring) * engine.value_at_coset(t + b, l, v)
            total = total + self._diagonal_value(b) * value.conjugate()
        if self.diagonal_parts:
            for amplitude, root in engine.tail_terms(t + head, l, v):
                tail = (central * amplitude).conjugate()
                for weight, diagonal_root in self.diagonal_parts:
                    total = total + weight * diagonal_root**head * tail * self._geometric_sum(diagonal_root, root)
        return total

    def _diagonal_value(self, b: int) -> Any:
        if b < len(self.diagonal):
            return self.diagonal[b]
        return self.ring.convert(self.pi.diagonal(b))

    def _unit_level(self, g: GL2Element) -> int:
        """Level M with W(a(y u') g) = W(a(y) g) for u' = 1 mod p^M."""
        a, b, c, d = g.entries
        p = self.prime
        floor = min(valuation(x, p) for x in (d * a, d * b, c * a, c * b))
        shift = 0 if floor == INFINITY else int(valuation(g.det, p) - floor)
        return max(self.n + max(shift, 0), 1)

    def phi(self, g: GL2Element) -> Any:
        """Phi(g) through the Whittaker inner product over the diagonal."""
        p = self.prime
        units = unit_residues(p, self._unit_level(g))
        total = self.ring.zero()
        for u in units:
            total = total + self.engine.omega.value(u, self.ring) * self._pairing(GL2Element.diagonal(u, p) @ g)
        return self._divide_by_norm(total * Fraction(1, len(units)))

    def phi_formula(self, t: int, l: int, v: Fraction | int, x: Fraction | int) -> CyclotomicNumber:
        """Closed formula for Phi(n(x) g_{t,l,v}) of a supercuspidal representation, valid for l < n.

        The value is a diagonal term G(p^(l-n), 1) G(p^(t+l)/v - x, 1) omega(-v) present only when t = -2l, plus
        eps(pi) omega(v) times the sum over a(mu) = n - l with a(mu pi~) = n - 2l - t of
        G(-p^(l-n), mu) G(v x - p^(t+l), mu) eps(mu pi~).
        """
        if not self.pi.is_supercuspidal:
            raise UnsupportedError("the closed formula applies to supercuspidal representations")
        if not 0 <= l < self.n:
            raise ParameterRangeError(f"the closed formula needs 0 <= l < n: l={l}, n={self.n}")
        return sum(
            (term for _, term in self.formula_terms(t, l, v, x)),
            CyclotomicNumber.zero(),
        )

    def formula_terms(
        self, t: int, l: int, v: Fraction | int, x: Fraction | int
    ) -> Iterator[tuple[str, CyclotomicNumber]]:
        """The individual terms of the closed formula, keyed "delta" or by the character label."""
        p, n = self.prime, self.n
        v, x = Fraction(v), Fraction(x)
        omega = self.engine.omega
        power = Fraction(p)
        trivial = ResidueCharacter.trivial(p)
        if t == -2 * l:
            yield "delta", (
                gauss_sum(power ** (l - n), trivial)
                * gauss_sum(power ** (t + l) / v - x, trivial)
                * omega(-v)
            )
        dual = self.pi.contragredient()
        epsilon = self.pi.epsilon() * omega(v)
        for mu in primitive_characters(p, n - l):
            twisted = dual.twist(mu)
            if twisted.conductor != n - 2 * l - t:
                continue
            yield mu.label, (
                epsilon
                * gauss_sum(-(power ** (l - n)), mu)
                * gauss_sum(v * x - power ** (t + l), mu)
                * twisted.epsilon()
            )

    def in_k0(self, k: Residues) -> bool:
        """Whether k lies in K0: all of K for even n, the upper right entry in p for odd n."""
        return self.n % 2 == 0 or k[1] % self.prime == 0

    def _key(self, k: Residues) -> Residues:
        if self.level == 0:
            return 1, 0, 0, 1
        return tuple(x % self.modulus for x in k)  # type: ignore[return-value]

    def phi_prime_compact(self, k: Residues) -> Any:
        """Phi'(k) for k in K given by integer entries, computed directly."""
        if not self.in_k0(k):
            return self.ring.zero()
        if self.n == 0:
            return self._one()
        p = self.prime
        conjugate_k = GL2Element(*k, p) @ GL2Element.diagonal(Fraction(p) ** self.n1, p)
        units = unit_residues(p, max(self.n, 1))
        total = self.ring.zero()
        for u in units:
            shifted = GL2Element.diagonal(Fraction(p) ** -self.n1 * u, p) @ conjugate_k
            total = total + self.engine.omega.value(u, self.ring) * self._pairing(shifted)
        return self._divide_by_norm(total * Fraction(1, len(units)))

    def table(self) -> dict[Residues, Any]:
        """Phi' on every element of K0 modulo p^n."""
        if self._table is None:
            table = {}
            for k in compact_residues(self.prime, self.level, self.in_k0):
                table[self._key(k)] = self.phi_prime_compact(k)
            self._table = table
            self.logger.info(f"Tabulated Phi' for {self.pi.label}: {len(table)} classes")
        return self._table

    def phi_prime(self, g: GL2Element) -> Any:
        """Phi'(g) for any g; zero off Z K0."""
        p = self.prime
        shift = min(valuation(x, p) for x in g.entries)
        k = g.scale(Fraction(p) ** -shift)
        if valuation(k.det, p) != 0:
            return self.ring.zero()
        integers = tuple(int(x.numerator * pow(x.denominator, -1, self.modulus * p)) for x in k.entries)
        if not self.in_k0(integers):  # type: ignore[arg-type]
            return self.ring.zero()
        return self.table()[self._key(integers)]  # type: ignore[arg-type]

    @property
    def compact_size(self) -> int:
        """|GL2(Z/p^n)|, the normalizing count of the Haar measure with vol(K) = 1."""
        p, r = self.prime, self.level
        if r == 0:
            return 1
        return p ** (4 * (r - 1)) * (p * p - 1) * (p * p - p)

    def delta(self) -> Any:
        """delta_pi = integral over K0 of |Phi'|^2, exact when the ring is exact."""
        total = sum((value * value.conjugate() for value in self.table().values()), self.ring.zero())
        if self.exact:
            return total.to_fraction() / self.compact_size
        return float(total.real) / self.compact_size

    def convolve(self, h: Residues) -> Any:
        """(Phi' * Phi')(h) for h in K, as the finite average over K0 modulo p^n."""
        table = self.table()
        total = self.ring.zero()
        key_h = self._key(h)
        for k, value in table.items():
            quotient = _mul_mod(_inv_mod(k, self.modulus), key_h, self.modulus) if self.level else None
            partner = table.get(self._key(quotient) if quotient is not None else k)
            if partner is not None:
                total = total + value * partner
        return total * Fraction(1, self.compact_size) if self.exact else total / self.compact_size

    def convolve_at(self, g: GL2Element) -> Any:
        """(Phi' * Phi')(g) for any g, reading the second factor through phi_prime."""
        p = self.prime
        total = self.ring.zero()
        for k, value in self.table().items():
            total = total + value * self.phi_prime(GL2Element(*k, p).inverse() @ g)
        return total * Fraction(1, self.compact_size) if self.exact else total / self.compact_size

    def apply(self, vector: Any, x: GL2Element) -> Any:
        """(R(Phi') f)(x) = integral of Phi'(k) f(x k) over K0 for a right K(p^n)-invariant f."""
        p = self.prime
        total = self.ring.zero()
        for k, value in self.table().items():
            total = total + value * vector(x @ GL2Element(*k, p))
        return total * Fraction(1, self.compact_size) if self.exact else total / self.compact_size

    def translated_newform(self, x: GL2Element) -> Any:
        """W'(x) = W(x a(p^n1))."""
        return self.engine.value(x @ GL2Element.diagonal(Fraction(self.prime) ** self.n1, self.prime))

    def refinement_check(self, samples: int = 20, seed: int = 0) -> int:
        """Compare Phi' at random lifts modulo p^(n+1) with the tabulated class values.

        Returns:
            The number of lifts compared.

        Raises:
            RefinementError: If a lift changes the value.
        """
        if self.level == 0:
            return 0
        rng = np.random.default_rng(seed)
        keys = sorted(self.table())
        for _ in range(samples):
            key = keys[int(rng.integers(len(keys)))]
            lift = tuple(x + self.modulus * int(rng.integers(self.prime)) for x in key)
            if not self.ring.close(self.phi_prime_compact(lift), self.table()[key]):  # type: ignore[arg-type]
                raise RefinementError(f"Phi' changed under refinement at {lift}", witness=lift)
        return samples


def phi_value(pi: LocalRepresentation, g: GL2Element, backend: str = INNER) -> Any:
    """Phi_pi(g) by the Whittaker inner product or, for supercuspidal pi, by the closed formula."""
    coefficient = TruncatedCoefficient(pi)
    if backend == INNER:
        return coefficient.phi(g)
    if backend != FORMULA:
        raise ValueError(f"Unknown backend: {backend}")
    position = coset_position(g, pi.conductor)
    central = coefficient.engine.omega.value(
        unit_part(position.zfactor.value, pi.prime), ExactRing()
    )
    return central.conjugate() * coefficient.phi_formula(position.t, position.l, position.v, position.xshift.value)


def delta_pi(pi: LocalRepresentation, coefficient: TruncatedCoefficient | None = None) -> CheckReport:
    """Compute delta_pi with its dimension and floor checks.

    The report carries delta_pi q^(n1 + m1) as its measured constant; 1 / ([K:K0] delta_pi) must be a positive
    integer, and non-supercuspidal pi also get dim(pi') / q^(n0 + m1) recorded.
    """
    coefficient = coefficient or TruncatedCoefficient(pi)
    report = CheckReport("matrixcoeff/delta", params={"pi": pi.label, "ring": coefficient.ring.name})
    refined = coefficient.refinement_check()
    delta = coefficient.delta()
    q = pi.prime
    dimension = 1 / (coefficient.index * delta)
    if coefficient.exact:
        integral = Fraction(dimension).denominator == 1 and dimension > 0
    else:
        integral = dimension > 0 and abs(dimension - round(dimension)) < 1e-6
    report.require(integral, "1 / ([K:K0] delta) is not a positive integer", dimension=dimension, delta=delta)
    report.measured_constant = float(delta) * q ** (pi.n1 + pi.m1)
    report.details.update(
        {
            "delta": delta,
            "dimension": dimension,
            "index": coefficient.index,
            "refinement_samples": refined,
            "tail_bound": coefficient.tail_bound,
            "dimension_ratio": None if pi.is_supercuspidal else float(dimension) / q ** (pi.n0 + pi.m1),
        }
    )
    report.require(report.measured_constant >= 1 / 8, "delta q^(n1 + m1) below 1/8", value=report.measured_constant)
    return report


def off_support(p: int, n: int) -> list[GL2Element]:
    """Sample elements outside Z K0: a(p), n(1/p), and w when n is odd."""
    samples = [GL2Element.diagonal(p, p), GL2Element.unipotent(Fraction(1, p), p)]
    if n % 2:
        samples.append(GL2Element.weyl(p))
    return samples


def convolution_verify(
    pi: LocalRepresentation,
    samples: int = 50,
    seed: int = 0,
    eigen_samples: int = 10,
) -> CheckReport:
    """Check Phi' * Phi' = delta_pi Phi' at sampled points and R(Phi') W' = delta_pi W' at sampled arguments."""
    coefficient = TruncatedCoefficient(pi)
    ring = coefficient.ring
    p, n = pi.prime, pi.conductor
    rng = np.random.default_rng(seed)
    delta = coefficient.delta()
    report = CheckReport("matrixcoeff/idempotency", params={"pi": pi.label, "seed": seed})
    table = coefficient.table()
    keys = sorted(table)
    points = [coefficient._key((1, 0, 0, 1))] + [keys[int(rng.integers(len(keys)))] for _ in range(samples - 1)]
    for h in points:
        lhs = coefficient.convolve(h)
        rhs = table[h] * delta
        report.require(ring.close(lhs, rhs), "Phi' * Phi' != delta Phi'", h=h, lhs=lhs, rhs=rhs)
    at_one = coefficient.convolve(coefficient._key((1, 0, 0, 1)))
    report.require(ring.close(at_one, coefficient._one() * delta), "(Phi' * Phi')(1) != delta")
    for h in off_support(p, n):
        report.require(ring.is_zero(coefficient.phi_prime(h)), "Phi' is nonzero off Z K0", h=h)
        outside = coefficient.convolve_at(h)
        report.require(ring.is_zero(outside), "Phi' * Phi' is nonzero off Z K0", h=h, value=outside)
    for k in keys:
        inverse = coefficient._key(_inv_mod(k, coefficient.modulus)) if coefficient.level else k
        report.require(ring.close(table[inverse], table[k].conjugate()), "Phi'(k^-1) != conj Phi'(k)", k=k)
    report.require(ring.close(table[coefficient._key((1, 0, 0, 1))], coefficient._one()), "Phi'(1) != 1")
    for _ in range(eigen_samples):
        t, l = int(rng.integers(-2 * n - 2, 3)), int(rng.integers(0, n + 1))
        units = unit_residues(p, max(n, 1))
        x = g_tlv(t, l, units[int(rng.integers(len(units)))], p)
        lhs = coefficient.apply(coefficient.translated_newform, x)
        rhs = coefficient.translated_newform(x) * delta
        report.require(ring.close(lhs, rhs), "R(Phi') W' != delta W'", x=x, lhs=lhs, rhs=rhs)
    if len(table) <= DICHOTOMY_CAP:
        report.merge(eigenvalue_dichotomy(coefficient, seed), "dichotomy")
    report.details["points"] = len(points)
    report.details["delta"] = delta
    return report


def eigenvalue_dichotomy(coefficient: TruncatedCoefficient, seed: int = 0, vectors: int = 3) -> CheckReport:
    """Check R(Phi')^2 f = delta R(Phi') f on translates f = pi(h) W', so every eigenvalue is 0 or delta."""
    pi = coefficient.pi
    p = pi.prime
    ring = coefficient.ring
    rng = np.random.default_rng(seed)
    delta = coefficient.delta()
    report = CheckReport("matrixcoeff/dichotomy", params={"pi": pi.label, "seed": seed})
    keys = sorted(coefficient.table())
    for _ in range(vectors):
        h = GL2Element(*keys[int(rng.integers(len(keys)))], p) if coefficient.level else GL2Element.identity(p)
        h = GL2Element.weyl(p) @ h

        def vector(y: GL2Element, h: GL2Element = h) -> Any:
            return coefficient.translated_newform(y @ h)

        def once(y: GL2Element, vector: Any = vector) -> Any:
            return coefficient.apply(vector, y)

        x = GL2Element.identity(p)
        report.require(
            ring.close(coefficient.apply(once, x), once(x) * delta),
            "R(Phi') has an eigenvalue outside {0, delta}",
            h=h,
        )
    return report


def borel_volume(q: int, j: int, k: int, n: int) -> Fraction:
    """Integral over B of the indicator of K0(p^j) at b w n(p^-k), by enumeration.

    b = z(t) n(x) a(y) carries the left Haar measure |y|^-1 dx d*y d*t, with B(o) of volume 1. Left factors in
    K0(p^j) keep membership, so the unit parts of t and y drop out and x only matters modulo o. At most one power
    of p scales a matrix into K, and the top left entry forces v(x) >= -k, so x runs over p^-n / o.
    """
    weyl_shift = GL2Element.weyl(q) @ GL2Element.unipotent(Fraction(q) ** -k, q)
    total = Fraction(0)
    for e in range(-2 * n - 2, 3):
        diagonal = GL2Element.diagonal(Fraction(q) ** e, q) @ weyl_shift
        for r in range(q**n):
            g = GL2Element.unipotent(Fraction(r, q**n), q) @ diagonal
            shift = min(valuation(x, q) for x in g.entries)
            if g.scale(Fraction(q) ** -shift).in_k0(j):
                total += Fraction(q) ** e
    return total


def integ_constants_verify(q: int, n: int) -> CheckReport:
    """Check vol(K0(p^j)) = sum over k of A_k times the Borel integral, exactly, for j = 0 .. n.

    The left side counts primitive bottom rows (c, d) modulo p^j with c = 0; the Borel integrals come from
    borel_volume.
    """
    if n < 1:
        raise ParameterRangeError(f"n must be positive: {n}")
    report = CheckReport("matrixcoeff/integlemma", params={"q": q, "n": n})
    base = Fraction(1) / (1 + Fraction(1, q))
    constants = [base] + [q**k * (1 - Fraction(1, q)) * base for k in range(1, n)] + [q**n * base]
    for j in range(n + 1):
        modulus = q**j
        rows = [(c, d) for c in range(modulus) for d in range(modulus) if modulus == 1 or c % q or d % q]
        lhs = Fraction(sum(1 for c, _ in rows if c == 0), len(rows))
        volumes = [borel_volume(q, j, k, n) for k in range(n + 1)]
        rhs = sum((constant * volume for constant, volume in zip(constants, volumes)), Fraction(0))
        report.require(lhs == rhs, "integration identity fails", j=j, lhs=lhs, rhs=rhs)
        report.details[f"j={j}"] = lhs
        report.details[f"borel[j={j}]"] = volumes
    report.details["constants"] = constants
    return report


def cross_term_orthogonality(pi: LocalRepresentation) -> CheckReport:
    """Split the integral of |Phi(n(p^-n1 x') g_{-2n1,n1,1/y'})|^2 into diagonal and cross terms, exactly.

    y' runs over the units and x' over y' + p^(n1 - n0); each cross term must vanish and the diagonal part is
    compared with q^(-2 n1).
    """
    if not pi.is_supercuspidal:
        raise UnsupportedError("the cross term split applies to supercuspidal representations")
    coefficient = TruncatedCoefficient(pi, "exact")
    p, n, n1, n0 = pi.prime, pi.conductor, pi.n1, pi.n0
    report = CheckReport("matrixcoeff/orthogonality", params={"pi": pi.label})
    modulus = p**n
    step = p ** (n1 - n0)
    units = unit_residues(p, n)
    classes = modulus // step
    sums: dict[tuple[str, str], CyclotomicNumber] = {}
    labels: list[str] = []
    for y in units:
        for j in range(classes):
            x_prime = (y + step * j) % modulus
            terms = dict(coefficient.formula_terms(-2 * n1, n1, Fraction(1, y), Fraction(x_prime, p**n1)))
            for label in terms:
                if label not in labels:
                    labels.append(label)
            for first, value in terms.items():
                for second, other in terms.items():
                    key = (first, second)
                    sums[key] = sums.get(key, CyclotomicNumber.zero()) + value * other.conjugate()
    weight = Fraction(1, p**n1 * len(units) * modulus)
    diagonal = Fraction(0)
    for (first, second), total in sorted(sums.items()):
        value = total * weight
        if first == second:
            diagonal += value.to_fraction()
            report.details[f"diagonal[{first}]"] = value
        else:
            report.require(value.is_zero(), "cross term does not vanish", pair=[first, second], value=value)
    report.require(diagonal > 0, "diagonal contribution is not positive", diagonal=diagonal)
    report.details["diagonal"] = diagonal
    report.details["terms"] = labels
    report.measured_constant = float(diagonal * p ** (2 * n1))
    return report


def formula_cross_check(pi: LocalRepresentation, x_values: tuple[int, ...] = (0, 1)) -> CheckReport:
    """Compare the closed formula with the inner product backend at n(x) g_{t,l,v}, l < n, over the window."""
    coefficient = TruncatedCoefficient(pi, "exact")
    p, n = pi.prime, pi.conductor
    report = CheckReport("matrixcoeff/formula", params={"pi": pi.label})
    checked = 0
    for l in range(n):
        for v in unit_residues(p, max(min(l, n - l), 1)):
            for t in range(-2 * n - 2, 3):
                for numerator in x_values:
                    x = Fraction(numerator, p**n)
                    g = GL2Element.unipotent(x, p) @ g_tlv(t, l, v, p)
                    formula = coefficient.phi_formula(t, l, v, x)
                    inner = coefficient.phi(g)
                    report.require(
                        formula == inner, "backends disagree", t=t, l=l, v=v, x=x, formula=formula, inner=inner
                    )
                    checked += 1
    report.details["points"] = checked
    return report


def dimension_bound_check(pi: LocalRepresentation) -> CheckReport:
    """Record dim(pi') / q^(n0 + m1) for non-supercuspidal pi."""
    if pi.is_supercuspidal:
        return CheckReport("matrixcoeff/dimbound", params={"pi": pi.label}, status=STATUS_INFO)
    delta = delta_pi(pi)
    report = CheckReport("matrixcoeff/dimbound", params={"pi": pi.label})
    report.measured_constant = delta.details["dimension_ratio"]
    report.merge(delta, "delta")
    return report


def _summable(pi: LocalRepresentation) -> bool:
    return distinct_roots(pi.contragredient().l_roots())


def ring_for(pi: LocalRepresentation) -> ComplexRing | ExactRing:
    """The ring TruncatedCoefficient would pick for pi."""
    return ExactRing() if _summable(pi) else ComplexRing()


def exact_sublist(catalog: list[LocalRepresentation]) -> list[LocalRepresentation]:
    """Entries small enough for full enumeration of K modulo p^n."""
    return [pi for pi in catalog if (pi.prime == 2 and pi.conductor <= 3) or (pi.prime == 3 and pi.conductor <= 2)]


