"""Whittaker newform engine: coefficient tables, point evaluation, and the support and size checks.

For a representation pi of conductor p^n with omega_pi(p) = 1, the newform W is determined on the cosets
g = z(z) n(x) a(p^t) w n(p^-l v) k1 by

    W(g) = omega(z) psi(x) sum over nu with nu(p) = 1, a(nu) <= l of c_{t,l}(nu) nu(v)

where the coefficients c come from expanding the functional equation of the twists nu pi in X = q^(1/2 - s).
"""

from __future__ import annotations

import logging
import math
import threading
from fractions import Fraction
from functools import lru_cache
from typing import Any
from typing import Iterator
from typing import NamedTuple

import numpy as np
import sympy

from newformology.chars import AdditiveCharacter
from newformology.chars import CharacterCache
from newformology.chars import ResidueCharacter
from newformology.chars import enumerate_tilde_characters
from newformology.chars import gauss_sum
from newformology.chars import supercuspidal_characters
from newformology.cyclo import CyclotomicNumber
from newformology.cyclo import ExactRing
from newformology.cyclo import get_ring
from newformology.exceptions import ParameterRangeError
from newformology.exceptions import UnsupportedError
from newformology.exceptions import VerificationError
from newformology.logging import get_logger
from newformology.padic import GL2Element
from newformology.padic import coset_position
from newformology.padic import g_tlv
from newformology.padic import matrix_invariants
from newformology.padic import residue
from newformology.padic import unit_part
from newformology.padic import unit_residues
from newformology.reports import STATUS_INFO
from newformology.reports import CheckReport
from newformology.reps import DihedralSupercuspidal
from newformology.reps import LocalRepresentation
from newformology.reps import complete_homogeneous
from newformology.reps import geometric_parts

Laurent = dict[int, CyclotomicNumber]

# Rows above the support floor scanned by the size checks.
AVERAGE_ROWS = 5

_PINNED: dict[tuple[int, str], int] = {}
_PINNED_LOCK = threading.Lock()


class TwistData(NamedTuple):
    """Local data of a twist nu pi used by the coefficient identity."""

    conductor: int
    epsilon_inverse: CyclotomicNumber
    l_roots: list[CyclotomicNumber]
    dual_roots: list[CyclotomicNumber]


def _laurent_mul(left: Laurent, right: Laurent) -> Laurent:
    product: Laurent = {}
    for e1, c1 in left.items():
        for e2, c2 in right.items():
            product[e1 + e2] = product.get(e1 + e2, CyclotomicNumber.zero()) + c1 * c2
    return {e: c for e, c in product.items() if not c.is_zero()}


def _inverse_l_polynomial(roots: list[CyclotomicNumber]) -> Laurent:
    """prod (1 - gamma X^-1) as a Laurent polynomial in X."""
    result: Laurent = {0: CyclotomicNumber.one()}
    for root in roots:
        result = _laurent_mul(result, {0: CyclotomicNumber.one(), -1: -root})
    return result


def coset_window(p: int, n: int, t_min: int | None = None, t_max: int = 2) -> Iterator[tuple[int, int, int]]:
    """Yield (t, l, v) with t in [-2n - 2, 2], 0 <= l <= n, and v over the units modulo p^min(l, n - l)."""
    t_min = -2 * n - 2 if t_min is None else t_min
    for l in range(n + 1):
        for v in unit_residues(p, min(l, n - l)):
            for t in range(t_min, t_max + 1):
                yield t, l, v


def support_floor(pi: LocalRepresentation, l: int) -> int:
    """Lower bound -max(2l, l + m, n) for t on the support of W(g_{t,l,v})."""
    return -max(2 * l, l + pi.m, pi.conductor)


class WhittakerEngine:
    """Newform values of one representation, with lazily built and cached coefficient tables."""

    def __init__(
        self,
        pi: LocalRepresentation,
        ring: str | Any = "exact",
        cache: CharacterCache | None = None,
        logger: logging.Logger | None = None,
    ) -> None:
        """Prepare the engine.

        Dihedral representations whose Langlands constant has not been pinned are pinned first.

        Args:
            pi: The representation.
            ring: Value ring name ("exact" or "complex") or ring instance.
            cache: Optional on-disk cache for character tables and pinned constants.
            logger: Optional logger for table construction.
        """
        self.logger = get_logger(logger)
        self.ring = get_ring(ring) if isinstance(ring, str) else ring
        if isinstance(pi, DihedralSupercuspidal) and pi.langlands is None:
            pi = pi.with_langlands(pin_langlands_constant(pi, cache=cache, logger=logger))
        self.pi = pi
        self.prime = pi.prime
        self.n = pi.conductor
        self.omega = pi.central_character
        self.psi = AdditiveCharacter(self.prime)
        self.characters = enumerate_tilde_characters(self.prime, self.n, cache)
        self._index = {mu: i for i, mu in enumerate(self.characters)}
        self._twists: dict[int, TwistData] = {}
        self._l_coefficients: dict[int, list[CyclotomicNumber]] = {}
        self._laurent: dict[tuple[int, int], Laurent] = {}
        self._c: dict[tuple[int, int, int], CyclotomicNumber] = {}
        self._ring_c: dict[tuple[int, int, int], Any] = {}
        self._cosets: dict[tuple[int, int, int], Any] = {}
        self._tail_starts: dict[int, int] = {}

    def index_of(self, mu: ResidueCharacter) -> int:
        """Position of a character in the engine's list, whatever level it is written at."""
        if mu.conductor > self.n:
            raise ParameterRangeError(f"a(mu) = {mu.conductor} exceeds the conductor {self.n}")
        return self._index[mu.at_level(self.n)]

    def twist_data(self, index: int) -> TwistData:
        """Conductor, inverse epsilon factor, and L-data of nu pi for the indexed nu."""
        data = self._twists.get(index)
        if data is None:
            nu = self.characters[index]
            twisted = self.pi.twist(nu)
            epsilon = twisted.epsilon()
            if epsilon.abs2() != 1:
                raise VerificationError(f"epsilon factor of {twisted.label} is not of modulus 1", witness=epsilon)
            dual_roots = []
            if not self.pi.is_supercuspidal:
                dual_roots = self.pi.twist(nu.inverse() * self.omega.inverse()).l_roots()
            data = TwistData(twisted.conductor, epsilon.conjugate(), twisted.l_roots(), dual_roots)
            self._twists[index] = data
        return data

    def _l_coefficient(self, index: int, k: int) -> CyclotomicNumber:
        roots = self.twist_data(index).l_roots
        if not roots:
            return CyclotomicNumber.one() if k == 0 else CyclotomicNumber.zero()
        cached = self._l_coefficients.setdefault(index, [])
        while len(cached) <= k:
            cached.append(complete_homogeneous(roots, len(cached)))
        return cached[k]

    def laurent(self, l: int, index: int) -> Laurent:
        """The right side of the coefficient identity for (l, nu) as a Laurent polynomial in X.

        It equals omega(-1) (sum over a of W(a(p^a)) G(p^(a - l), nu^-1) X^-a) L(1 - s, nu^-1 omega^-1 pi)^-1. For
        nu = 1 the infinite part of the sum cancels the L-factor, which leaves a finite polynomial.
        """
        key = (l, index)
        if key in self._laurent:
            return self._laurent[key]
        if not 0 <= l <= self.n:
            raise ParameterRangeError(f"l must lie in [0, {self.n}]: {l}")
        p = self.prime
        nu = self.characters[index]
        a_nu = nu.conductor
        result: Laurent = {}
        if a_nu <= l:
            data = self.twist_data(index)
            polynomial = _inverse_l_polynomial(data.dual_roots)
            sign = CyclotomicNumber.root_of_unity(*self.omega.exponent_at(-1))
            if a_nu == 0:
                inner: Laurent = {}
                for a in range(l):
                    weight = gauss_sum(Fraction(p) ** (a - l), nu) - 1
                    value = self.pi.diagonal(a) * weight
                    if not value.is_zero():
                        inner[-a] = value
                body = _laurent_mul(polynomial, inner)
                body[0] = body.get(0, CyclotomicNumber.zero()) + 1
            else:
                a = l - a_nu
                value = self.pi.diagonal(a) * gauss_sum(Fraction(1, p**a_nu), nu.inverse())
                body = _laurent_mul(polynomial, {-a: value})
            result = {e: sign * c for e, c in body.items() if not c.is_zero()}
        self._laurent[key] = result
        return result

    def d_value(self, t: int, l: int, index: int) -> CyclotomicNumber:
        """d_{t,l}(nu), the coefficient of X^(t + a(nu pi)) in the coefficient identity."""
        laurent = self.laurent(l, index)
        if not laurent:
            return CyclotomicNumber.zero()
        return laurent.get(t + self.twist_data(index).conductor, CyclotomicNumber.zero())

    def d_table(self, l: int) -> dict[ResidueCharacter, dict[int, CyclotomicNumber]]:
        """All nonzero d_{t,l}(nu), keyed by nu and then by t."""
        table = {}
        for index, nu in enumerate(self.characters):
            laurent = self.laurent(l, index)
            if laurent:
                shift = self.twist_data(index).conductor
                table[nu] = {e - shift: c for e, c in sorted(laurent.items())}
        return table

    def c_value(self, t: int, l: int, index: int) -> CyclotomicNumber:
        """c_{t,l}(nu) = eps(1/2, nu pi)^-1 sum over i of alpha_i d_{t-i,l}(nu).

        The alpha_i are the coefficients of L(s, nu pi).
        """
        key = (t, l, index)
        cached = self._c.get(key)
        if cached is not None:
            return cached
        laurent = self.laurent(l, index)
        total = CyclotomicNumber.zero()
        if laurent:
            data = self.twist_data(index)
            top = t + data.conductor
            for e, coefficient in laurent.items():
                if e <= top:
                    total = total + self._l_coefficient(index, top - e) * coefficient
            total = total * data.epsilon_inverse
        self._c[key] = total
        return total

    def _c_in_ring(self, t: int, l: int, index: int) -> Any:
        key = (t, l, index)
        value = self._ring_c.get(key)
        if value is None:
            value = self.ring.convert(self.c_value(t, l, index))
            self._ring_c[key] = value
        return value

    def value_at_coset(self, t: int, l: int, v: Fraction | int) -> Any:
        """W(g_{t,l,v}) = sum over a(nu) <= l of c_{t,l}(nu) nu(v)."""
        p = self.prime
        v_class = residue(v, p, l)
        key = (t, l, v_class)
        cached = self._cosets.get(key)
        if cached is not None:
            return cached
        total = self.ring.zero()
        for index, nu in enumerate(self.characters):
            if nu.conductor > l or not self.laurent(l, index):
                continue
            c = self._c_in_ring(t, l, index)
            if self.ring.is_zero(c):
                continue
            total = total + c * nu.value(v_class if l else 1, self.ring)
        self._cosets[key] = total
        return total

    def tail_start(self, l: int) -> int:
        """First t >= 0 from which every c_{t,l}(nu) runs through all exponents of its Laurent polynomial."""
        start = self._tail_starts.get(l)
        if start is None:
            start = 0
            for index in range(len(self.characters)):
                laurent = self.laurent(l, index)
                if laurent:
                    start = max(start, max(laurent) - self.twist_data(index).conductor + 1)
            self._tail_starts[l] = start
        return start

    def tail_terms(self, t: int, l: int, v: Fraction | int) -> list[tuple[CyclotomicNumber, CyclotomicNumber]]:
        """Pairs (A, r) with W(g_{t+b,l,v}) = sum of A r^b for every b >= 0.

        Past tail_start(l) each c_{t,l}(nu) is the full Laurent polynomial paired with the L-coefficients of nu pi,
        and those coefficients are sums of powers of the L-roots.

        Raises:
            ParameterRangeError: If t lies below tail_start(l).
            UnsupportedError: If the engine is not exact, or a twist has a repeated L-root.
        """
        if not isinstance(self.ring, ExactRing):
            raise UnsupportedError("closed form tails need the exact ring")
        if t < self.tail_start(l):
            raise ParameterRangeError(f"t = {t} lies below the geometric range of l = {l}")
        v_class = residue(v, self.prime, l)
        terms = []
        for index, nu in enumerate(self.characters):
            laurent = self.laurent(l, index)
            if nu.conductor > l or not laurent:
                continue
            data = self.twist_data(index)
            top = t + data.conductor
            character = nu.value(v_class if l else 1, self.ring) * data.epsilon_inverse
            for weight, root in geometric_parts(data.l_roots):
                amplitude = sum((root ** (top - e) * c for e, c in laurent.items()), CyclotomicNumber.zero())
                amplitude = amplitude * weight * character
                if not amplitude.is_zero():
                    terms.append((amplitude, root))
        return terms

    def value(self, g: GL2Element) -> Any:
        """W(g) for any invertible g, through the coset decomposition."""
        position = coset_position(g, self.n)
        z = unit_part(position.zfactor.value, self.prime)
        central = self.omega.value(z, self.ring)
        return central * self.psi.value(position.xshift.value, self.ring) * self.value_at_coset(
            position.t, position.l, position.v
        )


_SHARED: dict[str, CharacterCache | None] = {"cache": None}


@lru_cache(maxsize=256)
def get_engine(pi: LocalRepresentation, ring: str = "exact") -> WhittakerEngine:
    """Shared engine per representation object and ring."""
    return WhittakerEngine(pi, ring, _SHARED["cache"])


def use_cache(cache: CharacterCache | None) -> None:
    """Back the shared engines with an on-disk cache, dropping engines built without it."""
    _SHARED["cache"] = cache
    get_engine.cache_clear()


def _eta_minus_one(pi: DihedralSupercuspidal) -> int:
    ext = pi.extension
    return 1 if ext.kind == "unramified" else int(sympy.legendre_symbol(ext.prime - 1, ext.prime))


def raw_langlands_value(pi: DihedralSupercuspidal, cache: CharacterCache | None = None) -> CyclotomicNumber:
    """W(1) computed with the Langlands constant set to 1; the true constant equals this value."""
    engine = WhittakerEngine(pi.with_langlands(CyclotomicNumber.one()), "exact", cache)
    return engine.value(GL2Element.identity(pi.prime))


def pin_langlands_constant(
    pi: DihedralSupercuspidal,
    cache: CharacterCache | None = None,
    logger: logging.Logger | None = None,
) -> CyclotomicNumber:
    """Fix the constant relating eps(pi_xi) to eps(xi) for the extension of pi by the normalization W(1) = 1.

    The value is cached per (p, extension kind), in memory and in the optional on-disk cache.

    Raises:
        VerificationError: If the pinned value is not a fourth root of unity with square eta(-1).
    """
    logger = get_logger(logger)
    key = (pi.prime, pi.extension.kind)
    with _PINNED_LOCK:
        exponent = _PINNED.get(key)
    if exponent is None and cache is not None:
        payload = cache.load((pi.prime, "langlands", pi.extension.kind))
        exponent = payload["exponent"] if payload else None
    if exponent is None:
        value = raw_langlands_value(pi, cache)
        exponent = next((k for k in range(4) if value == CyclotomicNumber.root_of_unity(k, 4)), None)
        if exponent is None:
            raise VerificationError(f"Langlands constant for {pi.label} is not a fourth root of unity", witness=value)
        if value**2 != _eta_minus_one(pi):
            raise VerificationError(f"Langlands constant for {pi.label} does not square to eta(-1)", witness=value)
        logger.info(f"Pinned Langlands constant for p={key[0]} {key[1]}: zeta_4^{exponent}")
        if cache is not None:
            cache.store((pi.prime, "langlands", pi.extension.kind), {"exponent": exponent})
    with _PINNED_LOCK:
        _PINNED[key] = exponent
    return CyclotomicNumber.root_of_unity(exponent, 4)


def langlands_consistency(pi: DihedralSupercuspidal, cache: CharacterCache | None = None) -> CheckReport:
    """Check that the pinned constant does not depend on the inducing character."""
    report = CheckReport("whittaker/langlands", params={"p": pi.prime, "extension": pi.extension.kind})
    reference = raw_langlands_value(pi, cache)
    report.details["constant"] = reference
    others = []
    for a in range(1, 4):
        for xi in supercuspidal_characters(pi.extension, a):
            if xi.table != pi.xi.table:
                others.append(xi)
                break
        if others:
            break
    if not others:
        report.status = STATUS_INFO
        report.details["note"] = "no second inducing character available"
        return report
    other = DihedralSupercuspidal(others[0])
    value = raw_langlands_value(other, cache)
    report.require(value == reference, "Langlands constant differs between characters", first=reference, second=value)
    report.require(reference**4 == 1, "constant is not a fourth root of unity", constant=reference)
    report.require(reference**2 == _eta_minus_one(pi), "constant does not square to eta(-1)", constant=reference)
    return report


def d_table(pi: LocalRepresentation, l: int) -> dict[ResidueCharacter, dict[int, CyclotomicNumber]]:
    """Nonzero d_{t,l}(mu) for every mu, keyed by mu and then t."""
    return get_engine(pi).d_table(l)


def c_value(pi: LocalRepresentation, t: int, l: int, mu: ResidueCharacter) -> CyclotomicNumber:
    """The coefficient c_{t,l}(mu)."""
    engine = get_engine(pi)
    return engine.c_value(t, l, engine.index_of(mu))


def whittaker_value(pi: LocalRepresentation, g: GL2Element, ring: str = "exact") -> Any:
    """The normalized newform value W_pi(g)."""
    return get_engine(pi, ring).value(g)


def _pi_params(pi: LocalRepresentation) -> dict:
    return {"pi": pi.label}


def verify_normalization(pi: LocalRepresentation) -> CheckReport:
    """W(1) = 1 exactly."""
    engine = get_engine(pi)
    report = CheckReport("whittaker/normalization", params=_pi_params(pi))
    value = engine.value(GL2Element.identity(pi.prime))
    report.require(value == 1, "W(1) is not 1", value=value)
    return report


def atkin_lehner_verify(pi: LocalRepresentation, ring: str = "exact") -> CheckReport:
    """Check W_pi~(g_{t,l,v}) = eps(1/2, pi) omega(v) psi(-p^(t+l) / v) W_pi(a(p^(t+2l-n)) w n(-p^(l-n) v)).

    Every (t, l, v) of the verification window is tested; the epsilon factor is the one of the pinned
    representation and must have modulus 1.
    """
    engine = get_engine(pi, ring)
    pinned = engine.pi
    dual = get_engine(pinned.contragredient(), ring)
    p, n = pi.prime, pi.conductor
    ring_ops = engine.ring
    epsilon = pinned.epsilon()
    report = CheckReport("whittaker/al", params=_pi_params(pi))
    report.require(epsilon.abs2() == 1, "eps(1/2, pi) is not of modulus 1", epsilon=epsilon)
    report.details["epsilon"] = epsilon
    eps_value = ring_ops.convert(epsilon)
    weyl = GL2Element.weyl(p)
    checked = 0
    for t, l, v in coset_window(p, n):
        lhs = dual.value_at_coset(t, l, v)
        g = GL2Element.diagonal(Fraction(p) ** (t + 2 * l - n), p) @ weyl @ GL2Element.unipotent(
            -(Fraction(p) ** (l - n)) * v, p
        )
        rhs = (
            eps_value
            * engine.omega.value(v, ring_ops)
            * engine.psi.value(-(Fraction(p) ** (t + l)) / v, ring_ops)
            * engine.value(g)
        )
        report.require(ring_ops.close(lhs, rhs), "Atkin-Lehner identity fails", t=t, l=l, v=v, lhs=lhs, rhs=rhs)
        checked += 1
    report.details["triples"] = checked
    return report


def verify_support(pi: LocalRepresentation) -> CheckReport:
    """Over the coset window, W(g_{t,l,v}) != 0 implies t >= -max(2l, l + m, n)."""
    engine = get_engine(pi)
    report = CheckReport("whittaker/support", params=_pi_params(pi))
    attained = set()
    for t, l, v in coset_window(pi.prime, pi.conductor):
        if engine.value_at_coset(t, l, v).is_zero():
            continue
        floor = support_floor(pi, l)
        report.require(t >= floor, "nonzero value below the support floor", t=t, l=l, v=v, floor=floor)
        attained.add(l)
    report.details["rows_with_support"] = sorted(attained)
    return report


def j_set(p: int, n: int) -> Iterator[GL2Element]:
    """Representatives of B(Z_p) \\ K times a(p^n1), which determine W(a(y) k a(p^n1)) up to unit translation of y."""
    n1 = (n + 1) // 2
    shift = GL2Element.diagonal(Fraction(p) ** n1, p)
    modulus = p ** max(n, 1)
    for gamma in range(modulus):
        yield GL2Element.lower_unipotent(gamma, p) @ shift
    for x in range(0, modulus, p):
        yield GL2Element.weyl(p) @ GL2Element.unipotent(x, p) @ shift


def j_condition(n: int, l: int) -> bool:
    """Whether a coset index l is admissible for K a(p^n1) at conductor p^n: always for even n, else l <= n0."""
    return n % 2 == 0 or l <= n // 2


def verify_j_support(pi: LocalRepresentation) -> CheckReport:
    """For g in K a(p^n1) with n even or l(g) <= n0: W(a(y) g) != 0 implies v(y) >= -q(g)."""
    engine = get_engine(pi)
    p, n, m = pi.prime, pi.conductor, pi.m
    report = CheckReport("whittaker/jsupport", params=_pi_params(pi))
    checked = 0
    for g in j_set(p, n):
        invariants = matrix_invariants(g, n, m)
        if not j_condition(n, invariants.l):
            continue
        for b in range(-invariants.qg - 2, -invariants.qg + AVERAGE_ROWS):
            for u in unit_residues(p, invariants.n0g):
                value = engine.value(GL2Element.diagonal(Fraction(p) ** b * u, p) @ g)
                checked += 1
                if not value.is_zero():
                    report.require(b >= -invariants.qg, "nonzero value below -q(g)", g=g, b=b, u=u, qg=invariants.qg)
    report.details["evaluations"] = checked
    return report


def verify_average_size(pi: LocalRepresentation) -> CheckReport:
    """Measure C in (mean over units v of |W(a(p^b v) g)|^2)^(1/2) <= C q^(-r/4), b = -q(g) + r, r = 0..4.

    Units are averaged modulo p^n0(g), on which |W| is constant. Monotone decay in r is reported, not enforced.
    """
    engine = get_engine(pi, "complex")
    p, n, m = pi.prime, pi.conductor, pi.m
    report = CheckReport("whittaker/avgsize", params=_pi_params(pi))
    constant = 0.0
    monotone = True
    supported = True
    for g in j_set(p, n):
        invariants = matrix_invariants(g, n, m)
        if not j_condition(n, invariants.l):
            continue
        units = unit_residues(p, invariants.n0g)
        averages = []
        for r in range(AVERAGE_ROWS):
            b = -invariants.qg + r
            total = sum(abs(engine.value(GL2Element.diagonal(Fraction(p) ** b * u, p) @ g)) ** 2 for u in units)
            average = math.sqrt(total / len(units))
            averages.append(average)
            constant = max(constant, average * p ** (r / 4))
        if any(averages) and averages[0] == 0:
            supported = False
        monotone = monotone and all(later <= earlier + 1e-12 for earlier, later in zip(averages, averages[1:]))
    report.measured_constant = constant
    report.details["monotone_decay"] = monotone
    report.details["top_row_attained"] = supported
    return report


def verify_support_and_average(pi: LocalRepresentation) -> CheckReport:
    """Support floor, the support bound v(y) >= -q(g), and the average size bound, in one report."""
    report = CheckReport("whittaker/support_and_average", params=_pi_params(pi))
    for part in (verify_support(pi), verify_j_support(pi)):
        report.merge(part, part.check.split("/")[-1])
    average = verify_average_size(pi)
    report.merge(average, "avgsize")
    report.measured_constant = average.measured_constant
    return report


def _envelope(start: int, rho: float) -> float:
    """max over k >= start of (k + 1) rho^k, a bound for |h_k| of two roots of modulus at most rho."""
    best, k = 0.0, max(start, 0)
    while k < 10_000:
        term = (k + 1) * rho**k
        best = max(best, term)
        if k > 1 / max(1 - rho, 1e-12) and term < best * 1e-3:
            break
        k += 1
    return best


def sup_scan(pi: LocalRepresentation) -> CheckReport:
    """Supremum of |W| over the coset window with its argmax, and a bound for the values above the window."""
    engine = get_engine(pi, "complex")
    p, n = pi.prime, pi.conductor
    report = CheckReport("whittaker/supscan", params=_pi_params(pi), status=STATUS_INFO)
    best, argmax = 0.0, None
    for t, l, v in coset_window(p, n):
        size = abs(engine.value_at_coset(t, l, v))
        if size > best + 1e-12:
            best, argmax = size, {"t": t, "l": l, "v": v}
    roots = [root for index in range(len(engine.characters)) for root in engine.twist_data(index).l_roots]
    rho = max((abs(root.to_complex()) for root in roots), default=0.0)
    tail = 0.0
    if rho:
        for l in range(n + 1):
            row = 0.0
            for index, nu in enumerate(engine.characters):
                if nu.conductor > l:
                    continue
                shift = engine.twist_data(index).conductor
                for e, coefficient in engine.laurent(l, index).items():
                    row += abs(coefficient.to_complex()) * _envelope(3 + shift - e, rho)
            tail = max(tail, row)
    identity = abs(engine.value(GL2Element.identity(p)))
    report.require(best >= 1 - 1e-9 and identity > 1 - 1e-9, "supremum below W(1) = 1", sup=best)
    report.measured_constant = best
    report.details.update(
        {"argmax": argmax, "tail_bound": tail, "window_sufficient": tail <= best, "m1_positive": pi.m1 > 0}
    )
    return report


def verify_transformations(pi: LocalRepresentation, samples: int = 20, seed: int = 0) -> CheckReport:
    """Check W(n(x)g) = psi(x)W(g), W(z(u)g) = omega(u)W(g), and W(g k1) = W(g) for k1 in K1(p^n) on random g."""
    engine = get_engine(pi)
    p, n = pi.prime, pi.conductor
    rng = np.random.default_rng(seed)
    ring = ExactRing()
    report = CheckReport("whittaker/transformations", params={**_pi_params(pi), "seed": seed})
    for _ in range(samples):
        t, l = int(rng.integers(-2 * n - 2, 3)), int(rng.integers(0, n + 1))
        units = unit_residues(p, max(n, 1))
        v = units[int(rng.integers(len(units)))]
        g = g_tlv(t, l, v, p)
        base = engine.value(g)
        x = Fraction(int(rng.integers(-p**3, p**3)), p ** int(rng.integers(0, n + 2)))
        u = units[int(rng.integers(len(units)))]
        k1 = GL2Element(
            1 + p ** max(n, 1) * int(rng.integers(0, p**2)),
            int(rng.integers(0, p**2)),
            p ** max(n, 1) * int(rng.integers(0, p**2)),
            units[int(rng.integers(len(units)))],
            p,
        )
        shifted = engine.value(GL2Element.unipotent(x, p) @ g)
        report.require(shifted == engine.psi.value(x, ring) * base, "W(n(x)g) != psi(x)W(g)", t=t, l=l, v=v, x=x)
        central = engine.value(GL2Element.central(u, p) @ g)
        report.require(central == engine.omega.value(u, ring) * base, "W(z(u)g) != omega(u)W(g)", t=t, l=l, v=v, u=u)
        report.require(engine.value(g @ k1) == base, "W is not right K1(p^n)-invariant", t=t, l=l, v=v, k1=k1)
    return report


def verify_unit_translation(pi: LocalRepresentation) -> CheckReport:
    """|W(a(u) g)| depends only on u modulo p^n0(g), for g over the J-set representatives and a few rows."""
    engine = get_engine(pi)
    p, n, m = pi.prime, pi.conductor, pi.m
    report = CheckReport("whittaker/unittranslation", params=_pi_params(pi))
    for g in j_set(p, n):
        invariants = matrix_invariants(g, n, m)
        for b in range(-invariants.qg, -invariants.qg + 2):
            sizes: dict[int, CyclotomicNumber] = {}
            for u in unit_residues(p, max(n, 1)):
                size = engine.value(GL2Element.diagonal(Fraction(p) ** b * u, p) @ g).abs2()
                key = u % p**invariants.n0g
                if key in sizes:
                    report.require(sizes[key] == size, "|W| varies within a unit class", g=g, b=b, u=u)
                else:
                    sizes[key] = size
    return report


def alpha_decay_constant(pi: LocalRepresentation, terms: int | None = None) -> CheckReport:
    """Measure max over i of |alpha_i| q^(i/2) for the L(s, pi) expansion coefficients; |alpha_0| must be 1."""
    terms = terms if terms is not None else 2 * pi.conductor + 6
    report = CheckReport("whittaker/alphadecay", params=_pi_params(pi))
    report.require(pi.l_coefficient(0) == 1, "alpha_0 is not 1")
    constant = max(abs(pi.l_coefficient(i).to_complex()) * pi.prime ** (i / 2) for i in range(terms))
    report.measured_constant = constant
    report.details["complementary"] = pi.is_complementary
    return report


def verify_supercuspidal_coefficients(pi: LocalRepresentation) -> CheckReport:
    """For supercuspidal pi the L-factors are trivial, so eps(1/2, nu pi) c_{t,l}(nu) = d_{t,l}(nu) everywhere."""
    engine = get_engine(pi)
    report = CheckReport("whittaker/cequalsd", params=_pi_params(pi))
    if not pi.is_supercuspidal:
        report.status = STATUS_INFO
        return report
    for l in range(pi.conductor + 1):
        for index, nu in enumerate(engine.characters):
            if nu.conductor > l:
                continue
            epsilon = engine.twist_data(index).epsilon_inverse.conjugate()
            for t in range(-2 * pi.conductor - 2, 3):
                report.require(
                    epsilon * engine.c_value(t, l, index) == engine.d_value(t, l, index),
                    "c and d differ",
                    t=t,
                    l=l,
                    nu=nu.label,
                )
    return report
