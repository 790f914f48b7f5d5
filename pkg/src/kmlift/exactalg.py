"""Exact scalar, polynomial, power-series and Dirichlet-series arithmetic.

Scalars live in Q or in Q(sqrt p) for a single fixed prime p; values from
different quadratic fields never mix.  Series are truncated explicitly --
every operation takes or propagates a precision, nothing is implicit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

Q = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def frac_str(x: Fraction) -> str:
    """Serialize a rational as "num/den" (den always positive)."""
    return f"{x.numerator}/{x.denominator}"


def parse_frac(s: str) -> Fraction:
    if "/" in s:
        num, den = s.split("/")
        return Fraction(int(num), int(den))
    return Fraction(int(s))


# ---------------------------------------------------------------------------
# Bernoulli numbers and completed zeta values


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """Bernoulli number B_n (B_1 = -1/2 convention)."""
    if n == 0:
        return ONE
    if n == 1:
        return Q(-1, 2)
    if n % 2 == 1:
        return ZERO
    # B_n = -1/(n+1) * sum_{k=0}^{n-1} C(n+1,k) B_k
    total = ZERO
    binom = 1
    for k in range(n):
        total += binom * bernoulli(k)
        binom = binom * (n + 1 - k) // (k + 1)
    return -total / (n + 1)


def zeta_neg(n: int) -> Fraction:
    """zeta(-n) for n >= 0, as an exact rational."""
    if n == 0:
        return Q(-1, 2)
    return -bernoulli(n + 1) / (n + 1)


def xi_tilde(s: int) -> Fraction:
    """Gamma_C(s) * zeta(s) at a positive even integer s = 2i.

    Gamma_C(2i) zeta(2i) = (-1)^(i+1) B_{2i} / (2i); the transcendental
    pieces cancel exactly, so the value is rational.
    """
    if s <= 0 or s % 2 != 0:
        raise ValueError("xi_tilde is evaluated at positive even integers only")
    i = s // 2
    return (-1) ** (i + 1) * bernoulli(2 * i) / (2 * i)


# ---------------------------------------------------------------------------
# Q(sqrt p) scalars


class PrimeMismatch(ValueError):
    pass


class IrrationalResidue(ValueError):
    """Raised when a value expected to be rational has a sqrt(p) component."""


@dataclass(frozen=True)
class ExtScalar:
    """An element a + b*sqrt(p) of Q(sqrt p)."""

    p: int
    a: Fraction
    b: Fraction

    @staticmethod
    def of(p: int, a=0, b=0) -> "ExtScalar":
        return ExtScalar(p, Q(a), Q(b))

    @staticmethod
    def rational(p: int, a) -> "ExtScalar":
        return ExtScalar(p, Q(a), ZERO)

    @staticmethod
    def sqrtp_power(p: int, k: int) -> "ExtScalar":
        """p^(k/2) as an ExtScalar."""
        if k % 2 == 0:
            return ExtScalar(p, Q(p) ** (k // 2), ZERO)
        return ExtScalar(p, ZERO, Q(p) ** ((k - 1) // 2))

    def _coerce(self, other) -> "ExtScalar":
        if isinstance(other, ExtScalar):
            if other.p != self.p:
                raise PrimeMismatch(f"cannot combine sqrt({self.p}) with sqrt({other.p})")
            return other
        return ExtScalar(self.p, Q(other), ZERO)

    def __add__(self, other):
        o = self._coerce(other)
        return ExtScalar(self.p, self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return ExtScalar(self.p, -self.a, -self.b)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        return ExtScalar(
            self.p,
            self.a * o.a + self.b * o.b * self.p,
            self.a * o.b + self.b * o.a,
        )

    __rmul__ = __mul__

    def inverse(self) -> "ExtScalar":
        # (a + b sqrt p)^(-1) = (a - b sqrt p) / (a^2 - p b^2)
        norm = self.a * self.a - self.p * self.b * self.b
        if norm == 0:
            raise ZeroDivisionError("ExtScalar has zero norm")
        return ExtScalar(self.p, self.a / norm, -self.b / norm)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_rational(self) -> bool:
        return self.b == 0

    def as_rational(self) -> Fraction:
        """The rational value; raises IrrationalResidue if b != 0."""
        if self.b != 0:
            raise IrrationalResidue(f"sqrt({self.p}) residue {self.b}")
        return self.a

    def to_json(self) -> dict:
        return {"p": self.p, "a": frac_str(self.a), "b": frac_str(self.b)}

    def __repr__(self):
        if self.b == 0:
            return f"{self.a}"
        return f"({self.a}+{self.b}*sqrt{self.p})"


def ext_mul(x: ExtScalar, y: ExtScalar) -> ExtScalar:
    return x * y


def assert_rational(x: ExtScalar) -> Fraction:
    return x.as_rational()


# ---------------------------------------------------------------------------
# Laurent polynomials in X over Q(sqrt p)


@dataclass(frozen=True)
class SymLaurent:
    """Finite-support Laurent polynomial in X with ExtScalar coefficients."""

    p: int
    coeffs: tuple  # tuple of (exponent, ExtScalar), sorted, nonzero

    @staticmethod
    def from_dict(p: int, d: dict) -> "SymLaurent":
        items = tuple(sorted((k, v) for k, v in d.items() if not v.is_zero()))
        return SymLaurent(p, items)

    @staticmethod
    def zero(p: int) -> "SymLaurent":
        return SymLaurent(p, ())

    @staticmethod
    def const(p: int, c) -> "SymLaurent":
        c = c if isinstance(c, ExtScalar) else ExtScalar.rational(p, c)
        if c.is_zero():
            return SymLaurent(p, ())
        return SymLaurent(p, ((0, c),))

    @staticmethod
    def monomial(p: int, exp: int, c) -> "SymLaurent":
        c = c if isinstance(c, ExtScalar) else ExtScalar.rational(p, c)
        if c.is_zero():
            return SymLaurent(p, ())
        return SymLaurent(p, ((exp, c),))

    def as_dict(self) -> dict:
        return dict(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "SymLaurent") -> "SymLaurent":
        if self.p != other.p:
            raise PrimeMismatch("Laurent polynomials over different Q(sqrt p)")
        d = dict(self.coeffs)
        for k, v in other.coeffs:
            d[k] = d.get(k, ExtScalar.rational(self.p, 0)) + v
        return SymLaurent.from_dict(self.p, d)

    def __neg__(self):
        return SymLaurent(self.p, tuple((k, -v) for k, v in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other) -> "SymLaurent":
        if not isinstance(other, SymLaurent):
            c = other if isinstance(other, ExtScalar) else ExtScalar.rational(self.p, other)
            return SymLaurent.from_dict(self.p, {k: v * c for k, v in self.coeffs})
        if self.p != other.p:
            raise PrimeMismatch("Laurent polynomials over different Q(sqrt p)")
        d: dict = {}
        zero = ExtScalar.rational(self.p, 0)
        for k1, v1 in self.coeffs:
            for k2, v2 in other.coeffs:
                k = k1 + k2
                d[k] = d.get(k, zero) + v1 * v2
        return SymLaurent.from_dict(self.p, d)

    __rmul__ = __mul__

    def coefficient(self, exp: int) -> ExtScalar:
        for k, v in self.coeffs:
            if k == exp:
                return v
        return ExtScalar.rational(self.p, 0)

    def is_symmetric(self) -> bool:
        """True iff invariant under X -> X^(-1)."""
        d = self.as_dict()
        return all(d.get(-k) == v for k, v in d.items())

    def eval_symmetric(self, u: ExtScalar) -> ExtScalar:
        """Evaluate at X = beta where beta + beta^(-1) = u.

        Requires the polynomial to be symmetric; X^j + X^(-j) is rewritten
        as the Chebyshev-like integer polynomial P_j(u) (P_0 = 2, P_1 = u,
        P_{j+1} = u P_j - P_{j-1}).
        """
        if not self.is_symmetric():
            raise ValueError("eval_symmetric requires a symmetric Laurent polynomial")
        d = self.as_dict()
        maxdeg = max((k for k in d), default=0)
        two = ExtScalar.rational(self.p, 2)
        pj_minus, pj = two, u  # P_0, P_1
        total = d.get(0, ExtScalar.rational(self.p, 0))
        for j in range(1, maxdeg + 1):
            if j in d:
                total = total + d[j] * pj
            pj_minus, pj = pj, u * pj - pj_minus
        return total

    def rational_dict(self) -> dict:
        """Coefficients as plain rationals; raises if any has a sqrt part."""
        return {k: v.as_rational() for k, v in self.coeffs}


# ---------------------------------------------------------------------------
# Truncated power series in t with SymLaurent coefficients


@dataclass(frozen=True)
class TruncSeries:
    """Series sum c_k t^k with c_k in Q(sqrt p)[X, X^(-1)], known for k < prec.

    Negative exponents are allowed (finite offset).  `coeffs` maps k to a
    SymLaurent; absent keys below prec are zero.
    """

    p: int
    prec: int
    coeffs: tuple  # tuple of (k, SymLaurent), sorted, nonzero, k < prec

    @staticmethod
    def from_dict(p: int, prec: int, d: dict) -> "TruncSeries":
        items = tuple(sorted((k, v) for k, v in d.items() if k < prec and not v.is_zero()))
        return TruncSeries(p, prec, items)

    @staticmethod
    def zero(p: int, prec: int) -> "TruncSeries":
        return TruncSeries(p, prec, ())

    @staticmethod
    def one(p: int, prec: int) -> "TruncSeries":
        return TruncSeries.from_dict(p, prec, {0: SymLaurent.const(p, 1)})

    @staticmethod
    def monomial(p: int, prec: int, k: int, c: SymLaurent) -> "TruncSeries":
        return TruncSeries.from_dict(p, prec, {k: c})

    def as_dict(self) -> dict:
        return dict(self.coeffs)

    def coefficient(self, k: int) -> SymLaurent:
        if k >= self.prec:
            raise ValueError(f"coefficient t^{k} beyond precision {self.prec}")
        for kk, v in self.coeffs:
            if kk == k:
                return v
        return SymLaurent.zero(self.p)

    def valuation(self) -> int:
        if not self.coeffs:
            return self.prec
        return self.coeffs[0][0]

    def truncate(self, prec: int) -> "TruncSeries":
        prec = min(prec, self.prec)
        return TruncSeries(self.p, prec, tuple((k, v) for k, v in self.coeffs if k < prec))

    def __add__(self, other: "TruncSeries") -> "TruncSeries":
        prec = min(self.prec, other.prec)
        d = {k: v for k, v in self.coeffs if k < prec}
        for k, v in other.coeffs:
            if k < prec:
                d[k] = d.get(k, SymLaurent.zero(self.p)) + v
        return TruncSeries.from_dict(self.p, prec, d)

    def __neg__(self):
        return TruncSeries(self.p, self.prec, tuple((k, -v) for k, v in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other) -> "TruncSeries":
        if not isinstance(other, TruncSeries):
            c = other if isinstance(other, SymLaurent) else SymLaurent.const(self.p, other)
            return TruncSeries(self.p, self.prec, tuple(
                (k, v * c) for k, v in self.coeffs if not (v * c).is_zero()))
        # Cauchy product; precision shrinks by the other factor's offset.
        v1, v2 = self.valuation(), other.valuation()
        prec = min(self.prec + v2, other.prec + v1)
        d: dict = {}
        for k1, c1 in self.coeffs:
            for k2, c2 in other.coeffs:
                k = k1 + k2
                if k < prec:
                    d[k] = d.get(k, SymLaurent.zero(self.p)) + c1 * c2
        return TruncSeries.from_dict(self.p, prec, d)

    __rmul__ = __mul__

    def shift(self, k: int) -> "TruncSeries":
        """Multiply by t^k."""
        return TruncSeries(self.p, self.prec + k, tuple((kk + k, v) for kk, v in self.coeffs))

    def inverse(self) -> "TruncSeries":
        """Multiplicative inverse, requires an invertible leading coefficient."""
        v = self.valuation()
        if v >= self.prec:
            raise ZeroDivisionError("cannot invert zero series")
        lead = self.coefficient(v)
        if len(lead.coeffs) != 1:
            raise ZeroDivisionError("leading coefficient must be a single monomial")
        (lexp, lc), = lead.coeffs
        lead_inv = SymLaurent.monomial(self.p, -lexp, lc.inverse())
        # reduce to constant-term-1 series: self = lead * t^v * (1 + g)
        rel_prec = self.prec - v
        g = {}
        for k, c in self.coeffs:
            if k > v:
                g[k - v] = c * lead_inv
        inv = {0: SymLaurent.const(self.p, 1)}
        for n in range(1, rel_prec):
            acc = SymLaurent.zero(self.p)
            for j, gj in g.items():
                if j <= n and (n - j) in inv:
                    acc = acc + gj * inv[n - j]
            if not acc.is_zero():
                inv[n] = -acc
        out = {k - v: c * lead_inv for k, c in inv.items()}
        return TruncSeries.from_dict(self.p, rel_prec - v, out)

    def eq_up_to(self, other: "TruncSeries", prec: int) -> bool:
        p1 = self.truncate(prec)
        p2 = other.truncate(prec)
        if p1.prec < prec or p2.prec < prec:
            raise ValueError("series not known to the requested precision")
        return p1.coeffs == p2.coeffs


def series_mul(f: TruncSeries, g: TruncSeries) -> TruncSeries:
    return f * g


def series_inverse(f: TruncSeries) -> TruncSeries:
    return f.inverse()


def geometric_inverse(p: int, prec: int, k: int, c: SymLaurent) -> TruncSeries:
    """(1 - c t^k)^(-1) = sum_j c^j t^(jk), truncated below prec."""
    if k <= 0:
        raise ValueError("geometric_inverse needs a positive t-power")
    d = {}
    term = SymLaurent.const(p, 1)
    j = 0
    while j * k < prec:
        d[j * k] = term
        term = term * c
        j += 1
    return TruncSeries.from_dict(p, prec, d)


# ---------------------------------------------------------------------------
# Dirichlet series coefficients


@dataclass(frozen=True)
class DirichletCoeffs:
    """Finite table N -> rational coefficient, with a symbolic prefactor.

    Two tables are only comparable/addable when their prefactor token lists
    agree; multiplication concatenates (sorts) the tokens.
    """

    nmax: int
    coeffs: tuple  # tuple of (N, Fraction), sorted, nonzero, N <= nmax
    prefactor: tuple = ()

    @staticmethod
    def from_dict(nmax: int, d: dict, prefactor=()) -> "DirichletCoeffs":
        items = tuple(sorted((n, Q(v)) for n, v in d.items() if n <= nmax and v != 0))
        for n, _ in items:
            if n < 1:
                raise ValueError("Dirichlet indices are positive integers")
        return DirichletCoeffs(nmax, items, tuple(sorted(prefactor)))

    @staticmethod
    def indicator(nmax: int, n: int, value=1) -> "DirichletCoeffs":
        return DirichletCoeffs.from_dict(nmax, {n: Q(value)})

    @staticmethod
    def zeta_ones(nmax: int) -> "DirichletCoeffs":
        return DirichletCoeffs.from_dict(nmax, {n: ONE for n in range(1, nmax + 1)})

    def as_dict(self) -> dict:
        return dict(self.coeffs)

    def coefficient(self, n: int) -> Fraction:
        if n > self.nmax:
            raise ValueError(f"index {n} beyond declared bound {self.nmax}")
        for nn, v in self.coeffs:
            if nn == n:
                return v
        return ZERO

    def __add__(self, other: "DirichletCoeffs") -> "DirichletCoeffs":
        if self.prefactor != other.prefactor:
            raise ValueError("prefactor tokens differ; series not comparable")
        nmax = min(self.nmax, other.nmax)
        d = {n: v for n, v in self.coeffs if n <= nmax}
        for n, v in other.coeffs:
            if n <= nmax:
                d[n] = d.get(n, ZERO) + v
        return DirichletCoeffs.from_dict(nmax, d, self.prefactor)

    def __neg__(self):
        return DirichletCoeffs(self.nmax, tuple((n, -v) for n, v in self.coeffs), self.prefactor)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "DirichletCoeffs":
        c = Q(c)
        if c == 0:
            return DirichletCoeffs(self.nmax, (), self.prefactor)
        return DirichletCoeffs(self.nmax, tuple((n, c * v) for n, v in self.coeffs), self.prefactor)


def dirichlet_mul(A: DirichletCoeffs, B: DirichletCoeffs) -> DirichletCoeffs:
    """Dirichlet convolution c(N) = sum_{d | N} a(d) b(N/d)."""
    nmax = min(A.nmax, B.nmax)
    d: dict = {}
    for n1, v1 in A.coeffs:
        if n1 > nmax:
            continue
        for n2, v2 in B.coeffs:
            n = n1 * n2
            if n > nmax:
                break
            d[n] = d.get(n, ZERO) + v1 * v2
    return DirichletCoeffs.from_dict(nmax, d, A.prefactor + B.prefactor)


def dirichlet_shift(A: DirichletCoeffs, a: int, double: bool = False) -> DirichletCoeffs:
    """Realize L(s - a, .) (coefficient N gets weight N^a) or s -> 2s reindexing.

    With double=True the coefficient at N moves to N^2 (the s -> 2s
    substitution); the weight shift is applied first.
    """
    d = {}
    for n, v in A.coeffs:
        w = v * Q(n) ** a
        if double:
            if n * n <= A.nmax:
                d[n * n] = w
        else:
            d[n] = w
    return DirichletCoeffs.from_dict(A.nmax, d, A.prefactor)


def dirichlet_rescale2(A: DirichletCoeffs, c: int) -> DirichletCoeffs:
    """Move the coefficient at N to 2^c * N."""
    if c < 0:
        raise ValueError("rescale exponent must be nonnegative")
    d = {}
    for n, v in A.coeffs:
        m = (2 ** c) * n
        if m <= A.nmax:
            d[m] = v
    return DirichletCoeffs.from_dict(A.nmax, d, A.prefactor)


def euler_expand(local_factor, p: int, nmax: int) -> DirichletCoeffs:
    """Expand a local factor sum_j c_j u^j (u = p^(-s)) into p-power indices.

    The factor may be a list of rationals or a TruncSeries whose coefficients
    are rational constants (no X, no sqrt(p) part).  The constant term must
    be 1.
    """
    if isinstance(local_factor, TruncSeries):
        coeffs = []
        for j in range(local_factor.prec):
            if j < 0:
                continue
            c = local_factor.coefficient(j)
            d = c.rational_dict()
            if any(k != 0 for k in d):
                raise ValueError("local factor carries X-powers; evaluate first")
            coeffs.append(d.get(0, ZERO))
        if local_factor.valuation() < 0:
            raise ValueError("local factor has negative t-support")
        local_factor = coeffs
    if not local_factor or Q(local_factor[0]) != 1:
        raise ValueError("local factor must have constant term 1")
    d = {}
    pe = 1
    for j, cj in enumerate(local_factor):
        if pe > nmax:
            break
        d[pe] = Q(cj)
        pe *= p
    return DirichletCoeffs.from_dict(nmax, d)
