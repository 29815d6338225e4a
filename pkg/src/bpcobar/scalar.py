"""Exact p-local arithmetic: units times explicit p-powers, mod p^K.

A scalar is either zero or u * p^v with u invertible mod p^K and v an
integer (negative v encodes division by p^-v).  Arithmetic is exact as
long as additive cancellation never eats more than K digits; every value
constructed from an int or Fraction also carries an exact rational shadow
so it can be re-encoded at a higher precision on demand.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial


class PrecisionError(ArithmeticError):
    """Raised when a result cannot be certified at the working precision."""


_PPOW = {}


def ppow(p, K):
    got = _PPOW.get((p, K))
    if got is None:
        got = p**K
        _PPOW[(p, K)] = got
    return got


def pval(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of zero is undefined")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def frac_val(q: Fraction, p: int) -> int:
    if q == 0:
        raise ValueError("valuation of zero is undefined")
    return pval(q.numerator, p) - pval(q.denominator, p)


class PadicScalar:
    """u * p^v represented as (v, u mod p^K); immutable.

    rel counts the trusted relative digits of the unit (<= K); additive
    cancellation spends digits, and a value whose trusted window closes is
    zero at this precision.  Values built from ints or Fractions may carry
    an exact rational shadow for later re-encoding.
    """

    __slots__ = ("p", "K", "val", "unit", "exact", "rel")

    def __init__(self, p, K, val, unit, exact=None, rel=None):
        self.p = p
        self.K = K
        rel = K if rel is None else min(rel, K)
        if rel > 0 and unit % p:
            # fast path: unit prime to p, no normalization shift needed
            pK = ppow(p, K)
            self.val = val
            self.unit = unit % pK if (unit >= pK or unit < 0) else unit
            self.exact = exact
            self.rel = rel
            return
        u = unit % ppow(p, K)
        if u == 0 or rel <= 0:
            # zero, or indistinguishable from it in the trusted window; a
            # nonzero exact shadow survives for raise_precision
            self.val = None
            self.unit = 0
            self.rel = 0
            self.exact = exact if exact is not None else None
        else:
            shift = pval(u, p)
            if shift >= rel:
                self.val = None
                self.unit = 0
                self.rel = 0
                self.exact = exact if exact is not None else None
                return
            self.val = val + shift
            self.unit = (u // p**shift) % ppow(p, K)
            self.exact = exact
            self.rel = rel - shift

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, p, K):
        z = cls(p, K, 0, 0)
        z.exact = Fraction(0)
        return z

    @classmethod
    def one(cls, p, K):
        return cls(p, K, 0, 1, Fraction(1))

    @classmethod
    def from_int(cls, n, p, K):
        if n == 0:
            return cls.zero(p, K)
        v = pval(n, p)
        return cls(p, K, v, n // p**v, Fraction(n))

    @classmethod
    def from_fraction(cls, q, p, K):
        q = Fraction(q)
        if q == 0:
            return cls.zero(p, K)
        v = frac_val(q, p)
        num, den = q.numerator, q.denominator
        num //= p ** max(0, pval(num, p))
        den //= p ** max(0, pval(den, p))
        unit = num * pow(den, -1, ppow(p, K)) % ppow(p, K)
        return cls(p, K, v, unit, q)

    # -- predicates --------------------------------------------------------

    @property
    def is_zero(self):
        return self.val is None

    def is_unit(self):
        return self.val == 0

    def integral(self):
        """True when the value lies in Z_(p) (valuation >= 0)."""
        return self.is_zero or self.val >= 0

    # -- arithmetic --------------------------------------------------------

    def _check(self, other):
        if self.p != other.p or self.K != other.K:
            raise ValueError("mixed scalar contexts")

    def __add__(self, other):
        self._check(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        if self.exact is not None and other.exact is not None:
            # exact path keeps all K digits even through cancellation
            return PadicScalar.from_fraction(self.exact + other.exact, self.p, self.K)
        v = min(self.val, other.val)
        pK = ppow(self.p, self.K)
        u = (self.unit * self.p ** (self.val - v) + other.unit * self.p ** (other.val - v)) % pK
        abs_prec = min(self.val + self.rel, other.val + other.rel)
        return PadicScalar(self.p, self.K, v, u, rel=abs_prec - v)

    def __neg__(self):
        if self.is_zero:
            return self
        exact = -self.exact if self.exact is not None else None
        return PadicScalar(self.p, self.K, self.val, -self.unit, exact, rel=self.rel)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        self._check(other)
        if self.is_zero or other.is_zero:
            return PadicScalar.zero(self.p, self.K)
        exact = None
        if self.exact is not None and other.exact is not None:
            exact = self.exact * other.exact
        return PadicScalar(
            self.p,
            self.K,
            self.val + other.val,
            self.unit * other.unit,
            exact,
            rel=min(self.rel, other.rel),
        )

    def inverse(self):
        if self.is_zero:
            raise ZeroDivisionError("inverse of zero scalar")
        exact = 1 / self.exact if self.exact is not None else None
        return PadicScalar(
            self.p, self.K, -self.val, pow(self.unit, -1, ppow(self.p, self.K)), exact,
            rel=self.rel,
        )

    def __truediv__(self, other):
        return self * other.inverse()

    def scale_pow_p(self, k):
        """Multiply by p^k (k may be negative)."""
        if self.is_zero:
            return self
        exact = self.exact * Fraction(self.p) ** k if self.exact is not None else None
        return PadicScalar(self.p, self.K, self.val + k, self.unit, exact, rel=self.rel)

    def __eq__(self, other):
        if not isinstance(other, PadicScalar):
            return NotImplemented
        return (
            self.p == other.p
            and self.K == other.K
            and self.val == other.val
            and self.unit == other.unit
        )

    def __hash__(self):
        return hash((self.p, self.K, self.val, self.unit))

    def strip_shadow(self):
        """Drop the exact rational shadow (hot polynomial paths skip it)."""
        if self.exact is None:
            return self
        out = PadicScalar.__new__(PadicScalar)
        out.p, out.K, out.val, out.unit, out.exact = self.p, self.K, self.val, self.unit, None
        out.rel = self.rel
        return out

    # -- precision ---------------------------------------------------------

    def raise_precision(self, K2):
        """Re-encode at precision K2 >= K; needs the exact shadow for K2 > K."""
        if K2 < self.K:
            return self.truncate(K2)
        if K2 == self.K:
            return self
        if self.exact is not None:
            return PadicScalar.from_fraction(self.exact, self.p, K2)
        if self.is_zero:
            return PadicScalar.zero(self.p, K2)
        raise PrecisionError(
            "no exact shadow; re-run the producing computation at K=%d" % K2
        )

    def truncate(self, K2):
        if self.is_zero:
            return PadicScalar.zero(self.p, K2)
        return PadicScalar(
            self.p, K2, self.val, self.unit % ppow(self.p, K2), self.exact, rel=self.rel
        )

    # -- I/O -----------------------------------------------------------------

    def __repr__(self):
        if self.is_zero:
            return "0"
        if self.val == 0:
            return "%d" % self.unit
        return "%d*%d^%d" % (self.unit, self.p, self.val)

    @classmethod
    def parse(cls, text, p, K):
        """Parse the textual form "u*p^v" (or a bare integer)."""
        text = text.strip()
        if "*" in text:
            u_str, pw = text.split("*")
            base, exp = pw.split("^")
            if int(base) != p:
                raise ValueError("scalar %r is not %d-local" % (text, p))
            u, v = int(u_str), int(exp)
            return cls(p, K, v, u, Fraction(u) * Fraction(p) ** v)
        return cls.from_int(int(text), p, K)


# -- combinatorial scalars with exact valuations -----------------------------


def binom(n, k, p, K):
    """C(n, k) as a PadicScalar; k > n gives zero, never an error."""
    if k < 0 or n < 0:
        raise ValueError("binom expects nonnegative arguments")
    if k > n:
        return PadicScalar.zero(p, K)
    c = factorial(n) // (factorial(k) * factorial(n - k))
    return PadicScalar.from_int(c, p, K)


def iterate_coefficient(k, j, p, K):
    """(k*p^j)! / (p^j!)^k, the k-fold Quillen iteration coefficient.

    Always congruent to k! mod p^j, which is asserted here.
    """
    if k < 1 or j < 0:
        raise ValueError("need k >= 1 and j >= 0")
    c = factorial(k * p**j) // factorial(p**j) ** k
    if j > 0 and (c - factorial(k)) % p**j != 0:
        raise AssertionError("iteration coefficient violates k! congruence")
    scal = PadicScalar.from_int(c, p, K)
    if not scal.is_zero and scal.val >= K:
        raise PrecisionError("iteration coefficient exceeds precision window")
    return scal
