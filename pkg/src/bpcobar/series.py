"""Poincare series: rational closed forms and basis-enumeration compare.

Series live in Z[[t]] represented by integer polynomial numerator and
denominator (constant term a unit), expanded on demand.  Degrees here are
the internal (topological) degrees, so all exponents are even.
"""

from __future__ import annotations


class RationalSeries:
    """numerator / denominator as sparse {exponent: int} polynomials."""

    def __init__(self, num=None, den=None):
        self.num = dict(num) if num is not None else {0: 1}
        self.den = dict(den) if den is not None else {0: 1}
        if self.den.get(0, 0) not in (1, -1):
            raise ValueError("denominator constant term must be a unit")
        self._cache = {}

    @classmethod
    def zero(cls):
        return cls(num={})

    @classmethod
    def monomial(cls, exponent, coeff=1):
        return cls(num={exponent: coeff})

    @classmethod
    def geometric(cls, exponent):
        """1/(1 - t^exponent)."""
        return cls(num={0: 1}, den={0: 1, exponent: -1})

    def __add__(self, other):
        return RationalSeries(
            _poly_add(_poly_mul(self.num, other.den), _poly_mul(other.num, self.den)),
            _poly_mul(self.den, other.den),
        )

    def __sub__(self, other):
        neg = {e: -c for e, c in other.num.items()}
        return self + RationalSeries(neg, dict(other.den))

    def __mul__(self, other):
        return RationalSeries(
            _poly_mul(self.num, other.num), _poly_mul(self.den, other.den)
        )

    def expand(self, D):
        """Coefficients 0..D as a list (power series expansion)."""
        got = self._cache.get(D)
        if got is not None:
            return got
        c0 = self.den.get(0)
        out = [0] * (D + 1)
        den = {e: c for e, c in self.den.items() if e != 0 and e <= D}
        for d in range(D + 1):
            acc = self.num.get(d, 0)
            for e, c in den.items():
                if e <= d:
                    acc -= c * out[d - e]
            out[d] = acc * c0  # c0 is +-1
        self._cache[D] = out
        return out

    def coefficient(self, d):
        return self.expand(d)[d]

    def __eq__(self, other):
        if not isinstance(other, RationalSeries):
            return NotImplemented
        return _poly_sub_is_zero(
            _poly_mul(self.num, other.den), _poly_mul(other.num, self.den)
        )

    def __repr__(self):
        return "(%s)/(%s)" % (_poly_str(self.num), _poly_str(self.den))


def _poly_mul(a, b):
    out = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            k = e1 + e2
            out[k] = out.get(k, 0) + c1 * c2
    return {e: c for e, c in out.items() if c}


def _poly_add(a, b):
    out = dict(a)
    for e, c in b.items():
        out[e] = out.get(e, 0) + c
        if not out[e]:
            del out[e]
    return out


def _poly_sub_is_zero(a, b):
    return _poly_add(a, {e: -c for e, c in b.items()}) == {}


def _poly_str(poly):
    if not poly:
        return "0"
    return " + ".join(
        ("%d" % c if e == 0 else ("t^%d" % e if c == 1 else "%d t^%d" % (c, e)))
        for e, c in sorted(poly.items())
    )


def compare(series, expansion, D):
    """First differing degree between a closed form and an enumeration."""
    coeffs = series.expand(D)
    for d in range(D + 1):
        want = coeffs[d]
        got = expansion.get(d, 0) if isinstance(expansion, dict) else expansion[d]
        if want != got:
            return {"equal": False, "degree": d, "closed": want, "enumerated": got}
    return {"equal": True, "degree": None}


# -- the catalogued closed forms ------------------------------------------------


def deg_v(p, n):
    return 2 * (p**n - 1)


def g_tower(p, m, top):
    """prod_{i=1..top} 1/(1-t^|v_i|)  (g_{m+1} has top = m+1)."""
    out = RationalSeries()
    for i in range(1, top + 1):
        out = out * RationalSeries.geometric(deg_v(p, i))
    return out


def g_BP_mod_I2(p, D):
    """g(BP_*/(p, v_1)) truncated to generators of degree <= D."""
    out = RationalSeries()
    i = 2
    while deg_v(p, i) <= D:
        out = out * RationalSeries.geometric(deg_v(p, i))
        i += 1
    return out


def g_B(p, m, D, j_rule="k+1"):
    """Closed form for the beta-family module.

    g = g_{m+1}(t) * sum_k x^(p^(k+1)) (1-y^(p^k)) / ((1-x^(p^(k+1))) (1-x2^(p^j)))
    with y = t^|v1|, x = t^|vhat_1|, x2 = t^|vhat_2|.  The unbound index j
    is interpreted per j_rule ("k" or "k+1"); the enumeration test pins the
    right one.
    """
    y, x, x2 = deg_v(p, 1), deg_v(p, m + 1), deg_v(p, m + 2)
    total = RationalSeries.zero()
    k = 0
    while x * p ** (k + 1) <= D:
        j = k if j_rule == "k" else k + 1
        term = RationalSeries(num={x * p ** (k + 1): 1}) * RationalSeries(
            num={0: 1, y * p**k: -1}
        )
        term = term * RationalSeries.geometric(x * p ** (k + 1))
        term = term * RationalSeries.geometric(x2 * p**j)
        total = total + term
        k += 1
    return g_tower(p, m, m + 1) * total


def g_E2(p, m, D):
    """g_{m+2}(t) ( x^p(1-y)/((1-x^p)(1-x2)) + x^(p^2)(1-y^(p+1))/((1-x^(p^2))(1-x3)) )

    with y = t^|v1|, x = t^|vhat_1|, x2 = t^|vhat_2|, x3 = t^|vhat_3|."""
    y, x = deg_v(p, 1), deg_v(p, m + 1)
    x2, x3 = deg_v(p, m + 2), deg_v(p, m + 3)
    t1 = (
        RationalSeries(num={x * p: 1})
        * RationalSeries(num={0: 1, y: -1})
        * RationalSeries.geometric(x * p)
        * RationalSeries.geometric(x2)
    )
    t2 = (
        RationalSeries(num={x * p * p: 1})
        * RationalSeries(num={0: 1, y * (p + 1): -1})
        * RationalSeries.geometric(x * p * p)
        * RationalSeries.geometric(x3)
    )
    return g_tower(p, m, m + 2) * (t1 + t2)


def g_G_mod_I(p, m):
    """g(G(m+1)/I) with I = (p, v_1, ..): the fiber polynomial part."""
    return RationalSeries.geometric(deg_v(p, m + 1))


def closed_form(name, p, m, D=600):
    """The catalogued closed forms by textual name."""
    if name == "g_tower":
        return g_tower(p, m, m + 1)
    if name == "B":
        return g_B(p, m, D)
    if name == "E2":
        return g_E2(p, m, D)
    if name == "BP/I2":
        return g_BP_mod_I2(p, D)
    if name == "G/I":
        return g_G_mod_I(p, m)
    raise KeyError("unknown series %r" % name)


def enumerate_series(dims):
    """Expansion dict from a {degree: dimension} enumeration."""
    return dict(dims)
