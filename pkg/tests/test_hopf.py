import pytest

from bpcobar.algebra import LAM, Ring, T, V, Poly, Tensor
from bpcobar.hopf import gamma_algebroid, g_algebroid, structure_maps


def ring31(**kw):
    kw.setdefault("D", 600)
    return Ring(3, 1, **kw)


def test_eta_r_on_integers_and_base():
    r = ring31()
    H = gamma_algebroid(r, 2)
    three = r.poly({(): 3})
    assert H.eta_r(three) == three
    assert H.eta_r(r.v(1)) == r.v(1)  # v_1 is inert for m >= 1


def test_eta_r_v1_at_m0():
    # at m=0 the first Hazewinkel generator moves: v1 + p t1
    r = Ring(3, 0, D=200, n_hat=3)
    H = gamma_algebroid(r, 1)
    assert H.eta_r(r.v(1)) == r.v(1) + r.t(1, coeff=3)


def test_eta_r_vhat1():
    r = ring31()
    H = gamma_algebroid(r, 2)
    assert H.eta_r(r.v(2)) == r.v(2) + r.t(2, coeff=3)


def test_eta_r_vhat2_leading_terms():
    # eta_R(vhat_2) = vhat_2 + v1 that_1^p + p that_2  mod higher I-filtration
    r = ring31()
    H = gamma_algebroid(r, 2)
    img = H.eta_r(r.v(3))
    z = img - r.v(3) - r.poly({r.mono({(V, 1): 1, (T, 2): 3}): 1}) - r.t(3, coeff=3)
    # remaining terms lie in (p^2, p*v, v*v) on their coefficients
    for mono, c in z.terms.items():
        vweight = sum(e for g, e in mono if g[0] == V)
        assert c.val + vweight >= 3, (mono, c)


def test_coproduct_t1_primitive():
    r = ring31()
    H = gamma_algebroid(r, 2)
    d = H.delta_t(2)
    expect = Tensor(r, 2)
    expect.add_term((r.mono({(T, 2): 1}), ()), r.one_scalar)
    expect.add_term(((), r.mono({(T, 2): 1})), r.one_scalar)
    assert d == expect


def test_coproduct_that2_has_v1_b10():
    r = ring31()
    H = gamma_algebroid(r, 2)
    d = H.delta_t(3)
    # coefficient of that_1 (x) that_1^2 must be -v1 * C(3,1)/3 = -v1
    c = d.terms.get((r.mono({(V, 1): 1, (T, 2): 1}), r.mono({(T, 2): 2})))
    assert c is not None and c.val == 0 and (c.unit + 1) % 3**8 == 0


def test_conjugate_that3():
    # c(that_3) = -that_3 + that_1^(1+p^2) for m=1; = -that_3 for m=2
    r = ring31()
    H = gamma_algebroid(r, 2)
    c3 = H.conj_t(4)
    expect = -r.t(4) + r.t(2, 1 + 9)
    assert c3 == expect
    r2 = Ring(3, 2, D=1500, n_hat=3)
    H2 = gamma_algebroid(r2, 3)
    assert H2.conj_t(5) == -r2.t(5)


def _weight(ring, monos, c):
    """I-adic weight: p-valuation plus total v-exponent across all factors."""
    return c.val + sum(e for mono in monos for g, e in mono if g[0] == "v")


@pytest.mark.parametrize("m", [1, 2])
def test_coproduct_that3_displayed_form(m):
    # Delta(thatbar_3) = thatbar_3 x 1 + 1 x thatbar_3 - v1 bhat_20 - v2 bhat_11
    #                    + that_1^(p^2) x that_1 (m=1 only),
    # exactly in filtration weights 0 and 1; the display elides I^2 terms.
    from math import comb

    p = 3
    r = Ring(p, m, D=2200 if m == 2 else 600, n_hat=3)
    H = gamma_algebroid(r, m + 1)
    conj3 = H.conj_t(m + 3)
    d = H.coproduct(conj3)
    expect = Tensor(r, 2)
    for mono, c in conj3.terms.items():
        expect.add_term((mono, ()), c)
        expect.add_term(((), mono), c)
    # - v2 bhat_{1,1}, with bhat_{1,1} = -(1/p) sum C(p^2,l) t1^l x t1^(p^2-l)
    for ell in range(1, p * p):
        coeff = r.scalar(comb(p * p, ell)).scale_pow_p(-1)
        expect.add_term(
            (r.mono({(V, 2): 1, (T, m + 1): ell}), r.mono({(T, m + 1): p * p - ell})), coeff
        )
    # - v1 bhat_{2,0}, with bhat_{2,0} = -(1/p) sum C(p,l) t2^l x t2^(p-l)
    for ell in range(1, p):
        coeff = r.scalar(comb(p, ell)).scale_pow_p(-1)
        expect.add_term(
            (r.mono({(V, 1): 1, (T, m + 2): ell}), r.mono({(T, m + 2): p - ell})), coeff
        )
    if m == 1:
        expect.add_term((r.mono({(T, 2): p * p}), r.mono({(T, 2): 1})), r.one_scalar)
    diff = H.push_left(d - expect)
    # the display elides I^2 terms and, for m=1, p-divisible pure-fiber
    # cross terms of Delta(that_1^(1+p^2)) that die against the ambient
    # p-denominators wherever the identity is applied
    bad = []
    for monos, c in diff.terms.items():
        if not r.trusted(c) or _weight(r, monos, c) >= 2:
            continue
        pure_fiber = all(g[0] == "t" for mono in monos for g, _ in mono)
        if pure_fiber and c.val >= 1:
            continue
        bad.append((monos, c))
    assert not bad, bad[:4]


@pytest.mark.parametrize(
    "p,m,k,D",
    [(3, 0, 1, 170), (3, 0, 2, 170), (3, 0, 3, 170), (3, 1, 2, 170), (3, 1, 3, 170)],
)
def test_axioms_gamma(p, m, k, D):
    n_hat = 4 if m == 0 else 3
    r = Ring(p, m, D=600, n_hat=n_hat)
    H = gamma_algebroid(r, k)
    report = H.axioms_check(D)
    bad = [row for row in report if not row["ok"]]
    assert not bad, bad


def test_axioms_g2():
    r = ring31()
    H = g_algebroid(r)
    report = H.axioms_check(60)
    bad = [row for row in report if not row["ok"]]
    assert not bad, bad
    assert H.eta_r(r.v(2)) == r.v(2) + r.t(2, coeff=3)


def test_axioms_fault_injection():
    # corrupting the coproduct table must be caught by coassociativity
    r = Ring(3, 1, D=600, n_hat=3, K=8)
    H = gamma_algebroid(r, 2)
    good = H.maps.delta_t[3]
    try:
        bad = Tensor(r, 2, dict(good.terms))
        bad.add_term((r.mono({(T, 2): 1}), r.mono({(T, 2): 2})), r.scalar(1))
        H.maps.delta_t[3] = bad
        report = H.axioms_check(60)
        failures = [row for row in report if not row["ok"] and row["axiom"] == "coassociativity"]
        assert failures and failures[0]["witness"]
    finally:
        H.maps.delta_t[3] = good


def test_quillen_extraction():
    r = ring31()
    H = gamma_algebroid(r, 2)
    # psi(vhat_1) = vhat_1 + p that_1: r_0 = vhat_1, r_1 = p
    assert H.quillen(0, r.v(2)) == r.v(2)
    assert H.quillen(1, r.v(2)) == r.poly({(): 3})
    assert H.quillen(2, r.v(2)).is_zero


def test_inverse_series_coaction():
    # eta_r of v2^(-1) at m=1: (v2 + p t2)^(-1), checked by multiplying back
    r = ring31()
    H = gamma_algebroid(r, 2)
    inv = H.eta_r(r.poly({r.mono({(V, 2): -1}): 1}))
    prod = inv * (r.v(2) + r.t(2, coeff=3))
    # equals 1 modulo terms beyond the trusted window
    for mono, c in (prod - r.one()).terms.items():
        assert c.val >= r.Ktrust, (mono, c)
