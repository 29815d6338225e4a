"""Finite-per-degree presentations of the chromatic comodules.

The ambient for most of them is the v1-divided first-filtration quotient:
its elements are fractions v^E/(p^a v1^b), zero-ness and membership are
lattice questions in lambda coordinates, solved per degree by exact
p-local column reduction.  On top of that sit the beta-family module B,
the extended range module E2, the theta representatives with their Quillen
operations, and the u-family modules U^2, U^0, U^1.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial

from .algebra import LAM, T, V, Poly, Ring, b_lift, beta_hat, beta_tilde, evaluate_named
from .algebra import gamma_hat, mono_mul, tables, theta_top, theta_p_over_k, w_element
from .hopf import g_algebroid, gamma_algebroid
from .linalg import Reduction, pval_int
from .scalar import PadicScalar


class FractionWorld:
    """Shared lattice machinery for a fixed (p, m) context."""

    def __init__(self, ring):
        self.ring = ring
        self.tab = tables(ring)
        self.p = ring.p
        self.m = ring.m
        self.G1 = gamma_algebroid(ring, ring.m + 1)
        self.G2 = gamma_algebroid(ring, ring.m + 2)
        self.G = g_algebroid(ring)
        self._lambda_cache = {}
        self._bp_cols = {}
        self._inv_cols = {}
        self.v1_window = ring.caps[1]

    # -- coordinates ---------------------------------------------------------

    def to_lambda(self, x):
        """Expand hatted v generators in lambda coordinates (v1, v_i<=m stay)."""
        mapping = {(V, n): self.tab.v_in_lambda[n] for n in self.tab.v_in_lambda}
        return x.substitute(mapping)

    def int_vector(self, x, shift):
        """{mono: int} for a lambda-coordinate Poly, scaled by p^shift."""
        out = {}
        pW = self.ring.p**self.ring.K
        for mono, c in x.terms.items():
            if c.is_zero:
                continue
            v = c.val + shift
            if v < 0:
                raise ValueError("p-denominator exceeds the frame shift")
            val = c.unit * self.p**v % pW
            if val:
                out[mono] = val
        return out

    # -- the BP[1/v1] lattice --------------------------------------------------

    def v_monomials(self, degree, v1_min):
        """All v-monomials of the given degree with v1-exponent >= v1_min."""
        gens = [(V, n) for n in range(self.m + self.ring.n_hat, 1, -1)]
        out = []
        d1 = self.ring.gen_degree((V, 1))
        for e1 in range(v1_min, degree // d1 + 1):
            rem = degree - e1 * d1
            if rem < 0:
                break
            partial = []

            def rec(idx, remaining, acc):
                if idx == len(gens):
                    if remaining == 0:
                        partial.append(tuple(acc))
                    return
                g = gens[idx]
                dg = self.ring.gen_degree(g)
                e = 0
                while e * dg <= remaining:
                    rec(idx + 1, remaining - e * dg, acc + ([(g, e)] if e else []))
                    e += 1

            rec(0, rem, [])
            for mono in partial:
                full = dict(mono)
                if e1:
                    full[(V, 1)] = e1
                out.append(self.ring.mono(full))
        return out

    def bp_lattice(self, degree):
        """Reduction spanning the v1-negative part of BP[1/v1] in this degree."""
        got = self._bp_cols.get(degree)
        if got is not None:
            return got
        red = Reduction(self.p, self.ring.K)
        cols = []
        for mono in self.v_monomials(degree, -self.v1_window):
            lam = self.to_lambda(self.ring.poly({mono: 1}))
            vec = {}
            for mo, c in lam.terms.items():
                if dict(mo).get((V, 1), 0) >= 0:
                    continue  # M0 part is free
                if c.is_zero:
                    continue
                if c.val < 0:
                    raise AssertionError("BP monomial with fractional expansion")
                vec[mo] = c.unit * self.p**c.val % self.p**self.ring.K
            if vec:
                cols.append(vec)
        for c in cols:
            red.add_column(c)
        red.reduce()
        self._bp_cols[degree] = red
        return red

    # -- predicates -------------------------------------------------------------

    def job_trust(self, degree):
        """Trust window for lattice work in this degree: coefficients of
        vhat_1-power multiples carry valuation about degree/|vhat_1|."""
        extra = degree // self.ring.gen_degree((V, self.m + 1)) + 6
        return min(self.ring.K - 4, self.ring.Ktrust + extra)

    def n2_reduce(self, x, trust=None):
        """The v1-negative lambda-coordinate part of x (the N^2 shadow)."""
        lam = self.to_lambda(x)
        cut = trust if trust is not None else self.ring.K - 4
        out = {}
        for mono, c in lam.terms.items():
            if dict(mono).get((V, 1), 0) < 0 and not c.is_zero and c.val < cut:
                out[mono] = c
        return Poly(self.ring, out)

    def n2_is_zero(self, x):
        """Zero in the v1-divided quotient: x in M^0 + BP[1/v1]."""
        shadow = self.n2_reduce(x)
        if not shadow.terms:
            return True
        degree = self.ring.mono_degree(next(iter(shadow.terms)))
        trust = self.job_trust(degree)
        if any(c.val < 0 for c in shadow.terms.values()):
            return False  # BP[1/v1] is p-integral in lambda coordinates
        red = self.bp_lattice(degree)
        target = self.int_vector(shadow, 0)
        return red.in_span(target, trust)

    def n2_member(self, x):
        """Membership in the image of the weak-injective quotient: the
        v1-negative part must be p-integral in lambda coordinates."""
        shadow = self.n2_reduce(x)
        return all(c.val >= 0 for c in shadow.terms.values())

    def n2_equal(self, x, y):
        return self.n2_is_zero(x - y)

    # -- Quillen operations -------------------------------------------------------

    def quillen(self, n, x):
        """r_n over the one-fiber quotient: t-hat-1 coefficient of psi."""
        return self.G1.quillen(n, x)

    def quillen_all(self, x, n_max):
        """{n: r_n(x)} for 1 <= n <= n_max, one coaction evaluation."""
        psi = self.G1.eta_r(x)
        out = {}
        t1 = (T, self.m + 1)
        for mono, c in psi.terms.items():
            texp = 0
            keep = []
            ok = True
            for g, e in mono:
                if g == t1:
                    texp = e
                elif g[0] == T:
                    ok = False
                    break
                else:
                    keep.append((g, e))
            if ok and 0 < texp <= n_max:
                out.setdefault(texp, {})
                key = tuple(keep)
                acc = out[texp].get(key)
                s = c if acc is None else acc + c
                out[texp][key] = s
        return {n: Poly(self.ring, terms) for n, terms in out.items()}


_WORLDS = {}


def fraction_world(ring):
    key = (ring.p, ring.m, ring.Ktrust, ring.K, ring.n_hat, ring.D)
    world = _WORLDS.get(key)
    if world is None:
        world = FractionWorld(ring)
        _WORLDS[key] = world
    return world


class ComodulePresentation:
    """Finite basis per degree with recorded fraction representatives.

    basis: {degree: [(label, Poly)]}; coaction queries go through the
    fraction world.  The torsion tag records the annihilator ideal that
    tests assert (I1 = (p), I2 = (p, v1), ...).
    """

    def __init__(self, name, world, torsion_tag=None):
        self.name = name
        self.world = world
        self.basis = {}
        self.torsion_tag = torsion_tag

    def degrees(self):
        return sorted(self.basis)

    def dims(self):
        return {d: len(els) for d, els in self.basis.items() if els}

    def dump(self):
        lines = []
        for d in self.degrees():
            for label, frac in self.basis[d]:
                lines.append("%d\t%s\t%s" % (d, label, repr(frac)))
        return "\n".join(lines)


def build_B(ring, Dmax):
    """The beta-prime family module as a per-degree basis in the ambient.

    Spanned by v-monomial multiples of beta'_{i/i}; per degree the span is
    reduced against the zero lattice of the ambient, keeping independent
    spanning elements as the basis.
    """
    world = fraction_world(ring)
    p, m = ring.p, ring.m
    dv1 = ring.gen_degree((V, 1))
    out = ComodulePresentation("B", world, torsion_tag="I1")

    gens = []
    i = 1
    while True:
        deg = i * (ring.gen_degree((V, m + 2)) - dv1)
        if deg > Dmax:
            break
        gens.append((i, beta_hat(ring, i, i, 1, primed=True), deg))
        i += 1

    # A(m+1)-monomials: v_1..v_m, vhat_1
    amp1 = [(V, n) for n in range(1, m + 2)]

    span_by_degree = {}
    for i, frac, deg0 in gens:
        stack = [((), deg0)]
        idx = 0
        exps = {}

        def rec(gi, deg):
            if deg > Dmax:
                return
            if gi == len(amp1):
                label = "beta'_%d/%d" % (i, i) + (
                    "*" + "*".join("%s%d^%d" % (g[0], g[1], e) for g, e in exps.items() if e)
                    if any(exps.values())
                    else ""
                )
                mono = ring.mono({g: e for g, e in exps.items() if e})
                span_by_degree.setdefault(deg, []).append(
                    (label, ring.poly({mono: 1}) * frac)
                )
                return
            g = amp1[gi]
            dg = ring.gen_degree(g)
            e = 0
            while deg + e * dg <= Dmax:
                exps[g] = e
                rec(gi + 1, deg + e * dg)
                e += 1
            exps[g] = 0

        rec(0, deg0)

    for deg in sorted(span_by_degree):
        shadows = [(label, frac, world.n2_reduce(frac)) for label, frac in span_by_degree[deg]]
        shadows = [(l, f, s) for l, f, s in shadows if s.terms]
        if not shadows:
            continue
        shift = max(0, -min(c.val for _, _, s in shadows for c in s.terms.values()))
        trust = world.job_trust(deg)
        red = Reduction(world.p, ring.K)
        for col in world.bp_lattice(deg).cols:
            if col:
                red.add_column({r: v * world.p**shift for r, v in col.items()})
        red.reduce()
        kept = []
        for label, frac, shadow in shadows:
            # cyclic order of the class: first p-power landing in the span
            # of the lattice and the previously kept elements
            order = None
            power = shadow
            for k in range(1, ring.Ktrust):
                power = power.scale(world.p)
                if red.in_span(world.int_vector(power, shift), shift + trust):
                    order = k
                    break
            piv = red.insert(world.int_vector(shadow, shift))
            if piv is not None and piv < shift + trust:
                kept.append((label, frac, order or 1))
        if kept:
            out.basis[deg] = kept
    return out


def l_basis(presentation, j, n_cap=None):
    """L_j = intersection of ker r_n for n >= p^j, per degree.

    Returns a ComodulePresentation whose basis elements are combinations
    of the input basis (labels record the combination).
    """
    world = presentation.world
    ring = world.ring
    p = ring.p
    dt1 = ring.gen_degree((T, ring.m + 1))
    out = ComodulePresentation("L%d(%s)" % (j, presentation.name), world,
                               presentation.torsion_tag)
    for deg, els in sorted(presentation.basis.items()):
        if not els:
            continue
        n_lo = p**j
        n_hi = deg // dt1 if n_cap is None else min(n_cap, deg // dt1)
        red = Reduction(world.p, ring.K, track_combo=True)
        nbasis = len(els)
        shift = ring.caps[0]
        cols = []
        for entry in els:
            label, frac = entry[0], entry[1]
            ops = world.quillen_all(frac, n_hi)
            vec = {}
            for n in range(n_lo, n_hi + 1):
                rn = ops.get(n)
                if rn is None:
                    continue
                shadow = world.n2_reduce(rn)
                for mono, c in shadow.terms.items():
                    v = c.val + shift
                    if v < 0:
                        raise AssertionError("frame shift too small")
                    vec[(n, mono)] = c.unit * p**v % p**ring.K
            cols.append(vec)
        # lattice slack: BP[1/v1] in each target degree
        slack = []
        for n in range(n_lo, n_hi + 1):
            tdeg = deg - n * dt1
            if tdeg < 0:
                continue
            for col in world.bp_lattice(tdeg).cols:
                if col:
                    slack.append({(n, r): v * p**shift % p**ring.K for r, v in col.items()})
        for vec in cols:
            red.add_column(vec)
        for vec in slack:
            red.add_column(vec)
        red.reduce()
        trust = min(ring.K - 2, shift + world.job_trust(deg))
        kernel = red.kernel(trust)
        seen = Reduction(world.p, ring.Ktrust, track_combo=False)
        found = []
        for combo in kernel:
            vec = {k: c for k, c in combo.items() if k < nbasis}
            if not vec:
                continue
            if any(pval_int(c, p, ring.Ktrust) == 0 for c in vec.values()):
                piv = seen.insert(vec)
                if piv is not None and piv < ring.Ktrust:
                    label = " + ".join(
                        "%s*%d" % (els[k][0], c) if c != 1 else els[k][0]
                        for k, c in sorted(vec.items())
                    )
                    frac = ring.zero()
                    for k, c in vec.items():
                        frac = frac + els[k][1].scale(c)
                    found.append((label, frac, 1))
        if found:
            out.basis[deg] = found
    return out


# -- theta representatives and the u-family ------------------------------------


class ThetaFamily:
    """The invariant fraction representatives of the u-classes.

    theta_{p,j} comes from its displayed definition; theta_{i,j} for i < p
    by the downward induction  theta_{i,j} = v2^(-1) r_{p^2}(theta_{i+1,j});
    theta_{p/k} from its displayed definition.  All are recorded once per
    context and reused.
    """

    def __init__(self, world, j_max):
        self.world = world
        ring = world.ring
        self.ring = ring
        p, m = ring.p, ring.m
        self.theta = {}
        self.j_max = j_max
        for j in range(0, j_max + 1):
            self.theta[(p, j)] = theta_top(ring, j)
            for i in range(p - 1, 0, -1):
                img = world.quillen(p * p, self.theta[(i + 1, j)])
                self.theta[(i, j)] = _divide_v2(ring, img)
        self.theta_pk = {k: theta_p_over_k(ring, k) for k in range(1, p + 1)}

    def get(self, i, j):
        return self.theta[(i, j)]


def _divide_v2(ring, poly):
    out = {}
    for mono, c in poly.terms.items():
        d = dict(mono)
        d[(V, 2)] = d.get((V, 2), 0) - 1
        out[ring.mono(d)] = c
    return Poly(ring, out)


_THETAS = {}


def theta_family(world, j_max):
    key = (world.ring.p, world.ring.m, world.ring.K, world.ring.D, j_max)
    fam = _THETAS.get(key)
    if fam is None or fam.j_max < j_max:
        fam = ThetaFamily(world, j_max)
        _THETAS[key] = fam
    return fam


def invariant_over(world, algebroid, x, modulus_cols=None):
    """Is x invariant (psi(x) = 1 tensor x) in the N^2 ambient?

    The coaction components on every positive fiber monomial must vanish;
    optional extra lattice columns (e.g. v2^i multiples) relax the test.
    """
    psi = algebroid.eta_r(x)
    comps = {}
    for mono, c in psi.terms.items():
        tpart = tuple((g, e) for g, e in mono if g[0] == T)
        vpart = tuple((g, e) for g, e in mono if g[0] != T)
        if not tpart:
            continue
        comps.setdefault(tpart, {})[vpart] = c
    for tpart, terms in comps.items():
        frac = Poly(world.ring, dict(terms))
        if modulus_cols is None:
            if not world.n2_is_zero(frac):
                return False, tpart, frac
        else:
            if not world.zero_mod_lattice(frac, modulus_cols):
                return False, tpart, frac
    return True, None, None


# -- ker delta^1 and u-class coordinates ----------------------------------------


def _product_monomials(parts, degree):
    """Exponent tuples over parts=[(key, deg)], total degree exactly given."""
    out = []

    def rec(idx, remaining, acc):
        if idx == len(parts):
            if remaining == 0:
                out.append(tuple(acc))
            return
        key, dg = parts[idx]
        e = 0
        while e * dg <= remaining:
            rec(idx + 1, remaining - e * dg, acc + [e])
            e += 1

    rec(0, degree, [])
    return out


class KerDelta1:
    """Lattice of liftable-to-invariant elements: products of the
    invariant generators lambda-hat_1, w, b_i over A(m+1), v1-Laurent."""

    def __init__(self, world, Dmax):
        self.world = world
        ring = world.ring
        self.Dmax = Dmax
        p, m = ring.p, ring.m
        self.parts = [("l1", ring.gen_degree((LAM, m + 1)))]
        self.part_polys = {"l1": ring.lamhat(1)}
        w = w_element(ring)
        self.parts.append(("w", 48 if (p, m) == (3, 1) else w.degree()))
        self.part_polys["w"] = w
        i = 1
        while 2 * (p ** (m + 2) - 1) * i <= Dmax + 60:
            key = "b%d" % i
            self.parts.append((key, ring.gen_degree((V, m + 2)) * i))
            self.part_polys[key] = b_lift(ring, i)
            i += 1
        for n in range(2, m + 2):
            key = "v%d" % n
            self.parts.append((key, ring.gen_degree((V, n))))
            self.part_polys[key] = ring.v(n)
        self._cols = {}

    def columns(self, degree):
        """Shadow vectors of the generators in the given degree."""
        got = self._cols.get(degree)
        if got is not None:
            return got
        ring = self.world.ring
        d1 = ring.gen_degree((V, 1))
        cols = []
        for k in range(1, self.world.v1_window + 1):
            target = degree + k * d1
            if target < 0:
                continue
            for exps in _product_monomials(self.parts, target):
                poly = ring.fraction({}, v1_exp=k)
                for (key, _), e in zip(self.parts, exps):
                    if e:
                        poly = poly * (self.part_polys[key] ** e)
                shadow = self.world.n2_reduce(poly)
                if shadow.terms:
                    cols.append(shadow)
        self._cols[degree] = cols
        return cols


def zero_mod_lattice(world, frac, extra_cols):
    """Is frac zero modulo BP[1/v1] + M^0 + the extra column span?"""
    shadow = world.n2_reduce(frac)
    if not shadow.terms:
        return True
    degree = world.ring.mono_degree(next(iter(shadow.terms)))
    trust = world.job_trust(degree)
    shadows = [shadow] + [world.n2_reduce(c) if isinstance(c, Poly) and False else c for c in extra_cols]
    all_vals = [c.val for s in [shadow] + list(extra_cols) for c in s.terms.values() if not c.is_zero]
    shift = max(0, -min(all_vals)) if all_vals else 0
    red = Reduction(world.p, world.ring.K)
    for col in world.bp_lattice(degree).cols:
        if col:
            red.add_column({r: v * world.p**shift for r, v in col.items()})
    for s in extra_cols:
        vec = world.int_vector(s, shift)
        if vec:
            red.add_column(vec)
    red.reduce()
    return red.in_span(world.int_vector(shadow, shift), shift + trust)


FractionWorld.zero_mod_lattice = zero_mod_lattice


class U2Classifier:
    """Coordinates of invariant fractions in the u-basis of the second
    Ext column, modulo ker delta^1."""

    def __init__(self, world, j_max=8, Dmax=560):
        self.world = world
        ring = world.ring
        self.p, self.m = ring.p, ring.m
        self.fam = theta_family(world, j_max)
        self.ker = KerDelta1(world, Dmax)
        self.Dmax = Dmax

    def u_degree(self, i, j):
        ring = self.world.ring
        return (
            i * ring.gen_degree((V, self.m + 3))
            + j * ring.gen_degree((V, self.m + 2))
            - ring.gen_degree((V, 1))
        )

    def upk_degree(self, k):
        ring = self.world.ring
        return self.p * ring.gen_degree((V, self.m + 3)) - k * ring.gen_degree((V, 1))

    def candidates(self, degree):
        """(label, fraction) for v2^a-multiples of the theta family in degree."""
        ring = self.world.ring
        d2 = ring.gen_degree((V, 2))
        out = []
        for (i, j), th in self.fam.theta.items():
            base = self.u_degree(i, j)
            a, rem = divmod(degree - base, d2)
            if rem == 0 and a >= 0:
                out.append((("u", i, j, a), ring.v(2, a) * th if a else th))
        for k, th in self.fam.theta_pk.items():
            base = self.upk_degree(k)
            a, rem = divmod(degree - base, d2)
            if rem == 0 and a >= 0:
                out.append((("u_p/k", k, 0, a), ring.v(2, a) * th if a else th))
        return out

    def classify(self, frac):
        """U^2 coordinates of an invariant fraction, or None when the
        residual is not expressible (raise the window in that case)."""
        world = self.world
        shadow = world.n2_reduce(frac)
        if not shadow.terms:
            return {}
        degree = world.ring.mono_degree(next(iter(shadow.terms)))
        cands = self.candidates(degree)
        ker_cols = self.ker.columns(degree)
        shadows = [world.n2_reduce(f) for _, f in cands]
        vals = [
            c.val
            for s in [shadow] + shadows + ker_cols
            for c in s.terms.values()
            if not c.is_zero
        ]
        shift = max(0, -min(vals)) if vals else 0
        trust = world.job_trust(degree)
        red = Reduction(world.p, world.ring.K, track_combo=True)
        base_cols = []
        for col in world.bp_lattice(degree).cols:
            if col:
                base_cols.append({r: v * world.p**shift for r, v in col.items()})
        cand_idx = {}
        cols = []
        for (label, _), s in zip(cands, shadows):
            cand_idx[len(cols)] = label
            cols.append(world.int_vector(s, shift))
        for s in ker_cols:
            cols.append(world.int_vector(s, shift))
        for c in cols + base_cols:
            red.add_column(c)
        red.reduce()
        residual, coeffs = red.reduce_vector(world.int_vector(shadow, shift))
        if any(pval_int(x, world.p, world.ring.K) < shift + trust for x in residual.values()):
            return None
        out = {}
        for (j, sh), c in coeffs.items():
            if j in cand_idx and sh == 0:
                label = cand_idx[j]
                out[label] = (out.get(label, 0) + c) % world.p**world.ring.K
        return {k: v for k, v in out.items() if v % self.p}


# -- the extended-range module ---------------------------------------------------


def build_E2(ring, Dmax=None):
    """The extended module: beta_{i/j,k} with i+1 >= j+k, the corrected
    top family, and the replacement element; spans over A(m+2)."""
    world = fraction_world(ring)
    p, m = ring.p, ring.m
    if Dmax is None:
        Dmax = p * ring.gen_degree((V, m + 2))
    out = ComodulePresentation("E2", world, torsion_tag=None)
    gens = []
    dv2, dv1 = ring.gen_degree((V, m + 2)), ring.gen_degree((V, 1))
    i = 1
    while i * dv2 - dv1 <= Dmax + p * dv1:
        for j in range(1, i + 2):
            for k in range(1, i + 2 - j):
                deg = i * dv2 - j * dv1
                if deg <= Dmax:
                    gens.append(("beta_%d/%d,%d" % (i, j, k), beta_hat(ring, i, j, k)))
        i += 1
    for j in range(2, p + 1):
        deg = p * dv2 - j * dv1
        if deg <= Dmax:
            gens.append(("beta_%d/%d,%d" % (p, j, p + 2 - j), beta_hat(ring, p, j, p + 2 - j)))
    bt = beta_tilde(ring)
    if bt.degree() <= Dmax:
        gens.append(("beta~_%d/1,%d" % (p, p + 1), bt))

    # A(m+2)-monomial multiples
    amp2 = [(V, n) for n in range(1, m + 3)]
    span_by_degree = {}
    for label, frac in gens:
        deg0 = frac.degree()

        def rec(gi, deg, exps):
            if deg > Dmax:
                return
            if gi == len(amp2):
                mono = ring.mono({g: e for g, e in exps.items() if e})
                span_by_degree.setdefault(deg, []).append(
                    (label, ring.poly({mono: 1}) * frac)
                )
                return
            g = amp2[gi]
            dg = ring.gen_degree(g)
            e = 0
            while deg + e * dg <= Dmax:
                exps[g] = e
                rec(gi + 1, deg + e * dg, exps)
                e += 1
            exps[g] = 0

        rec(0, deg0, {})

    for deg in sorted(span_by_degree):
        shadows = [(lb, f, world.n2_reduce(f)) for lb, f in span_by_degree[deg]]
        shadows = [(l, f, s) for l, f, s in shadows if s.terms]
        if not shadows:
            continue
        shift = max(0, -min(c.val for _, _, s in shadows for c in s.terms.values()))
        trust = world.job_trust(deg)
        red = Reduction(world.p, ring.K)
        for col in world.bp_lattice(deg).cols:
            if col:
                red.add_column({r: v * world.p**shift for r, v in col.items()})
        red.reduce()
        kept = []
        for label, frac, shadow in shadows:
            order = None
            power = shadow
            for k in range(1, ring.Ktrust):
                power = power.scale(world.p)
                if red.in_span(world.int_vector(power, shift), shift + trust):
                    order = k
                    break
            piv = red.insert(world.int_vector(shadow, shift))
            if piv is not None and piv < shift + trust:
                kept.append((label, frac, order or 1))
        if kept:
            out.basis[deg] = kept
    return out


def filtration_weight(ring, frac):
    """min over terms of (hat-v exponents) - (p-denominator) - (v1-denominator)."""
    m = ring.m
    best = None
    for mono, c in frac.terms.items():
        hat = sum(e for (fam, n), e in mono if fam == V and n > m)
        v1 = dict(mono).get((V, 1), 0)
        w = hat + min(v1, 0) + min(c.val, 0)
        if best is None or w < best:
            best = w
    return best


# -- formal u-family presentations ------------------------------------------------


class UPresentation:
    """U-level modules on formal symbols with machine-computed coaction.

    level "U2": A(m+1)/I2-span of u_{i,j} (0<i<=p) and u_{p/k} (2<=k<=p);
    level "U0": adjoins v2^-i u_{i,j} and v2^-p u_{p/k};
    level "U1": the quotient U0/U2.
    Quillen action matrices come from the theta representatives via the
    classifier and are v2-shift equivariant.
    """

    def __init__(self, ring, level, Dmax, j_max=8):
        self.ring = ring
        self.level = level
        self.world = fraction_world(ring)
        self.cls = U2Classifier(self.world, j_max=j_max, Dmax=Dmax + 80)
        self.Dmax = Dmax
        p, m = ring.p, ring.m
        self.p = p
        d2 = ring.gen_degree((V, 2))
        self.symbols = []  # (kind, i_or_k, j)
        for j in range(0, j_max + 1):
            for i in range(1, p + 1):
                if self.cls.u_degree(i, j) <= Dmax + p * d2:
                    self.symbols.append(("u", i, j))
        for k in range(2, p + 1):
            self.symbols.append(("u_p/k", k, 0))
        self._action = {}

    def a_min(self, sym):
        kind, ik, j = sym
        if self.level == "U2":
            return 0
        low = -ik if kind == "u" else -self.p
        if self.level == "U0":
            return low
        return low  # U1 masks the a >= 0 part in basis()

    def sym_degree(self, sym):
        kind, ik, j = sym
        return self.cls.u_degree(ik, j) if kind == "u" else self.cls.upk_degree(ik)

    def basis(self, degree):
        """[(sym, a)] with degree(sym) + a|v2| = degree and a admissible."""
        d2 = self.ring.gen_degree((V, 2))
        out = []
        for sym in self.symbols:
            a, rem = divmod(degree - self.sym_degree(sym), d2)
            if rem:
                continue
            if self.level == "U2" and a >= 0:
                out.append((sym, a))
            elif self.level == "U0" and a >= self.a_min(sym):
                out.append((sym, a))
            elif self.level == "U1" and self.a_min(sym) <= a < 0:
                out.append((sym, a))
        return out

    def quillen_matrix(self, n):
        """r_n on base symbols as {sym: {sym': unit-coeff mod p}}."""
        got = self._action.get(n)
        if got is not None:
            return got
        out = {}
        for sym in self.symbols:
            kind, ik, j = sym
            theta = (
                self.cls.fam.theta[(ik, j)] if kind == "u" else self.cls.fam.theta_pk[ik]
            )
            img = self.world.quillen(n, theta)
            if img.structural_zero:
                out[sym] = {}
                continue
            coords = self.cls.classify(img)
            if coords is None:
                raise ArithmeticError("u-class window too small for r_%d" % n)
            row = {}
            for (lkind, lik, lj, a), c in coords.items():
                row[((lkind, lik, lj), a)] = c
            out[sym] = row
        self._action[n] = out
        return out

    def l_basis_dims(self, j, degrees):
        """{degree: dim L_j} over the prime field (the modules are I2/I3-torsion)."""
        p = self.p
        dt1 = self.ring.gen_degree((T, self.ring.m + 1))
        dims = {}
        for deg in degrees:
            els = self.basis(deg)
            if not els:
                continue
            n_lo = p**j
            n_hi = min(deg // dt1, 2 * p * p)
            red = Reduction(p, 4, track_combo=True)
            for sym, a in els:
                vec = {}
                for n in range(n_lo, n_hi + 1):
                    row = self.quillen_matrix(n).get(sym, {})
                    for (sym2, da), c in row.items():
                        a2 = a + da
                        if self._admissible(sym2, a2):
                            vec[(n, sym2, a2)] = c % p
                red.add_column({k: v for k, v in vec.items() if v})
            red.reduce()
            kernel = red.kernel(1)
            dims[deg] = len(kernel)
        return dims

    def _admissible(self, sym, a):
        if self.level == "U2":
            return a >= 0
        if self.level == "U0":
            return a >= self.a_min(sym)
        return self.a_min(sym) <= a < 0

    def dims(self, degrees):
        return {d: len(self.basis(d)) for d in degrees}


def build_T(ring, i):
    """The free module on the first fiber generator's powers below p^i,
    with the coproduct coaction; basis given per t-hat-1 exponent."""
    H = gamma_algebroid(ring, ring.m + 1)
    p = ring.p
    basis = [ring.mono({(T, ring.m + 1): e}) if e else () for e in range(p**i)]
    coaction = {}
    for e in range(p**i):
        d = H._coproduct_mono(basis[e])
        coaction[e] = d
    return {"basis": basis, "coaction": coaction, "algebroid": H}


def tensor_T_series(g_M, p, m, j):
    """g(Tbar^(j) tensor M) = g(M) (1-x^(p^j))/(1-x), x = t^|vhat_1|."""
    from .series import RationalSeries, deg_v

    x = deg_v(p, m + 1)
    num = RationalSeries(num={0: 1, x * p**j: -1})
    return g_M * num * RationalSeries.geometric(x)
