"""Exact p-local linear algebra on sparse integer columns mod p^W.

Everything reduces to one primitive: column reduction with pivoting on a
minimal-valuation entry.  Over the local ring Z_p that single strategy
gives Smith normal form data (ranks and elementary divisors), membership
tests, and kernels; entries are ints mod p^W with results trusted below
p^Ktrust.
"""

from __future__ import annotations


def pval_int(x, p, cap):
    if x == 0:
        return cap
    v = 0
    while x % p == 0 and v < cap:
        x //= p
        v += 1
    return v


class Reduction:
    """Column echelon reduction of sparse columns over Z/p^W."""

    def __init__(self, p, W, track_combo=False):
        self.p = p
        self.W = W
        self.pW = p**W
        self.cols = []
        self.combo = [] if track_combo else None
        self.pivots = []  # (row, col_index, valuation) in elimination order
        self.pivot_rows = {}

    def add_column(self, col, tag=None):
        c = {r: v % self.pW for r, v in col.items() if v % self.pW}
        self.cols.append(c)
        if self.combo is not None:
            self.combo.append({len(self.cols) - 1: 1})
        return len(self.cols) - 1

    def reduce(self):
        """Eliminate greedily on minimal-valuation pivots until echelon."""
        p, W, pW = self.p, self.W, self.pW
        used_cols = {c for _, c, _ in self.pivots}
        while True:
            best = None
            for j, col in enumerate(self.cols):
                if j in used_cols:
                    continue
                for r, x in col.items():
                    if r in self.pivot_rows:
                        continue
                    v = pval_int(x, p, W)
                    if v >= W:
                        continue
                    if best is None or v < best[0]:
                        best = (v, j, r)
                        if v == 0:
                            break
                if best is not None and best[0] == 0:
                    break
            if best is None:
                return
            v, pj, pr = best
            self._eliminate(pj, pr, v)
            used_cols.add(pj)

    def _eliminate(self, pj, pr, v):
        p, pW = self.p, self.pW
        pivot = self.cols[pj][pr]
        inv_unit = pow(pivot // p**v, -1, pW)
        for j, col in enumerate(self.cols):
            if j == pj:
                continue
            x = col.get(pr)
            if not x:
                continue
            factor = (x // p**v) * inv_unit % pW
            _axpy(col, self.cols[pj], -factor, pW)
            if self.combo is not None:
                _axpy(self.combo[j], self.combo[pj], -factor, pW)
        self.pivots.append((pr, pj, v))
        self.pivot_rows[pr] = (pj, v)

    def insert(self, col):
        """Reduce a column against the span and install it if independent.

        Returns the pivot valuation when the column enlarges the span,
        else None.  Keeps the valuation-echelon invariant: each pivot is
        minimal-valuation in its row (swapping in the newcomer if needed).
        """
        p, W, pW = self.p, self.W, self.pW
        c = {r: v % pW for r, v in col.items() if v % pW}
        result_val = None
        guard = 0
        while True:
            guard += 1
            if guard > 10000:
                raise RuntimeError("insert failed to stabilize")
            changed = True
            while changed:
                changed = False
                for r in list(c.keys()):
                    hit = self.pivot_rows.get(r)
                    if hit is None:
                        continue
                    pj, pv = hit
                    xv = pval_int(c[r], p, W)
                    if xv >= W:
                        del c[r]
                        continue
                    if xv >= pv:
                        pivot = self.cols[pj][r]
                        factor = (c[r] // p**xv) * p ** (xv - pv) * pow(pivot // p**pv, -1, pW) % pW
                        _axpy(c, self.cols[pj], -factor, pW)
                        changed = True
            best = None
            for r, x in c.items():
                v = pval_int(x, p, W)
                if v >= W:
                    continue
                if best is None or v < best[0]:
                    best = (v, r)
            if best is None:
                return result_val
            v, r = best
            if result_val is None:
                result_val = v  # where the inserted column's content lands
            hit = self.pivot_rows.get(r)
            if hit is None:
                j = len(self.cols)
                self.cols.append(c)
                if self.combo is not None:
                    self.combo.append({})
                self.pivots.append((r, j, v))
                self.pivot_rows[r] = (j, v)
                return result_val
            pj, pv = hit
            # newcomer beats the pivot: swap and keep re-homing the old one
            assert v < pv
            old = self.cols[pj]
            self.cols[pj] = c
            self.pivots = [
                (rr, jj, v if jj == pj else vv) for rr, jj, vv in self.pivots
            ]
            self.pivot_rows[r] = (pj, v)
            c = old

    # -- queries -----------------------------------------------------------

    def divisors(self):
        return sorted(v for _, _, v in self.pivots)

    def rank(self, below=None):
        if below is None:
            return len(self.pivots)
        return sum(1 for _, _, v in self.pivots if v < below)

    def reduce_vector(self, target, denom_cap=0):
        """Write target as a span combination; returns (residual, coeffs).

        coeffs maps original column index -> coefficient (int scaled by
        p^-denom if denom_cap allows fractional multiples of pivots).
        The caller decides whether the residual counts as zero.
        """
        p, W, pW = self.p, self.W, self.pW
        t = {r: v % pW for r, v in target.items() if v % pW}
        coeffs = {}
        for pr, pj, v in self.pivots:
            x = t.get(pr)
            if not x:
                continue
            xv = pval_int(x, p, W)
            if xv < v and v - xv > denom_cap:
                # cannot be matched integrally; leave in residual
                continue
            pivot = self.cols[pj][pr]
            inv_unit = pow(pivot // p**v, -1, pW)
            if xv >= v:
                factor = (x // p**v) * inv_unit % pW
                _axpy(t, self.cols[pj], -factor, pW)
                _merge(coeffs, self.combo[pj] if self.combo else {pj: 1}, factor, pW, 0)
            else:
                shift = v - xv
                factor = (x // p**xv) * inv_unit % pW
                _axpy_scaled(t, self.cols[pj], -factor, shift, p, pW)
                _merge(coeffs, self.combo[pj] if self.combo else {pj: 1}, factor, pW, shift)
        return t, coeffs

    def in_span(self, target, zero_val):
        residual, _ = self.reduce_vector(target)
        p = self.p
        return all(pval_int(x, p, self.W) >= zero_val for x in residual.values())

    def kernel(self, Ktrust):
        """Generators of the kernel mod p^Ktrust as {orig_col: coeff} dicts.

        Requires track_combo.  Free columns (reduced to dust) give kernel
        vectors; a pivot of valuation v contributes p^(Ktrust-v) times its
        combination when v > 0.
        """
        if self.combo is None:
            raise ValueError("kernel needs combo tracking")
        p = self.p
        pT = p**Ktrust
        used = {c for _, c, _ in self.pivots}
        out = []
        for j, col in enumerate(self.cols):
            if j in used:
                continue
            if all(pval_int(x, p, self.W) >= Ktrust for x in col.values()):
                vec = {k: c % pT for k, c in self.combo[j].items() if c % pT}
                if vec:
                    out.append(vec)
        for pr, pj, v in self.pivots:
            if 0 < v < Ktrust:
                scale = p ** (Ktrust - v)
                vec = {k: c * scale % pT for k, c in self.combo[pj].items()}
                vec = {k: c for k, c in vec.items() if c}
                if vec:
                    out.append(vec)
        return out


def _axpy(col, other, factor, pW):
    factor %= pW
    if not factor:
        return
    for r, x in other.items():
        nv = (col.get(r, 0) + factor * x) % pW
        if nv:
            col[r] = nv
        else:
            col.pop(r, None)


def _axpy_scaled(col, other, factor, shift, p, pW):
    """col += factor * p^-shift * other (requires entrywise divisibility)."""
    ps = p**shift
    for r, x in other.items():
        num = factor * x
        if num % ps:
            raise ArithmeticError("non-integral scaled elimination")
        nv = (col.get(r, 0) + num // ps) % pW
        if nv:
            col[r] = nv
        else:
            col.pop(r, None)


def _merge(coeffs, combo, factor, pW, shift):
    for k, c in combo.items():
        coeffs[(k, shift)] = (coeffs.get((k, shift), 0) + factor * c) % pW


def reduce_columns(columns, p, W, track_combo=False):
    red = Reduction(p, W, track_combo)
    for c in columns:
        red.add_column(c)
    red.reduce()
    return red


def smith_divisors(columns, p, W, Ktrust):
    """Elementary divisor exponents (capped at Ktrust) of the column span."""
    red = reduce_columns(columns, p, W)
    return sorted(min(v, Ktrust) for _, _, v in red.pivots if v < Ktrust)


def snf_certificate(columns, p, W):
    """Return (rowcombos, diag) certifying the reduction: for each pivot,
    the reduced column equals its recorded combination of input columns."""
    red = reduce_columns(columns, p, W, track_combo=True)
    pW = p**W
    checks = []
    for pr, pj, v in red.pivots:
        combo = red.combo[pj]
        recon = {}
        for orig, coeff in combo.items():
            _axpy(recon, {r: x for r, x in columns[orig].items()}, coeff, pW)
        checks.append(recon == red.cols[pj])
    return red, all(checks)
