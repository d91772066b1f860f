"""Multivariate polynomial gcd over Q.

The workhorse is the integer-evaluation heuristic gcd (GCDHEU): evaluate one
variable at a large integer, recurse, reconstruct the candidate from the
xi-adic digits and verify by exact trial division.  Verification makes the
heuristic sound; on the rare failure we fall back to a primitive
pseudo-remainder sequence in the main variable.
"""

from __future__ import annotations

from gmpy2 import mpq, mpz, gcd as zgcd

from .poly import Poly, _EMPTY, _mono_mul
from .symbols import symbol_of, key_of, sid


def _heights(p: Poly) -> mpz:
    h = mpz(0)
    for c in p.terms.values():
        a = abs(c.numerator)
        if a > h:
            h = a
    return h if h else mpz(1)


def _eval_int(p: Poly, s: int, xi: mpz) -> Poly:
    """Substitute the integer xi for the symbol with id s."""
    out: dict = {}
    for m, c in p.terms.items():
        e = 0
        rest = m
        for pos, (ss, ee) in enumerate(m):
            if ss == s:
                e = ee
                rest = m[:pos] + m[pos + 1 :]
                break
        v = c * xi**e if e else c
        w = out.get(rest)
        if w is None:
            out[rest] = v
        else:
            w = w + v
            if w:
                out[rest] = w
            else:
                del out[rest]
    return Poly(out)


def _mods(a: mpz, m: mpz) -> mpz:
    """Symmetric remainder in (-m/2, m/2]."""
    r = a % m
    if 2 * r > m:
        r -= m
    return r


def _poly_mods(p: Poly, xi: mpz):
    """(digit, quotient) with p = digit + xi * quotient, symmetric digits."""
    dig: dict = {}
    quo: dict = {}
    for m, c in p.terms.items():
        n = c.numerator  # integer polys only here
        d = _mods(n, xi)
        q = (n - d) // xi
        if d:
            dig[m] = mpq(d)
        if q:
            quo[m] = mpq(q)
    return Poly(dig), Poly(quo)


def _heugcd(f: Poly, g: Poly, depth: int = 0):
    """Heuristic gcd of integer-coefficient polynomials; None on failure."""
    if f.is_zero():
        return g
    if g.is_zero():
        return f
    if f.is_const() or g.is_const():
        cf = f.content() if not f.is_zero() else mpq(0)
        cg = g.content() if not g.is_zero() else mpq(0)
        return Poly.const(zgcd(mpz(cf.numerator), mpz(cg.numerator)))
    ids = f.symbol_ids() | g.symbol_ids()
    s = min(ids, key=key_of)
    xi = 2 * min(_heights(f), _heights(g)) + 29
    for _ in range(6):
        fe = _eval_int(f, s, xi)
        ge = _eval_int(g, s, xi)
        h_img = _heugcd(fe, ge, depth + 1)
        if h_img is not None:
            # xi-adic reconstruction of the candidate in the variable s.
            cand: dict = {}
            power = 0
            cur = h_img
            ok = True
            while not cur.is_zero():
                if power > f.degree(symbol_of(s)) + g.degree(symbol_of(s)):
                    ok = False
                    break
                dig, cur = _poly_mods(cur, xi)
                if dig.terms:
                    if power:
                        sm = ((s, power),)
                        for m, c in dig.terms.items():
                            cand[_mono_mul(m, sm)] = c
                    else:
                        cand.update(dig.terms)
                power += 1
            if ok:
                h = Poly(dict(cand))
                _, h = h.primitive()
                if not h.is_zero() and f.exact_div(h) is not None and g.exact_div(h) is not None:
                    return h
        xi = xi * 73 // 27 + 32
    return None


def _pseudo_rem(f: Poly, g: Poly, sym) -> Poly:
    """Pseudo-remainder of f by g in the variable sym (deg strictly drops)."""
    dg = g.degree(sym)
    lcg = g.as_univariate(sym)[dg]
    xs = sid(sym)
    r = f
    while not r.is_zero():
        dr = r.degree(sym)
        if dr < dg:
            break
        lcr = r.as_univariate(sym)[dr]
        shift = ((xs, dr - dg),) if dr > dg else _EMPTY
        r = r * lcg - g.mul_mono(shift) * lcr
    return r


def _prs_gcd(f: Poly, g: Poly) -> Poly:
    """Primitive PRS gcd; correct but slow, used as a last resort."""
    if f.is_zero():
        return g
    if g.is_zero():
        return f
    ids = f.symbol_ids() | g.symbol_ids()
    if not ids:
        return Poly.const(zgcd(mpz(f.content().numerator), mpz(g.content().numerator)))
    s = min(ids, key=key_of)
    sym = symbol_of(s)
    if not f.has_symbol(sym):
        cg, _ = content_wrt(g, sym)
        return gcd_poly(f, cg)
    if not g.has_symbol(sym):
        cf, _ = content_wrt(f, sym)
        return gcd_poly(g, cf)
    cf, fp = content_wrt(f, sym)
    cg, gp = content_wrt(g, sym)
    cont = gcd_poly(cf, cg)
    a, b = fp, gp
    if a.degree(sym) < b.degree(sym):
        a, b = b, a
    while not b.is_zero() and b.has_symbol(sym):
        r = _pseudo_rem(a, b, sym)
        if not r.is_zero():
            _, r = r.primitive()
            if r.has_symbol(sym):
                _, r = content_wrt(r, sym)
        a, b = b, r
    if b.is_zero():
        _, res = a.primitive()
        return cont * res
    # Nonzero remainder free of sym: a and b are coprime in sym.
    return cont


def gcd_poly(f: Poly, g: Poly) -> Poly:
    """Primitive, positive-leading gcd in Q[...]; gcd(0,0) = 0."""
    if f.is_zero() and g.is_zero():
        return Poly.zero()
    if f.is_zero():
        return g.primitive()[1]
    if g.is_zero():
        return f.primitive()[1]
    if f.is_const() or g.is_const():
        return Poly.const(1)
    _, fi = f.primitive()
    _, gi = g.primitive()
    if fi == gi:
        return fi
    h = _heugcd(fi, gi)
    if h is None:
        h = _prs_gcd(fi, gi)
    _, h = h.primitive()
    return h


def gcd_many(polys) -> Poly:
    acc = Poly.zero()
    for p in polys:
        acc = gcd_poly(acc, p)
        if acc.is_const() and not acc.is_zero():
            return Poly.const(1)
    return acc


def content_wrt(p: Poly, sym) -> tuple[Poly, Poly]:
    """(content, primitive part) of p viewed as univariate in sym.

    The content is the gcd of the coefficient polynomials; p = content *
    primitive with the primitive part having coprime coefficients in sym.
    """
    uni = p.as_univariate(sym)
    cont = gcd_many(uni.values())
    if cont.is_zero():
        return Poly.zero(), Poly.zero()
    if cont.is_const():
        return Poly.const(1), p
    pp = p.exact_div(cont)
    return cont, pp
