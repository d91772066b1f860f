"""Sparse multivariate polynomials over Q with exact rational coefficients.

A monomial is a tuple of (symbol-id, exponent) pairs sorted by the global
symbol ordering; a polynomial is a mapping monomial -> nonzero mpq.  All
values are immutable after construction, so polynomials can be shared freely
between threads and used as dictionary keys.
"""

from __future__ import annotations

from gmpy2 import mpq, mpz, gcd as zgcd, isqrt

from .symbols import (
    AFFINE,
    INDEP,
    JET,
    PARAM,
    Symbol,
    JetCeilingError,
    jet,
    jet_ceiling,
    key_of,
    sid,
    symbol_of,
)

Mono = tuple  # tuple[tuple[int, int], ...]

_EMPTY: Mono = ()

Q0 = mpq(0)
Q1 = mpq(1)


def _mono_mul(a: Mono, b: Mono) -> Mono:
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    la, lb = len(a), len(b)
    while i < la and j < lb:
        (
            sa,
            ea,
        ) = a[i]
        sb, eb = b[j]
        if sa == sb:
            out.append((sa, ea + eb))
            i += 1
            j += 1
        elif key_of(sa) < key_of(sb):
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def _mono_div(a: Mono, b: Mono):
    """a / b or None when not divisible."""
    if not b:
        return a
    db = dict(b)
    out = []
    for s, e in a:
        r = e - db.pop(s, 0)
        if r < 0:
            return None
        if r:
            out.append((s, r))
    if db:
        return None
    return tuple(out)


def _mono_deg(m: Mono) -> int:
    return sum(e for _, e in m)


def _mono_key(m: Mono):
    """Deterministic total-order key (used for tie-breaking only; the
    canonical graded-lex comparison is _mono_lex_greater)."""
    return (_mono_deg(m), tuple((key_of(s), e) for s, e in m))


def _mono_lex_greater(a: Mono, b: Mono) -> bool:
    """Graded-lex: is a > b?"""
    da, db = _mono_deg(a), _mono_deg(b)
    if da != db:
        return da > db
    i = j = 0
    while i < len(a) and j < len(b):
        sa, ea = a[i]
        sb, eb = b[j]
        ka, kb = key_of(sa), key_of(sb)
        if ka == kb:
            if ea != eb:
                return ea > eb
            i += 1
            j += 1
        elif ka < kb:
            return True  # a has positive power on an earlier variable
        else:
            return False
    if i < len(a):
        return True
    return False


class Poly:
    __slots__ = ("terms", "_hash")

    def __init__(self, terms: dict):
        self.terms = terms
        self._hash = None

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero() -> "Poly":
        return _ZERO

    @staticmethod
    def const(c) -> "Poly":
        c = mpq(c)
        if c == 0:
            return _ZERO
        return Poly({_EMPTY: c})

    @staticmethod
    def var(sym: Symbol, exp: int = 1) -> "Poly":
        if exp == 0:
            return _ONE
        return Poly({((sid(sym), exp),): Q1})

    # -- basic structure ----------------------------------------------------

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and _EMPTY in self.terms)

    def const_value(self):
        if not self.terms:
            return Q0
        return self.terms.get(_EMPTY, Q0)

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash(frozenset(self.terms.items()))
            self._hash = h
        return h

    def __len__(self):
        return len(self.terms)

    def symbol_ids(self) -> set:
        out = set()
        for m in self.terms:
            for s, _ in m:
                out.add(s)
        return out

    def symbols(self) -> set:
        return {symbol_of(s) for s in self.symbol_ids()}

    def has_symbol(self, sym: Symbol) -> bool:
        i = sid(sym)
        return any(s == i for m in self.terms for s, _ in m)

    def degree(self, sym: Symbol) -> int:
        i = sid(sym)
        d = 0
        for m in self.terms:
            for s, e in m:
                if s == i and e > d:
                    d = e
        return d

    def total_degree(self) -> int:
        return max((_mono_deg(m) for m in self.terms), default=0)

    def jet_order(self, fname: str | None = None) -> int:
        """Highest jet order present (of one family, or of any family)."""
        top = -1
        for m in self.terms:
            for s, _ in m:
                sym = symbol_of(s)
                if sym.kind == JET and (fname is None or sym.name == fname):
                    if sym.order > top:
                        top = sym.order
        return top

    def sorted_terms(self):
        """Terms in descending graded-lex order (canonical display order)."""
        from functools import cmp_to_key

        def cmp(a, b):
            if a[0] == b[0]:
                return 0
            return 1 if _mono_lex_greater(a[0], b[0]) else -1

        return sorted(self.terms.items(), key=cmp_to_key(cmp), reverse=True)

    def leading(self):
        """(monomial, coefficient) largest under graded-lex."""
        if not self.terms:
            return (_EMPTY, Q0)
        best = None
        for m in self.terms:
            if best is None or _mono_lex_greater(m, best):
                best = m
        return (best, self.terms[best])

    def leading_coeff(self):
        return self.leading()[1]

    # -- arithmetic ---------------------------------------------------------

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __add__(self, other):
        if isinstance(other, (int, mpq, type(mpz(0)))):
            other = Poly.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        if not self.terms:
            return other
        if not other.terms:
            return self
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        out = dict(a)
        for m, c in b.items():
            v = out.get(m)
            if v is None:
                out[m] = c
            else:
                v = v + c
                if v:
                    out[m] = v
                else:
                    del out[m]
        return Poly(out)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, mpq, type(mpz(0)))):
            other = Poly.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, mpq, type(mpz(0)))):
            c = mpq(other)
            if c == 0:
                return _ZERO
            if c == 1:
                return self
            return Poly({m: co * c for m, co in self.terms.items()})
        if not isinstance(other, Poly):
            return NotImplemented
        a, b = self.terms, other.terms
        if not a or not b:
            return _ZERO
        if len(a) < len(b):
            a, b = b, a
        out: dict = {}
        for mb, cb in b.items():
            if not mb:
                for ma, ca in a.items():
                    v = out.get(ma)
                    prod = ca * cb
                    if v is None:
                        out[ma] = prod
                    else:
                        v = v + prod
                        if v:
                            out[ma] = v
                        else:
                            del out[ma]
            else:
                for ma, ca in a.items():
                    m = _mono_mul(ma, mb)
                    v = out.get(m)
                    prod = ca * cb
                    if v is None:
                        out[m] = prod
                    else:
                        v = v + prod
                        if v:
                            out[m] = v
                        else:
                            del out[m]
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power on a polynomial")
        result = _ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def mul_mono(self, m: Mono, c=Q1) -> "Poly":
        if not self.terms:
            return _ZERO
        return Poly({_mono_mul(mm, m): cc * c for mm, cc in self.terms.items()})

    # -- calculus -----------------------------------------------------------

    def derivative(self, sym: Symbol) -> "Poly":
        i = sid(sym)
        out: dict = {}
        for m, c in self.terms.items():
            for pos, (s, e) in enumerate(m):
                if s == i:
                    if e == 1:
                        nm = m[:pos] + m[pos + 1 :]
                    else:
                        nm = m[:pos] + ((s, e - 1),) + m[pos + 1 :]
                    v = out.get(nm, Q0) + c * e
                    if v:
                        out[nm] = v
                    elif nm in out:
                        del out[nm]
                    break
        return Poly(out)

    def dx_total(self, allow_affine: bool = False) -> "Poly":
        """Total x-derivative: D(x)=1, D(q^(n))=q^(n+1), parameters constant.

        Affine variables are rejected unless allow_affine, in which case they
        are treated as x-constants (used for the explicit-x part of maps).
        """
        ceiling = jet_ceiling()
        out: dict = {}

        def _acc(mono, coeff):
            v = out.get(mono)
            if v is None:
                out[mono] = coeff
            else:
                v = v + coeff
                if v:
                    out[mono] = v
                else:
                    del out[mono]

        for m, c in self.terms.items():
            for pos, (s, e) in enumerate(m):
                sym = symbol_of(s)
                if sym.kind == AFFINE:
                    if not allow_affine:
                        raise ValueError(
                            f"total x-derivative of expression containing {sym}"
                        )
                    continue
                if sym.kind == PARAM:
                    continue
                if e == 1:
                    rest = m[:pos] + m[pos + 1 :]
                else:
                    rest = m[:pos] + ((s, e - 1),) + m[pos + 1 :]
                if sym.kind == INDEP:
                    _acc(rest, c * e)
                else:  # JET
                    if sym.order + 1 > ceiling:
                        raise JetCeilingError(
                            f"derivative of {sym} exceeds jet ceiling {ceiling}"
                        )
                    up = sid(jet(sym.name, sym.order + 1))
                    _acc(_mono_mul(rest, ((up, 1),)), c * e)
        return Poly(out)

    # -- views and substitution --------------------------------------------

    def as_univariate(self, sym: Symbol) -> dict:
        """{exponent: Poly coefficient} viewing self in powers of sym."""
        i = sid(sym)
        out: dict = {}
        for m, c in self.terms.items():
            e = 0
            rest = m
            for pos, (s, ee) in enumerate(m):
                if s == i:
                    e = ee
                    rest = m[:pos] + m[pos + 1 :]
                    break
            bucket = out.setdefault(e, {})
            bucket[rest] = bucket.get(rest, Q0) + c
        return {e: Poly({m: c for m, c in d.items() if c}) for e, d in out.items()}

    def coeff_of(self, sym: Symbol, e: int) -> "Poly":
        return self.as_univariate(sym).get(e, _ZERO)

    def subs_poly(self, bindings: dict) -> "Poly":
        """Simultaneous substitution symbol -> Poly."""
        idb = {sid(s): p for s, p in bindings.items()}
        if not any(s in idb for m in self.terms for s, _ in m):
            return self
        # Horner on one bound variable at a time (values are never rescanned
        # because substitution targets are removed from the working variable).
        target = None
        for m in self.terms:
            for s, _ in m:
                if s in idb:
                    target = s
                    break
            if target is not None:
                break
        uni = self.as_univariate(symbol_of(target))
        val = idb[target]
        rest_bindings = bindings
        degs = sorted(uni.keys(), reverse=True)
        acc = _ZERO
        prev = None
        for d in degs:
            if prev is not None:
                gap = prev - d
                acc = acc * (val if gap == 1 else val**gap)
            acc = acc + uni[d].subs_poly(rest_bindings)
            prev = d
        if prev:
            acc = acc * (val if prev == 1 else val**prev)
        return acc

    # -- integer normalization / content ------------------------------------

    def content(self):
        """Positive rational content c with self/c integer-primitive."""
        if not self.terms:
            return Q1
        num = mpz(0)
        den = mpz(1)
        for c in self.terms.values():
            num = zgcd(num, c.numerator)
            den = den * c.denominator // zgcd(den, c.denominator)
        return mpq(num, den)

    def primitive(self):
        """(unit, primitive): self = unit * primitive; primitive has integer
        coprime coefficients and positive leading coefficient."""
        if not self.terms:
            return Q1, self
        c = self.content()
        if self.leading_coeff() < 0:
            c = -c
        return c, self * (1 / c)

    def exact_div(self, other: "Poly"):
        """self / other when division is exact, else None."""
        if not other.terms:
            raise ZeroDivisionError("polynomial division by zero")
        if not self.terms:
            return _ZERO
        if other.is_const():
            return self * (1 / other.const_value())
        lm, lc = other.leading()
        rem = self
        quo: dict = {}
        while rem.terms:
            rm, rc = rem.leading()
            qm = _mono_div(rm, lm)
            if qm is None:
                return None
            qc = rc / lc
            quo[qm] = qc
            rem = rem - other.mul_mono(qm, qc)
        return Poly(quo)

    def divisible_by(self, other: "Poly") -> bool:
        return self.exact_div(other) is not None

    def sqrt(self):
        """Exact square root, or None when self is not a perfect square."""
        if not self.terms:
            return _ZERO
        lm, lc = self.leading()
        if any(e % 2 for _, e in lm):
            return None
        if lc < 0:
            return None
        nr, dr = isqrt(lc.numerator), isqrt(lc.denominator)
        if nr * nr != lc.numerator or dr * dr != lc.denominator:
            return None
        half_lm = tuple((s, e // 2) for s, e in lm)
        half_lc = mpq(nr, dr)
        root_lt = Poly({half_lm: half_lc})
        # Long-division style: peel leading terms of self - root^2.
        root = root_lt
        twice_lt = root_lt * 2
        rem = self - root * root
        guard = len(self.terms) * (self.total_degree() + 2) * 4 + 16
        while rem.terms:
            guard -= 1
            if guard < 0:
                return None
            rm, rc = rem.leading()
            qm = _mono_div(rm, half_lm)
            if qm is None:
                return None
            t = Poly({qm: rc / (2 * half_lc)})
            root = root + t
            rem = rem - twice_lt * t - t * t
        return root

    # -- display ------------------------------------------------------------

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            factors = []
            for s, e in m:
                nm = str(symbol_of(s))
                factors.append(nm if e == 1 else f"{nm}^{e}")
            body = "*".join(factors)
            if not body:
                parts.append(str(c))
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append("-" + body)
            else:
                parts.append(f"{c}*{body}")
        s = " + ".join(parts).replace("+ -", "- ")
        return s

    __repr__ = __str__


_ZERO = Poly({})
_ONE = Poly({_EMPTY: Q1})


def poly_from_symbol(sym: Symbol) -> Poly:
    return Poly.var(sym)
