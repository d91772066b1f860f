"""Exact rational functions: reduced fractions of multivariate polynomials.

The denominator is kept as a multiset of primitive integer "atoms" (the
factors that actually arise from chart changes: chart variables, centers,
coefficient denominators).  Reduction trial-divides the numerator by each
atom, which is complete because atoms are kept irreducible by the smooth
factorizer below.  The canonical pair is (numerator, product of atoms) with
the atom product primitive and positive-leading, so equal functions have
identical representations.
"""

from __future__ import annotations

from gmpy2 import mpq

from .gcd import content_wrt, gcd_poly
from .poly import Poly, Q1
from .symbols import AFFINE, Symbol, symbol_of


class DomainError(Exception):
    """Division by the zero function or a vanishing denominator."""


# ---------------------------------------------------------------------------
# Smooth factorization of denominators into atoms
# ---------------------------------------------------------------------------


def _mono_gcd_extract(p: Poly):
    """Largest monomial dividing p: returns (monomial factors dict, quotient)."""
    if p.is_zero():
        return {}, p
    common = None
    for m in p.terms:
        d = dict(m)
        if common is None:
            common = d
        else:
            for s in list(common):
                e = d.get(s, 0)
                if e < common[s]:
                    if e:
                        common[s] = e
                    else:
                        del common[s]
            if not common:
                break
    if not common:
        return {}, p
    mono = tuple(sorted(common.items(), key=lambda se: se[0]))
    from .poly import _mono_div

    q = Poly({_mono_div(m, mono): c for m, c in p.terms.items()})
    return common, q


def atomize(p: Poly) -> tuple[mpq, list[tuple[Poly, int]]]:
    """Write p = unit * prod(atom^mult) with primitive positive atoms.

    Atoms are irreducible for every denominator this engine constructs:
    splitting proceeds by monomial extraction, content extraction, square
    detection on quadratics and square-free splitting; a factor that resists
    all of these is kept whole.
    """
    if p.is_zero():
        raise DomainError("zero denominator")
    unit, pp = p.primitive()
    atoms: dict[Poly, int] = {}

    def push(f: Poly, mult: int):
        u, fp = f.primitive()
        nonlocal unit
        unit = unit * u**mult if u != 1 else unit
        if fp.is_const():
            return
        work = [(fp, mult)]
        while work:
            g, m = work.pop()
            if g.is_const():
                continue
            common, g = _mono_gcd_extract(g)
            for s, e in common.items():
                vp = Poly({((s, 1),): Q1})
                atoms[vp] = atoms.get(vp, 0) + e * m
            if g.is_const():
                nonlocal_unit_update(g, m)
                continue
            split = _try_split(g)
            if split is None:
                u2, g2 = g.primitive()
                if u2 != 1:
                    nonlocal_unit_update(Poly.const(u2), m)
                atoms[g2] = atoms.get(g2, 0) + m
            else:
                for piece in split:
                    work.append((piece, m))

    def nonlocal_unit_update(c: Poly, m: int):
        nonlocal unit
        unit = unit * c.const_value() ** m

    def _try_split(g: Poly):
        """Return a nontrivial factor list of g, or None if g is atomic."""
        syms = sorted(g.symbols(), key=lambda s: (g.degree(s), s.sort_key))
        for v in syms:
            d = g.degree(v)
            if d == 0:
                continue
            cont, prim = content_wrt(g, v)
            if not cont.is_const():
                return [cont, prim]
            if d == 1:
                return None if g == prim else [prim]
            if d == 2:
                uni = prim.as_univariate(v)
                A = uni.get(2, Poly.zero())
                B = uni.get(1, Poly.zero())
                C = uni.get(0, Poly.zero())
                disc = B * B - A * C * 4
                s = disc.sqrt()
                if s is None:
                    if g == prim:
                        break
                    return [prim]
                vvar = Poly.var(v)
                f1 = (A * vvar * 2 + B - s).primitive()[1]
                q = prim.exact_div(f1)
                if q is not None and not q.is_const():
                    return [f1, q]
                break
            # degree >= 3: try square-free split in v
            dg = g.derivative(v)
            h = gcd_poly(g, dg)
            if not h.is_const():
                return [h, g.exact_div(h)]
        return None

    push(pp, 1)
    ordered = sorted(atoms.items(), key=lambda kv: _atoms_sort_key(kv[0]))
    return unit, ordered


def _atoms_sort_key(atom: Poly):
    from .poly import _mono_key

    return tuple(
        (_mono_key(m), c.numerator, c.denominator) for m, c in atom.sorted_terms()
    )


# ---------------------------------------------------------------------------
# RationalFn
# ---------------------------------------------------------------------------


class RationalFn:
    __slots__ = ("num", "fac", "_den")

    def __init__(self, num: Poly, fac: tuple = ()):
        self.num = num
        self.fac = fac
        self._den = None

    # -- construction --------------------------------------------------------

    @staticmethod
    def _make(num: Poly, factors) -> "RationalFn":
        if num.is_zero():
            return RF_ZERO
        merged: dict[Poly, int] = {}
        scale = Q1
        for f, m in factors:
            if m == 0:
                continue
            if f.is_const():
                scale = scale * f.const_value() ** m
                continue
            u, fp = f.primitive()
            if u != 1:
                scale = scale * u**m
            merged[fp] = merged.get(fp, 0) + m
        if scale != 1:
            num = num * (1 / scale)
        # reduce: cancel atoms against the numerator
        out = []
        for atom in sorted(merged, key=_atoms_sort_key):
            m = merged[atom]
            while m > 0:
                q = num.exact_div(atom)
                if q is None:
                    break
                num = q
                m -= 1
            if m:
                out.append((atom, m))
        return RationalFn(num, tuple(out))

    @staticmethod
    def from_poly(p: Poly) -> "RationalFn":
        return RationalFn(p) if not p.is_zero() else RF_ZERO

    @staticmethod
    def const(c) -> "RationalFn":
        return RationalFn.from_poly(Poly.const(c))

    @staticmethod
    def var(sym: Symbol) -> "RationalFn":
        return RationalFn(Poly.var(sym))

    @staticmethod
    def fraction(num: Poly, den: Poly) -> "RationalFn":
        if den.is_zero():
            raise DomainError("zero denominator")
        if num.is_zero():
            return RF_ZERO
        unit, atoms = atomize(den)
        return RationalFn._make(num * (1 / unit), atoms)

    # -- structure ------------------------------------------------------------

    @property
    def den(self) -> Poly:
        d = self._den
        if d is None:
            d = Poly.const(1)
            for atom, m in self.fac:
                d = d * atom**m
            self._den = d
        return d

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_poly(self) -> bool:
        return not self.fac

    def is_const(self) -> bool:
        return not self.fac and self.num.is_const()

    def const_value(self):
        return self.num.const_value()

    def __eq__(self, other):
        if isinstance(other, (int, mpq)):
            return self.is_const() and self.const_value() == mpq(other)
        if not isinstance(other, RationalFn):
            return NotImplemented
        return self.num == other.num and self.fac == other.fac

    def __hash__(self):
        return hash((self.num, self.fac))

    def symbols(self) -> set:
        out = self.num.symbols()
        for atom, _ in self.fac:
            out |= atom.symbols()
        return out

    def has_symbol(self, sym: Symbol) -> bool:
        return self.num.has_symbol(sym) or any(a.has_symbol(sym) for a, _ in self.fac)

    def has_affine(self) -> bool:
        return any(s.kind == AFFINE for s in self.symbols())

    def jet_order(self, fname=None) -> int:
        top = self.num.jet_order(fname)
        for a, _ in self.fac:
            t = a.jet_order(fname)
            if t > top:
                top = t
        return top

    # -- arithmetic -----------------------------------------------------------

    def __neg__(self):
        return RationalFn(-self.num, self.fac)

    @staticmethod
    def _coerce(other):
        if isinstance(other, RationalFn):
            return other
        if isinstance(other, Poly):
            return RationalFn.from_poly(other)
        if isinstance(other, int) or isinstance(other, mpq):
            return RationalFn.const(other)
        return None

    def __add__(self, other):
        other = RationalFn._coerce(other)
        if other is None:
            return NotImplemented
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.fac == other.fac:
            return RationalFn._make(self.num + other.num, self.fac)
        d1 = dict(self.fac)
        d2 = dict(other.fac)
        lcm: dict[Poly, int] = dict(d1)
        for a, m in d2.items():
            if lcm.get(a, 0) < m:
                lcm[a] = m
        c1 = Poly.const(1)
        c2 = Poly.const(1)
        for a, m in lcm.items():
            e1 = m - d1.get(a, 0)
            e2 = m - d2.get(a, 0)
            if e1:
                c1 = c1 * a**e1
            if e2:
                c2 = c2 * a**e2
        num = self.num * c1 + other.num * c2
        return RationalFn._make(num, list(lcm.items()))

    __radd__ = __add__

    def __sub__(self, other):
        other = RationalFn._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = RationalFn._coerce(other)
        if other is None:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return RF_ZERO
        merged = dict(self.fac)
        for a, m in other.fac:
            merged[a] = merged.get(a, 0) + m
        return RationalFn._make(self.num * other.num, list(merged.items()))

    __rmul__ = __mul__

    def reciprocal(self) -> "RationalFn":
        if self.is_zero():
            raise DomainError("division by the zero function")
        unit, atoms = atomize(self.num)
        num = self.den * (1 / unit)
        return RationalFn._make(num, atoms)

    def __truediv__(self, other):
        other = RationalFn._coerce(other)
        if other is None:
            return NotImplemented
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        other = RationalFn._coerce(other)
        return other * self.reciprocal()

    def __pow__(self, n: int):
        if n == 0:
            return RF_ONE
        if n < 0:
            return self.reciprocal() ** (-n)
        num = self.num**n
        fac = tuple((a, m * n) for a, m in self.fac)
        return RationalFn(num, fac)

    # -- calculus -------------------------------------------------------------

    def _derive(self, dpoly) -> "RationalFn":
        """Quotient rule with dpoly: Poly -> Poly the numerator-level derivation."""
        if not self.fac:
            return RationalFn.from_poly(dpoly(self.num))
        atoms = [a for a, _ in self.fac]
        k = len(atoms)
        # products of all atoms except one
        prod_all = Poly.const(1)
        for a in atoms:
            prod_all = prod_all * a
        sigma = Poly.zero()
        for i, (a, m) in enumerate(self.fac):
            da = dpoly(a)
            if da.is_zero():
                continue
            rest = Poly.const(1)
            for j, b in enumerate(atoms):
                if j != i:
                    rest = rest * b
            sigma = sigma + da * rest * m
        num = dpoly(self.num) * prod_all - self.num * sigma
        fac = tuple((a, m + 1) for a, m in self.fac)
        return RationalFn._make(num, fac)

    def dx_total(self, allow_affine: bool = False) -> "RationalFn":
        if not allow_affine and self.has_affine():
            raise ValueError("total x-derivative of an expression with chart variables")
        return self._derive(lambda p: p.dx_total(allow_affine=allow_affine))

    def partial(self, sym: Symbol) -> "RationalFn":
        return self._derive(lambda p: p.derivative(sym))

    # -- substitution ----------------------------------------------------------

    def substitute(self, bindings: dict) -> "RationalFn":
        """Simultaneous substitution Symbol -> RationalFn (or Poly/int)."""
        bind = {}
        for s, v in bindings.items():
            rv = RationalFn._coerce(v)
            if rv is None:
                raise TypeError(f"bad substitution value for {s}")
            bind[s] = rv
        if not any(self.has_symbol(s) for s in bind):
            return self
        num = _poly_eval(self.num, bind)
        out = num
        for atom, m in self.fac:
            av = _poly_eval(atom, bind)
            if av.is_zero():
                raise DomainError(f"denominator atom {atom} vanishes under substitution")
            out = out * av ** (-m)
        return out

    # -- series / Laurent -------------------------------------------------------

    def valuation(self, var: Symbol) -> int:
        """Order of vanishing at var = 0 (negative for a pole)."""
        if self.is_zero():
            raise DomainError("valuation of zero")
        from .symbols import sid as _sid

        vid = _sid(var)
        nval = None
        for m in self.num.terms:
            e = 0
            for s, ee in m:
                if s == vid:
                    e = ee
                    break
            nval = e if nval is None else min(nval, e)
            if nval == 0:
                break
        dval = 0
        vpoly = Poly.var(var)
        for atom, mlt in self.fac:
            if atom == vpoly:
                dval += mlt
        return (nval or 0) - dval

    def laurent(self, var: Symbol, upto: int) -> list:
        """[(order, coefficient)] for orders from the valuation up to `upto`.

        Coefficients are RationalFn free of var.
        """
        if self.is_zero():
            return []
        vid_poly = Poly.var(var)
        a = 0
        rest_atoms = []
        for atom, m in self.fac:
            if atom == vid_poly:
                a += m
            else:
                rest_atoms.append((atom, m))
        # split numerator by var powers
        uni = self.num.as_univariate(var)
        nval = min(uni.keys())
        # denominator R = prod(rest_atoms); R as univariate in var
        R = Poly.const(1)
        for atom, m in rest_atoms:
            R = R * atom**m
        runi = R.as_univariate(var)
        if 0 not in runi or runi[0].is_zero():
            # a denominator atom vanishes along var=0: shift by its valuation
            rval = min(runi.keys())
            runi = {k - rval: v for k, v in runi.items()}
            a += rval
        r0 = RationalFn.from_poly(runi[0]).reciprocal()
        lead = nval - a
        out = []
        series: dict[int, RationalFn] = {}
        for k in range(0, upto - lead + 1):
            # coefficient of var^(k+nval) in num/R
            acc = RationalFn.from_poly(uni.get(k + nval, Poly.zero()))
            for i in range(1, k + 1):
                ri = runi.get(i)
                if ri is None or i > k:
                    continue
                prev = series.get(k - i)
                if prev is None or prev.is_zero():
                    continue
                acc = acc - prev * ri
            ck = acc * r0
            series[k] = ck
            if not ck.is_zero():
                out.append((lead + k, ck))
        return out

    # -- display ----------------------------------------------------------------

    def __str__(self):
        if not self.fac:
            return str(self.num)
        return f"({self.num}) / ({self.den})"

    __repr__ = __str__


def _poly_eval(p: Poly, bind: dict) -> RationalFn:
    """Evaluate a polynomial at RationalFn values (Horner, simultaneous)."""
    present = [s for s in bind if p.has_symbol(s)]
    if not present:
        return RationalFn.from_poly(p)
    target = present[0]
    uni = p.as_univariate(target)
    val = bind[target]
    degs = sorted(uni.keys(), reverse=True)
    acc = RF_ZERO
    prev = None
    for d in degs:
        if prev is not None:
            gap = prev - d
            acc = acc * (val if gap == 1 else val**gap)
        acc = acc + _poly_eval(uni[d], bind)
        prev = d
    if prev:
        acc = acc * (val if prev == 1 else val**prev)
    return acc


RF_ZERO = RationalFn(Poly.zero())
RF_ONE = RationalFn(Poly.const(1))


# ---------------------------------------------------------------------------
# Univariate factoring over the fraction field
# ---------------------------------------------------------------------------


class UnivariateFactors:
    """Linear factors (as roots) and unsplit remainder factors of a poly."""

    def __init__(self, var: Symbol):
        self.var = var
        self.roots: list[tuple[RationalFn, int]] = []
        self.unsplit: list[tuple[Poly, int]] = []

    def add_root(self, r: RationalFn, mult: int):
        for i, (r0, m0) in enumerate(self.roots):
            if r0 == r:
                self.roots[i] = (r0, m0 + mult)
                return
        self.roots.append((r, mult))

    def __repr__(self):
        return f"UnivariateFactors(roots={self.roots}, unsplit={self.unsplit})"


def factor_univariate(p: Poly, var: Symbol) -> UnivariateFactors:
    """Split p (viewed in var over the fraction field of the rest) into
    linear factors where possible; quadratics split when their discriminant
    is a perfect square; everything else is reported unsplit."""
    res = UnivariateFactors(var)
    if p.is_zero() or not p.has_symbol(var):
        return res
    _, work = content_wrt(p, var)
    # Yun's square-free decomposition in var
    sqf: list[tuple[Poly, int]] = []
    g = gcd_poly(work, work.derivative(var))
    w = work.exact_div(g)
    i = 1
    while not w.is_const():
        y = gcd_poly(w, g)
        z = w.exact_div(y)
        if not z.is_const():
            sqf.append((z, i))
        w = y
        if not g.is_const():
            g = g.exact_div(y)
        i += 1
        if i > p.degree(var) + 1:
            break
    for f, mult in sqf:
        _split_squarefree(f, var, mult, res)
    return res


def _split_squarefree(f: Poly, var: Symbol, mult: int, res: UnivariateFactors):
    uni = f.as_univariate(var)
    d = max(uni.keys())
    if d == 0:
        return
    if uni.get(0, Poly.zero()).is_zero():
        res.add_root(RF_ZERO, mult)
        q = f.exact_div(Poly.var(var))
        if q is not None and q.has_symbol(var):
            _split_squarefree(q, var, mult, res)
        return
    if d == 1:
        A, B = uni[1], uni.get(0, Poly.zero())
        res.add_root(RationalFn.fraction(-B, A), mult)
        return
    if d == 2:
        A = uni[2]
        B = uni.get(1, Poly.zero())
        C = uni.get(0, Poly.zero())
        disc = B * B - A * C * 4
        s = disc.sqrt()
        if s is not None:
            twoA = A * 2
            res.add_root(RationalFn.fraction(-B + s, twoA), mult)
            res.add_root(RationalFn.fraction(-B - s, twoA), mult)
            return
        res.unsplit.append((f, mult))
        return
    res.unsplit.append((f, mult))
