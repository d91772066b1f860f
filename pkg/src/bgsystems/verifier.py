"""Differential reduction modulo a second-order equation.

A condition F(q, q', q'', ...; x) = 0 extracted by the regularizer is checked
against a candidate equation q'' = R(q, q'; x) by prolonging R (q''' = D(R)
with q'' resubstituted, and so on) and substituting away every jet of order
at least two.  The remainder is zero exactly when F vanishes on all solutions
of the candidate equation, parameters staying fully symbolic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from gmpy2 import mpq

from .symcore import (
    JET,
    PARAM,
    Poly,
    RationalFn,
    RF_ZERO,
    Symbol,
    X,
    jet,
    jet_ceiling,
    param,
)
from .symcore.symbols import JetCeilingError


def _rf(x) -> RationalFn:
    r = RationalFn._coerce(x)
    if r is None:
        raise TypeError(f"cannot coerce {x!r}")
    return r


@dataclass(frozen=True)
class PainleveSpec:
    """A second-order equation q'' = rhs(q, q'; x, params)."""

    id: str
    fname: str
    rhs: RationalFn

    def __post_init__(self):
        if self.rhs.jet_order(self.fname) > 1:
            raise ValueError("spec right-hand side must have jet order <= 1")


def validate_diffpoly(e: RationalFn) -> RationalFn:
    if e.has_affine():
        raise ValueError("differential polynomial contains chart variables")
    return e


def prolong(spec: PainleveSpec, n: int) -> dict[Symbol, RationalFn]:
    """Substitutions q^(2+k) -> expression in (q, q'; x), k = 0..n."""
    if n + 2 > jet_ceiling():
        raise JetCeilingError(
            f"prolongation to order {n + 2} exceeds jet ceiling {jet_ceiling()}"
        )
    q2 = jet(spec.fname, 2)
    out = {q2: spec.rhs}
    cur = spec.rhs
    for k in range(1, n + 1):
        cur = cur.dx_total().substitute({q2: spec.rhs})
        out[jet(spec.fname, 2 + k)] = cur
    return out


def reduce_mod_painleve(f: RationalFn, spec: PainleveSpec) -> RationalFn:
    """Remainder of f after eliminating all jets of order >= 2 via spec."""
    f = validate_diffpoly(_rf(f))
    top = f.jet_order(spec.fname)
    if top < 2:
        return f
    rewrites = prolong(spec, top - 2)
    return f.substitute(rewrites)


def reduces_to_zero(f, spec: PainleveSpec) -> bool:
    return reduce_mod_painleve(_rf(f), spec).is_zero()


def condition_normal(e) -> Poly:
    """Numerator content-normalized: coprime integer coefficients, positive
    leading term under jet-graded-lex (highest jet order first, so the top
    derivative of a condition carries a positive sign)."""
    e = _rf(e)
    _, p = e.num.primitive()
    if p.is_zero():
        return p
    from .symcore.symbols import symbol_of
    from .symcore.poly import _mono_lex_greater

    def mono_rank(m):
        top = -1
        for s, _ in m:
            sym = symbol_of(s)
            if sym.kind == JET and sym.order > top:
                top = sym.order
        return top

    best = None
    best_rank = None
    for m in p.terms:
        r = mono_rank(m)
        if best is None or r > best_rank or (r == best_rank and _mono_lex_greater(m, best)):
            best, best_rank = m, r
    if p.terms[best] < 0:
        p = -p
    return p


def conditions_equal(a, b) -> bool:
    """Equality up to a nonzero factor from Q (conditions are projective)."""
    return condition_normal(a) == condition_normal(b)


# ---------------------------------------------------------------------------
# Exact integration: find g with D(g) = f
# ---------------------------------------------------------------------------


def _candidate_monomials(f: Poly, fname: str):
    """Ansatz monomials for the antiderivative of f."""
    top = f.jet_order(fname)
    if top < 1:
        top = 1
    jet_syms = [jet(fname, k) for k in range(0, top)]
    # bounds: jet-degree <= deg(f)+1, x-degree <= xdeg(f)+1
    jdeg = 0
    for m in f.terms:
        d = 0
        for s, e in m:
            from .symcore.symbols import symbol_of

            if symbol_of(s).kind == JET:
                d += e
        jdeg = max(jdeg, d)
    xdeg = f.degree(X)
    # parameter monomials present in f (plus 1)
    from .symcore.symbols import symbol_of

    par_monos = {(): 1}
    for m in f.terms:
        pm = tuple((s, e) for s, e in m if symbol_of(s).kind == PARAM)
        par_monos[pm] = 1
    cands: list[Poly] = []

    def jet_monos(idx, remaining, acc):
        yield tuple(acc)
        if idx >= len(jet_syms) or remaining == 0:
            return
        for e in range(1, remaining + 1):
            acc.append((jet_syms[idx], e))
            yield from jet_monos(idx + 1, remaining - e, acc)
            acc.pop()
        yield from jet_monos(idx + 1, remaining, acc)

    seen = set()
    for jm in jet_monos(0, jdeg + 1, []):
        if jm in seen:
            continue
        seen.add(jm)
        base = Poly.const(1)
        for s, e in jm:
            base = base * Poly.var(s, e)
        for i in range(xdeg + 2):
            bx = base * Poly.var(X, i) if i else base
            for pm in par_monos:
                t = bx
                for s, e in pm:
                    t = t * Poly({((s, e),): mpq(1)})
                cands.append(t)
    # dedupe
    uniq = []
    seen2 = set()
    for c in cands:
        k = tuple(sorted(c.terms.keys()))
        if k not in seen2 and not c.is_const():
            seen2.add(k)
            uniq.append(c)
    return uniq


def integrate_exact(f, fname: str | None = None):
    """A differential polynomial g with D(g) = f, or None.

    Integration constants are not added; the caller appends them as needed.
    """
    f = _rf(f)
    if not f.is_poly():
        raise ValueError("integrate_exact expects a polynomial in the jets")
    fp = f.num
    if fp.is_zero():
        return RF_ZERO
    if fname is None:
        names = {s.name for s in fp.symbols() if s.kind == JET}
        fname = sorted(names)[0] if names else "q"
    cands = _candidate_monomials(fp, fname)
    # Build the linear system sum_j c_j D(m_j) = f over monomial coordinates.
    images = [c.dx_total() for c in cands]
    rows: dict = {}
    for j, im in enumerate(images):
        for m, co in im.terms.items():
            rows.setdefault(m, {})[j] = co
    target = dict(fp.terms)
    for m in target:
        rows.setdefault(m, {})
    row_keys = sorted(rows.keys(), key=lambda m: (len(m), m))
    n = len(cands)
    mat = [[rows[m].get(j, mpq(0)) for j in range(n)] + [target.get(m, mpq(0))] for m in row_keys]
    sol = _solve_exact(mat, n)
    if sol is None:
        return None
    g = Poly.zero()
    for j, c in enumerate(sol):
        if c:
            g = g + cands[j] * c
    return RationalFn.from_poly(g)


def _solve_exact(mat, n):
    """Gaussian elimination over Q; any particular solution or None."""
    rows = [r[:] for r in mat]
    m = len(rows)
    piv_col_of_row = []
    r = 0
    for c in range(n):
        piv = None
        for i in range(r, m):
            if rows[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pv = rows[r][c]
        rows[r] = [v / pv for v in rows[r]]
        for i in range(m):
            if i != r and rows[i][c] != 0:
                factor = rows[i][c]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[r])]
        piv_col_of_row.append(c)
        r += 1
        if r == m:
            break
    # consistency
    for i in range(r, m):
        if rows[i][n] != 0:
            return None
    sol = [mpq(0)] * n
    for i, c in enumerate(piv_col_of_row):
        sol[c] = rows[i][n]
    return sol


# ---------------------------------------------------------------------------
# The classical equations, in the parameters used by their Hamiltonians
# ---------------------------------------------------------------------------


def _standard_specs() -> dict[str, PainleveSpec]:
    q0 = RationalFn.var(jet("q", 0))
    q1 = RationalFn.var(jet("q", 1))
    x = RationalFn.var(X)
    alpha = RationalFn.var(param("alpha"))
    beta = RationalFn.var(param("beta"))
    k0 = RationalFn.var(param("kappa0"))
    k1p = RationalFn.var(param("kappa1"))
    kt = RationalFn.var(param("kappat"))
    ki = RationalFn.var(param("kappainf"))
    kap = RationalFn.var(param("kappa"))
    eta = RationalFn.var(param("eta"))
    e0 = RationalFn.var(param("eta0"))
    ei = RationalFn.var(param("etainf"))
    kq = RationalFn.var(param("k1"))

    specs = {}
    specs["I"] = PainleveSpec("I", "q", q0**2 * 6 + x)
    specs["II"] = PainleveSpec("II", "q", q0**3 * 2 + x * q0 + alpha)
    specs["III-D6"] = PainleveSpec(
        "III-D6",
        "q",
        q1**2 / q0
        - q1 / x
        + (e0 * (k0 + 1) * 4 - ei * ki * q0**2 * 4) / x
        + ei**2 * q0**3 * 4
        - e0**2 * 4 / q0,
    )
    specs["III-D7a"] = PainleveSpec(
        "III-D7a",
        "q",
        q1**2 / q0
        - q1 / x
        + (e0 * (k0 + 1) - ki * q0**2) * 4 / x
        - e0**2 * 4 / q0,
    )
    specs["III-D7b"] = PainleveSpec(
        "III-D7b",
        "q",
        q1**2 / q0 - q1 / x + (k0 - ki * ei * q0**2) * 4 / x + ei**2 * q0**3 * 4,
    )
    specs["III-D8"] = PainleveSpec(
        "III-D8", "q", q1**2 / q0 - q0 / x + q0**2 / x**2 - RationalFn.const(1) / x
    )
    # P_IV with alpha = 1 - kappa0/2 + 2 kappainf, beta = -kappa0^2/2
    a4 = RationalFn.const(1) - k0 / 2 + ki * 2
    b4 = -(k0**2) / 2
    specs["IV"] = PainleveSpec(
        "IV",
        "q",
        q1**2 / (q0 * 2)
        + q0**3 * mpq(3, 2)
        + x * q0**2 * 4
        + (x**2 - a4) * q0 * 2
        + b4 / q0,
    )
    # P_V with alpha=(k0+kt)^2/2 - 2 kappa, beta=-k0^2/2, gamma=-eta(kt+1),
    # delta=-eta^2/2
    a5 = (k0 + kt) ** 2 / 2 - kap * 2
    b5 = -(k0**2) / 2
    g5 = -eta * (kt + 1)
    d5 = -(eta**2) / 2
    one = RationalFn.const(1)
    specs["V"] = PainleveSpec(
        "V",
        "q",
        (one / (q0 * 2) + one / (q0 - 1)) * q1**2
        - q1 / x
        + (q0 - 1) ** 2 / x**2 * (a5 * q0 + b5 / q0)
        + g5 * q0 / x
        + d5 * q0 * (q0 + 1) / (q0 - 1),
    )
    # P_VI with alpha=(k0+k1+kt-1)^2/2 - 2 kappa, beta=-k0^2/2, gamma=k1^2/2,
    # delta=(1-kt^2)/2
    a6 = (k0 + k1p + kt - 1) ** 2 / 2 - kap * 2
    b6 = -(k0**2) / 2
    g6 = k1p**2 / 2
    d6 = (one - kt**2) / 2
    specs["VI"] = PainleveSpec(
        "VI",
        "q",
        (one / q0 + one / (q0 - 1) + one / (q0 - x)) * q1**2 / 2
        - (one / x + one / (x - 1) + one / (q0 - x)) * q1
        + q0 * (q0 - 1) * (q0 - x) / (x**2 * (x - 1) ** 2)
        * (a6 + b6 * x / q0**2 + g6 * (x - 1) / (q0 - 1) ** 2 + d6 * x * (x - 1) / (q0 - x) ** 2),
    )
    specs["qsi-I"] = PainleveSpec("qsi-I", "q", kq * q0**4 + x)
    return specs


STANDARD_SPECS = _standard_specs()


def get_spec(name: str) -> PainleveSpec:
    try:
        return STANDARD_SPECS[name]
    except KeyError:
        raise KeyError(
            f"unknown equation id {name!r}; known: {sorted(STANDARD_SPECS)}"
        ) from None


def custom_spec(fname: str, rhs: RationalFn, id: str = "custom") -> PainleveSpec:
    return PainleveSpec(id, fname, rhs)
