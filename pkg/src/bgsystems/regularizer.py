"""Base-point detection, the blow-up cascade driver, regularity testing and
extraction of regularizing conditions.

A base point is a point where some right-hand side becomes 0/0 (numerator and
denominator of the reduced component both vanish).  The driver blows up every
base point of the compactified system, follows each infinitely-near chain of
base points on the successive exceptional curves, branching where a fiber
equation has several roots, and stops a branch when a final chart is regular
on the last exceptional curve, when a differential condition on the
coefficient functions provably restores regularity, or at the depth limit.

Chart handling mirrors the hand computations this engine reproduces: each
cascade carries a "style" (u-charts with centers (0, c), or U-charts with
centers (c, 0)); a point visible only in the opposite chart forces a switch
through the origin of that chart, after which the next nonzero-fiber point is
blown up in the inverted chart (U, V) -> (1/U, V) (the "hat" step).  Where a
catalog entry's published coordinate frames deviate from this automaton, the
entry carries an explicit override script; the intrinsic outputs (branch
structure, conditions, statuses) do not depend on these choices.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .symcore import (
    JET,
    Poly,
    RationalFn,
    RF_ZERO,
    Symbol,
    factor_univariate,
    gcd_poly,
    jet,
)
from .symcore.gcd import content_wrt
from .symcore.rational import atomize
from .systems import PlanarSystem
from .geometry import blow_up, chart_inversion, p2_charts
from . import verifier

INF = "inf"  # marker for the fiber point at infinity of the scanned chart


@dataclass(frozen=True)
class BasePoint:
    chart: str
    coords: tuple  # displayed coordinate pair (RationalFn, RationalFn)
    fiber: object  # canonical fiber value on the line at infinity, INF, or
    # ("affine", a, b) for points in the finite chart
    style: str  # 'u' or 'U'
    index: int

    def display(self) -> str:
        a, b = self.coords
        return f"({self.chart}) = ({a}, {b})"


@dataclass
class CascadeStep:
    chart: str
    center: tuple
    inversion: bool = False

    def display(self) -> str:
        a, b = self.center
        tail = " [inversion]" if self.inversion else ""
        return f"({self.chart}) center=({a}, {b}){tail}"


@dataclass
class Cascade:
    label: str
    root: BasePoint
    steps: list = field(default_factory=list)
    status: str = "open"  # regular | conditioned | unresolved | obstructed
    conditions: list = field(default_factory=list)  # normalized Poly
    obstructions: list = field(default_factory=list)
    final_charts: tuple = ()
    note: str = ""

    def centers(self):
        return [s.center for s in self.steps]


@dataclass
class RegularizationReport:
    system: PlanarSystem
    base_points: list
    cascades: list
    max_depth: int

    @property
    def conditions(self):
        out = []
        for c in self.cascades:
            for p in c.conditions:
                if all(p != q for q in out):
                    out.append(p)
        return out

    @property
    def obstructions(self):
        return [o for c in self.cascades for o in c.obstructions]

    @property
    def status(self) -> str:
        if any(c.status == "obstructed" for c in self.cascades):
            return "obstructed"
        if any(c.status == "unresolved" for c in self.cascades):
            return "unresolved"
        if any(c.status == "conditioned" for c in self.cascades):
            return "conditioned"
        return "regular"

    def exit_code(self) -> int:
        return {"regular": 0, "conditioned": 0, "unresolved": 2, "obstructed": 3}[
            self.status
        ]

    def transcript(self) -> str:
        lines = [f"system: {self.system.chart}"]
        if not self.base_points:
            lines.append("no base points")
        for bp in self.base_points:
            lines.append(f"b_{bp.index}: {bp.display()}")
        for c in self.cascades:
            lines.append(f"cascade {c.label}: root b_{c.root.index}")
            for s in c.steps:
                lines.append(f"  {c.label}: {s.display()}")
            line = f"  {c.label}: status={c.status}"
            if c.note:
                line += f" ({c.note})"
            lines.append(line)
            for p in c.conditions:
                lines.append(f"  {c.label}: condition {p} = 0")
            for o in c.obstructions:
                lines.append(f"  {c.label}: obstruction {o}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# point detection
# ---------------------------------------------------------------------------


def _strict_fiber_roots(s: PlanarSystem, dvar: Symbol, fvar: Symbol):
    """Fiber values c where some component of s is 0/0 at (dvar, fvar)=(0, c).

    Returns (roots, unsplit): deduplicated root values plus any fiber factors
    that resisted splitting (reported, never guessed).
    """
    roots: list[RationalFn] = []
    unsplit: list[Poly] = []
    zero = {dvar: Poly.zero()}
    for comp in s.rhs:
        den0 = comp.den.subs_poly(zero)
        num0 = comp.num.subs_poly(zero)
        if den0.is_zero():
            if num0.is_zero():
                raise ValueError(
                    f"component indeterminate along the whole divisor in {s.chart}"
                )
            g = num0
        else:
            g = gcd_poly(den0, num0)
        if not g.has_symbol(fvar):
            continue
        fu = factor_univariate(g, fvar)
        for r, _ in fu.roots:
            if all(r != r0 for r0 in roots):
                roots.append(r)
        for f, _ in fu.unsplit:
            if all(f != f0 for f0 in unsplit):
                unsplit.append(f)
    return roots, unsplit


def _origin_is_base_point(s: PlanarSystem) -> bool:
    zero = {s.vars[0]: Poly.zero(), s.vars[1]: Poly.zero()}
    for comp in s.rhs:
        if comp.den.subs_poly(zero).is_zero() and comp.num.subs_poly(zero).is_zero():
            return True
    return False


def find_base_points(s: PlanarSystem, hints=()) -> list:
    """Base points of the compactified system.

    The line at infinity is scanned completely through both charts; affine
    points come from the origin check plus explicit hints.
    """
    pts = []
    idx = 1
    y, z = s.vars
    if _origin_is_base_point(s):
        pts.append(
            BasePoint(
                f"({y},{z})", (RF_ZERO, RF_ZERO), ("affine", RF_ZERO, RF_ZERO), "u", idx
            )
        )
        idx += 1
    for a, b in hints:
        a = RationalFn._coerce(a)
        b = RationalFn._coerce(b)
        pts.append(BasePoint(f"({y},{z})", (a, b), ("affine", a, b), "u", idx))
        idx += 1
    su, sU = p2_charts(s)
    u0, v0 = su.vars
    U0, V0 = sU.vars
    roots, unsplit = _strict_fiber_roots(su, u0, v0)
    if unsplit:
        raise ValueError(f"unsplittable base-point factor at infinity: {unsplit}")
    entries = []
    for r in roots:
        if r.is_zero():
            entries.append(
                ((0, ""), BasePoint(f"({u0},{v0})", (RF_ZERO, RF_ZERO), r, "u", 0))
            )
        else:
            entries.append(
                (
                    (2, str(r)),
                    BasePoint(f"({U0},{V0})", (r.reciprocal(), RF_ZERO), r, "U", 0),
                )
            )
    if _origin_is_base_point(sU):
        entries.append(((1, ""), BasePoint(f"({U0},{V0})", (RF_ZERO, RF_ZERO), INF, "U", 0)))
    entries.sort(key=lambda e: e[0])
    for _, bp in entries:
        pts.append(BasePoint(bp.chart, bp.coords, bp.fiber, bp.style, idx))
        idx += 1
    return pts


# ---------------------------------------------------------------------------
# regularity and conditions
# ---------------------------------------------------------------------------


def is_regular_on_divisor(s: PlanarSystem, dvar: Symbol):
    """'regular' when no reduced denominator is divisible by the divisor
    variable; otherwise the polar Laurent coefficients, by component."""
    vpoly = Poly.var(dvar)
    polar = []
    for k, comp in enumerate(s.rhs):
        if comp.den.divisible_by(vpoly):
            polar.append((k, comp.laurent(dvar, -1)))
    return "regular" if not polar else polar


def extract_condition(polar_part, fiber_var: Symbol):
    """Regularizing conditions from a polar part: for each negative-order
    coefficient take the numerator content in the fiber variable, keep the
    jet-bearing factors, and normalize.  Jet-free contents are obstructions,
    not conditions."""
    conditions: list[Poly] = []
    obstructions: list[Poly] = []
    for _, coeffs in polar_part:
        for order, c in coeffs:
            if order >= 0:
                continue
            cont, _ = content_wrt(c.num, fiber_var)
            _, atoms = atomize(cont)
            jet_part = Poly.const(1)
            for a, m in atoms:
                if any(sym.kind == JET for sym in a.symbols()):
                    jet_part = jet_part * a**m
            if jet_part.is_const():
                obstructions.append(cont.primitive()[1])
            else:
                p = verifier.condition_normal(RationalFn.from_poly(jet_part))
                if all(p != q for q in conditions):
                    conditions.append(p)
    return conditions, obstructions


def condition_rewrites(cond: Poly, upto: int) -> dict:
    """Solve a condition for its top jet and prolong to order `upto`."""
    top_sym = None
    for sym in cond.symbols():
        if sym.kind == JET and (top_sym is None or sym.order > top_sym.order):
            top_sym = sym
    if top_sym is None:
        raise ValueError("condition carries no jets")
    uni = cond.as_univariate(top_sym)
    if max(uni.keys()) != 1:
        raise ValueError(f"condition is not linear in its top jet {top_sym}")
    A, B = uni[1], uni.get(0, Poly.zero())
    rhs = RationalFn.fraction(-B, A)
    rewrites = {top_sym: rhs}
    cur = rhs
    for k in range(top_sym.order + 1, upto + 1):
        cur = cur.dx_total().substitute({top_sym: rhs})
        rewrites[jet(top_sym.name, k)] = cur
    return rewrites


def regular_under_condition(polar_part, cond: Poly) -> bool:
    """Does rewriting the top jet by the condition kill every polar term?"""
    if polar_part == "regular":
        return True
    need = 0
    for _, coeffs in polar_part:
        for order, c in coeffs:
            if order < 0:
                need = max(need, c.jet_order())
    try:
        rw = condition_rewrites(cond, need)
    except ValueError:
        return False
    for _, coeffs in polar_part:
        for order, c in coeffs:
            if order < 0 and not c.substitute(rw).is_zero():
                return False
    return True


# ---------------------------------------------------------------------------
# the cascade driver
# ---------------------------------------------------------------------------


class _Frame:
    """State of one branch between blow-ups."""

    __slots__ = ("s_u", "s_U", "style", "interrupted", "depth", "steps")

    def __init__(self, s_u, s_U, style, interrupted, depth, steps):
        self.s_u = s_u
        self.s_U = s_U
        self.style = style
        self.interrupted = interrupted
        self.depth = depth
        self.steps = steps

    def clone(self, steps):
        return _Frame(self.s_u, self.s_U, self.style, self.interrupted, self.depth, steps)


def _names(depth: int, tag: str):
    return (f"u{depth}{tag}", f"v{depth}{tag}", f"U{depth}{tag}", f"V{depth}{tag}")


class _RootTask:
    def __init__(self, bp, chart_sys, center, style, max_depth, overrides):
        self.bp = bp
        self.chart_sys = chart_sys
        self.center = center
        self.style = style
        self.max_depth = max_depth
        self.overrides = overrides
        self.cascades: list[Cascade] = []
        self.local = 0

    def run(self):
        self.local += 1
        casc = Cascade(label=f"b_{self.bp.index}.{self.local}", root=self.bp)
        self.cascades.append(casc)
        tag = f"_{self.bp.index}_{self.local}"
        s_u, s_U, _ = blow_up(self.chart_sys, self.center, _names(1, tag))
        fr = _Frame(s_u, s_U, self.style, False, 1, casc.steps)
        self._descend(fr, casc, tag)
        return self.cascades

    # -- driver core --------------------------------------------------------

    def _descend(self, fr: _Frame, casc: Cascade, tag: str):
        while True:
            u, v = fr.s_u.vars
            U, V = fr.s_U.vars
            roots, unsplit = _strict_fiber_roots(fr.s_u, u, v)
            inf_pt = _origin_is_base_point(fr.s_U)
            if unsplit:
                casc.status = "unresolved"
                casc.note = f"unsplittable fiber factor {[str(x) for x in unsplit]}"
                return
            if not roots:
                polar_u = is_regular_on_divisor(fr.s_u, u)
                polar_U = is_regular_on_divisor(fr.s_U, V)
                if polar_u == "regular" or polar_U == "regular":
                    casc.status = "regular"
                    casc.final_charts = (fr.s_u.chart, fr.s_U.chart)
                    return
                if self._close_with_condition(fr, casc, polar_u, polar_U, v, U):
                    return
                if inf_pt and fr.depth < self.max_depth:
                    self._blow(fr, casc, INF, tag)
                    continue
                if casc.obstructions:
                    casc.status = "obstructed"
                else:
                    casc.status = "unresolved"
                    casc.note = (
                        f"depth limit {self.max_depth} reached"
                        if fr.depth >= self.max_depth
                        else "no base points left and no chart regular"
                    )
                return
            if fr.depth >= self.max_depth:
                casc.status = "unresolved"
                casc.note = f"depth limit {self.max_depth} reached"
                return
            branch_pts = list(roots)
            if inf_pt:
                branch_pts.append(INF)
            for extra in branch_pts[1:]:
                self.local += 1
                sub = Cascade(label=f"b_{self.bp.index}.{self.local}", root=self.bp)
                sub.steps = list(casc.steps)
                self.cascades.append(sub)
                sub_tag = f"_{self.bp.index}_{self.local}"
                sub_fr = fr.clone(sub.steps)
                self._blow(sub_fr, sub, extra, sub_tag)
                self._descend(sub_fr, sub, sub_tag)
            self._blow(fr, casc, branch_pts[0], tag)

    def _close_with_condition(self, fr, casc, polar_u, polar_U, v_fiber, U_fiber):
        found = []
        obstructions = []
        for polar, fiber in ((polar_u, v_fiber), (polar_U, U_fiber)):
            if polar == "regular":
                continue
            conds, obs = extract_condition(polar, fiber)
            obstructions.extend(obs)
            for c in conds:
                if regular_under_condition(polar, c):
                    if all(c != c0 for c0 in found):
                        found.append(c)
        if found:
            casc.status = "conditioned"
            casc.conditions = found
            casc.final_charts = (fr.s_u.chart, fr.s_U.chart)
            return True
        casc.obstructions = [RationalFn.from_poly(o) for o in obstructions]
        return False

    def _blow(self, fr: _Frame, casc: Cascade, pt, tag: str):
        u, v = fr.s_u.vars
        U, V = fr.s_U.vars
        depth = fr.depth + 1
        names = _names(depth, tag)
        mode = self.overrides.get((casc.label, fr.depth))

        if pt is INF:
            casc.steps.append(CascadeStep(f"{U},{V}", (RF_ZERO, RF_ZERO)))
            s_u, s_U, _ = blow_up(fr.s_U, (RF_ZERO, RF_ZERO), names)
            if fr.style == "u":
                fr.interrupted = True
        else:
            c = pt
            if fr.style == "U" and not c.is_zero():
                if mode == "u":
                    casc.steps.append(CascadeStep(f"{u},{v}", (RF_ZERO, c)))
                    s_u, s_U, _ = blow_up(fr.s_u, (RF_ZERO, c), names)
                    fr.style = "u"
                else:
                    casc.steps.append(
                        CascadeStep(f"{U},{V}", (c.reciprocal(), RF_ZERO))
                    )
                    s_u, s_U, _ = blow_up(fr.s_U, (c.reciprocal(), RF_ZERO), names)
            elif fr.style == "U" and c.is_zero():
                casc.steps.append(CascadeStep(f"{u},{v}", (RF_ZERO, RF_ZERO)))
                s_u, s_U, _ = blow_up(fr.s_u, (RF_ZERO, RF_ZERO), names)
                if mode != "stayU":
                    fr.style = "u"
            else:  # u-style
                if fr.interrupted and not c.is_zero() and mode != "plain":
                    hat_names = (f"hU{fr.depth}{tag}", f"hV{fr.depth}{tag}")
                    s_hat = chart_inversion(fr.s_U, "first", hat_names)
                    casc.steps.append(
                        CascadeStep(
                            f"{hat_names[0]},{hat_names[1]}", (c, RF_ZERO), inversion=True
                        )
                    )
                    s_u, s_U, _ = blow_up(s_hat, (c, RF_ZERO), names)
                    fr.interrupted = False
                    fr.style = "U"
                else:
                    casc.steps.append(CascadeStep(f"{u},{v}", (RF_ZERO, c)))
                    s_u, s_U, _ = blow_up(fr.s_u, (RF_ZERO, c), names)
        fr.s_u, fr.s_U, fr.depth = s_u, s_U, depth


def regularize(
    s: PlanarSystem,
    max_depth: int = 12,
    hints=(),
    overrides: dict | None = None,
    threads: int = 1,
) -> RegularizationReport:
    """Run the full resolution driver on a planar system.

    `overrides` maps (cascade-label, depth) to a chart-choice token among
    {"u", "stayU", "plain"} for junctures where the reproduced coordinate
    frames differ from the default chart automaton.
    """
    overrides = overrides or {}
    base_points = find_base_points(s, hints=hints)
    tasks = []
    su_sU = None
    for bp in base_points:
        if isinstance(bp.fiber, tuple) and bp.fiber[0] == "affine":
            chart_sys = s
            center = (bp.fiber[1], bp.fiber[2])
            style = "u"
        else:
            if su_sU is None:
                su_sU = p2_charts(s)
            su, sU = su_sU
            if bp.fiber is INF:
                chart_sys, center, style = sU, (RF_ZERO, RF_ZERO), "U"
            elif bp.fiber.is_zero():
                chart_sys, center, style = su, (RF_ZERO, RF_ZERO), "u"
            else:
                chart_sys, center, style = sU, (bp.fiber.reciprocal(), RF_ZERO), "U"
        tasks.append(_RootTask(bp, chart_sys, center, style, max_depth, overrides))

    if threads > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda t: t.run(), tasks))
    else:
        results = [t.run() for t in tasks]

    cascades = []
    j = 0
    for res in results:
        for c in res:
            j += 1
            c.label = f"b_{c.root.index}^({j})"
            cascades.append(c)
    return RegularizationReport(
        system=s, base_points=base_points, cascades=cascades, max_depth=max_depth
    )
