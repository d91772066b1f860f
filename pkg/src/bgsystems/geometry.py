"""P^2 chart atlas, blow-ups, chart inversions and push-forward of systems.

Push-forward is where the explicit x-dependence of the maps enters: the
coordinates of a blow-up center carry jet symbols of the coefficient
functions, so the chain rule generates their total x-derivatives.  That is
the mechanism by which q', q'' appear in transformed systems.
"""

from __future__ import annotations

from dataclasses import dataclass

from .symcore import Poly, RationalFn, Symbol, affine
from .systems import PlanarSystem


@dataclass(frozen=True)
class BirationalMap:
    kind: str  # P2-transition | blow-up-u-chart | blow-up-U-chart | inversion | type1 | type2
    src_vars: tuple[Symbol, Symbol]
    dst_vars: tuple[Symbol, Symbol]
    fwd: tuple[RationalFn, RationalFn]  # dst coordinates in terms of src
    inv: tuple[RationalFn, RationalFn]  # src coordinates in terms of dst

    def __post_init__(self):
        t1 = self.fwd[0].substitute(
            {self.src_vars[0]: self.inv[0], self.src_vars[1]: self.inv[1]}
        )
        t2 = self.fwd[1].substitute(
            {self.src_vars[0]: self.inv[0], self.src_vars[1]: self.inv[1]}
        )
        if t1 != RationalFn.var(self.dst_vars[0]) or t2 != RationalFn.var(
            self.dst_vars[1]
        ):
            raise ValueError(f"map {self.kind}: forward o inverse is not the identity")


@dataclass(frozen=True)
class ExceptionalDivisor:
    id: str
    u_chart: str  # chart where the divisor is {u = 0}
    u_var: Symbol
    U_chart: str  # chart where the divisor is {V = 0}
    V_var: Symbol
    parent_center: tuple[RationalFn, RationalFn]


def push_forward(s: PlanarSystem, m: BirationalMap, chart: str | None = None) -> PlanarSystem:
    """New right-hand sides: Jacobian of the forward map applied to the old
    field plus the explicit total x-derivative of the map, written in the
    destination coordinates."""
    s1, s2 = m.src_vars
    if set(s.vars) != {s1, s2}:
        raise ValueError("map source chart does not match system chart")
    F, G = s.rhs
    back = {s1: m.inv[0], s2: m.inv[1]}
    new_rhs = []
    for phi in m.fwd:
        e = phi.partial(s1) * F + phi.partial(s2) * G + phi.dx_total(allow_affine=True)
        new_rhs.append(e.substitute(back))
    return PlanarSystem(
        chart=chart or f"{s.chart}->{m.kind}",
        vars=m.dst_vars,
        rhs=(new_rhs[0], new_rhs[1]),
        jets=s.jets,
        params=s.params,
    )


def _v(sym: Symbol) -> RationalFn:
    return RationalFn.var(sym)


def p2_charts(
    s: PlanarSystem, names=("u0", "v0", "U0", "V0")
) -> tuple[PlanarSystem, PlanarSystem]:
    """Push-forward to the two charts at infinity of P^2:
    u0 = 1/y, v0 = z/y and U0 = y/z, V0 = 1/z."""
    y, z = s.vars
    u0, v0 = affine(names[0]), affine(names[1])
    U0, V0 = affine(names[2]), affine(names[3])
    m1 = BirationalMap(
        "P2-transition",
        (y, z),
        (u0, v0),
        (_v(y) ** -1, _v(z) / _v(y)),
        (_v(u0) ** -1, _v(v0) / _v(u0)),
    )
    m2 = BirationalMap(
        "P2-transition",
        (y, z),
        (U0, V0),
        (_v(y) / _v(z), _v(z) ** -1),
        (_v(U0) / _v(V0), _v(V0) ** -1),
    )
    return (
        push_forward(s, m1, chart=f"({names[0]},{names[1]})"),
        push_forward(s, m2, chart=f"({names[2]},{names[3]})"),
    )


def blow_up(
    s: PlanarSystem,
    center: tuple[RationalFn, RationalFn],
    names: tuple[str, str, str, str],
    divisor_id: str = "E",
):
    """Blow up the chart of s at the center (a, b).

    Returns (system in the (u,v) chart, system in the (U,V) chart, divisor).
    The center coordinates may contain x and jets but no chart variables.
    """
    a = RationalFn._coerce(center[0])
    b = RationalFn._coerce(center[1])
    if a.has_affine() or b.has_affine():
        raise ValueError("blow-up center must be a coefficient-only expression")
    w1, w2 = s.vars
    u, v = affine(names[0]), affine(names[1])
    U, V = affine(names[2]), affine(names[3])
    mu = BirationalMap(
        "blow-up-u-chart",
        (w1, w2),
        (u, v),
        (_v(w1) - a, (_v(w2) - b) / (_v(w1) - a)),
        (_v(u) + a, _v(u) * _v(v) + b),
    )
    mU = BirationalMap(
        "blow-up-U-chart",
        (w1, w2),
        (U, V),
        ((_v(w1) - a) / (_v(w2) - b), _v(w2) - b),
        (_v(U) * _v(V) + a, _v(V) + b),
    )
    sys_u = push_forward(s, mu, chart=f"({names[0]},{names[1]})")
    sys_U = push_forward(s, mU, chart=f"({names[2]},{names[3]})")
    div = ExceptionalDivisor(
        id=divisor_id,
        u_chart=sys_u.chart,
        u_var=u,
        U_chart=sys_U.chart,
        V_var=V,
        parent_center=(a, b),
    )
    return sys_u, sys_U, div


def chart_inversion(
    s: PlanarSystem, which: str, names: tuple[str, str]
) -> PlanarSystem:
    """Push-forward under (w1, w2) -> (1/w1, w2) or (w1, w2) -> (w1, 1/w2)."""
    w1, w2 = s.vars
    n1, n2 = affine(names[0]), affine(names[1])
    if which == "first":
        m = BirationalMap(
            "inversion",
            (w1, w2),
            (n1, n2),
            (_v(w1) ** -1, _v(w2)),
            (_v(n1) ** -1, _v(n2)),
        )
    elif which == "second":
        m = BirationalMap(
            "inversion",
            (w1, w2),
            (n1, n2),
            (_v(w1), _v(w2) ** -1),
            (_v(n1), _v(n2) ** -1),
        )
    else:
        raise ValueError("which must be 'first' or 'second'")
    return push_forward(s, m, chart=f"({names[0]},{names[1]})")
