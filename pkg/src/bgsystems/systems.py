"""Planar systems, Hamiltonian construction, second-order reduction, orbit
points, and the type I / type II transformation factories."""

from __future__ import annotations

from dataclasses import dataclass, field

from .symcore import (
    AFFINE,
    JET,
    PARAM,
    DomainError,
    Poly,
    RationalFn,
    Symbol,
    X,
    affine,
    jet,
)
from . import verifier
from .verifier import PainleveSpec


def _rf(e) -> RationalFn:
    r = RationalFn._coerce(e)
    if r is None:
        raise TypeError(f"cannot coerce {e!r} to a rational function")
    return r


@dataclass(frozen=True)
class PlanarSystem:
    chart: str
    vars: tuple[Symbol, Symbol]
    rhs: tuple[RationalFn, RationalFn]
    jets: frozenset = frozenset()
    params: frozenset = frozenset()

    def __post_init__(self):
        allowed = set(self.vars)
        for e in self.rhs:
            for s in e.symbols():
                if s.kind == AFFINE and s not in allowed:
                    raise ValueError(
                        f"rhs of chart {self.chart} contains foreign variable {s}"
                    )

    @property
    def rhs_y(self) -> RationalFn:
        return self.rhs[0]

    @property
    def rhs_z(self) -> RationalFn:
        return self.rhs[1]

    def rename_vars(self, new_vars: tuple[Symbol, Symbol], chart: str | None = None):
        sub = {self.vars[0]: RationalFn.var(new_vars[0]),
               self.vars[1]: RationalFn.var(new_vars[1])}
        return PlanarSystem(
            chart=chart or self.chart,
            vars=new_vars,
            rhs=(self.rhs[0].substitute(sub), self.rhs[1].substitute(sub)),
            jets=self.jets,
            params=self.params,
        )

    def describe(self) -> str:
        y, z = self.vars
        return f"{y}' = {self.rhs[0]}\n{z}' = {self.rhs[1]}"


def make_system(chart, vars, rhs_y, rhs_z, jets=(), params=()) -> PlanarSystem:
    return PlanarSystem(
        chart=chart,
        vars=vars,
        rhs=(_rf(rhs_y), _rf(rhs_z)),
        jets=frozenset(jets),
        params=frozenset(params),
    )


@dataclass(frozen=True)
class HamiltonianSpec:
    name: str
    H: RationalFn
    vars: tuple[Symbol, Symbol]
    params: frozenset = frozenset()
    parameter_relations: tuple = ()  # ((Symbol, RationalFn), ...)


def from_hamiltonian(h: HamiltonianSpec, jets=()) -> PlanarSystem:
    """Canonical equations: y' = dH/dz, z' = -dH/dy."""
    y, z = h.vars
    return PlanarSystem(
        chart=f"({y},{z})",
        vars=h.vars,
        rhs=(h.H.partial(z), -h.H.partial(y)),
        jets=frozenset(jets),
        params=h.params,
    )


@dataclass(frozen=True)
class SecondOrderReduction:
    """y'' = rhs(q, q'; x) for the first chart variable, plus the solved
    z = h(q, q'; x) used to build orbit points."""

    fname: str
    rhs: RationalFn  # in jets of fname, x, parameters and foreign jets
    h: RationalFn
    residual: Poly  # numerator of q'' - rhs, content-normalized

    def spec(self) -> PainleveSpec:
        return PainleveSpec(f"reduction[{self.fname}]", self.fname, self.rhs)


def second_order_reduction(s: PlanarSystem, fname: str = "q") -> SecondOrderReduction:
    """Solve the first equation for z, substitute into the second.

    Requires rhs_y of degree exactly one in z.  Returned expressions use the
    jet family `fname` for the eliminated y-variable.
    """
    y, z = s.vars
    F, G = s.rhs
    B = F.partial(z)
    if B.is_zero():
        raise DomainError(f"rhs of {y}' does not involve {z}")
    if B.has_symbol(z):
        raise DomainError(f"rhs of {y}' is not linear in {z}")
    q0 = RationalFn.var(jet(fname, 0))
    q1 = RationalFn.var(jet(fname, 1))
    A = F - B * RationalFn.var(z)
    h = ((q1 - A.substitute({y: q0})) / B.substitute({y: q0}))
    # y'' along the flow: F_x + F_y F + F_z G, then z -> h, y -> q.
    ddy = F.dx_total(allow_affine=True) + F.partial(y) * F + F.partial(z) * G
    rhs = ddy.substitute({y: q0, z: h})
    residual = verifier.condition_normal(RationalFn.var(jet(fname, 2)) - rhs)
    return SecondOrderReduction(fname=fname, rhs=rhs, h=h, residual=residual)


@dataclass(frozen=True)
class OrbitPoint:
    fname: str
    coords: tuple[RationalFn, RationalFn]
    reduction: SecondOrderReduction

    def __post_init__(self):
        if self.coords[0] != RationalFn.var(jet(self.fname, 0)):
            raise ValueError("first orbit coordinate must be the order-0 jet")


def orbit_point(s: PlanarSystem, fname: str = "q") -> OrbitPoint:
    red = second_order_reduction(s, fname)
    return OrbitPoint(
        fname=fname,
        coords=(RationalFn.var(jet(fname, 0)), red.h),
        reduction=red,
    )


def _reduce_jets(e: RationalFn, red: SecondOrderReduction) -> RationalFn:
    """Rewrite jets of red.fname of order >= 2 using its equation."""
    top = e.jet_order(red.fname)
    if top < 2:
        return e
    rewrites = verifier.prolong(red.spec(), top - 2)
    return e.substitute(rewrites)


_TY, _TZ = affine("y~"), affine("z~")


def _transformed(s: PlanarSystem, point: OrbitPoint, fwd, inv, kind: str) -> PlanarSystem:
    from .geometry import BirationalMap, push_forward

    m = BirationalMap(kind, s.vars, (_TY, _TZ), fwd, inv)
    res = push_forward(s, m)
    rhs = tuple(_reduce_jets(e, point.reduction) for e in res.rhs)
    jet_names = {sym.name for e in rhs for sym in e.symbols() if sym.kind == JET}
    params = s.params | {
        sym for e in rhs for sym in e.symbols() if sym.kind == PARAM
    }
    out = PlanarSystem(
        chart="(y,z)",
        vars=(_TY, _TZ),
        rhs=rhs,
        jets=frozenset(jet_names),
        params=params,
    )
    return out.rename_vars((affine("y"), affine("z")), chart="(y,z)")


def apply_type1(
    s: PlanarSystem,
    variant: str,
    point: OrbitPoint | None = None,
    scale: tuple | None = None,
) -> PlanarSystem:
    """Blow-up-like change of variables along an orbit point.

    The four variants substitute, with h the second orbit coordinate:
      a: y_J = a1*y + q,   z_J = a2*y*z + h
      b: y_J = a1*z + q,   z_J = a2*y*z + h
      c: y_J = a1*y*z + q, z_J = a2*y + h
      d: y_J = a1*y*z + q, z_J = a2*z + h
    Jets of order >= 2 of the orbit function are rewritten via the source
    system's second-order equation (q solves it on the orbit).
    """
    if point is None:
        point = orbit_point(s)
    if scale is None:
        a1 = a2 = RationalFn.const(1)
    else:
        a1, a2 = _rf(scale[0]), _rf(scale[1])
        if a1.is_zero() or a2.is_zero():
            raise DomainError("degenerate scale in a type I transformation")
    for c in point.coords:
        if c.has_affine():
            raise ValueError("orbit point coordinates must be coefficient-only")
    q, h = point.coords
    Y, Z = RationalFn.var(_TY), RationalFn.var(_TZ)
    yJ, zJ = (RationalFn.var(v) for v in s.vars)
    if variant == "a":
        inv = (a1 * Y + q, a2 * Y * Z + h)
        fwd = ((yJ - q) / a1, a1 * (zJ - h) / (a2 * (yJ - q)))
    elif variant == "b":
        inv = (a1 * Z + q, a2 * Y * Z + h)
        fwd = (a1 * (zJ - h) / (a2 * (yJ - q)), (yJ - q) / a1)
    elif variant == "c":
        inv = (a1 * Y * Z + q, a2 * Y + h)
        fwd = ((zJ - h) / a2, a2 * (yJ - q) / (a1 * (zJ - h)))
    elif variant == "d":
        inv = (a1 * Y * Z + q, a2 * Z + h)
        fwd = (a2 * (yJ - q) / (a1 * (zJ - h)), (zJ - h) / a2)
    else:
        raise ValueError("type I variant must be one of a, b, c, d")
    return _transformed(s, point, fwd, inv, "type1")


def apply_type2(
    s: PlanarSystem, variant: str, point: OrbitPoint | None = None
) -> PlanarSystem:
    """Shift-like change of variables along an orbit point.

    Variants a, b use a point of the system itself; c, d take their point on
    the orbit of a different system (the mixed case), whose second-order
    equation then rewrites the higher jets:
      a: y_J = y + q, z_J = z + h      b: y_J = z + q, z_J = y + h
      c: y_J = y + q, z_J = z + h_K    d: y_J = z + q, z_J = y + h_K
    """
    if point is None:
        point = orbit_point(s)
    q, h = point.coords
    Y, Z = RationalFn.var(_TY), RationalFn.var(_TZ)
    yJ, zJ = (RationalFn.var(v) for v in s.vars)
    if variant in ("a", "c"):
        inv = (Y + q, Z + h)
        fwd = (yJ - q, zJ - h)
    elif variant in ("b", "d"):
        inv = (Z + q, Y + h)
        fwd = (zJ - h, yJ - q)
    else:
        raise ValueError("type II variant must be one of a, b, c, d")
    return _transformed(s, point, fwd, inv, "type2")
