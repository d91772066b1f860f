"""Symbols and the global variable ordering.

Four kinds of symbols occur in this package:

* affine chart variables (y, z, u0, V3, ...),
* the independent variable x,
* jet symbols q, q', q'', ... of named coefficient functions,
* constant parameters (alpha, kappa0, eta, a1, ...).

The global monomial ordering is graded lexicographic with the variable
classes ranked  affine < x < jets (by order, then family name) < parameters.
Symbols are interned: structural identity of (kind, name, order) gives the
same symbol object id, which the polynomial layer uses as a cheap key.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

AFFINE = 0
INDEP = 1
JET = 2
PARAM = 3

DEFAULT_JET_CEILING = 8

_lock = threading.Lock()
_jet_ceiling = DEFAULT_JET_CEILING


class JetCeilingError(Exception):
    """A jet symbol beyond the configured maximum order was requested."""


def jet_ceiling() -> int:
    return _jet_ceiling


def set_jet_ceiling(n: int) -> None:
    global _jet_ceiling
    if n < 4:
        raise ValueError("jet ceiling must be at least 4")
    with _lock:
        _jet_ceiling = n


@dataclass(frozen=True)
class Symbol:
    kind: int
    name: str
    order: int = 0

    @property
    def sort_key(self):
        if self.kind == JET:
            return (JET, self.order, self.name)
        return (self.kind, 0, self.name)

    def __str__(self):
        if self.kind != JET:
            return self.name
        if self.order == 0:
            return self.name
        if self.order <= 3:
            return self.name + "'" * self.order
        return f"{self.name}^({self.order})"

    __repr__ = __str__


# Interning registry: symbol -> small integer id, plus id-indexed tables.
_ids: dict[Symbol, int] = {}
_by_id: list[Symbol] = []
_keys: list[tuple] = []


def sid(sym: Symbol) -> int:
    i = _ids.get(sym)
    if i is None:
        with _lock:
            i = _ids.get(sym)
            if i is None:
                i = len(_by_id)
                _by_id.append(sym)
                _keys.append(sym.sort_key)
                _ids[sym] = i
    return i


def symbol_of(i: int) -> Symbol:
    return _by_id[i]


def key_of(i: int) -> tuple:
    return _keys[i]


def affine(name: str) -> Symbol:
    return Symbol(AFFINE, name)


def indep() -> Symbol:
    return Symbol(INDEP, "x")


X = indep()


def param(name: str) -> Symbol:
    return Symbol(PARAM, name)


def jet(fname: str, order: int = 0) -> Symbol:
    if order < 0:
        raise ValueError("jet order must be non-negative")
    if order > _jet_ceiling:
        raise JetCeilingError(
            f"jet {fname}^({order}) exceeds the configured ceiling {_jet_ceiling}"
        )
    return Symbol(JET, fname, order)
