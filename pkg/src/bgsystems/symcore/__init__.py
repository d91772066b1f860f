"""Exact symbolic core: symbols, sparse polynomials, rational functions."""

from .symbols import (
    AFFINE,
    INDEP,
    JET,
    PARAM,
    DEFAULT_JET_CEILING,
    JetCeilingError,
    Symbol,
    X,
    affine,
    indep,
    jet,
    jet_ceiling,
    param,
    set_jet_ceiling,
)
from .poly import Poly
from .gcd import content_wrt, gcd_many, gcd_poly
from .rational import (
    DomainError,
    RF_ONE,
    RF_ZERO,
    RationalFn,
    UnivariateFactors,
    atomize,
    factor_univariate,
)

__all__ = [
    "AFFINE",
    "INDEP",
    "JET",
    "PARAM",
    "DEFAULT_JET_CEILING",
    "JetCeilingError",
    "Symbol",
    "X",
    "affine",
    "indep",
    "jet",
    "jet_ceiling",
    "param",
    "set_jet_ceiling",
    "Poly",
    "content_wrt",
    "gcd_many",
    "gcd_poly",
    "DomainError",
    "RF_ONE",
    "RF_ZERO",
    "RationalFn",
    "UnivariateFactors",
    "atomize",
    "factor_univariate",
]
