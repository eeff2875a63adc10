"""Desk-scale computations for local quaternionic torus actions."""
from .autgroup import SignedPermAut, enumerate_aut
from .basecomplex import BaseComplex, Chart, Overlap, affine_compatibility, strata, validate_base
from .cech import AutCocycle, Cochain0, TorusCocycle, check_cocycle, coboundary_aut, coboundary_torus, cohomologous
from .charpair import CharacteristicPair, ModelPoint, pair_isomorphic, unimodularity, validate_pair
from .config import RunConfig
from .euler import ActionData, classify, euler_vanishes, extract, realize
from .quatcore import InputError, ResourceLimitError, TorusElement, exp_su2

__all__ = [
    "ActionData", "AutCocycle", "BaseComplex", "CharacteristicPair", "Chart", "Cochain0", "InputError",
    "ModelPoint", "Overlap", "ResourceLimitError", "RunConfig", "SignedPermAut", "TorusCocycle", "TorusElement",
    "affine_compatibility", "check_cocycle", "classify", "coboundary_aut", "coboundary_torus", "cohomologous",
    "enumerate_aut", "euler_vanishes", "exp_su2", "extract", "pair_isomorphic", "realize", "strata",
    "unimodularity", "validate_base", "validate_pair",
]
