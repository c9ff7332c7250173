"""Normal forms, one-sided kernels and Bass-Serre trees for amalgamated free products."""

from .amalgam import Amalgam, FactorGroup, NormalForm, Syllable
from .finite_groups import AmalgamSpec, FiniteAmalgam, FiniteGroup, builtin_spec
from .gamma import GAMMA, GammaAmalgam, parse_word, theta
from .portraits import Portrait

__version__ = "0.1.0"

__all__ = [
    "Amalgam",
    "AmalgamSpec",
    "FactorGroup",
    "FiniteAmalgam",
    "FiniteGroup",
    "GAMMA",
    "GammaAmalgam",
    "NormalForm",
    "Portrait",
    "Syllable",
    "builtin_spec",
    "parse_word",
    "theta",
]
