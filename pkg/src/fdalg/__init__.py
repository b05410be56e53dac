"""Exact and numerical tools for amalgamated products of finite-dimensional algebras."""

from .core import (
    MultiMatrixAlgebra,
    StructuralError,
    TracialState,
    UnitalEmbedding,
    free_entropy_dimension,
    traces_compatible,
)
from .params import Enclosure, LevelSequence, factor_parameter_s, factor_parameter_t, fed_product
from .constructor import build_plan, verify_plan

__version__ = "0.1.0"

__all__ = [
    "MultiMatrixAlgebra",
    "StructuralError",
    "TracialState",
    "UnitalEmbedding",
    "free_entropy_dimension",
    "traces_compatible",
    "Enclosure",
    "LevelSequence",
    "factor_parameter_s",
    "factor_parameter_t",
    "fed_product",
    "build_plan",
    "verify_plan",
]
