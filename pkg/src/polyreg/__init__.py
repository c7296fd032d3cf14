"""Regular and universal (shifted) m-gonal forms: exact arithmetic, p-adic
local representation, Watson-style lambda transformations, and bounded
regularity / universality search."""

from polyreg.polynumber import (
    Domain,
    QuadraticDecomposition,
    ShiftedForm,
    count_shifted_types,
    evaluate_form,
    is_primitive,
    polygonal,
    primitive_rescale,
    quadratic_decomposition,
    same_type,
    shifted_polygonal,
)

__version__ = "0.1.0"

__all__ = [
    "Domain",
    "QuadraticDecomposition",
    "ShiftedForm",
    "count_shifted_types",
    "evaluate_form",
    "is_primitive",
    "polygonal",
    "primitive_rescale",
    "quadratic_decomposition",
    "same_type",
    "shifted_polygonal",
]
