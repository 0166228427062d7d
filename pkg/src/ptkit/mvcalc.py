"""Public surface of the exact multivector/differential-form calculus.

Everything here is re-exported from the implementation modules so callers
can work against one import path: polynomial scalars, multivectors, forms,
expression trees, and the graded operations that tie them together.
"""

from .calculus import (
    DiffForm,
    Multivector,
    contract_form,
    exterior_derivative,
    interior_product,
    lie_derivative,
    merge_keys,
    multivector_power,
    schouten_bracket,
    wedge,
)
from .expr import (
    Expression,
    ExpressionSyntaxError,
    TrigNotAllowedError,
    UnknownVariableError,
    differentiate,
    evaluate,
    parse_expr,
    substitute,
)
from .exprforms import ExprForm, poly_to_expr, pullback, pullback_diff_form
from .poly import PolyScalar, parse_poly, poly_from_expr

__all__ = [
    "DiffForm",
    "ExprForm",
    "Expression",
    "ExpressionSyntaxError",
    "Multivector",
    "PolyScalar",
    "TrigNotAllowedError",
    "UnknownVariableError",
    "contract_form",
    "differentiate",
    "evaluate",
    "exterior_derivative",
    "interior_product",
    "lie_derivative",
    "merge_keys",
    "multivector_power",
    "parse_expr",
    "parse_poly",
    "poly_from_expr",
    "poly_to_expr",
    "pullback",
    "pullback_diff_form",
    "schouten_bracket",
    "substitute",
    "wedge",
]
