"""Differential forms with closed-form expression coefficients.

``ExprForm`` mirrors ``DiffForm`` but carries :class:`~ptkit.expr.Expression`
coefficients and remembers its coordinate names, so it can represent pullbacks
along smooth (possibly trigonometric) parametrizations.  Exterior derivatives
are computed by exact AST differentiation; numeric evaluation happens only at
the very end, when a form is sampled at a point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Tuple

from .calculus import DiffForm, merge_keys
from .expr import (
    Expression,
    Num,
    Var,
    add,
    differentiate,
    evaluate,
    mul,
    pow_node,
    substitute,
)
from .poly import PolyScalar

Key = Tuple[int, ...]

_ZERO = Num(Fraction(0))
_ONE = Num(Fraction(1))


def poly_to_expr(poly: PolyScalar, names: Tuple[str, ...]) -> Expression:
    """Rewrite a polynomial as an expression tree in the given variable names."""
    if len(names) != poly.nvars:
        raise ValueError("name list does not match the number of variables")
    total: Expression = _ZERO
    for exponents, coeff in poly.sorted_terms():
        term: Expression = Num(coeff)
        for i, e in enumerate(exponents):
            if e:
                term = mul(term, pow_node(Var(names[i]), e))
        total = add(total, term)
    return total


@dataclass(frozen=True)
class ExprForm:
    names: Tuple[str, ...]
    degree: int
    terms: Dict[Key, Expression]

    def __post_init__(self) -> None:
        n = len(self.names)
        for key in self.terms:
            if len(key) != self.degree:
                raise ValueError(f"key {key} has wrong length for degree {self.degree}")
            if any(not 0 <= i < n for i in key):
                raise ValueError(f"key {key} out of range for {n} coordinates")
            if any(a >= b for a, b in zip(key, key[1:])):
                raise ValueError(f"key {key} is not strictly increasing")

    @classmethod
    def zero(cls, names: Tuple[str, ...], degree: int) -> "ExprForm":
        return cls(tuple(names), degree, {})

    @classmethod
    def from_terms(
        cls, names: Iterable[str], degree: int, terms: Mapping[Key, Expression]
    ) -> "ExprForm":
        kept = {key: expr for key, expr in terms.items() if expr != _ZERO}
        return cls(tuple(names), degree, kept)

    @classmethod
    def from_diff_form(cls, form: DiffForm, names: Iterable[str]) -> "ExprForm":
        names = tuple(names)
        terms = {key: poly_to_expr(coeff, names) for key, coeff in form.terms.items()}
        return cls.from_terms(names, form.degree, terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "ExprForm") -> "ExprForm":
        if self.names != other.names:
            raise ValueError("operands live on different coordinate systems")
        if self.degree != other.degree:
            if self.is_zero():
                return other
            if other.is_zero():
                return self
            raise ValueError("operands have different degrees")
        merged = dict(self.terms)
        for key, expr in other.terms.items():
            merged[key] = add(merged.get(key, _ZERO), expr)
        return ExprForm.from_terms(self.names, self.degree, merged)

    def __neg__(self) -> "ExprForm":
        return ExprForm.from_terms(
            self.names,
            self.degree,
            {key: mul(Num(Fraction(-1)), expr) for key, expr in self.terms.items()},
        )

    def __sub__(self, other: "ExprForm") -> "ExprForm":
        return self + (-other)

    def scale(self, factor: Expression) -> "ExprForm":
        if factor == _ZERO:
            return ExprForm.zero(self.names, self.degree)
        return ExprForm.from_terms(
            self.names,
            self.degree,
            {key: mul(factor, expr) for key, expr in self.terms.items()},
        )

    def wedge(self, other: "ExprForm") -> "ExprForm":
        if self.names != other.names:
            raise ValueError("operands live on different coordinate systems")
        degree = self.degree + other.degree
        if degree > len(self.names):
            return ExprForm.zero(self.names, degree)
        result: Dict[Key, Expression] = {}
        for ka, ca in self.terms.items():
            for kb, cb in other.terms.items():
                merged = merge_keys(ka, kb)
                if merged is None:
                    continue
                sign, key = merged
                piece = mul(ca, cb)
                if sign < 0:
                    piece = mul(Num(Fraction(-1)), piece)
                result[key] = add(result.get(key, _ZERO), piece)
        return ExprForm.from_terms(self.names, degree, result)

    def exterior_derivative(self) -> "ExprForm":
        result: Dict[Key, Expression] = {}
        for key, coeff in self.terms.items():
            for i, name in enumerate(self.names):
                partial = differentiate(coeff, name)
                if partial == _ZERO:
                    continue
                merged = merge_keys((i,), key)
                if merged is None:
                    continue
                sign, new_key = merged
                if sign < 0:
                    partial = mul(Num(Fraction(-1)), partial)
                result[new_key] = add(result.get(new_key, _ZERO), partial)
        return ExprForm.from_terms(self.names, self.degree + 1, result)

    def substitute(self, env: Mapping[str, Expression]) -> "ExprForm":
        """Substitute expressions for variables in every coefficient.

        The substituted variables must not appear in any basis covector of a
        nonzero term, since the differentials themselves are not transformed
        here; use :func:`pullback` for a genuine change of coordinates.
        """
        return ExprForm.from_terms(
            self.names,
            self.degree,
            {key: substitute(expr, env) for key, expr in self.terms.items()},
        )

    def evaluate(self, env: Mapping[str, float]) -> Dict[Key, float]:
        return {key: evaluate(expr, env) for key, expr in self.terms.items()}

    def fmt(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for key in sorted(self.terms):
            basis = "^".join(f"d{self.names[i]}" for i in key) or "1"
            parts.append(f"({self.terms[key]!r}) {basis}")
        return " + ".join(parts)


def pullback(
    form: ExprForm,
    images: Mapping[str, Expression],
    new_names: Iterable[str],
) -> ExprForm:
    """Pull an expression form back along the map given by ``images``.

    ``images`` sends each coordinate name of ``form`` to an expression in the
    ``new_names`` variables.  Coefficients are composed with the map and each
    basis covector is replaced by the differential of its image, expanded over
    the new coordinate differentials.
    """
    new_names = tuple(new_names)
    missing = [name for name in form.names if name not in images]
    if missing:
        raise ValueError(f"map does not define images for {missing}")
    partials = {
        name: [differentiate(images[name], p) for p in new_names]
        for name in form.names
    }
    result = ExprForm.zero(new_names, form.degree)
    for key, coeff in form.terms.items():
        composed = substitute(coeff, images)
        if composed == _ZERO:
            continue
        # expand d(f_{i1}) ^ ... ^ d(f_{ik}) over the new differentials
        expanded: Dict[Key, Expression] = {(): composed}
        for idx in key:
            name = form.names[idx]
            next_terms: Dict[Key, Expression] = {}
            for partial_key, acc in expanded.items():
                for j, part in enumerate(partials[name]):
                    if part == _ZERO:
                        continue
                    merged = merge_keys(partial_key, (j,))
                    if merged is None:
                        continue
                    sign, new_key = merged
                    piece = mul(acc, part)
                    if sign < 0:
                        piece = mul(Num(Fraction(-1)), piece)
                    next_terms[new_key] = add(next_terms.get(new_key, _ZERO), piece)
            expanded = next_terms
            if not expanded:
                break
        result = result + ExprForm.from_terms(new_names, form.degree, expanded)
    return result


def pullback_diff_form(
    form: DiffForm,
    var_names: Iterable[str],
    images: Mapping[str, Expression],
    new_names: Iterable[str],
) -> ExprForm:
    """Pull a polynomial-coefficient form back along ``images``."""
    return pullback(ExprForm.from_diff_form(form, var_names), images, new_names)
