"""Sparse multivariate polynomials over Q.

A PolyScalar on an m-coordinate chart maps exponent tuples (length m,
nonnegative ints) to nonzero Fractions.  Zero coefficients are never stored,
so ``terms == {}`` is the canonical zero and equality is exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Tuple

from . import expr as ex

Exponents = Tuple[int, ...]


class PolyScalar:
    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Dict[Exponents, Fraction] = None):
        self.nvars = int(nvars)
        clean: Dict[Exponents, Fraction] = {}
        for key, coeff in (terms or {}).items():
            key = tuple(int(k) for k in key)
            if len(key) != self.nvars or any(k < 0 for k in key):
                raise ValueError(f"bad exponent tuple {key} for {self.nvars} variables")
            coeff = Fraction(coeff)
            if coeff != 0:
                clean[key] = clean.get(key, Fraction(0)) + coeff
                if clean[key] == 0:
                    del clean[key]
        self.terms = clean

    @classmethod
    def constant(cls, nvars: int, value) -> "PolyScalar":
        value = Fraction(value)
        if value == 0:
            return cls(nvars, {})
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def variable(cls, nvars: int, index: int) -> "PolyScalar":
        if not 0 <= index < nvars:
            raise ValueError(f"variable index {index} out of range")
        exps = [0] * nvars
        exps[index] = 1
        return cls(nvars, {tuple(exps): Fraction(1)})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PolyScalar)
            and self.nvars == other.nvars
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def _check(self, other: "PolyScalar"):
        if not isinstance(other, PolyScalar) or other.nvars != self.nvars:
            raise TypeError("operands live on different charts")

    def __add__(self, other: "PolyScalar") -> "PolyScalar":
        self._check(other)
        terms = dict(self.terms)
        for key, coeff in other.terms.items():
            acc = terms.get(key, Fraction(0)) + coeff
            if acc == 0:
                terms.pop(key, None)
            else:
                terms[key] = acc
        out = PolyScalar.__new__(PolyScalar)
        out.nvars = self.nvars
        out.terms = terms
        return out

    def __neg__(self) -> "PolyScalar":
        out = PolyScalar.__new__(PolyScalar)
        out.nvars = self.nvars
        out.terms = {k: -c for k, c in self.terms.items()}
        return out

    def __sub__(self, other: "PolyScalar") -> "PolyScalar":
        return self + (-other)

    def __mul__(self, other) -> "PolyScalar":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        self._check(other)
        terms: Dict[Exponents, Fraction] = {}
        for ka, ca in self.terms.items():
            for kb, cb in other.terms.items():
                key = tuple(a + b for a, b in zip(ka, kb))
                acc = terms.get(key, Fraction(0)) + ca * cb
                if acc == 0:
                    terms.pop(key, None)
                else:
                    terms[key] = acc
        out = PolyScalar.__new__(PolyScalar)
        out.nvars = self.nvars
        out.terms = terms
        return out

    __rmul__ = __mul__

    def scale(self, factor) -> "PolyScalar":
        factor = Fraction(factor)
        if factor == 0:
            return PolyScalar(self.nvars, {})
        out = PolyScalar.__new__(PolyScalar)
        out.nvars = self.nvars
        out.terms = {k: c * factor for k, c in self.terms.items()}
        return out

    def __pow__(self, k: int) -> "PolyScalar":
        if k < 0:
            raise ValueError("negative powers are not polynomial")
        result = PolyScalar.constant(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def derivative(self, index: int) -> "PolyScalar":
        terms: Dict[Exponents, Fraction] = {}
        for key, coeff in self.terms.items():
            e = key[index]
            if e == 0:
                continue
            new = list(key)
            new[index] = e - 1
            nk = tuple(new)
            acc = terms.get(nk, Fraction(0)) + coeff * e
            if acc == 0:
                terms.pop(nk, None)
            else:
                terms[nk] = acc
        out = PolyScalar.__new__(PolyScalar)
        out.nvars = self.nvars
        out.terms = terms
        return out

    def evaluate(self, point: Iterable[float]) -> float:
        point = tuple(point)
        total = 0.0
        for key, coeff in self.terms.items():
            value = float(coeff)
            for x, e in zip(point, key):
                if e:
                    value *= x**e
            total += value
        return total

    def evaluate_exact(self, point: Iterable[Fraction]) -> Fraction:
        point = tuple(Fraction(p) for p in point)
        total = Fraction(0)
        for key, coeff in self.terms.items():
            value = coeff
            for x, e in zip(point, key):
                if e:
                    value *= x**e
            total += value
        return total

    def compose(self, images: Iterable["PolyScalar"]) -> "PolyScalar":
        """Substitute variable i by images[i]; all images share one chart."""
        images = list(images)
        if len(images) != self.nvars:
            raise ValueError("need one image polynomial per variable")
        nv = images[0].nvars
        result = PolyScalar(nv, {})
        for key, coeff in self.terms.items():
            term = PolyScalar.constant(nv, coeff)
            for img, e in zip(images, key):
                if e:
                    term = term * (img**e)
            result = result + term
        return result

    def degree_in(self, index: int) -> int:
        return max((k[index] for k in self.terms), default=0)

    def total_degree(self) -> int:
        return max((sum(k) for k in self.terms), default=0)

    def used_variables(self) -> set:
        used = set()
        for key in self.terms:
            for i, e in enumerate(key):
                if e:
                    used.add(i)
        return used

    def coefficient_of(self, index: int, power: int) -> "PolyScalar":
        """Coefficient of x_index^power, as a polynomial with x_index deleted
        from no chart — same chart, exponent zeroed."""
        terms: Dict[Exponents, Fraction] = {}
        for key, coeff in self.terms.items():
            if key[index] == power:
                new = list(key)
                new[index] = 0
                terms[tuple(new)] = coeff
        return PolyScalar(self.nvars, terms)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]), reverse=True)

    def fmt(self, names: Iterable[str]) -> str:
        names = tuple(names)
        if not self.terms:
            return "0"
        pieces = []
        for key, coeff in self.sorted_terms():
            factors = []
            for name, e in zip(names, key):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            mono = "*".join(factors)
            mag = abs(coeff)
            if mono and mag == 1:
                body = mono
            elif mono:
                body = f"{mag}*{mono}"
            else:
                body = str(mag)
            if not pieces:
                pieces.append(body if coeff > 0 else f"-{body}")
            else:
                pieces.append(f"+ {body}" if coeff > 0 else f"- {body}")
        return " ".join(pieces)

    def __repr__(self):
        return f"PolyScalar({self.nvars}, {self.terms!r})"


def poly_from_expr(e: ex.Expression, names: Iterable[str]) -> PolyScalar:
    """Reduce a trig-free Expression to a PolyScalar over the named chart."""
    names = tuple(names)
    index = {n: i for i, n in enumerate(names)}
    nv = len(names)

    def walk(node: ex.Expression) -> PolyScalar:
        if isinstance(node, ex.Num):
            if not isinstance(node.value, Fraction):
                raise TypeError("float constants cannot enter exact coefficients")
            return PolyScalar.constant(nv, node.value)
        if isinstance(node, ex.Var):
            if node.name not in index:
                raise ex.UnknownVariableError(f"unknown variable {node.name!r}", 0)
            return PolyScalar.variable(nv, index[node.name])
        if isinstance(node, ex.Add):
            return walk(node.left) + walk(node.right)
        if isinstance(node, ex.Sub):
            return walk(node.left) - walk(node.right)
        if isinstance(node, ex.Mul):
            return walk(node.left) * walk(node.right)
        if isinstance(node, ex.Neg):
            return -walk(node.operand)
        if isinstance(node, ex.Pow):
            return walk(node.base) ** node.exponent
        if isinstance(node, (ex.Sin, ex.Cos)):
            raise ex.TrigNotAllowedError(
                "trigonometric functions cannot appear in chart coefficients", 0
            )
        raise TypeError(f"not an Expression node: {node!r}")

    return walk(e)


def parse_poly(source: str, names: Iterable[str]) -> PolyScalar:
    names = tuple(names)
    return poly_from_expr(ex.parse_expr(source, names, allow_trig=False), names)
