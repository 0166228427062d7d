"""Exterior calculus on a coordinate chart with PolyScalar coefficients.

Multivector fields and differential forms are sparse maps from strictly
increasing index tuples to PolyScalar coefficients; permutation signs are
computed by counting transpositions during key merges.

Convention lock (shared by the whole package):
  * contraction composes as iota_{u^v} = iota_u o iota_v, i.e. the factor
    written last acts first;
  * iota_{d/dx_i} removes index i from a key at position r with sign (-1)^r;
  * d(f dx_B) = sum_i (df/dx_i) dx_i ^ dx_B.
The Schouten bracket sign is pinned by requiring the degree-preserving
operator identity

    iota_pi d iota_{pi^k} - d iota_{pi^(k+1)} - iota_{pi^(k+1)} d
        + iota_{pi^k} d iota_pi = 0

to hold verbatim on forms whenever [pi, pi] = 0 (self-tested).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Tuple

from .poly import PolyScalar, parse_poly

Key = Tuple[int, ...]


def merge_keys(a: Key, b: Key):
    """Merge two strictly increasing tuples; None if they collide.

    Returns (sign, merged) where sign counts the transpositions needed to
    sort the concatenation a + b.
    """
    out = []
    i = j = 0
    inversions = 0
    while i < len(a) and j < len(b):
        if a[i] == b[j]:
            return None
        if a[i] < b[j]:
            out.append(a[i])
            i += 1
        else:
            # b[j] jumps over the remaining entries of a
            inversions += len(a) - i
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return (-1) ** inversions, tuple(out)


def _contract_once(index: int, key: Key):
    """Single contraction iota_{index} on a key: sign (-1)^position."""
    try:
        r = key.index(index)
    except ValueError:
        return None
    return (-1) ** r, key[:r] + key[r + 1 :]


class _Alternating:
    """Shared machinery for Multivector and DiffForm."""

    __slots__ = ("nvars", "degree", "terms")

    def __init__(self, nvars: int, degree: int, terms: Dict[Key, PolyScalar] = None):
        self.nvars = int(nvars)
        self.degree = int(degree)
        if self.degree < 0:
            raise ValueError("degree must be nonnegative")
        clean: Dict[Key, PolyScalar] = {}
        for key, coeff in (terms or {}).items():
            key = tuple(int(k) for k in key)
            if len(key) != self.degree:
                raise ValueError(f"key {key} does not match degree {self.degree}")
            if any(not 0 <= k < self.nvars for k in key):
                raise ValueError(f"key {key} out of range for chart dim {self.nvars}")
            if any(key[t] >= key[t + 1] for t in range(len(key) - 1)):
                raise ValueError(f"key {key} is not strictly increasing")
            if isinstance(coeff, (int, Fraction)):
                coeff = PolyScalar.constant(self.nvars, coeff)
            if coeff.nvars != self.nvars:
                raise TypeError("coefficient lives on a different chart")
            if not coeff.is_zero():
                clean[key] = clean.get(key, PolyScalar(self.nvars)) + coeff
                if clean[key].is_zero():
                    del clean[key]
        # degrees beyond the chart dimension only admit the zero object
        if self.degree > self.nvars and clean:
            raise ValueError("degree exceeds chart dimension")
        self.terms = clean

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return (
            type(other) is type(self)
            and self.nvars == other.nvars
            and self.degree == other.degree
            and self.terms == other.terms
        )

    def _check(self, other, same_degree=True):
        if type(other) is not type(self):
            raise TypeError(
                f"expected {type(self).__name__}, got {type(other).__name__}"
            )
        if other.nvars != self.nvars:
            raise TypeError("operands live on different charts")
        if same_degree and other.degree != self.degree:
            raise TypeError("operands have different degrees")

    def __add__(self, other):
        self._check(other, same_degree=False)
        # adding the zero object of any formal degree is legal
        if other.degree != self.degree:
            if other.is_zero():
                return self
            if self.is_zero():
                return other
            raise TypeError("operands have different degrees")
        terms = dict(self.terms)
        for key, coeff in other.terms.items():
            acc = terms.get(key)
            acc = coeff if acc is None else acc + coeff
            if acc.is_zero():
                terms.pop(key, None)
            else:
                terms[key] = acc
        return type(self)(self.nvars, self.degree, terms)

    def __neg__(self):
        return type(self)(
            self.nvars, self.degree, {k: -c for k, c in self.terms.items()}
        )

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor):
        """Multiply by a Fraction/int or a PolyScalar."""
        if isinstance(factor, (int, Fraction)):
            factor = PolyScalar.constant(self.nvars, factor)
        return type(self)(
            self.nvars, self.degree, {k: c * factor for k, c in self.terms.items()}
        )

    def sorted_terms(self):
        return sorted(self.terms.items())

    def eval_at(self, point) -> Dict[Key, float]:
        point = tuple(point)
        return {k: c.evaluate(point) for k, c in self.terms.items()}

    def fmt(self, names: Iterable[str]) -> str:
        names = tuple(names)
        if not self.terms:
            return "0"
        marker = "D" if isinstance(self, Multivector) else "d"
        pieces = []
        for key, coeff in self.sorted_terms():
            basis = "^".join(f"{marker}{names[k]}" for k in key)
            body = coeff.fmt(names)
            if body == "1" and basis:
                text = basis
            elif body == "-1" and basis:
                text = f"-{basis}"
            elif basis:
                if " " in body:
                    body = f"({body})"
                text = f"{body}*{basis}"
            else:
                text = body
            pieces.append(text)
        out = pieces[0]
        for p in pieces[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    def __repr__(self):
        return (
            f"{type(self).__name__}(nvars={self.nvars}, degree={self.degree}, "
            f"terms={self.terms!r})"
        )

    @classmethod
    def from_strings(cls, names: Iterable[str], degree: int, terms) -> "_Alternating":
        """Build from ``{key: coefficient-source}`` with string polynomials."""
        names = tuple(names)
        parsed = {}
        for key, source in terms.items():
            coeff = source if isinstance(source, PolyScalar) else parse_poly(source, names)
            parsed[tuple(key)] = coeff
        return cls(len(names), degree, parsed)


class Multivector(_Alternating):
    @classmethod
    def zero(cls, nvars: int, degree: int = 0) -> "Multivector":
        return cls(nvars, degree, {})

    @classmethod
    def unit(cls, nvars: int) -> "Multivector":
        return cls(nvars, 0, {(): PolyScalar.constant(nvars, 1)})

    @classmethod
    def from_function(cls, f: PolyScalar) -> "Multivector":
        return cls(f.nvars, 0, {(): f})


class DiffForm(_Alternating):
    @classmethod
    def zero(cls, nvars: int, degree: int = 0) -> "DiffForm":
        return cls(nvars, degree, {})

    @classmethod
    def from_function(cls, f: PolyScalar) -> "DiffForm":
        return cls(f.nvars, 0, {(): f})

    @classmethod
    def coordinate_volume(cls, nvars: int) -> "DiffForm":
        return cls(nvars, nvars, {tuple(range(nvars)): PolyScalar.constant(nvars, 1)})


def wedge(a, b):
    """Exterior product of two multivectors or two forms (same kind only).

    Degree overflow past the chart dimension yields the zero object of the
    overflow degree rather than an error.
    """
    if type(a) is not type(b) or not isinstance(a, _Alternating):
        raise TypeError("wedge requires two multivectors or two forms")
    if a.nvars != b.nvars:
        raise TypeError("operands live on different charts")
    degree = a.degree + b.degree
    if degree > a.nvars:
        return type(a)(a.nvars, degree, {})
    terms: Dict[Key, PolyScalar] = {}
    for ka, ca in a.terms.items():
        for kb, cb in b.terms.items():
            merged = merge_keys(ka, kb)
            if merged is None:
                continue
            sign, key = merged
            coeff = ca * cb if sign > 0 else -(ca * cb)
            acc = terms.get(key)
            acc = coeff if acc is None else acc + coeff
            if acc.is_zero():
                terms.pop(key, None)
            else:
                terms[key] = acc
    return type(a)(a.nvars, degree, terms)


def _contract_terms(contractor_key: Key, target_key: Key):
    """Apply iota along contractor_key (last factor first) to target_key."""
    sign = 1
    key = target_key
    for index in reversed(contractor_key):
        hit = _contract_once(index, key)
        if hit is None:
            return None
        s, key = hit
        sign *= s
    return sign, key


def interior_product(w: Multivector, eta: DiffForm) -> DiffForm:
    """iota_w eta with iota_{u^v} = iota_u o iota_v.

    Contracting a k-vector into a p-form with k > p gives the zero 0-form.
    """
    if not isinstance(w, Multivector) or not isinstance(eta, DiffForm):
        raise TypeError("interior_product contracts a Multivector into a DiffForm")
    if w.nvars != eta.nvars:
        raise TypeError("operands live on different charts")
    if w.degree > eta.degree:
        return DiffForm.zero(eta.nvars, 0)
    degree = eta.degree - w.degree
    terms: Dict[Key, PolyScalar] = {}
    for ka, ca in w.terms.items():
        for kb, cb in eta.terms.items():
            hit = _contract_terms(ka, kb)
            if hit is None:
                continue
            sign, key = hit
            coeff = ca * cb if sign > 0 else -(ca * cb)
            acc = terms.get(key)
            acc = coeff if acc is None else acc + coeff
            if acc.is_zero():
                terms.pop(key, None)
            else:
                terms[key] = acc
    return DiffForm(eta.nvars, degree, terms)


def contract_form(alpha: DiffForm, w: Multivector) -> Multivector:
    """Mirror contraction iota_alpha w of a form into a multivector.

    Same composition convention as interior_product with the roles of
    vectors and covectors exchanged.
    """
    if not isinstance(alpha, DiffForm) or not isinstance(w, Multivector):
        raise TypeError("contract_form contracts a DiffForm into a Multivector")
    if alpha.nvars != w.nvars:
        raise TypeError("operands live on different charts")
    if alpha.degree > w.degree:
        return Multivector.zero(w.nvars, 0)
    degree = w.degree - alpha.degree
    terms: Dict[Key, PolyScalar] = {}
    for ka, ca in alpha.terms.items():
        for kb, cb in w.terms.items():
            hit = _contract_terms(ka, kb)
            if hit is None:
                continue
            sign, key = hit
            coeff = ca * cb if sign > 0 else -(ca * cb)
            acc = terms.get(key)
            acc = coeff if acc is None else acc + coeff
            if acc.is_zero():
                terms.pop(key, None)
            else:
                terms[key] = acc
    return Multivector(w.nvars, degree, terms)


def exterior_derivative(eta: DiffForm) -> DiffForm:
    if not isinstance(eta, DiffForm):
        raise TypeError("exterior_derivative acts on DiffForm only")
    degree = eta.degree + 1
    if degree > eta.nvars:
        return DiffForm(eta.nvars, degree, {})
    terms: Dict[Key, PolyScalar] = {}
    for key, coeff in eta.terms.items():
        for i in range(eta.nvars):
            dcoeff = coeff.derivative(i)
            if dcoeff.is_zero():
                continue
            merged = merge_keys((i,), key)
            if merged is None:
                continue
            sign, nk = merged
            piece = dcoeff if sign > 0 else -dcoeff
            acc = terms.get(nk)
            acc = piece if acc is None else acc + piece
            if acc.is_zero():
                terms.pop(nk, None)
            else:
                terms[nk] = acc
    return DiffForm(eta.nvars, degree, terms)


def _theta_terms(w: Multivector, index: int):
    """Right Grassmann derivative by theta_index: yields (key, coeff) pairs.

    On a monomial containing theta_index at position r (of k factors) the
    factor moves past k-1-r letters to the right end, hence sign
    (-1)^(k-1-r).
    """
    k = w.degree
    for key, coeff in w.terms.items():
        try:
            r = key.index(index)
        except ValueError:
            continue
        sign = (-1) ** (k - 1 - r)
        yield key[:r] + key[r + 1 :], coeff if sign > 0 else -coeff


def schouten_bracket(p: Multivector, q: Multivector) -> Multivector:
    """Schouten-Nijenhuis bracket, degree p+q-1.

    Characterized by [u, f] = u(f), [u, v] = Lie bracket, graded Leibniz and
    graded antisymmetry; the overall sign is the unique one satisfying the
    module's convention-lock identity (see module docstring).
    """
    if not isinstance(p, Multivector) or not isinstance(q, Multivector):
        raise TypeError("schouten_bracket takes two Multivectors")
    if p.nvars != q.nvars:
        raise TypeError("operands live on different charts")
    nv = p.nvars
    dp, dq = p.degree, q.degree
    degree = dp + dq - 1
    if degree < 0:
        return Multivector.zero(nv, 0)
    if degree > nv:
        return Multivector(nv, degree, {})
    sign_pq = (-1) ** ((dp - 1) * (dq - 1))
    terms: Dict[Key, PolyScalar] = {}

    def accumulate(key: Key, coeff: PolyScalar):
        acc = terms.get(key)
        acc = coeff if acc is None else acc + coeff
        if acc.is_zero():
            terms.pop(key, None)
        else:
            terms[key] = acc

    for i in range(nv):
        for ka, ca in _theta_terms(p, i):
            for kb, cb in q.terms.items():
                dcb = cb.derivative(i)
                if dcb.is_zero():
                    continue
                merged = merge_keys(ka, kb)
                if merged is None:
                    continue
                s, key = merged
                accumulate(key, ca * dcb if s > 0 else -(ca * dcb))
        for ka, ca in _theta_terms(q, i):
            for kb, cb in p.terms.items():
                dcb = cb.derivative(i)
                if dcb.is_zero():
                    continue
                merged = merge_keys(ka, kb)
                if merged is None:
                    continue
                s, key = merged
                piece = ca * dcb if s > 0 else -(ca * dcb)
                accumulate(key, -piece if sign_pq > 0 else piece)
    return Multivector(nv, degree, terms)


def multivector_power(pi: Multivector, k: int) -> Multivector:
    """k-fold wedge power; pi^0 is the constant function 1."""
    if k < 0:
        raise ValueError("power must be nonnegative")
    result = Multivector.unit(pi.nvars)
    for _ in range(k):
        result = wedge(result, pi)
    return result


def lie_derivative(u: Multivector, eta: DiffForm) -> DiffForm:
    """Cartan formula L_u = d iota_u + iota_u d for a vector field u."""
    if u.degree != 1:
        raise ValueError("lie_derivative expects a vector field (degree 1)")
    return exterior_derivative(interior_product(u, eta)) + interior_product(
        u, exterior_derivative(eta)
    )
