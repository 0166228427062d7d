"""Exact linear Dirac algebra at a point.

Lagrangian subspaces ``L`` of ``V (+) V*`` over the rationals, their spinor
and co-spinor lines, backward/forward transport along linear maps, the three
equivalent linear transversality conditions, and the inhomogeneous-spinor
unimodularity test for Poisson structures.

Everything here is exact: coefficients are ``Fraction`` and comparisons are
equalities.  Floats never enter; evaluating a polynomial bivector at a
rational point (`poisson_graph_at`) is the bridge from field-level data to
this pointwise layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from . import ratlin
from .calculus import _contract_terms, merge_keys
from .poisson import (
    Density,
    PoissonStructure,
    check_invariant_density,
    modular_chain,
)

Key = Tuple[int, ...]
Vec = Tuple[Fraction, ...]


class DiracError(ValueError):
    """Invalid input to, or broken invariant in, the linear Dirac layer."""


def _fraction(value) -> Fraction:
    if isinstance(value, float):
        raise DiracError("linear Dirac data must be rational (no floats)")
    return Fraction(value)


def _fraction_matrix(rows, width: Optional[int] = None) -> Tuple[Vec, ...]:
    out = []
    for row in rows:
        vec = tuple(_fraction(x) for x in row)
        if width is not None and len(vec) != width:
            raise DiracError(f"expected rows of length {width}, got {len(vec)}")
        out.append(vec)
    return tuple(out)


def _antisymmetric_matrix(mat, n: int) -> Tuple[Vec, ...]:
    rows = _fraction_matrix(mat, n)
    if len(rows) != n:
        raise DiracError(f"expected a {n}x{n} matrix, got {len(rows)} rows")
    for i in range(n):
        for j in range(n):
            if rows[i][j] != -rows[j][i]:
                raise DiracError("matrix is not antisymmetric")
    return rows


def all_keys(n: int) -> List[Key]:
    """All strictly increasing index tuples on ``n`` letters, graded order."""
    keys: List[Key] = []
    for p in range(n + 1):
        keys.extend(combinations(range(n), p))
    return keys


# ---------------------------------------------------------------------------
# Inhomogeneous exterior-algebra elements over the rationals.


@dataclass(frozen=True)
class ExtElement:
    """Inhomogeneous element of the exterior algebra on ``n`` letters.

    The same container serves multivectors (letters ``e_i``) and forms
    (letters ``e^i``); which one is meant is determined by use.  Terms map
    strictly increasing index tuples to nonzero rationals.
    """

    n: int
    terms: Dict[Key, Fraction]

    def __post_init__(self):
        if self.n < 0:
            raise DiracError("need n >= 0 letters")
        clean: Dict[Key, Fraction] = {}
        for key, value in self.terms.items():
            key = tuple(key)
            if list(key) != sorted(set(key)):
                raise DiracError(f"key {key} is not strictly increasing")
            if key and not (0 <= key[0] and key[-1] < self.n):
                raise DiracError(f"key {key} out of range for n={self.n}")
            coeff = _fraction(value)
            if coeff != 0:
                clean[key] = coeff
        object.__setattr__(self, "terms", clean)

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "ExtElement":
        return cls(n, {})

    @classmethod
    def scalar(cls, n: int, value) -> "ExtElement":
        return cls(n, {(): _fraction(value)})

    @classmethod
    def letter(cls, n: int, index: int) -> "ExtElement":
        return cls(n, {(index,): Fraction(1)})

    @classmethod
    def top(cls, n: int) -> "ExtElement":
        return cls(n, {tuple(range(n)): Fraction(1)})

    @classmethod
    def from_vector(cls, coords: Sequence) -> "ExtElement":
        vec = tuple(_fraction(c) for c in coords)
        return cls(len(vec), {(i,): c for i, c in enumerate(vec) if c != 0})

    @classmethod
    def from_two_form_matrix(cls, mat) -> "ExtElement":
        n = len(mat)
        rows = _antisymmetric_matrix(mat, n)
        terms = {
            (i, j): rows[i][j] for i in range(n) for j in range(i + 1, n)
        }
        return cls(n, terms)

    # -- structure ----------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self) -> Tuple[int, ...]:
        return tuple(sorted({len(k) for k in self.terms}))

    def component(self, degree: int) -> "ExtElement":
        return ExtElement(
            self.n, {k: v for k, v in self.terms.items() if len(k) == degree}
        )

    def coefficient(self, key: Key) -> Fraction:
        return self.terms.get(tuple(key), Fraction(0))

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: (len(kv[0]), kv[0]))

    # -- arithmetic ---------------------------------------------------------
    def _check(self, other: "ExtElement"):
        if not isinstance(other, ExtElement):
            raise TypeError("expected an ExtElement")
        if other.n != self.n:
            raise DiracError("elements live on different letter sets")

    def __add__(self, other: "ExtElement") -> "ExtElement":
        self._check(other)
        terms = dict(self.terms)
        for key, value in other.terms.items():
            acc = terms.get(key, Fraction(0)) + value
            if acc == 0:
                terms.pop(key, None)
            else:
                terms[key] = acc
        return ExtElement(self.n, terms)

    def __neg__(self) -> "ExtElement":
        return ExtElement(self.n, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "ExtElement") -> "ExtElement":
        return self + (-other)

    def scale(self, factor) -> "ExtElement":
        factor = _fraction(factor)
        if factor == 0:
            return ExtElement.zero(self.n)
        return ExtElement(self.n, {k: factor * v for k, v in self.terms.items()})

    def normalized(self) -> "ExtElement":
        """Primitive-integer representative with positive leading term.

        Leading term means the first in graded lexicographic key order; the
        result spans the same line.
        """
        if self.is_zero:
            return self
        lead = self.sorted_terms()[0][1]
        scaled = {k: v / lead for k, v in self.terms.items()}
        denom = 1
        for v in scaled.values():
            denom = denom * v.denominator // math.gcd(denom, v.denominator)
        ints = {k: v * denom for k, v in scaled.items()}
        g = 0
        for v in ints.values():
            g = math.gcd(g, abs(v.numerator))
        return ExtElement(self.n, {k: v / g for k, v in ints.items()})

    def fmt(self) -> str:
        """Deterministic plain-text rendering like ``3 - 2 e(0,1)``."""
        if self.is_zero:
            return "0"
        parts = []
        for key, coeff in self.sorted_terms():
            mag = abs(coeff)
            body = "" if key == () else "e(" + ",".join(map(str, key)) + ")"
            if body and mag == 1:
                text = body
            elif body:
                text = f"{mag} {body}"
            else:
                text = str(mag)
            if not parts:
                parts.append(text if coeff > 0 else f"-{text}")
            else:
                parts.append(("+ " if coeff > 0 else "- ") + text)
        return " ".join(parts)


def wedge(a: ExtElement, b: ExtElement) -> ExtElement:
    """Exterior product; signs come from the shared key-merge convention."""
    a._check(b)
    terms: Dict[Key, Fraction] = {}
    for ka, ca in a.terms.items():
        for kb, cb in b.terms.items():
            hit = merge_keys(ka, kb)
            if hit is None:
                continue
            sign, key = hit
            acc = terms.get(key, Fraction(0)) + sign * ca * cb
            if acc == 0:
                terms.pop(key, None)
            else:
                terms[key] = acc
    return ExtElement(a.n, terms)


def interior(phi: ExtElement, w: ExtElement) -> ExtElement:
    """Contraction of ``phi`` (dual letters) into ``w``.

    Letters pair by index, and composite contractions act last letter first,
    the same composition convention as the chart-level interior product.
    """
    phi._check(w)
    terms: Dict[Key, Fraction] = {}
    for kp, cp in phi.terms.items():
        for kw, cw in w.terms.items():
            hit = _contract_terms(kp, kw)
            if hit is None:
                continue
            sign, key = hit
            acc = terms.get(key, Fraction(0)) + sign * cp * cw
            if acc == 0:
                terms.pop(key, None)
            else:
                terms[key] = acc
    return ExtElement(phi.n, terms)


def proportional(a: ExtElement, b: ExtElement) -> bool:
    """True when the two nonzero elements span the same line."""
    if a.is_zero or b.is_zero:
        return False
    return a.normalized().terms == b.normalized().terms


def ext_pullback(x: ExtElement, matrix, target_n: int) -> ExtElement:
    """Pull a form-side element on ``m`` letters back along an m x n matrix.

    The map sends the j-th dual letter to the j-th matrix row contracted
    with the target letters, extended multiplicatively.
    """
    rows = _fraction_matrix(matrix, target_n)
    if len(rows) != x.n:
        raise DiracError(f"matrix has {len(rows)} rows; element has {x.n} letters")
    images = [ExtElement.from_vector(row) for row in rows]
    return _map_letters(x, images, target_n)


def ext_pushforward(x: ExtElement, matrix) -> ExtElement:
    """Push a vector-side element on ``n`` letters forward along m x n."""
    rows = _fraction_matrix(matrix, x.n)
    target_n = len(rows)
    images = [
        ExtElement.from_vector([rows[j][i] for j in range(target_n)])
        for i in range(x.n)
    ]
    return _map_letters(x, images, target_n)


def _map_letters(
    x: ExtElement, images: Sequence[ExtElement], target_n: int
) -> ExtElement:
    out = ExtElement.zero(target_n)
    for key, coeff in x.terms.items():
        piece = ExtElement.scalar(target_n, coeff)
        for index in key:
            piece = wedge(piece, images[index])
            if piece.is_zero:
                break
        out = out + piece
    return out


# ---------------------------------------------------------------------------
# Lagrangian subspaces.


@dataclass(frozen=True)
class LinearDirac:
    """A Lagrangian subspace of ``V (+) V*`` given by a rational basis.

    ``rows`` is an n x 2n matrix; the first n columns are the V-part and the
    last n the V*-part.  The constructor enforces rank n and exact isotropy
    for the pairing ``<u+xi, v+eta> = xi(v) + eta(u)``.
    """

    n: int
    rows: Tuple[Vec, ...]

    def __post_init__(self):
        if self.n < 1:
            raise DiracError("need n >= 1")
        rows = _fraction_matrix(self.rows, 2 * self.n)
        if len(rows) != self.n:
            raise DiracError(
                f"a Lagrangian in dimension {self.n} needs {self.n} basis rows"
            )
        object.__setattr__(self, "rows", rows)
        if ratlin.rank([list(r) for r in rows]) != self.n:
            raise DiracError("basis rows are linearly dependent")
        n = self.n
        for a in rows:
            for b in rows:
                pairing = sum(
                    a[n + i] * b[i] + b[n + i] * a[i] for i in range(n)
                )
                if pairing != 0:
                    raise DiracError("subspace is not isotropic for the pairing")

    # -- constructors -------------------------------------------------------
    @classmethod
    def tangent(cls, n: int) -> "LinearDirac":
        rows = []
        for i in range(n):
            row = [Fraction(0)] * (2 * n)
            row[i] = Fraction(1)
            rows.append(row)
        return cls(n, tuple(tuple(r) for r in rows))

    @classmethod
    def cotangent(cls, n: int) -> "LinearDirac":
        rows = []
        for i in range(n):
            row = [Fraction(0)] * (2 * n)
            row[n + i] = Fraction(1)
            rows.append(row)
        return cls(n, tuple(tuple(r) for r in rows))

    @classmethod
    def graph_of_bivector(cls, mat) -> "LinearDirac":
        """Graph ``{(pi#(xi), xi)}`` of an antisymmetric matrix.

        ``pi#`` follows the Hamiltonian-field convention: for the matrix of
        ``pi = e_0 ^ e_1`` it sends ``e^0`` to ``e_1`` and ``e^1`` to
        ``-e_0``.
        """
        n = len(mat)
        pi = _antisymmetric_matrix(mat, n)
        rows = []
        for j in range(n):
            row = [Fraction(0)] * (2 * n)
            for i in range(n):
                # coefficient of e_i in iota_{e^j}(sum_{a<b} pi_ab e_a^e_b)
                row[i] = -pi[i][j]
            row[n + j] = Fraction(1)
            rows.append(tuple(row))
        return cls(n, tuple(rows))

    @classmethod
    def graph_of_two_form(cls, mat) -> "LinearDirac":
        """Graph ``{(u, omega_flat(u))}`` with ``omega_flat(e_i) = iota_{e_i} omega``."""
        n = len(mat)
        om = _antisymmetric_matrix(mat, n)
        rows = []
        for i in range(n):
            row = [Fraction(0)] * (2 * n)
            row[i] = Fraction(1)
            for j in range(n):
                row[n + j] = om[i][j]
            rows.append(tuple(row))
        return cls(n, tuple(rows))

    def basis_matrix(self) -> List[List[Fraction]]:
        return [list(r) for r in self.rows]


def same_lagrangian(a: LinearDirac, b: LinearDirac) -> bool:
    """Whether two bases span the same Lagrangian subspace."""
    if a.n != b.n:
        return False
    return ratlin.same_row_space(a.basis_matrix(), b.basis_matrix())


def bivector_matrix_at(
    structure: PoissonStructure, point: Sequence
) -> List[List[Fraction]]:
    """Exact antisymmetric matrix of a polynomial bivector at a rational point."""
    m = structure.chart_dim
    coords = [_fraction(x) for x in point]
    if len(coords) != m:
        raise DiracError(f"point must have {m} coordinates")
    mat = [[Fraction(0) for _ in range(m)] for _ in range(m)]
    for (i, j), coeff in structure.bivector.terms.items():
        value = coeff.evaluate_exact(coords)
        mat[i][j] = value
        mat[j][i] = -value
    return mat


def poisson_graph_at(structure: PoissonStructure, point: Sequence) -> "LinearDirac":
    """The graph Lagrangian of a polynomial Poisson structure at a point."""
    return LinearDirac.graph_of_bivector(bivector_matrix_at(structure, point))


# ---------------------------------------------------------------------------
# Spinor and co-spinor lines by incremental exact annihilator solving.


def _single_actions(row: Vec, n: int, side: str):
    """Per-term action of one basis element of L on a key.

    ``spinor`` side: (iota_u + xi^) on dual-letter elements; ``cospinor``
    side: (u^ + iota_xi) on vector-letter elements.
    """
    u, xi = row[:n], row[n:]
    contract_vec = u if side == "spinor" else xi
    wedge_vec = xi if side == "spinor" else u
    contract_pairs = [(i, c) for i, c in enumerate(contract_vec) if c]
    wedge_pairs = [(j, c) for j, c in enumerate(wedge_vec) if c]

    def act(key: Key, coeff: Fraction, out: Dict[Key, Fraction]):
        for i, ci in contract_pairs:
            hit = _contract_terms((i,), key)
            if hit is not None:
                sign, k2 = hit
                acc = out.get(k2, Fraction(0)) + sign * ci * coeff
                if acc == 0:
                    out.pop(k2, None)
                else:
                    out[k2] = acc
        for j, cj in wedge_pairs:
            hit = merge_keys((j,), key)
            if hit is not None:
                sign, k2 = hit
                acc = out.get(k2, Fraction(0)) + sign * cj * coeff
                if acc == 0:
                    out.pop(k2, None)
                else:
                    out[k2] = acc

    return act


def _apply_action(act, vec: Dict[Key, Fraction]) -> Dict[Key, Fraction]:
    out: Dict[Key, Fraction] = {}
    for key, coeff in vec.items():
        act(key, coeff, out)
    return out


def _annihilator_line(dirac: LinearDirac, side: str) -> ExtElement:
    """Generator of the joint kernel of the n annihilation operators.

    The row operators square to zero and pairwise anticommute (isotropy),
    so their composition maps the whole space into the joint kernel; the
    first basis seed with a nonzero image spans the line.  The result is
    re-verified by exact annihilation against every row operator, and it
    agrees with direct elimination (`_annihilator_line_elimination`).
    """
    n = dirac.n
    acts = [_single_actions(row, n, side) for row in dirac.rows]
    for seed in all_keys(n):
        cur: Dict[Key, Fraction] = {seed: Fraction(1)}
        for act in acts:
            cur = _apply_action(act, cur)
            if not cur:
                break
        if cur:
            for act in acts:
                if _apply_action(act, cur):
                    raise DiracError(
                        "annihilation self-check failed; "
                        "input subspace is not Lagrangian"
                    )
            return ExtElement(n, cur).normalized()
    raise DiracError(
        "the composed annihilation operators vanish identically: "
        "input subspace is not Lagrangian"
    )


def _annihilator_line_elimination(dirac: LinearDirac, side: str) -> ExtElement:
    """Reference solver: intersect operator kernels by exact elimination.

    Slower than `_annihilator_line` but solves the defining linear system
    head-on; the two are checked to agree.  The solution space halves at
    each step for a Lagrangian input, so the eliminations stay small.
    """
    n = dirac.n
    basis: List[Dict[Key, Fraction]] = [
        {key: Fraction(1)} for key in all_keys(n)
    ]
    for row in dirac.rows:
        act = _single_actions(row, n, side)
        images = [_apply_action(act, vec) for vec in basis]
        hit_keys = sorted(
            {k for img in images for k in img}, key=lambda k: (len(k), k)
        )
        rows = [[img.get(k, Fraction(0)) for img in images] for k in hit_keys]
        coeff_vectors = ratlin.kernel_basis(rows, len(basis))
        new_basis: List[Dict[Key, Fraction]] = []
        for coeffs in coeff_vectors:
            combo: Dict[Key, Fraction] = {}
            for c, vec in zip(coeffs, basis):
                if c == 0:
                    continue
                for key, value in vec.items():
                    acc = combo.get(key, Fraction(0)) + c * value
                    if acc == 0:
                        combo.pop(key, None)
                    else:
                        combo[key] = acc
            new_basis.append(combo)
        basis = new_basis
    if len(basis) != 1:
        raise DiracError(
            f"annihilator has dimension {len(basis)}, not 1: "
            "input subspace is not Lagrangian"
        )
    return ExtElement(n, basis[0]).normalized()


@lru_cache(maxsize=1024)
def spinor_line(dirac: LinearDirac) -> ExtElement:
    """Normalized generator of ``K_L``: solves ``(iota_u + xi^)(phi) = 0``."""
    return _annihilator_line(dirac, "spinor")


@lru_cache(maxsize=1024)
def cospinor_line(dirac: LinearDirac) -> ExtElement:
    """Normalized generator of ``C_L``: solves ``u ^ w + iota_xi(w) = 0``."""
    return _annihilator_line(dirac, "cospinor")


def spinor_cospinor_iso(
    dirac: LinearDirac,
    w_top: Optional[ExtElement] = None,
    spinor: Optional[ExtElement] = None,
) -> ExtElement:
    """The canonical map ``phi (x) w -> iota_phi(w)`` onto the co-spinor line.

    ``w_top`` defaults to the standard top multivector; the image is
    cross-checked to span ``C_L`` exactly before being returned.
    """
    n = dirac.n
    if w_top is None:
        w_top = ExtElement.top(n)
    top_key = tuple(range(n))
    if set(w_top.terms) != {top_key}:
        raise DiracError("w_top must be a nonzero top-degree multivector")
    phi = spinor if spinor is not None else spinor_line(dirac)
    image = interior(phi, w_top)
    if image.is_zero:
        raise DiracError("iota_phi(w_top) vanished; inputs are inconsistent")
    if not proportional(image, cospinor_line(dirac)):
        raise DiracError("iota_phi(w_top) does not span the co-spinor line")
    return image


# ---------------------------------------------------------------------------
# Backward and forward transport along linear maps.


@dataclass(frozen=True)
class PullbackResult:
    """Backward image of a Lagrangian along a linear map V -> W.

    ``transversal`` is the exact condition ``ker(f^*) cap L_M = 0``; when it
    holds, the pulled-back spinor has been verified to span the spinor line
    of the result (``spinor_transported``).
    """

    dirac: LinearDirac
    transversal: bool
    spinor_transported: bool


def _row_space_dirac(rows: List[List[Fraction]], n: int) -> LinearDirac:
    reduced, pivots = ratlin.rref(rows)
    basis = [tuple(reduced[i]) for i in range(len(pivots))]
    if len(basis) != n:
        raise DiracError(
            f"transported subspace has dimension {len(basis)}, expected {n}"
        )
    return LinearDirac(n, tuple(basis))


def backward_pullback(dirac: LinearDirac, matrix) -> PullbackResult:
    """Exact ``f^!(L_M)`` for a linear map given as an m x n matrix.

    Entry ``[j][i]`` is the j-th W-coordinate of the image of the i-th V
    basis vector, so the matrix acts on column vectors of V.
    """
    m = dirac.n
    a = _fraction_matrix(matrix)
    if len(a) != m:
        raise DiracError(f"matrix must have {m} rows (the dimension of W)")
    n = len(a[0]) if a else 0
    a = _fraction_matrix(a, n)
    if n < 1:
        raise DiracError("need a source of dimension >= 1")

    # Solve A v = (lambda^T B)_V for (v, lambda); read off (v | A^T eta).
    system = []
    for row_index in range(m):
        eq = [a[row_index][i] for i in range(n)]
        eq += [-dirac.rows[r][row_index] for r in range(m)]
        system.append(eq)
    solutions = ratlin.kernel_basis(system, n + m)
    pulled_rows: List[List[Fraction]] = []
    for z in solutions:
        v = list(z[:n])
        lam = z[n:]
        eta = [
            sum(lam[r] * dirac.rows[r][m + j] for r in range(m))
            for j in range(m)
        ]
        covector = [
            sum(a[j][i] * eta[j] for j in range(m)) for i in range(n)
        ]
        pulled_rows.append(v + covector)
    result = _row_space_dirac(pulled_rows, n)

    # Transversality: no nonzero (0 | eta) in L_M with A^T eta = 0.
    constraint = [
        [dirac.rows[r][i] for r in range(m)] for i in range(m)
    ]
    constraint += [
        [
            sum(a[j][i] * dirac.rows[r][m + j] for j in range(m))
            for r in range(m)
        ]
        for i in range(n)
    ]
    transversal = not ratlin.kernel_basis(constraint, m)

    pulled_spinor = ext_pullback(spinor_line(dirac), [list(r) for r in a], n)
    if pulled_spinor.is_zero != (not transversal):
        raise DiracError(
            "pulled-back spinor vanishing disagrees with the transversality "
            "condition"
        )
    transported = False
    if transversal:
        if not proportional(pulled_spinor, spinor_line(result)):
            raise DiracError(
                "pulled-back spinor does not span the spinor line of the "
                "pullback"
            )
        transported = True
    return PullbackResult(result, transversal, transported)


@dataclass(frozen=True)
class PushforwardResult:
    """Forward image of a Lagrangian along a linear map V -> W.

    ``strong`` is the exact condition ``ker(f_*) cap L_P = 0``; when it
    holds, the pushed co-spinor has been verified to span the co-spinor line
    of the result.  When the map is also surjective, the contraction
    ``iota_v(phi)`` by the top kernel multivector has been solved as a
    pullback ``f^*(psi)`` with ``psi`` spanning the spinor line downstairs.
    """

    dirac: LinearDirac
    strong: bool
    surjective: bool
    cospinor_transported: bool
    kernel_spinor_checked: bool


def forward_pushforward(dirac: LinearDirac, matrix) -> PushforwardResult:
    """Exact ``f_!(L_P)`` for a linear map given as an m x n matrix."""
    n = dirac.n
    a = _fraction_matrix(matrix, n)
    m = len(a)
    if m < 1:
        raise DiracError("need a target of dimension >= 1")

    # Solve (lambda^T B)_{V*} = A^T eta for (eta, lambda); read (A v | eta).
    system = []
    for i in range(n):
        eq = [-a[j][i] for j in range(m)]
        eq += [dirac.rows[r][n + i] for r in range(n)]
        system.append(eq)
    solutions = ratlin.kernel_basis(system, m + n)
    pushed_rows: List[List[Fraction]] = []
    for z in solutions:
        eta = list(z[:m])
        lam = z[m:]
        v = [
            sum(lam[r] * dirac.rows[r][i] for r in range(n))
            for i in range(n)
        ]
        w = [sum(a[j][i] * v[i] for i in range(n)) for j in range(m)]
        pushed_rows.append(w + eta)
    result = _row_space_dirac(pushed_rows, m)

    # Strong: no nonzero (v | 0) in L_P with A v = 0.
    constraint = [
        [dirac.rows[r][n + i] for r in range(n)] for i in range(n)
    ]
    constraint += [
        [
            sum(a[j][i] * dirac.rows[r][i] for i in range(n))
            for r in range(n)
        ]
        for j in range(m)
    ]
    strong = not ratlin.kernel_basis(constraint, n)
    surjective = ratlin.rank([list(r) for r in a]) == m

    pushed_cospinor = ext_pushforward(cospinor_line(dirac), [list(r) for r in a])
    if pushed_cospinor.is_zero != (not strong):
        raise DiracError(
            "pushed co-spinor vanishing disagrees with the strong condition"
        )
    cospinor_transported = False
    if strong:
        if not proportional(pushed_cospinor, cospinor_line(result)):
            raise DiracError(
                "pushed co-spinor does not span the co-spinor line of the "
                "pushforward"
            )
        cospinor_transported = True

    kernel_spinor_checked = False
    if strong and surjective:
        kernel = ratlin.kernel_basis([list(r) for r in a], n)
        v_top = ExtElement.scalar(n, 1)
        for vec in kernel:
            v_top = wedge(v_top, ExtElement.from_vector(vec))
        chi = interior(v_top, spinor_line(dirac))
        if chi.is_zero:
            raise DiracError("iota_v(phi) vanished for a strong surjection")
        psi = _solve_pullback_preimage(chi, a, m)
        if psi is None:
            raise DiracError(
                "iota_v(phi) is not a pullback along the surjection"
            )
        if not proportional(psi, spinor_line(result)):
            raise DiracError(
                "the solved psi does not span the spinor line downstairs"
            )
        kernel_spinor_checked = True
    return PushforwardResult(
        result, strong, surjective, cospinor_transported, kernel_spinor_checked
    )


def _solve_pullback_preimage(
    chi: ExtElement, a: Tuple[Vec, ...], m: int
) -> Optional[ExtElement]:
    """Solve ``f^*(psi) = chi`` coordinatewise; None when unsolvable."""
    n = chi.n
    source_keys = all_keys(m)
    target_keys = all_keys(n)
    index = {k: r for r, k in enumerate(target_keys)}
    columns = []
    for key in source_keys:
        image = ext_pullback(
            ExtElement(m, {key: Fraction(1)}), [list(r) for r in a], n
        )
        col = [Fraction(0)] * len(target_keys)
        for k, v in image.terms.items():
            col[index[k]] = v
        columns.append(col)
    rows = [
        [columns[c][r] for c in range(len(source_keys))]
        for r in range(len(target_keys))
    ]
    rhs = [Fraction(0)] * len(target_keys)
    for k, v in chi.terms.items():
        rhs[index[k]] = v
    solution = ratlin.solve(rows, rhs)
    if solution is None:
        return None
    return ExtElement(
        m, {source_keys[i]: c for i, c in enumerate(solution) if c != 0}
    )


# ---------------------------------------------------------------------------
# The three equivalent linear transversality conditions.


@dataclass(frozen=True)
class TransversalConditions:
    """The three equivalent pointwise transversality tests for X in (V, L).

    (b): ``(X (+) ann X) cap L = 0``;
    (c): the top degree of the restricted spinor is nonzero;
    (d): the projection of the co-spinor to the top power of V/X is nonzero.
    """

    b: bool
    c: bool
    d: bool
    codim: int

    @property
    def agree(self) -> bool:
        return self.b == self.c == self.d

    @property
    def all_hold(self) -> bool:
        return self.b and self.c and self.d


def transversal_conditions(
    dirac: LinearDirac, subspace_rows
) -> TransversalConditions:
    """Evaluate the three conditions for a subspace given by basis rows."""
    n = dirac.n
    x_rows = _fraction_matrix(subspace_rows, n)
    k = len(x_rows)
    x_matrix = [list(r) for r in x_rows]
    if k and ratlin.rank(x_matrix) != k:
        raise DiracError("subspace basis rows are linearly dependent")
    q = n - k
    annihilator = ratlin.kernel_basis(x_matrix, n) if k else ratlin.identity(n)

    # (b) stack L with X (+) ann(X) and test zero intersection by rank.
    stacked = [list(r) for r in dirac.rows]
    for row in x_rows:
        stacked.append(list(row) + [Fraction(0)] * n)
    for xi in annihilator:
        stacked.append([Fraction(0)] * n + list(xi))
    b = ratlin.rank(stacked) == 2 * n

    # (c) restrict the spinor to X and look at its top-degree coefficient.
    inclusion = [[x_rows[a][j] for a in range(k)] for j in range(n)]
    restricted = ext_pullback(spinor_line(dirac), inclusion, k)
    c = restricted.coefficient(tuple(range(k))) != 0

    # (d) project the co-spinor to the top power of V/X.
    quotient = [list(xi) for xi in annihilator]
    projected = ext_pushforward(cospinor_line(dirac), quotient)
    d = projected.coefficient(tuple(range(q))) != 0

    return TransversalConditions(b, c, d, q)


# ---------------------------------------------------------------------------
# Unimodularity through the inhomogeneous spinor field.


@dataclass(frozen=True)
class SpinorComponent:
    """One graded component ``(-1)^k iota_{pi^k}(mu) / k!`` of ``e^{-iota_pi}(mu)``."""

    power: int
    coefficient: Fraction
    form: object
    is_closed: bool


@dataclass(frozen=True)
class DiracUnimodularVerdict:
    """Whether every graded component of ``e^{-iota_pi}(mu)`` is closed."""

    ok: bool
    components: Tuple[SpinorComponent, ...]
    agrees_with_density_check: bool


def dirac_unimodular_check(
    structure: PoissonStructure, density: Density
) -> DiracUnimodularVerdict:
    """Closedness of the inhomogeneous spinor field, degree by degree.

    Cross-checked against the invariant-density test: the two must agree
    because closedness of the degree-(m-2) component already forces the
    rest of the chain.
    """
    components = []
    ok = True
    for entry in modular_chain(structure, density):
        coeff = Fraction((-1) ** entry.power, math.factorial(entry.power))
        scaled = entry.form.scale(coeff)
        components.append(
            SpinorComponent(entry.power, coeff, scaled, entry.is_closed)
        )
        ok = ok and entry.is_closed
    base = check_invariant_density(structure, density)
    if base.ok != ok:
        raise DiracError(
            "spinor closedness disagrees with the invariant-density test"
        )
    return DiracUnimodularVerdict(ok, tuple(components), True)
