"""Poisson structures on coordinate charts.

Verification (vanishing self-bracket), Lie-Poisson construction from
structure constants, Hamiltonian vector fields, invariant densities and the
closedness chain they generate, a polynomial-stratum solver for invariant
densities, log-symplectic locus analysis, fiber integration over compact
product fibers, and pointwise Poisson-map checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy

from .calculus import (
    DiffForm,
    Multivector,
    contract_form,
    exterior_derivative,
    interior_product,
    multivector_power,
    schouten_bracket,
    wedge,
)
from .expr import Expression, Num, differentiate, evaluate, substitute
from .expr import add as expr_add, mul as expr_mul
from .exprforms import ExprForm
from .poly import PolyScalar

Key = Tuple[int, ...]


# ---------------------------------------------------------------------------
# core types


@dataclass(frozen=True)
class PoissonStructure:
    chart_dim: int
    bivector: Multivector
    verified: bool = False

    def __post_init__(self) -> None:
        if self.bivector.degree != 2:
            raise ValueError("a Poisson structure is a bivector (degree 2)")
        if self.bivector.nvars != self.chart_dim:
            raise ValueError("bivector does not live on the declared chart")

    @classmethod
    def from_bivector(cls, bivector: Multivector, require: bool = True) -> "PoissonStructure":
        """Verify the Jacobi identity and wrap the bivector.

        With ``require=True`` a nonvanishing self-bracket raises; otherwise
        the structure is returned unverified.
        """
        verdict = jacobi_check(bivector)
        if require and not verdict.ok:
            raise ValueError(
                "bivector is not Poisson; self-bracket witness term "
                f"{verdict.witness_key} -> {verdict.witness_coeff}"
            )
        return cls(bivector.nvars, bivector, verified=verdict.ok)


@dataclass(frozen=True)
class Density:
    top_form: DiffForm
    orientation_note: str = ""

    def __post_init__(self) -> None:
        m = self.top_form.nvars
        if self.top_form.degree != m:
            raise ValueError("a density is represented by a top-degree form")
        if self.top_form.is_zero():
            raise ValueError("density coefficient is identically zero")

    def coefficient(self) -> PolyScalar:
        return self.top_form.terms[tuple(range(self.top_form.nvars))]

    def positivity_witnesses(self, points: Iterable[Sequence[float]]) -> List[Tuple[Tuple[float, ...], float]]:
        """Sample the coefficient; the caller decides what counts as positive."""
        coeff = self.coefficient()
        return [(tuple(p), coeff.evaluate(tuple(p))) for p in points]


class LieAlgebraError(ValueError):
    pass


@dataclass(frozen=True)
class LieAlgebraData:
    """Structure constants c^k_{ij} of a finite-dimensional Lie algebra.

    ``constants`` maps ordered pairs (i, j) with i < j to the coefficient
    vector of [e_i, e_j] in the basis; antisymmetry fills in the rest.  The
    Jacobi identity is checked exactly at construction.
    """

    dim: int
    constants: Mapping[Tuple[int, int], Tuple[Fraction, ...]]

    def __post_init__(self) -> None:
        clean: Dict[Tuple[int, int], Tuple[Fraction, ...]] = {}
        for (i, j), vec in self.constants.items():
            if not (0 <= i < j < self.dim):
                raise LieAlgebraError(f"bracket pair {(i, j)} must satisfy 0 <= i < j < dim")
            vec = tuple(Fraction(x) for x in vec)
            if len(vec) != self.dim:
                raise LieAlgebraError(f"[e_{i}, e_{j}] needs {self.dim} coefficients")
            if any(vec):
                clean[(i, j)] = vec
        object.__setattr__(self, "constants", clean)
        bad = self._jacobi_defect()
        if bad is not None:
            i, j, k, l, value = bad
            raise LieAlgebraError(
                f"structure constants violate the Jacobi identity at "
                f"(i,j,k,l)=({i},{j},{k},{l}): defect {value}"
            )

    def bracket_vector(self, i: int, j: int) -> Tuple[Fraction, ...]:
        if i == j:
            return tuple(Fraction(0) for _ in range(self.dim))
        if i < j:
            return self.constants.get((i, j), tuple(Fraction(0) for _ in range(self.dim)))
        return tuple(-x for x in self.bracket_vector(j, i))

    def _jacobi_defect(self):
        n = self.dim
        for i in range(n):
            for j in range(i + 1, n):
                cij = self.bracket_vector(i, j)
                for k in range(j + 1, n):
                    cjk = self.bracket_vector(j, k)
                    cki = self.bracket_vector(k, i)
                    for l in range(n):
                        total = Fraction(0)
                        for m in range(n):
                            total += cij[m] * self.bracket_vector(m, k)[l]
                            total += cjk[m] * self.bracket_vector(m, i)[l]
                            total += cki[m] * self.bracket_vector(m, j)[l]
                        if total:
                            return (i, j, k, l, total)
        return None


# ---------------------------------------------------------------------------
# verification and construction


@dataclass(frozen=True)
class JacobiVerdict:
    ok: bool
    witness_key: Optional[Key] = None
    witness_coeff: Optional[PolyScalar] = None


def jacobi_check(bivector: Multivector) -> JacobiVerdict:
    """Vanishing of the self-bracket, with one nonzero term as witness."""
    if bivector.degree != 2:
        raise ValueError("jacobi_check expects a bivector")
    residual = schouten_bracket(bivector, bivector)
    if residual.is_zero():
        return JacobiVerdict(True)
    key, coeff = residual.sorted_terms()[0]
    return JacobiVerdict(False, key, coeff)


def lie_poisson(algebra: LieAlgebraData) -> PoissonStructure:
    """Linear Poisson structure on the dual: coefficient of D_i^D_j is sum_k c^k_{ij} x_k."""
    n = algebra.dim
    terms: Dict[Key, PolyScalar] = {}
    for (i, j), vec in algebra.constants.items():
        coeff = PolyScalar(n, {})
        for k, c in enumerate(vec):
            if c:
                coeff = coeff + PolyScalar.variable(n, k).scale(c)
        if not coeff.is_zero():
            terms[(i, j)] = coeff
    bivector = Multivector(n, 2, terms)
    return PoissonStructure.from_bivector(bivector, require=True)


def so3_algebra() -> LieAlgebraData:
    F = Fraction
    return LieAlgebraData(
        3,
        {
            (0, 1): (F(0), F(0), F(1)),
            (1, 2): (F(1), F(0), F(0)),
            (0, 2): (F(0), F(-1), F(0)),
        },
    )


def sl2_algebra() -> LieAlgebraData:
    # basis (h, e, f): [h,e] = 2e, [h,f] = -2f, [e,f] = h
    F = Fraction
    return LieAlgebraData(
        3,
        {
            (0, 1): (F(0), F(2), F(0)),
            (0, 2): (F(0), F(0), F(-2)),
            (1, 2): (F(1), F(0), F(0)),
        },
    )


def book_algebra(a, b, c, d) -> LieAlgebraData:
    """Solvable product type: [e1,e3] = a e1 + b e2, [e2,e3] = c e1 + d e2."""
    F = Fraction
    return LieAlgebraData(
        3,
        {
            (0, 2): (F(a), F(b), F(0)),
            (1, 2): (F(c), F(d), F(0)),
        },
    )


def heisenberg_algebra() -> LieAlgebraData:
    return book_algebra(0, 0, 1, 0)


# ---------------------------------------------------------------------------
# Hamiltonian fields and brackets


def hamiltonian_field(structure: PoissonStructure, f: PolyScalar) -> Multivector:
    """The field obtained by contracting df into the bivector."""
    n = structure.chart_dim
    df = exterior_derivative(DiffForm.from_function(f))
    if df.is_zero():
        return Multivector.zero(n, 1)
    return contract_form(df, structure.bivector)


def poisson_bracket(structure: PoissonStructure, f: PolyScalar, g: PolyScalar) -> PolyScalar:
    """{f, g} as the Hamiltonian field of f applied to g."""
    x_f = hamiltonian_field(structure, f)
    out = PolyScalar(structure.chart_dim, {})
    for key, coeff in x_f.terms.items():
        out = out + coeff * g.derivative(key[0])
    return out


# ---------------------------------------------------------------------------
# invariant densities and the closedness chain


@dataclass(frozen=True)
class DensityVerdict:
    ok: bool
    defect: DiffForm


def check_invariant_density(structure: PoissonStructure, density: Density) -> DensityVerdict:
    """Invariance holds exactly when d of the contracted density vanishes."""
    defect = exterior_derivative(interior_product(structure.bivector, density.top_form))
    return DensityVerdict(defect.is_zero(), defect)


@dataclass(frozen=True)
class ChainEntry:
    power: int
    form: DiffForm
    is_closed: bool


def modular_chain(structure: PoissonStructure, density: Density) -> List[ChainEntry]:
    """Contractions of the density by bivector powers, with closedness flags.

    When the density is invariant, every entry is provably closed; the flags
    report the actual exterior derivatives either way.
    """
    m = structure.chart_dim
    entries: List[ChainEntry] = []
    for k in range(m // 2 + 1):
        form = interior_product(multivector_power(structure.bivector, k), density.top_form)
        entries.append(ChainEntry(k, form, exterior_derivative(form).is_zero()))
    return entries


def _monomials_up_to(nvars: int, bound: int) -> List[Tuple[int, ...]]:
    monos: List[Tuple[int, ...]] = []

    def rec(prefix: Tuple[int, ...], remaining: int, budget: int) -> None:
        if remaining == 0:
            monos.append(prefix)
            return
        for e in range(budget + 1):
            rec(prefix + (e,), remaining - 1, budget - e)

    rec((), nvars, bound)
    monos.sort()
    return monos


def solve_invariant_density(structure: PoissonStructure, degree_bound: int) -> List[PolyScalar]:
    """Polynomial coefficients g (degree <= bound) with d iota_pi (g Omega) = 0.

    The condition is an exact linear system in the rational coefficients of
    g; the returned list is a basis of its solution space.  An empty answer
    bounds only the polynomial stratum searched - it is not a proof that no
    invariant density exists.
    """
    if degree_bound < 0:
        raise ValueError("degree bound must be nonnegative")
    n = structure.chart_dim
    volume = DiffForm.coordinate_volume(n)
    monomials = _monomials_up_to(n, degree_bound)
    images: List[DiffForm] = []
    for expo in monomials:
        g = PolyScalar(n, {expo: Fraction(1)})
        scaled = volume.scale(g)
        images.append(exterior_derivative(interior_product(structure.bivector, scaled)))
    # assemble the linear system: one row per (form key, monomial) pair
    row_index: Dict[Tuple[Key, Tuple[int, ...]], int] = {}
    columns: List[Dict[int, Fraction]] = []
    for image in images:
        col: Dict[int, Fraction] = {}
        for key, coeff in image.terms.items():
            for expo, value in coeff.terms.items():
                slot = row_index.setdefault((key, expo), len(row_index))
                col[slot] = value
        columns.append(col)
    nrows = len(row_index)
    if nrows == 0:
        basis_vectors = [
            [Fraction(1) if i == j else Fraction(0) for j in range(len(monomials))]
            for i in range(len(monomials))
        ]
    else:
        from .ratlin import kernel_basis

        matrix = [[Fraction(0)] * len(monomials) for _ in range(nrows)]
        for c, col in enumerate(columns):
            for r, value in col.items():
                matrix[r][c] = value
        basis_vectors = kernel_basis(matrix, len(monomials))
    basis: List[PolyScalar] = []
    for vec in basis_vectors:
        terms = {expo: coeff for expo, coeff in zip(monomials, vec) if coeff}
        basis.append(PolyScalar(n, terms))
    return basis


# ---------------------------------------------------------------------------
# log-symplectic analysis


@dataclass(frozen=True)
class WitnessReport:
    point: Tuple[float, ...]
    status: str  # "on-locus" | "off-locus" | "inconclusive"
    f_value: float
    gradient_norm: Optional[float] = None
    transversal: Optional[bool] = None
    coorientation_sign: Optional[int] = None


@dataclass(frozen=True)
class LogSymplecticReport:
    top_coefficient: PolyScalar
    identically_zero: bool
    exact_certificate: bool
    certificate_note: str
    witnesses: List[WitnessReport] = field(default_factory=list)


def log_symplectic_analysis(
    structure: PoissonStructure,
    witnesses: Iterable[Sequence[float]] = (),
    tol: float = 1e-9,
) -> LogSymplecticReport:
    """Study the top power's coefficient f and its zero locus.

    At witnesses on the locus (|f| <= tol) the gradient must be nonzero for
    transversality; at clearly-off points (|f| >= sqrt(tol)) the sign of f is
    the coorientation sign of the point transversal.  Points in between are
    inconclusive.  When f is affine with a constant nonzero coefficient on
    some coordinate, transversality of the whole locus is certified exactly.
    """
    m = structure.chart_dim
    if m % 2:
        raise ValueError("log-symplectic analysis needs an even chart dimension")
    k = m // 2
    top = multivector_power(structure.bivector, k)
    full = tuple(range(m))
    f = top.terms.get(full, PolyScalar(m, {}))
    identically_zero = f.is_zero()

    exact = False
    note = ""
    if identically_zero:
        note = "top power vanishes identically; the structure is nowhere symplectic"
    else:
        gradient = [f.derivative(i) for i in range(m)]
        if all(g.is_zero() for g in gradient):
            note = "f is a nonzero constant; the zero locus is empty (symplectic chart)"
            exact = True
        else:
            for i, g in enumerate(gradient):
                if g.is_zero() or g.used_variables():
                    continue
                constant = g.terms[tuple(0 for _ in range(m))]
                exact = True
                note = (
                    f"partial derivative of f along coordinate {i + 1} is the "
                    f"nonzero constant {constant}; the differential of f never "
                    "vanishes, so the zero locus is a transversally cut "
                    "hypersurface"
                )
                break
            if not exact:
                note = "no affine certificate; transversality checked at witnesses only"

    reports: List[WitnessReport] = []
    off_threshold = math.sqrt(tol)
    for point in witnesses:
        point = tuple(float(x) for x in point)
        value = f.evaluate(point)
        if abs(value) <= tol:
            grad = [f.derivative(i).evaluate(point) for i in range(m)]
            norm = math.sqrt(sum(g * g for g in grad))
            reports.append(
                WitnessReport(
                    point,
                    "on-locus",
                    value,
                    gradient_norm=norm,
                    transversal=norm > tol,
                )
            )
        elif abs(value) >= off_threshold:
            reports.append(
                WitnessReport(
                    point,
                    "off-locus",
                    value,
                    coorientation_sign=1 if value > 0 else -1,
                )
            )
        else:
            reports.append(WitnessReport(point, "inconclusive", value))
    return LogSymplecticReport(f, identically_zero, exact, note, reports)


# ---------------------------------------------------------------------------
# fiber integration


@dataclass(frozen=True)
class FiberSpec:
    name: str
    kind: str  # "circle" | "interval"
    start: float = 0.0
    end: float = 2.0 * math.pi

    def __post_init__(self) -> None:
        if self.kind not in ("circle", "interval"):
            raise ValueError("fiber kind must be 'circle' or 'interval'")
        if not (math.isfinite(self.start) and math.isfinite(self.end)):
            raise ValueError("fiber ranges must be finite (compact fibers only)")
        if not self.end > self.start:
            raise ValueError("fiber range must have positive length")


def _quadrature_nodes(spec: FiberSpec, nodes: int) -> Tuple[List[float], List[float]]:
    if nodes < 1:
        raise ValueError("need at least one quadrature node")
    length = spec.end - spec.start
    if spec.kind == "circle":
        # periodic trapezoid rule: uniform nodes, the endpoint is not repeated
        step = length / nodes
        xs = [spec.start + i * step for i in range(nodes)]
        ws = [step] * nodes
        return xs, ws
    raw_x, raw_w = numpy.polynomial.legendre.leggauss(nodes)
    mid = (spec.start + spec.end) / 2.0
    half = length / 2.0
    xs = [mid + half * float(x) for x in raw_x]
    ws = [half * float(w) for w in raw_w]
    return xs, ws


def _integrate_one_fiber(form: ExprForm, spec: FiberSpec, nodes: int) -> ExprForm:
    names = form.names
    try:
        fiber_index = names.index(spec.name)
    except ValueError:
        raise ValueError(f"fiber coordinate {spec.name!r} is not a chart coordinate")
    new_names = names[:fiber_index] + names[fiber_index + 1 :]
    xs, ws = _quadrature_nodes(spec, nodes)
    terms: Dict[Key, Expression] = {}
    for key, coeff in form.terms.items():
        if fiber_index not in key:
            continue
        # pair against the fiber differential moved to the LAST slot of the
        # key; on boundaryless fibers this makes integration commute with
        # the exterior derivative (d f_% = f_% d) rather than anticommute
        r = key.index(fiber_index)
        sign = (-1) ** (len(key) - 1 - r)
        rest = tuple(i if i < fiber_index else i - 1 for i in key if i != fiber_index)
        # symbolic quadrature sum: substitute each node, keep the expression
        total: Expression = Num(Fraction(0))
        for x, w in zip(xs, ws):
            sampled = substitute(coeff, {spec.name: Num(x)})
            total = expr_add(total, expr_mul(Num(sign * w), sampled))
        if total != Num(Fraction(0)):
            prev = terms.get(rest)
            terms[rest] = total if prev is None else expr_add(prev, total)
    return ExprForm.from_terms(new_names, form.degree - 1, terms)


def fiber_integrate(form: ExprForm, fibers: Sequence[FiberSpec], nodes: int) -> ExprForm:
    """Integrate the fiber-top components over a compact product fiber.

    Fibers are integrated iteratively in the declared order; each step pairs
    against that fiber's differential moved to the last slot, so the
    composite pairs against the wedge of the differentials in reverse
    declared order.  The result keeps expression coefficients (quadrature
    sums at frozen nodes), so exterior derivatives of the output remain
    exact tree derivatives and the chain-map law can be tested honestly.
    """
    if not fibers:
        return form
    seen = set()
    for spec in fibers:
        if spec.name in seen:
            raise ValueError(f"duplicate fiber coordinate {spec.name!r}")
        seen.add(spec.name)
    result = form
    for spec in fibers:
        if result.degree == 0:
            return ExprForm.zero(
                tuple(n for n in result.names if n not in {s.name for s in fibers}),
                0,
            )
        result = _integrate_one_fiber(result, spec, nodes)
    return result


# ---------------------------------------------------------------------------
# Poisson-map checks


@dataclass(frozen=True)
class MapSampleVerdict:
    point: Tuple[float, ...]
    image: Tuple[float, ...]
    max_defect: float
    ok: bool


def poisson_map_check(
    components: Sequence[Expression],
    source: PoissonStructure,
    target: PoissonStructure,
    source_names: Sequence[str],
    samples: Iterable[Sequence[float]],
    tol: float = 1e-9,
) -> List[MapSampleVerdict]:
    """Pointwise pushforward test for a map given by expression components.

    At each sample p the bivector of the source is pushed through the exact
    Jacobian of the map and compared entrywise with the target bivector at
    the image point.
    """
    n_src = source.chart_dim
    n_tgt = target.chart_dim
    if len(components) != n_tgt:
        raise ValueError("map must provide one component per target coordinate")
    if len(source_names) != n_src:
        raise ValueError("need one source coordinate name per source dimension")
    partials = [
        [differentiate(comp, name) for name in source_names] for comp in components
    ]
    verdicts: List[MapSampleVerdict] = []
    for point in samples:
        point = tuple(float(x) for x in point)
        env = dict(zip(source_names, point))
        image = tuple(evaluate(comp, env) for comp in components)
        jac = [[evaluate(p, env) for p in row] for row in partials]
        pushed = [[0.0] * n_tgt for _ in range(n_tgt)]
        for (i, j), coeff in source.bivector.terms.items():
            value = coeff.evaluate(point)
            for a in range(n_tgt):
                for b in range(n_tgt):
                    pushed[a][b] += value * (jac[a][i] * jac[b][j] - jac[a][j] * jac[b][i])
        target_vals = [[0.0] * n_tgt for _ in range(n_tgt)]
        for (a, b), coeff in target.bivector.terms.items():
            value = coeff.evaluate(image)
            target_vals[a][b] = value
            target_vals[b][a] = -value
        defect = max(
            (
                abs(pushed[a][b] - target_vals[a][b])
                for a in range(n_tgt)
                for b in range(n_tgt)
            ),
            default=0.0,
        )
        verdicts.append(MapSampleVerdict(point, image, defect, defect <= tol))
    return verdicts
