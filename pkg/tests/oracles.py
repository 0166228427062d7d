"""Independent reference computations used to freeze expected test values.

Everything here is deliberately written from first principles (operator
identities, coordinate bracket expansion) rather than reusing the production
formulas, so the two code paths can cross-check each other exactly.
"""

from fractions import Fraction
from itertools import combinations

from ptkit.calculus import (
    DiffForm,
    Multivector,
    exterior_derivative,
    interior_product,
    wedge,
)
from ptkit.poly import PolyScalar


def lie_operator(p: Multivector, eta: DiffForm) -> DiffForm:
    """L_P = iota_P d - (-1)^deg(P) d iota_P acting on a form."""
    sign = (-1) ** p.degree
    first = interior_product(p, exterior_derivative(eta))
    second = exterior_derivative(interior_product(p, eta))
    return first - second if sign > 0 else first + second


def schouten_oracle(p: Multivector, q: Multivector) -> Multivector:
    """Expand [P,Q] from the defining operator identity.

    iota_[P,Q] is the graded commutator L_P iota_Q - (-1)^((p-1)q) iota_Q L_P;
    coefficients are read off by applying it to the coordinate basis forms of
    degree p+q-1 (iota_{D_A} dx_A = (-1)^(k(k-1)/2), zero across distinct
    keys of equal size).
    """
    nv = p.nvars
    degree = p.degree + q.degree - 1
    if degree < 0:
        return Multivector.zero(nv, 0)
    if degree > nv:
        return Multivector(nv, degree, {})
    sign_cross = (-1) ** ((p.degree - 1) * q.degree)
    readoff = (-1) ** (degree * (degree - 1) // 2)
    terms = {}
    for key in combinations(range(nv), degree):
        basis = DiffForm(nv, degree, {key: PolyScalar.constant(nv, 1)})
        left = lie_operator(p, interior_product(q, basis))
        right = interior_product(q, lie_operator(p, basis))
        acted = left - right if sign_cross > 0 else left + right
        coeff = acted.terms.get(())
        if coeff is None or coeff.is_zero():
            continue
        terms[key] = coeff if readoff > 0 else -coeff
    return Multivector(nv, degree, terms)


def coordinate_bracket(pi: Multivector, f: PolyScalar, g: PolyScalar) -> PolyScalar:
    """{f, g} = sum_{i<j} pi^{ij} (df/dx_i dg/dx_j - df/dx_j dg/dx_i)."""
    nv = pi.nvars
    out = PolyScalar(nv, {})
    for (i, j), coeff in pi.terms.items():
        out = out + coeff * (
            f.derivative(i) * g.derivative(j) - f.derivative(j) * g.derivative(i)
        )
    return out


def jacobiator_vanishes(pi: Multivector) -> bool:
    """Jacobi identity on all coordinate triples, by direct expansion."""
    nv = pi.nvars
    coords = [PolyScalar.variable(nv, i) for i in range(nv)]
    for a, b, c in combinations(range(nv), 3):
        fa, fb, fc = coords[a], coords[b], coords[c]
        total = (
            coordinate_bracket(pi, coordinate_bracket(pi, fa, fb), fc)
            + coordinate_bracket(pi, coordinate_bracket(pi, fb, fc), fa)
            + coordinate_bracket(pi, coordinate_bracket(pi, fc, fa), fb)
        )
        if not total.is_zero():
            return False
    return True


def random_poly(rng, nvars, max_degree=2, max_terms=3) -> PolyScalar:
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        key = [0] * nvars
        for _ in range(rng.randint(0, max_degree)):
            key[rng.randrange(nvars)] += 1
        terms[tuple(key)] = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
    return PolyScalar(nvars, terms)


def random_multivector(rng, nvars, degree, max_terms=2) -> Multivector:
    terms = {}
    keys = list(combinations(range(nvars), degree))
    for _ in range(rng.randint(1, max_terms)):
        terms[keys[rng.randrange(len(keys))]] = random_poly(rng, nvars)
    return Multivector(nvars, degree, terms)


def random_form(rng, nvars, degree, max_terms=2) -> DiffForm:
    terms = {}
    keys = list(combinations(range(nvars), degree))
    for _ in range(rng.randint(1, max_terms)):
        terms[keys[rng.randrange(len(keys))]] = random_poly(rng, nvars)
    return DiffForm(nvars, degree, terms)


# ---------------------------------------------------------------------------
# Exterior-algebra oracles over Fraction for the linear Dirac layer.
#
# Deliberately independent machinery: dense operator matrices in the full
# 2^n basis, permutation parity by selection sort, and a division-based
# Gauss-Jordan kernel (no integer scaling, no sparsity, no incremental
# restriction).  Results cross-check the sparse exact solvers.


def ext_keys(n):
    """All strictly increasing index tuples, sorted by (degree, lexicographic)."""
    keys = []
    for p in range(n + 1):
        keys.extend(combinations(range(n), p))
    return keys


def perm_sign_sorted(seq):
    """Parity of the permutation that sorts seq; 0 if entries repeat."""
    items = list(seq)
    if len(set(items)) != len(items):
        return 0
    sign = 1
    for i in range(len(items)):
        m = i
        for r in range(i + 1, len(items)):
            if items[r] < items[m]:
                m = r
        if m != i:
            items[i], items[m] = items[m], items[i]
            sign = -sign
    return sign


def oracle_wedge_key(a, b):
    """e_a ^ e_b as (sign, key); None on a collision."""
    sign = perm_sign_sorted(tuple(a) + tuple(b))
    if sign == 0:
        return None
    return sign, tuple(sorted(tuple(a) + tuple(b)))


def oracle_contract_key(J, K):
    """iota_{e_J} e_K with iota_{u^v} = iota_u o iota_v (last letter first)."""
    sign = 1
    key = tuple(K)
    for j in reversed(tuple(J)):
        if j not in key:
            return None
        rest = tuple(k for k in key if k != j)
        sign *= perm_sign_sorted((j,) + rest)
        key = rest
    return sign, key


def oracle_interior(phi, w):
    """iota_phi w for dict-coefficient elements phi (dual letters) and w."""
    out = {}
    for J, a in phi.items():
        for K, b in w.items():
            hit = oracle_contract_key(J, K)
            if hit is None:
                continue
            sign, key = hit
            out[key] = out.get(key, Fraction(0)) + sign * a * b
    return {k: v for k, v in out.items() if v != 0}


def oracle_wedge(x, y):
    out = {}
    for A, a in x.items():
        for B, b in y.items():
            hit = oracle_wedge_key(A, B)
            if hit is None:
                continue
            sign, key = hit
            out[key] = out.get(key, Fraction(0)) + sign * a * b
    return {k: v for k, v in out.items() if v != 0}


def frac_kernel(rows, ncols):
    """Kernel basis of a Fraction matrix by classic Gauss-Jordan division."""
    mat = [[Fraction(x) for x in row] for row in rows]
    pivots = []
    rank = 0
    for col in range(ncols):
        piv = None
        for r in range(rank, len(mat)):
            if mat[r][col] != 0:
                piv = r
                break
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        pv = mat[rank][col]
        mat[rank] = [x / pv for x in mat[rank]]
        for r in range(len(mat)):
            if r != rank and mat[r][col] != 0:
                f = mat[r][col]
                mat[r] = [a - f * b for a, b in zip(mat[r], mat[rank])]
        pivots.append(col)
        rank += 1
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -mat[r][fc]
        basis.append(v)
    return basis


def _dense_operator(n, single_contract, single_wedge):
    """Rows of the dense 2^n x 2^n operator built from per-letter actions."""
    keys = ext_keys(n)
    index = {k: i for i, k in enumerate(keys)}
    size = len(keys)
    mat = [[Fraction(0)] * size for _ in range(size)]
    for c, key in enumerate(keys):
        for coeff, out_key in single_contract(key) + single_wedge(key):
            mat[index[out_key]][c] += coeff
    return mat


def oracle_annihilator_ops(rows, n, side):
    """Dense matrices of (iota_u + xi^) on forms, or (u^ + iota_xi) on vectors."""
    ops = []
    for row in rows:
        u, xi = row[:n], row[n:]

        def contract(key, vec=u if side == "spinor" else xi):
            out = []
            for i, ci in enumerate(vec):
                if ci == 0:
                    continue
                hit = oracle_contract_key((i,), key)
                if hit is not None:
                    out.append((ci * hit[0], hit[1]))
            return out

        def wedge_part(key, vec=xi if side == "spinor" else u):
            out = []
            for j, cj in enumerate(vec):
                if cj == 0:
                    continue
                hit = oracle_wedge_key((j,), key)
                if hit is not None:
                    out.append((cj * hit[0], hit[1]))
            return out

        ops.append(_dense_operator(n, contract, wedge_part))
    return ops


def oracle_annihilator_line(rows, n, side):
    """The 1-dimensional annihilator of a Lagrangian, as a key->Fraction dict."""
    keys = ext_keys(n)
    stacked = []
    for op in oracle_annihilator_ops(rows, n, side):
        stacked.extend(op)
    basis = frac_kernel(stacked, len(keys))
    assert len(basis) == 1, f"annihilator dimension {len(basis)} != 1"
    vec = basis[0]
    return {keys[i]: vec[i] for i in range(len(keys)) if vec[i] != 0}


def oracle_spinor(rows, n):
    return oracle_annihilator_line(rows, n, "spinor")


def oracle_cospinor(rows, n):
    return oracle_annihilator_line(rows, n, "cospinor")


def normalize_ext(d):
    """Scale a key->Fraction dict to primitive integers, leading entry positive."""
    if not d:
        return {}
    items = sorted(d.items(), key=lambda kv: (len(kv[0]), kv[0]))
    lead = items[0][1]
    scaled = {k: v / lead for k, v in d.items()}
    from math import gcd

    denom = 1
    for v in scaled.values():
        denom = denom * v.denominator // gcd(denom, v.denominator)
    ints = {k: v * denom for k, v in scaled.items()}
    g = 0
    for v in ints.values():
        g = gcd(g, abs(v.numerator))
    return {k: v / g for k, v in ints.items()}


def oracle_exp_minus_iota(pi_terms, n):
    """e^{-iota_pi}(top form) as a key->Fraction dict of form keys."""
    from math import factorial

    top = tuple(range(n))
    power = {(): Fraction(1)}
    out = {}
    k = 0
    while power:
        for K, c in power.items():
            hit = oracle_contract_key(K, top)
            if hit is None:
                continue
            sign, key = hit
            coeff = Fraction((-1) ** k, factorial(k)) * c * sign
            out[key] = out.get(key, Fraction(0)) + coeff
        power = oracle_wedge(power, pi_terms)
        k += 1
        if k > n:
            break
    return {k_: v for k_, v in out.items() if v != 0}


# ---------------------------------------------------------------------------
# Random Lagrangian subspaces of V (+) V*, as raw coefficient rows.
#
# Seeds (tangent, cotangent, bivector graph, two-form graph) are hit with
# pairing-preserving generators: B-transforms, beta-transforms, GL shears
# and scalings, and coordinate flips e_i <-> e^i.


def random_antisymmetric(rng, n, max_den=2):
    mat = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            value = Fraction(rng.randint(-3, 3), rng.randint(1, max_den))
            mat[i][j] = value
            mat[j][i] = -value
    return mat


def _seed_rows(rng, n):
    kind = rng.choice(["tangent", "cotangent", "bivector", "two-form"])
    rows = [[Fraction(0)] * (2 * n) for _ in range(n)]
    if kind == "tangent":
        for i in range(n):
            rows[i][i] = Fraction(1)
    elif kind == "cotangent":
        for i in range(n):
            rows[i][n + i] = Fraction(1)
    elif kind == "bivector":
        pi = random_antisymmetric(rng, n)
        for j in range(n):
            for i in range(n):
                rows[j][i] = -pi[i][j]
            rows[j][n + j] = Fraction(1)
    else:
        om = random_antisymmetric(rng, n)
        for i in range(n):
            rows[i][i] = Fraction(1)
            for j in range(n):
                rows[i][n + j] = om[i][j]
    return rows


def random_lagrangian_rows(rng, n):
    """Rows of a random Lagrangian subspace of V (+) V* over the rationals."""
    rows = _seed_rows(rng, n)
    for _ in range(rng.randint(2, 4)):
        kind = rng.randrange(4)
        if kind == 0:  # B-transform: xi += B u
            b = random_antisymmetric(rng, n, 1)
            for row in rows:
                u = row[:n]
                for j in range(n):
                    row[n + j] += sum(b[j][i] * u[i] for i in range(n))
        elif kind == 1:  # beta-transform: u += beta xi
            beta = random_antisymmetric(rng, n, 1)
            for row in rows:
                xi = row[n:]
                for i in range(n):
                    row[i] += sum(beta[i][j] * xi[j] for j in range(n))
        elif kind == 2:  # GL shear u_i += c u_j with dual xi_j -= c xi_i
            i, j = rng.randrange(n), rng.randrange(n)
            if i != j:
                c = Fraction(rng.randint(-2, 2))
                for row in rows:
                    row[i] += c * row[j]
                    row[n + j] -= c * row[n + i]
        else:  # flip the i-th tangent and cotangent coordinates
            i = rng.randrange(n)
            for row in rows:
                row[i], row[n + i] = row[n + i], row[i]
    return tuple(tuple(r) for r in rows)


def random_subspace_rows(rng, n, dim=None):
    """Basis rows of a random subspace of V; dimension is random if omitted."""
    k = rng.randint(0, n) if dim is None else dim
    rows = []
    while len(rows) < k:
        cand = [Fraction(rng.randint(-2, 2)) for _ in range(n)]
        trial = [list(r) for r in rows] + [cand]
        if _independent(trial):
            rows.append(cand)
    return tuple(tuple(r) for r in rows)


def _independent(rows):
    """Row independence over the rationals by plain Gaussian elimination."""
    mat = [[Fraction(x) for x in row] for row in rows]
    rank = 0
    ncols = len(mat[0]) if mat else 0
    for col in range(ncols):
        piv = None
        for r in range(rank, len(mat)):
            if mat[r][col] != 0:
                piv = r
                break
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        pv = mat[rank][col]
        for r in range(rank + 1, len(mat)):
            if mat[r][col] != 0:
                f = mat[r][col] / pv
                mat[r] = [a - f * b for a, b in zip(mat[r], mat[rank])]
        rank += 1
    return rank == len(mat)
