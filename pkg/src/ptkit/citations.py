"""Citation strings attached to verdicts.

Each constant is the verbatim statement of the named result; verdicts and
reports quote these strings so that every non-inconclusive answer names the
rule it came from.
"""

THEOREM_1 = "A unimodular Poisson manifold has the HNPT property."

THEOREM_2 = (
    "Let f : (P, π_P) → (M, π_M) be a proper Poisson map. If (P, π_P) has the "
    "HNPT property, then the homology class of every compact Poisson "
    "transversal X ⊂ M which meets f(P) is nontrivial."
)

THEOREM_3 = "A Poisson manifold with closed leaves has the HNPT property."

THEOREM_4 = "Log-symplectic manifolds have the weak HNPT property."

THEOREM_5 = (
    "A compact, connected, nonempty Poisson transversal of an orientable "
    "log-symplectic manifold has nontrivial homology class."
)

COROLLARY_1 = (
    "A Poisson manifold which admits a surjective proper symplectic "
    "realization has the HNPT property."
)

COROLLARY_2 = (
    "A regular, corank-one Poisson structure on a compact, oriented manifold "
    "M with H_1(M, ℝ) = 0 does not admit proper symplectic realizations."
)

COROLLARY_3 = (
    "Let X be a compact Poisson transversal in a Poisson manifold (M, π). "
    "If X meets a closed, embedded, unimodular Poisson submanifold, then "
    "[X] ≠ 0 in H_•(M, 𝔬_M)."
)

EXAMPLE_1 = (
    "the homology class [X] of the Poisson transversal is trivial in "
    "H_1(𝔤*, ℝ) = 0; in particular, the HNPT property does not hold."
)

EXAMPLE_1_CIRCLE = (
    "π_𝔤 (equivalently, X) admits a transverse circle if and only if the "
    "real part of the two eigenvalues of A have the same sign (and are "
    "non-zero)."
)

EXAMPLE_2 = (
    "The two central circles X_i ⊂ C_i, with i = 0, 1, are Poisson "
    "transversals in (𝕊³, π), and both are homologous to zero, since "
    "H_1(𝕊³, ℝ) = 0. Thus, (𝕊³, π) does not have the HNPT property."
)

EXAMPLE_3 = (
    "So, if ϱ*(ω^top) is exact, (M, π) does not have the weak HNPT property."
)

EXAMPLE_4 = (
    "The canonical Poisson structure (𝔤*, π_𝔤) on the dual of a Lie algebra "
    "𝔤, is unimodular if and only if 𝔤 is unimodular as a Lie algebra, in "
    "the sense that ∧^top 𝔤 is trivial as a representation."
)

EXAMPLE_7 = (
    "Since the induced coorientations at N and S differ, we have that "
    "[X] = [N] - [S] = 0."
)

EXAMPLE_8 = (
    "for any point P in the symplectic locus of π_ℙ², we have that X = {P} "
    "is a Poisson transversal, but [X] = 0, because H_0(ℙ², 𝔬_ℙ²) = 0."
)
