// Bernoulli-weighted higher derived brackets on a complement A of a graded
// Lie subalgebra L inside M, for a source element m in M or a derivation D
// preserving L:
//
//   Phi(m)_i(a_1..a_i) = sum_{sigma} eps sum_{k=0..i} B_{i-k}/(k!(i-k)!)
//       [..[P([..[m,a_s1]..,a_sk]), a_s(k+1)]..,a_si],   Phi(m)_0(1) = Pm,
//
// and the analogous family for D with innermost D a_s1 and k >= 1. Both are
// produced by one nested-bracket evaluator differing only in seed and k
// range, so the two families cannot drift apart in sign conventions.
//
// Also here: the Lie-morphism identities of Phi, the projection-to-L
// morphism, and the specializations to coderivation algebras, Koszul
// brackets on endomorphism algebras, subcomplex brackets and the
// nonnegative/negative splitting of a dgla.
#pragma once

#include "hdb/coalgebra.hpp"
#include "hdb/gla.hpp"
#include "hdb/homology.hpp"
#include "hdb/linalg.hpp"

namespace hdb {

// Throws unless: splitting present, L span closed; A span closed (these are
// the closed-formula hypotheses). m must be homogeneous.
Coderivation phi_element(const GLA& g, const Vec& m, int max_arity);

// D must satisfy the Leibniz rule and preserve L (validated here).
Coderivation phi_derivation(const GLA& g, const LinearMap& d, int max_arity);

// Independent single-term evaluators for the abelian-A reduction:
//   Phi(m)_i = P[..[m,a_1]..,a_i]   /   Phi(D)_i = P[..[D a_1,a_2]..,a_i].
// No permutation sum, no Bernoulli weights; valid only for abelian A.
Coderivation voronov_element(const GLA& g, const Vec& m, int max_arity);
Coderivation voronov_derivation(const GLA& g, const LinearMap& d, int max_arity);

// The Lie-morphism identities of the derived-bracket correspondence,
// checked coefficientwise up to `n`:
//   [Phi(m1),Phi(m2)] = Phi([m1,m2])
//   [Phi(D1),Phi(D2)] = Phi([D1,D2])
//   [Phi(D),Phi(m)]   = Phi(Dm)
CheckReport phi_lie_morphism_report(const GLA& g, const std::vector<Vec>& elements,
                                    const std::vector<LinearMap>& derivations, int n);

// Phi(D) o Phi(D) = 0 whenever [D,D] = 0 (D of degree one).
CheckReport phi_squares_to_zero_report(const GLA& g, const LinearMap& d, int n);

// The morphism modeling the projection of the homotopy fiber onto L:
//   f_i(a_1..a_i) = (1/i!) sum_sigma eps s^-1 Pperp [..[D a_s1, a_s2].., a_si]
// from (A, Phi(D)) to the desuspension of (L, D, [.,.]).
struct ProjectionMorphism {
  Subspace a_part;
  Coderivation phi_d;      // structure on the A span
  Decalage target;         // desuspended (L, D|L, [.,.])
  CoalgMorphism f;
  CheckReport morphism_equation;  // checked up to the requested arity
};
ProjectionMorphism projection_morphism(const GLA& g, const LinearMap& d, int n);

// ---------------------------------------------------------------------------
// Coderivation algebras: the derived brackets of an unreduced coderivation R
// on SV, taken in Coder(SV) with L = ker(evaluation) and A the image of the
// section sigma, return R itself. Nested brackets are evaluated through
// [Q, sigma_v]_i(w) = q_{i+1}(v.w), never materializing End of the word
// space.
CheckReport phi_identity_on_coderivations(const Coderivation& r, int n);

// The adjoint morphism of an L-infinity structure: checks the window
// identity  s Ad_i(v_1..v_i)_k(w) = q_{i+k}(v_1..v_i.w)  for k >= 1, and
// that each Ad_i value is a reduced coderivation.
//
// Whether the evaluation map of the coderivation complex admits a dg right
// inverse (the homotopy-abelianity criterion this adjoint feeds into) is
// not decided here: the untruncated coderivation space is infinite
// dimensional, so only the window identities are certified.
CheckReport adjoint_morphism_report(const Coderivation& q, int n);

// ---------------------------------------------------------------------------
// Unital associative graded algebras and Koszul-type brackets.

struct AssocAlgebra {
  SpacePtr space;
  std::map<std::pair<int, int>, Vec> mult;  // product of basis pairs
  int unit = -1;

  Vec product(const Vec& x, const Vec& y) const;
  Vec jordan(const Vec& x, const Vec& y) const;  // x o y = (xy + (-1)^{|x||y|} yx)/2
};

CheckReport validate_assoc(const AssocAlgebra& alg);

// End(A) with the splitting L = {f : f(1) = 0}, A embedded by left
// multiplications, P(f) = l_{f(1)}.
struct EndSetup {
  SpacePtr end_space;          // adapted basis: left multiplications first
  GLA end_gla;
  Subspace a_part;             // the l_u's, index-aligned with alg.space
  std::vector<LinearMap> basis_maps;   // adapted basis as matrices
  Mat decomp_inverse;          // inverse change of basis, for to_coords
  int ambient_dim = 0;
  Vec to_coords(const LinearMap& f) const;  // exact decomposition
};
EndSetup koszul_end_setup(const AssocAlgebra& alg);

// Basis-aligned projections for a raw flag vector (P onto the A flags).
std::pair<LinearMap, LinearMap> projections_of_parts(const SpacePtr& s,
                                                     const std::vector<Part>& parts);

struct KoszulBrackets {
  Coderivation phi;   // on alg.space via the l-embedding (unreduced)
};
KoszulBrackets koszul_brackets(const AssocAlgebra& alg, const LinearMap& f, int max_arity);

// Smallest k <= k_max with Phi(f)_i = 0 for k < i <= n; nullopt when the
// window shows a nonzero bracket above k_max. The answer is relative to n.
// On commutative algebras these classes are the differential operators of
// order <= k; in the noncommutative case the function only reports the
// observed bound and draws no further conclusion.
std::optional<int> operator_order_bound(const AssocAlgebra& alg, const LinearMap& f, int k_max,
                                        int n);

// End(V) for a split dg space V = W (+) A, with L = {f : f(W) in W} and the
// abelian complement Hom(W,A) = {f : f = P f Pperp}.
EndSetup end_of_complex(const SpacePtr& v, const std::vector<Part>& parts);

// [f, -] of End expressed in the setup's adapted coordinates.
LinearMap ad_in_end(const EndSetup& s, const LinearMap& f);

// ---------------------------------------------------------------------------
// Subcomplex brackets: for a dg space (V,d) with dg subspace W and
// basis-aligned complement A, the derived brackets of ad_d inside End(V)
// with L = {f : f(W) in W} and the abelian complement {f = P f Pperp}
// vanish from arity three on. Returns the two surviving brackets and the
// strict morphism f -> [Pperp d P, f] into L.
struct SubcomplexBrackets {
  EndSetup setup;          // end_space/gla with the Hom(W,A) splitting
  Coderivation phi;        // reduced; arities 1 and 2 only
  LinearMap strict_morphism;   // A part -> L part
  CheckReport report;      // vanishing from arity 3, morphism checks
};
SubcomplexBrackets subcomplex_brackets(const SpacePtr& v, const LinearMap& d,
                                       const std::vector<Part>& parts, int n);

// ---------------------------------------------------------------------------
// Degree splitting of a dgla: L^{>=0} as the subalgebra, L^{<0} as the
// complement. The brackets have the closed form
//   Phi(D)_i = -B_{i-1}/(i-1)! sum_sigma eps [..[Pperp D l_s1, l_s2]..,l_si]
// for i >= 2, checked against the defining double sum.
struct GetzlerBrackets {
  GLA split;                  // same algebra with the degree-sign splitting
  Coderivation definition_route;
  Coderivation closed_form;
  CheckReport report;
};
GetzlerBrackets getzler_brackets(const GLA& g, int n);

// Restriction of a GLA to the span of a part (structure constants and
// differential restricted); the part must be closed.
GLA part_gla(const GLA& g, Part p, const Subspace& sub);

}  // namespace hdb
