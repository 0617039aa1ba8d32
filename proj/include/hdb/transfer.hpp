// Homotopy transfer of L-infinity structures along retraction data
// (pi, f_1, K):   pi f_1 = id,   K q_1 + q_1 K = f_1 pi - id,
// with both maps chain maps. The transferred morphism F and structure R are
// the unique solutions of the fixed points
//   p F = f_1 + K q_+ F        p R = r_1 + pi q_+ F
// computed by arity induction (q_+ is the nonlinear part of Q).
//
// The flagship instance presents the Bernoulli-weighted derived brackets as
// a transfer: the big space is s^-1 Der_sel x s^-1 M x s^-1 L x M (a
// derivation-indexed extension of the cocylinder of L into M), retracting
// onto s^-1 Der_sel x s^-1 M x A. Its transferred structure must agree with
// the closed-form double-sum brackets; the two routes share no bracket
// formula code.
#pragma once

#include "hdb/brackets.hpp"
#include "hdb/coalgebra.hpp"
#include "hdb/gla.hpp"

namespace hdb {

struct RetractionData {
  SpacePtr big, small;
  LinearMap d_big;    // degree +1 differential on the big space
  LinearMap d_small;  // degree +1 differential on the small space
  LinearMap pi;       // big -> small, degree 0
  LinearMap f1;       // small -> big, degree 0
  LinearMap k;        // big -> big, degree -1
};

// Checks the two identities and that pi, f1 are chain maps, elementwise.
CheckReport validate_retraction(const RetractionData& data);

struct TransferResult {
  Coderivation r;    // structure on the small space
  CoalgMorphism f;   // small -> big
  CheckReport fixed_point;  // the defining equations, re-checked post hoc
  // No inverse-direction morphism is constructed: building a right inverse
  // to F needs a refined symmetric-tensor argument that this engine does
  // not implement. Morphisms in the other direction are obtained where
  // needed by solve_morphism.
};

// q must be a reduced degree-one coderivation on data.big whose linear part
// is data.d_big.
TransferResult transfer(const Coderivation& q, const RetractionData& data, int n);

// ---------------------------------------------------------------------------
// The derived-bracket transfer setup. Derivations are user-selected and
// must span a bracket-closed subspace (their pairwise brackets must lie in
// the span).

struct HdbTransferSetup {
  SpacePtr der_space;      // basis D_1..D_r of the selected derivations
  std::vector<LinearMap> derivations;
  GLA der_gla;             // with structure constants of the commutator
  SpacePtr big;            // s^-1 Der x s^-1 M x s^-1 L x M
  SpacePtr small;          // s^-1 Der x s^-1 M x A
  Coderivation q_big;      // assembled extension structure
  RetractionData data;
  // slot offsets into the two spaces
  int big_der = 0, big_sm = 0, big_sl = 0, big_m = 0;
  int small_der = 0, small_sm = 0, small_a = 0;
  Subspace a_part;         // of the underlying algebra
  Subspace l_part;
};

HdbTransferSetup hdb_transfer_setup(const GLA& g, const std::vector<LinearMap>& derivations,
                                    int n);

// The closed-form structure on the small space: r_1(s^-1 m) = Pm,
// r_2 as the shifted brackets of M and of the selected derivations plus the
// derivation action, and the Phi families on mixed words. When `voronov`
// is set the abelian-complement single-term evaluator is used instead of
// the double sum (only valid for abelian A).
Coderivation hdb_closed_form(const HdbTransferSetup& setup, const GLA& g, int n);

// The closed-form morphism: f_1 inserts s^-1 Pperp m, higher coefficients
// are the (1/i!)-weighted nested brackets into the s^-1 L slot.
CoalgMorphism hdb_closed_form_morphism(const HdbTransferSetup& setup, const GLA& g, int n);

// Oracle comparison: transfer over the setup vs the closed forms.
struct HdbOracle {
  HdbTransferSetup setup;
  TransferResult transferred;
  Coderivation closed_r;
  CoalgMorphism closed_f;
  CheckReport report;
};
HdbOracle hdb_transfer_oracle(const GLA& g, const std::vector<LinearMap>& derivations, int n);

// Brackets for a complement that need not be bracket-closed, extracted from
// the transferred structure (L must still be closed).
struct GeneralizedBrackets {
  Coderivation phi;  // unreduced for an element source, reduced for a derivation
};
GeneralizedBrackets generalized_brackets_element(const GLA& g, const Vec& m, int n);
GeneralizedBrackets generalized_brackets_derivation(const GLA& g, const LinearMap& d, int n);

}  // namespace hdb
