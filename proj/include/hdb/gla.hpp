// Graded Lie algebras given by structure constants, with optional degree-one
// differential and optional basis-aligned splitting M = L (+) A.
//
// Structure constants are stored for index pairs i <= j only; the (j,i)
// value is derived from graded antisymmetry, so inconsistent double entry
// is impossible. Degree-even diagonal brackets [x,x] must vanish and are
// rejected by validation.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hdb/graded.hpp"
#include "hdb/report.hpp"

namespace hdb {

enum class Part : char { L = 'L', A = 'A' };

struct GLA {
  SpacePtr space;
  std::map<std::pair<int, int>, Vec> table;  // keys (i,j) with i <= j
  std::optional<LinearMap> differential;     // degree +1
  std::optional<std::vector<Part>> splitting;

  // [e_i, e_j] for arbitrary i, j.
  Vec bracket_basis(int i, int j) const;
  // Bilinear extension.
  Vec bracket(const Vec& x, const Vec& y) const;

  bool has_splitting() const { return splitting.has_value(); }
  bool in_part(int i, Part p) const { return (*splitting)[static_cast<size_t>(i)] == p; }
  std::vector<int> part_indices(Part p) const;
};

// Entries may come in either index order; they are normalized by
// antisymmetry. Duplicate (normalized) entries are rejected.
GLA make_gla(SpacePtr space,
             const std::vector<std::tuple<int, int, Vec>>& entries,
             std::optional<LinearMap> differential = std::nullopt,
             std::optional<std::vector<Part>> splitting = std::nullopt);

// Full axiom report: value degrees, even diagonals, Jacobi on all basis
// triples, d^2 = 0 and Leibniz when a differential is present, closure of
// the L and A spans and P d P = P d when a splitting is present.
CheckReport validate_gla(const GLA& g);

// Basis-aligned projections (P onto the A span, P_perp = id - P onto L).
// Requires a splitting.
std::pair<LinearMap, LinearMap> projections(const GLA& g);

// Leibniz rule D[x,y] = [Dx,y] + (-1)^{|D||x|}[x,Dy] on all basis pairs,
// plus D(L) inside L when require_preserves_L and a splitting is present.
CheckReport validate_derivation(const GLA& g, const LinearMap& d,
                                bool require_preserves_L);

// Does [x, L] stay in L for every L basis vector? (normalizer membership)
bool in_normalizer(const GLA& g, const Vec& x);

// Commutator of derivations (as linear maps): [D1,D2] = D1 D2 - (-1)^{|D1||D2|} D2 D1.
LinearMap derivation_bracket(const LinearMap& d1, const LinearMap& d2);

// Adjoint derivation ad_x = [x, -].
LinearMap adjoint(const GLA& g, const Vec& x);

// The span of the flagged part as its own space, with inclusion/projection.
struct Subspace {
  SpacePtr space;                 // the part's own graded space
  std::vector<int> ambient_index; // part index -> ambient index
  std::vector<int> part_index;    // ambient index -> part index or -1
};
Subspace make_part_space(const GLA& g, Part p);

Vec restrict_to_part(const Subspace& s, const Vec& ambient);  // must be supported there
Vec include_from_part(const SpacePtr& ambient, const Subspace& s, const Vec& v);

// Arbitrary index selections as subspaces, and the restricted algebra (the
// span must be closed under the bracket, and under the differential when
// one is present; throws otherwise).
Subspace subspace_from_indices(const SpacePtr& space, const std::vector<int>& indices);
GLA restrict_gla(const GLA& g, const Subspace& sub);

}  // namespace hdb
