// Homology of finite-dimensional complexes over Q, by exact rank
// computation, and the homotopy-abelianity criterion for a split inclusion
// of complexes: H(L) -> H(M) injective, equivalently H(P) : H(M,d) ->
// H(A,Pd) surjective.
#pragma once

#include <map>
#include <optional>
#include <vector>

#include "hdb/gla.hpp"
#include "hdb/graded.hpp"
#include "hdb/linalg.hpp"
#include "hdb/report.hpp"

namespace hdb {

struct HomologyData {
  // degree -> data for that degree
  std::map<int, int> dim;                          // homology dimension
  std::map<int, std::vector<Vec>> cycles;          // basis of ker d
  std::map<int, std::vector<Vec>> boundaries;      // basis of im d
};

// d must have degree +1 and square to zero (throws otherwise).
HomologyData homology(const SpacePtr& space, const LinearMap& d);

struct AbelianityResult {
  bool injective_HL = false;    // H(L,d) -> H(M,d) injective
  bool surjective_HP = false;   // H(P) : H(M,d) -> H(A,Pd) surjective
  std::optional<Vec> witness;   // an L-cycle bounding in M but not in L
  CheckReport report;           // includes the agreement check of the two answers
};

// Requires differential and splitting. Decides both conditions by exact
// linear algebra and asserts that they agree.
AbelianityResult homotopy_abelian_criterion(const GLA& g);

// The map on homology induced by a chain map f : (V,dv) -> (W,dw).
// Returns per-degree matrices in the chosen homology bases, along with
// injectivity/surjectivity over all degrees.
struct InducedMap {
  std::map<int, Mat> blocks;
  bool injective = true;
  bool surjective = true;
};
InducedMap induced_homology_map(const LinearMap& f, const LinearMap& dv, const LinearMap& dw);

}  // namespace hdb
