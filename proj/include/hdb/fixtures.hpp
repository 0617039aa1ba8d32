// Shipped and seeded-random graded Lie algebras with splittings, sources
// and derivations, shared by the test suites and the check command.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hdb/brackets.hpp"
#include "hdb/gla.hpp"

namespace hdb {

struct Fixture {
  std::string name;
  GLA gla;
  std::vector<Vec> elements;        // homogeneous sources
  std::vector<LinearMap> derivations;  // validated, L-preserving
};

// sl2 with L = span(f), A = span(e,h).
Fixture fixture_sl2_split();

// Six dimensions, degrees -1..1: sl2 acting on its two-dimensional module
// (odd) plus an odd central generator. Carries a nonzero square-zero
// degree-one derivation whose brackets have nonvanishing quadratic part.
Fixture fixture_graded6();

// gl(1|1) times a Borel, with the derivation t -> x.
Fixture fixture_gl11_borel();

// Super-Heisenberg: two odd generators with [x,y] = c, plus a grading
// element in L. Exercises odd-odd Koszul signs.
Fixture fixture_super_heisenberg();

// Six-dimensional matrix dgla spanning degrees -2..1 (a closed span of
// matrix units inside End of a graded 3-space) with D = ad(E10). Used with
// the degree-sign splitting.
Fixture fixture_getzler();

// End(W (+) A) of a 4-dimensional split complex, with the abelian
// complement Hom(W,A) and D = ad(d). The main abelian-A fixture.
Fixture fixture_block_end();

// One L generator acting on an abelian 4-step tower A.
Fixture fixture_tower();

// All shipped fixtures above.
std::vector<Fixture> fixture_corpus();

// Associative fixtures: 2x2 matrices in the graded basis {1, h, p, q}, and
// the truncated polynomial ring Q[x,y]/(x,y)^3.
AssocAlgebra assoc_mat2();
AssocAlgebra assoc_poly2();

// End(U) for a random graded U of dimension 3, with the triangular
// splitting (A = strictly upper, nonabelian) and D = ad(x) for an odd
// square-zero x in L. Always a valid GLA; validation is still run and a
// failure throws.
Fixture random_end_fixture(uint64_t seed);

// Sparse random structure constants on a small space, antisymmetrized,
// accepted only when the Jacobi identity holds (rejection sampling).
// Returns the first accepted sample; throws after too many rejections.
Fixture random_sparse_fixture(uint64_t seed);

// Deterministic mixed suite for randomized identity checks.
std::vector<Fixture> random_fixture_suite(uint64_t seed, int count);

}  // namespace hdb
