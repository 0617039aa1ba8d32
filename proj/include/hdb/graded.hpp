// Graded vector spaces with a finite named basis, sparse vectors over Q,
// Koszul sign combinatorics and linear maps of fixed degree.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hdb/rational.hpp"

namespace hdb {

struct GradedSpace {
  std::vector<std::string> names;
  std::vector<int> degrees;
  std::map<std::string, int> index_of;

  int dim() const { return static_cast<int>(names.size()); }
  int degree(int i) const { return degrees.at(static_cast<size_t>(i)); }
  const std::string& name(int i) const { return names.at(static_cast<size_t>(i)); }
  std::optional<int> find(const std::string& n) const {
    auto it = index_of.find(n);
    if (it == index_of.end()) return std::nullopt;
    return it->second;
  }
};

using SpacePtr = std::shared_ptr<const GradedSpace>;

// Same space: pointer identity or equal basis content. Distinct calls that
// rebuild the same part space must interoperate.
bool same_space(const SpacePtr& a, const SpacePtr& b);

// Basis names must be unique.
SpacePtr make_space(const std::vector<std::pair<std::string, int>>& basis);

// Concatenation V x W; names must stay unique across the parts.
SpacePtr concat_spaces(const std::vector<SpacePtr>& parts);

// Same basis names (with an optional prefix) with degrees shifted by
// `shift`: V[k]^i = V^{i+k}, i.e. an element of degree d lands in degree
// d - k. The desuspension s^-1 V = V[1] lowers degrees by one.
SpacePtr shift_space(const SpacePtr& v, int k, const std::string& prefix = "");

// Sparse vector in a graded space. No zero coefficients are stored.
struct Vec {
  SpacePtr space;
  std::map<int, Rat> c;

  explicit Vec(SpacePtr s = nullptr) : space(std::move(s)) {}

  bool is_zero() const { return c.empty(); }
  void add(int i, const Rat& r);
  Vec& operator+=(const Vec& o);
  Vec& operator-=(const Vec& o);
  Vec& operator*=(const Rat& r);
  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(const Rat& r, Vec a) { return a *= r; }
  bool operator==(const Vec& o) const { return c == o.c; }

  // Degree if homogeneous (zero vectors report any requested degree).
  bool is_homogeneous(int* degree_out = nullptr) const;
};

Vec basis_vec(const SpacePtr& s, int i);

// "3/2*x + -1*y" style rendering for reports; "0" when empty.
std::string vec_str(const Vec& v);

// ---------------------------------------------------------------------------
// Permutations. A permutation of {0..n-1} is stored as its list of images:
// perm[p] is the original position placed at p, so applying it to a tuple
// (v_0,...,v_{n-1}) yields (v_{perm[0]},...,v_{perm[n-1]}).

// Koszul sign of the tuple rearrangement (v_0,...) -> (v_{perm[0]},...):
// product over inversion pairs p<q, perm[p]>perm[q] of
// (-1)^{deg(perm[p]) deg(perm[q])}.
int koszul_sign(const std::vector<int>& perm, const std::vector<int>& degrees);

// All (i,j)-unshuffles of {0..i+j-1}: increasing on the first i and on the
// last j positions. Deterministic lexicographic order; C(i+j,i) entries.
std::vector<std::vector<int>> unshuffles(int i, int j);

// Multi-unshuffles for a composition (j_1,...,j_k): increasing on each block.
std::vector<std::vector<int>> multi_unshuffles(const std::vector<int>& blocks);

// ---------------------------------------------------------------------------
// Linear maps of homogeneous degree, stored by columns.

struct LinearMap {
  SpacePtr dom, cod;
  int degree = 0;
  std::vector<Vec> col;  // col[i] = image of i-th domain basis vector

  LinearMap() = default;
  LinearMap(SpacePtr d, SpacePtr c, int deg);

  Vec apply(const Vec& x) const;
  Vec apply_basis(int i) const { return col.at(static_cast<size_t>(i)); }
  void set(int i, Vec v) { col.at(static_cast<size_t>(i)) = std::move(v); }
  bool is_zero() const;
  bool operator==(const LinearMap& o) const;

  LinearMap& operator+=(const LinearMap& o);
  LinearMap& operator-=(const LinearMap& o);
  LinearMap& operator*=(const Rat& r);
};

LinearMap identity_map(const SpacePtr& s);
LinearMap zero_map(const SpacePtr& dom, const SpacePtr& cod, int degree);
LinearMap compose(const LinearMap& f, const LinearMap& g);  // f after g

// Checks image degrees: col[i] homogeneous of degree deg(i) + map degree.
void check_degree(const LinearMap& m);

}  // namespace hdb
