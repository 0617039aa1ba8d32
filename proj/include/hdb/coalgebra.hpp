// Coderivations and coalgebra morphisms on (reduced) symmetric coalgebras,
// handled through their Taylor coefficients q_i : V^{(.)i} -> V.
//
// Words are kept in canonical form: basis indices sorted nondecreasing, a
// repeated odd-degree index making the word zero. All operations are exact;
// coefficient families are arity-truncated, with a `complete` flag meaning
// "identically zero beyond max_arity" (as opposed to merely unknown there).
// Window bookkeeping keeps every stored coefficient exact.
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hdb/gla.hpp"
#include "hdb/graded.hpp"
#include "hdb/report.hpp"

namespace hdb {

using Word = std::vector<int>;
// Element of the symmetric coalgebra: canonical words with coefficients.
using WordSum = std::map<Word, Rat>;

// Sorts indices, accumulating the Koszul sign; nullopt when an odd-degree
// index repeats (the word is zero).
std::optional<std::pair<Word, int>> normalize_word(const Word& indices, const SpacePtr& space);

int word_degree(const Word& w, const SpacePtr& space);
std::string word_name(const Word& w, const SpacePtr& space);

// All canonical words of the given arity (zero words skipped).
std::vector<Word> all_words(const SpacePtr& space, int arity);

void word_sum_add(WordSum& ws, const Word& w, const Rat& r, const SpacePtr& space);

// ---------------------------------------------------------------------------

struct MultiMap {
  int arity = 0;
  int degree = 0;
  SpacePtr dom, cod;
  std::map<Word, Vec> entries;  // canonical words only

  MultiMap() = default;
  MultiMap(int a, int deg, SpacePtr d, SpacePtr c)
      : arity(a), degree(deg), dom(std::move(d)), cod(std::move(c)) {}

  void set(const Word& w, Vec v);
  void add(const Word& w, const Vec& v);
  // Value on an arbitrary tuple of basis indices (normalizes first).
  Vec apply_tuple(const Word& tuple) const;
  bool is_zero() const;
  bool operator==(const MultiMap& o) const;

  MultiMap& operator+=(const MultiMap& o);
  MultiMap& operator*=(const Rat& r);
};

// Checks value homogeneity: deg(value) = deg(word) + map degree.
void check_multimap(const MultiMap& m);

enum class Flavor { reduced, unreduced };

// Arity-truncated coderivation via Taylor coefficients q_0..q_max (q_0 only
// in the unreduced flavor).
struct Coderivation {
  SpacePtr space;
  int degree = 0;
  Flavor flavor = Flavor::reduced;
  int max_arity = 0;
  bool complete = false;
  std::vector<MultiMap> q;  // q[i]: arity-i coefficient

  MultiMap& coeff(int i) { return q.at(static_cast<size_t>(i)); }
  const MultiMap& coeff(int i) const { return q.at(static_cast<size_t>(i)); }
  int min_arity() const { return flavor == Flavor::unreduced ? 0 : 1; }
};

Coderivation make_coderivation(SpacePtr space, int degree, Flavor flavor, int max_arity,
                               bool complete);

// sigma_v: the coderivation with q_0(1) = v and no other coefficients.
Coderivation sigma_section(const Vec& v);

// q_0(1) of an unreduced coderivation.
Vec evaluate_at_unit(const Coderivation& q);

// Retags a reduced coderivation as unreduced with q_0 = 0 (the natural
// embedding; a constant-time view change).
Coderivation embed_unreduced(const Coderivation& q);

// The coalgebra action on a word, via the corestriction inverse:
//   Q(v_1...v_i) = q_0(1).v_1...v_i
//                + sum_k sum_{(k,i-k)-unshuffles} eps q_k(v_s1..v_sk).v_s(k+1)..
// Exact; throws if the word length exceeds the known window.
WordSum coderivation_apply(const Coderivation& q, const Word& w);

// Nijenhuis-Richardson product: (Q o R)_i = sum_k sum_unshuffles eps
// q_{i-k+1}(r_k(...) . ...), with r_0 applied to the empty word. The result
// window is the largest range exactly determined by the operand windows,
// capped at `cap` (pass <0 for the natural maximum).
Coderivation nr_product(const Coderivation& a, const Coderivation& b, int cap = -1);

// [Q,R] = Q o R - (-1)^{|Q||R|} R o Q.
Coderivation nr_bracket(const Coderivation& a, const Coderivation& b, int cap = -1);

Coderivation coderivation_add(const Coderivation& a, const Coderivation& b);

// The arity-one coefficient as a linear map.
LinearMap linear_part(const Coderivation& q);
Coderivation coderivation_scale(const Rat& r, Coderivation a);

// Coefficientwise comparison in the window [min_arity, n]; throws if either
// window is too small to decide.
CheckReport compare_coderivations(const Coderivation& a, const Coderivation& b, int n,
                                  const std::string& label);

// Q o Q = 0 up to arity n (Q of degree one). Reports each violating word.
CheckReport check_linfty(const Coderivation& q, int n);

// ---------------------------------------------------------------------------

struct CoalgMorphism {
  SpacePtr dom, cod;
  int max_arity = 0;
  bool complete = false;
  std::vector<MultiMap> f;  // f[i]: arity-i coefficient, degree 0; f[0] unused
};

CoalgMorphism make_morphism(SpacePtr dom, SpacePtr cod, int max_arity, bool complete);

// Strict morphism induced by a degree-0 linear map.
CoalgMorphism strict_morphism(const LinearMap& f1);

CoalgMorphism identity_morphism(const SpacePtr& s);

// Composition block F^k_i : V^{(.)i} -> W^{(.)k},
//   F^k_i = (1/k!) sum_{j_1+..+j_k=i} sum_unshuffles eps f_{j_1}(..) . .. . f_{j_k}(..).
// Blocks are memoized per morphism through this helper.
struct MorphismBlocks {
  const CoalgMorphism& fm;
  std::map<std::tuple<int, int, Word>, WordSum> memo;
  explicit MorphismBlocks(const CoalgMorphism& f) : fm(f) {}
  const WordSum& block(int k, int i, const Word& w);
};

// Full action on a word: F(w) = sum_k F^k_i(w).
WordSum morphism_apply(const CoalgMorphism& f, const Word& w);

CoalgMorphism compose_morphisms(const CoalgMorphism& g, const CoalgMorphism& f, int cap = -1);

CheckReport compare_morphisms(const CoalgMorphism& a, const CoalgMorphism& b, int n,
                              const std::string& label);

// p(FQ - RF) = 0 up to arity n, for F : (V,Q) -> (W,R).
CheckReport check_morphism_equation(const CoalgMorphism& f, const Coderivation& q,
                                    const Coderivation& r, int n);

// Reduced coproduct of a canonical word, as (left word, right word) -> coeff.
std::map<std::pair<Word, Word>, Rat> reduced_coproduct(const SpacePtr& space, const Word& w);

// ---------------------------------------------------------------------------
// Decalage: a graded Lie algebra with (optional) differential d induces
//   q_1(s^-1 l) = -s^-1 d l,   q_2(s^-1 l_1 . s^-1 l_2) = (-1)^{|l_1|} s^-1 [l_1, l_2]
// on the desuspension, and nothing in higher arity.

struct Decalage {
  SpacePtr shifted;      // same basis, degree lowered by one, names prefixed
  Coderivation q;        // complete, max_arity 2
};
Decalage decalage(const GLA& g, const std::string& prefix = "s:");

// A dgla morphism f becomes the strict morphism with linear part s^-1 f.
CoalgMorphism decalage_morphism(const LinearMap& f, const SpacePtr& shifted_dom,
                                const SpacePtr& shifted_cod);

// ---------------------------------------------------------------------------
// Curvature, Maurer-Cartan, twisting. x must be homogeneous of degree 0.
// Sums over insertions of x are accepted only when provably finite: either
// the coderivation is complete, or the caller certifies `insertion_bound`
// (no coefficient takes more than that many x entries, verified exactly on
// the stored window). Otherwise the operation throws.

Vec curvature(const Coderivation& q, const Vec& x,
              std::optional<int> insertion_bound = std::nullopt);
bool is_maurer_cartan(const Coderivation& q, const Vec& x,
                      std::optional<int> insertion_bound = std::nullopt);

Coderivation twist_structure(const Coderivation& q, const Vec& x,
                             std::optional<int> insertion_bound = std::nullopt);
CoalgMorphism twist_morphism(const CoalgMorphism& f, const Vec& x,
                             std::optional<int> insertion_bound = std::nullopt);
Vec push_mc(const CoalgMorphism& f, const Vec& x,
            std::optional<int> insertion_bound = std::nullopt);

// ---------------------------------------------------------------------------
// Extensions on V x W and their classifying data. The stored coefficient
// at a base word is the shifted value s f_i(word): an unreduced coderivation
// on SW of degree deg(word) + 1.

struct ClassifyingMorphism {
  SpacePtr base, fiber;
  int max_arity = 0;
  bool complete = false;
  std::vector<std::map<Word, Coderivation>> coeff;  // coeff[i][base word]
};

struct Extension {
  SpacePtr product;        // base then fiber
  Coderivation theta;      // reduced, degree 1
  int base_dim = 0;
};

//   theta_i(v..) = (q_i(v..), s f_i(v..)_0(1))
//   theta_j(w..) = (0, r_j(w..))
//   theta_{i+j}(v.. w..) = (0, s f_i(v..)_j(w..))
Extension extension_from_morphism(const Coderivation& base_q, const Coderivation& fiber_r,
                                  const ClassifyingMorphism& cm, int cap);

struct ExtensionSplit {
  Coderivation base_q, fiber_r;
  ClassifyingMorphism cm;
  CheckReport ideal_check;  // fiber is an ideal: no V component off the base part
};
ExtensionSplit morphism_from_extension(const Extension& ext, const SpacePtr& base,
                                       const SpacePtr& fiber);

// Extends a degree-0 linear map to a full morphism (V,Q) -> (W,R) by exact
// linear solves arity by arity; nullopt when some arity is obstructed.
std::optional<CoalgMorphism> solve_morphism(const Coderivation& q, const Coderivation& r,
                                            const LinearMap& f1, int n);

}  // namespace hdb
