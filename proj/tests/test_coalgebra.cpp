#include <random>

#include "doctest.h"
#include "hdb/coalgebra.hpp"
#include "hdb/gla.hpp"

using namespace hdb;

namespace {

SpacePtr dim2_space() { return make_space({{"u", 0}, {"v", 1}}); }

// deterministic sparse coderivation for property tests
Coderivation random_coderivation(const SpacePtr& s, int degree, Flavor fl, int max_arity,
                                 std::mt19937_64& rng) {
  Coderivation c = make_coderivation(s, degree, fl, max_arity, true);
  std::uniform_int_distribution<int> coef(-2, 2);
  for (int i = c.min_arity(); i <= max_arity; ++i)
    for (const Word& w : all_words(s, i)) {
      Vec v(s);
      int want = word_degree(w, s) + degree;
      for (int b = 0; b < s->dim(); ++b)
        if (s->degree(b) == want) v.add(b, coef(rng));
      if (!v.is_zero()) c.q[static_cast<size_t>(i)].set(w, std::move(v));
    }
  return c;
}

CoalgMorphism random_morphism(const SpacePtr& dom, const SpacePtr& cod, int max_arity,
                              std::mt19937_64& rng) {
  CoalgMorphism f = make_morphism(dom, cod, max_arity, true);
  std::uniform_int_distribution<int> coef(-2, 2);
  for (int i = 1; i <= max_arity; ++i)
    for (const Word& w : all_words(dom, i)) {
      Vec v(cod);
      int want = word_degree(w, dom);
      for (int b = 0; b < cod->dim(); ++b)
        if (cod->degree(b) == want) v.add(b, coef(rng));
      if (!v.is_zero()) f.f[static_cast<size_t>(i)].set(w, std::move(v));
    }
  return f;
}

GLA sl2() {
  auto s = make_space({{"e", 0}, {"f", 0}, {"h", 0}});
  Vec h(s), e2(s), fm2(s);
  h.add(2, 1);
  e2.add(0, 2);
  fm2.add(1, -2);
  return make_gla(s, {{0, 1, h}, {2, 0, e2}, {2, 1, fm2}});
}

}  // namespace

TEST_CASE("normalize_word") {
  auto s = make_space({{"a", 1}, {"b", 1}, {"c", 0}});
  auto n1 = normalize_word({0, 1, 2}, s);
  REQUIRE(n1);
  CHECK(n1->first == Word{0, 1, 2});
  CHECK(n1->second == 1);
  auto n2 = normalize_word({1, 0}, s);  // two odds swapped
  REQUIRE(n2);
  CHECK(n2->first == Word{0, 1});
  CHECK(n2->second == -1);
  auto n3 = normalize_word({2, 0}, s);  // odd past even
  REQUIRE(n3);
  CHECK(n3->second == 1);
  CHECK(!normalize_word({0, 0}, s));      // repeated odd: zero
  CHECK(normalize_word({2, 2}, s));       // repeated even is fine
}

TEST_CASE("coderivation reconstruction formula") {
  auto s = dim2_space();
  std::mt19937_64 rng(7);
  // linear coderivation acts as sum of single-slot substitutions
  Coderivation lin = make_coderivation(s, 0, Flavor::reduced, 1, true);
  Vec img(s);
  img.add(0, 2);
  lin.q[1].set({1}, img);  // q1(v) = 2u, q1(u) = 0
  WordSum out = coderivation_apply(lin, {0, 1});  // u . v
  // expect 2 * (u . u)
  REQUIRE(out.size() == 1);
  CHECK(out.at(Word{0, 0}) == 2);

  // unreduced with only q0: Q(w) = q0(1) . w
  Vec x(s);
  x.add(0, 1);
  Coderivation sig = sigma_section(x);
  WordSum out2 = coderivation_apply(sig, {1});
  REQUIRE(out2.size() == 1);
  CHECK(out2.at(Word{0, 1}) == 1);
  CHECK(evaluate_at_unit(sig) == x);

  // corestriction roundtrip: the arity-1 component of Q(w) is q_i(w)
  Coderivation q = random_coderivation(s, 1, Flavor::reduced, 3, rng);
  for (int i = 1; i <= 3; ++i)
    for (const Word& w : all_words(s, i)) {
      WordSum ws = coderivation_apply(q, w);
      Vec got(s);
      for (const auto& [u, r] : ws)
        if (u.size() == 1) got.add(u[0], r);
      CHECK(got == q.q[static_cast<size_t>(i)].apply_tuple(w));
    }
}

TEST_CASE("nr product on linear coderivations is composition") {
  auto s = dim2_space();
  // p of degree 1 sends u -> 2v, r of degree -1 sends v -> 3u
  Coderivation p = make_coderivation(s, 1, Flavor::reduced, 1, true);
  p.q[1].set({0}, Rat(2) * basis_vec(s, 1));
  Coderivation r = make_coderivation(s, -1, Flavor::reduced, 1, true);
  r.q[1].set({1}, Rat(3) * basis_vec(s, 0));
  Coderivation pr = nr_product(p, r, 2);
  CHECK(pr.q[1].apply_tuple({1}) == Rat(6) * basis_vec(s, 1));  // p(r(v))
  CHECK(pr.q[1].apply_tuple({0}).is_zero());
  Coderivation rp = nr_product(r, p, 2);
  CHECK(rp.q[1].apply_tuple({0}) == Rat(6) * basis_vec(s, 0));  // r(p(u))

  // for odd Q the self bracket is twice the self product
  std::mt19937_64 rng(3);
  Coderivation q = random_coderivation(s, 1, Flavor::reduced, 2, rng);
  Coderivation self = nr_bracket(q, q, 2);
  Coderivation twice = coderivation_scale(Rat(2), nr_product(q, q, 2));
  CHECK(compare_coderivations(self, twice, 2, "odd_self_bracket").ok);

  // evaluation at the unit is linear (q has degree one, so add sigma of the
  // odd generator)
  Vec y = basis_vec(s, 1);
  Coderivation sy = sigma_section(y);
  CHECK(evaluate_at_unit(coderivation_add(embed_unreduced(q), sy)) == y);
  CHECK(evaluate_at_unit(sigma_section(Rat(2) * y)) == Rat(2) * y);
}

TEST_CASE("twisting a decalage matches the decalage of the twisted differential") {
  // M with d = 0 and an odd-degree element xi with [xi,xi] = 0: twisting the
  // shifted structure by s xi equals the shifted structure of (M, [xi,-])
  auto s = make_space({{"e", 0}, {"f", 0}, {"h", 0}, {"u", 1}, {"w", 1}, {"z", -1}});
  std::vector<std::tuple<int, int, Vec>> table;
  {
    auto vec_of = [&](std::initializer_list<std::pair<const char*, int>> terms) {
      Vec v(s);
      for (const auto& [n, cc] : terms) v.add(*s->find(n), cc);
      return v;
    };
    table = {{0, 1, vec_of({{"h", 1}})},  {2, 0, vec_of({{"e", 2}})},
             {2, 1, vec_of({{"f", -2}})}, {0, 4, vec_of({{"u", 1}})},
             {1, 3, vec_of({{"w", 1}})},  {2, 3, vec_of({{"u", 1}})},
             {2, 4, vec_of({{"w", -1}})}};
  }
  GLA g0 = make_gla(s, table);
  REQUIRE(validate_gla(g0).ok);
  Vec xi = basis_vec(s, *s->find("u"));
  REQUIRE(g0.bracket(xi, xi).is_zero());
  LinearMap ad_xi = adjoint(g0, xi);
  REQUIRE(derivation_bracket(ad_xi, ad_xi).is_zero());
  GLA g1 = make_gla(s, table, ad_xi);
  REQUIRE(validate_gla(g1).ok);

  Decalage d0 = decalage(g0);
  Decalage d1 = decalage(g1);
  Vec x(d0.shifted);
  x.add(*s->find("u"), 1);
  REQUIRE(is_maurer_cartan(d0.q, x));
  Coderivation tw = twist_structure(d0.q, x);
  CHECK(compare_coderivations(tw, d1.q, 2, "twist_vs_differential").ok);
}

TEST_CASE("remark: section sigma and evaluation") {
  auto s = dim2_space();
  std::mt19937_64 rng(11);
  Coderivation q = embed_unreduced(random_coderivation(s, 1, Flavor::reduced, 3, rng));
  for (int bi = 0; bi < s->dim(); ++bi) {
    Vec v = basis_vec(s, bi);
    Coderivation sv = sigma_section(v);
    CHECK(evaluate_at_unit(sv) == v);  // e . sigma = id
    // [Q, sigma_v]_i(w) = q_{i+1}(v . w)
    Coderivation br = nr_bracket(q, sv);
    for (int i = 0; i <= br.max_arity; ++i)
      for (const Word& w : all_words(s, i)) {
        Word vw;
        vw.push_back(bi);
        vw.insert(vw.end(), w.begin(), w.end());
        Vec expect = i + 1 <= q.max_arity ? q.q[static_cast<size_t>(i + 1)].apply_tuple(vw) : Vec(s);
        CHECK(br.q[static_cast<size_t>(i)].apply_tuple(w) == expect);
      }
    // abelian image: [sigma_v, sigma_w] = 0
    for (int bj = 0; bj < s->dim(); ++bj) {
      Coderivation sw = sigma_section(basis_vec(s, bj));
      Coderivation z = nr_bracket(sv, sw);
      for (int i = 0; i <= z.max_arity; ++i) CHECK(z.q[static_cast<size_t>(i)].is_zero());
    }
  }
}

TEST_CASE("nr bracket: antisymmetry, jacobi, pre-Lie associator symmetry") {
  auto s = dim2_space();
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 4; ++trial) {
    int da = trial % 2, db = (trial / 2) % 2;
    Coderivation A = random_coderivation(s, da, Flavor::unreduced, 2, rng);
    Coderivation B = random_coderivation(s, db, Flavor::unreduced, 2, rng);
    Coderivation C = random_coderivation(s, 1, Flavor::unreduced, 2, rng);

    // antisymmetry: [A,B] = -(-1)^{|A||B|}[B,A]
    Coderivation ab = nr_bracket(A, B, 2);
    Coderivation ba = nr_bracket(B, A, 2);
    int sgn = (da % 2 != 0 && db % 2 != 0) ? 1 : -1;
    CHECK(compare_coderivations(ab, coderivation_scale(Rat(sgn), ba), 2, "antisym").ok);

    // jacobi: [A,[B,C]] = [[A,B],C] + (-1)^{|A||B|}[B,[A,C]]
    Coderivation lhs = nr_bracket(A, nr_bracket(B, C, 3), 2);
    Coderivation r1 = nr_bracket(nr_bracket(A, B, 3), C, 2);
    Coderivation r2 = nr_bracket(B, nr_bracket(A, C, 3), 2);
    int sgn2 = (da % 2 != 0 && db % 2 != 0) ? -1 : 1;
    Coderivation rhs = coderivation_add(r1, coderivation_scale(Rat(sgn2), r2));
    CHECK(compare_coderivations(lhs, rhs, 2, "jacobi").ok);

    // pre-Lie: (A o B) o C - A o (B o C) is graded symmetric in (B, C)
    Coderivation as1 = coderivation_add(
        nr_product(nr_product(A, B, 4), C, 2),
        coderivation_scale(Rat(-1), nr_product(A, nr_product(B, C, 4), 2)));
    Coderivation as2 = coderivation_add(
        nr_product(nr_product(A, C, 4), B, 2),
        coderivation_scale(Rat(-1), nr_product(A, nr_product(C, B, 4), 2)));
    int sgn3 = (db % 2 != 0 && C.degree % 2 != 0) ? -1 : 1;
    CHECK(compare_coderivations(as1, coderivation_scale(Rat(sgn3), as2), 2, "prelie").ok);
  }
}

TEST_CASE("reduced embedding is a lie map and exactness at the middle") {
  auto s = dim2_space();
  std::mt19937_64 rng(5);
  Coderivation A = random_coderivation(s, 1, Flavor::reduced, 3, rng);
  Coderivation B = random_coderivation(s, 0, Flavor::reduced, 3, rng);
  Coderivation red = nr_bracket(A, B, 3);
  Coderivation unred = nr_bracket(embed_unreduced(A), embed_unreduced(B), 3);
  CHECK(compare_coderivations(embed_unreduced(red), unred, 3, "embedding_lie").ok);
  // kernel of evaluation = embedded reduced coderivations
  CHECK(evaluate_at_unit(unred).is_zero());
  Coderivation sig = sigma_section(basis_vec(s, 0));
  CHECK(!evaluate_at_unit(sig).is_zero());
}

TEST_CASE("morphism blocks and coproduct compatibility") {
  auto s = dim2_space();
  auto t = make_space({{"p", 0}, {"q", 1}});
  std::mt19937_64 rng(13);
  CoalgMorphism F = random_morphism(s, t, 3, rng);

  // F^1_i = f_i
  MorphismBlocks blocks(F);
  for (int i = 1; i <= 3; ++i)
    for (const Word& w : all_words(s, i)) {
      const WordSum& b1 = blocks.block(1, i, w);
      Vec got(t);
      for (const auto& [u, r] : b1) got.add(u[0], r);
      CHECK(got == F.f[static_cast<size_t>(i)].apply_tuple(w));
    }

  // only f_1: F^k_i = 0 unless k = i, F^i_i = f_1 tensor power
  CoalgMorphism lin = random_morphism(s, t, 1, rng);
  MorphismBlocks lb(lin);
  for (const Word& w : all_words(s, 2)) {
    CHECK(lb.block(1, 2, w).empty());
    const WordSum& b2 = lb.block(2, 2, w);
    // oracle: expand f1(w0) . f1(w1) directly
    WordSum expect;
    Vec x = lin.f[1].apply_tuple({w[0]});
    Vec y = lin.f[1].apply_tuple({w[1]});
    for (const auto& [bx, rx] : x.c)
      for (const auto& [by, ry] : y.c) word_sum_add(expect, {bx, by}, rx * ry, t);
    // repeated-letter words double count under the unshuffle sum: for w0 == w1
    // both unshuffles contribute; the formula's 1/k! compensates exactly.
    CHECK(b2 == expect);
  }

  // coproduct compatibility Delta F = (F (x) F) Delta on words of length <= 3
  for (int i = 1; i <= 3; ++i)
    for (const Word& w : all_words(s, i)) {
      // lhs: Delta(F(w))
      std::map<std::pair<Word, Word>, Rat> lhs;
      for (const auto& [u, r] : morphism_apply(F, w))
        for (const auto& [pair, c] : reduced_coproduct(t, u)) {
          Rat& slot = lhs[pair];
          slot += r * c;
          if (slot == 0) lhs.erase(pair);
        }
      // rhs: (F (x) F)(Delta(w)); Koszul sign for F-halves is +1 (degree 0)
      std::map<std::pair<Word, Word>, Rat> rhs;
      for (const auto& [pair, c] : reduced_coproduct(s, w))
        for (const auto& [ul, rl] : morphism_apply(F, pair.first))
          for (const auto& [ur, rr] : morphism_apply(F, pair.second)) {
            Rat& slot = rhs[{ul, ur}];
            slot += c * rl * rr;
            if (slot == 0) rhs.erase({ul, ur});
          }
      CHECK(lhs == rhs);
    }
}

TEST_CASE("decalage of a dgla is an L-infinity structure") {
  GLA g = sl2();
  Decalage d = decalage(g);
  CHECK(check_linfty(d.q, 4).ok);
  // sign convention: q2(s a, s b) = (+1) s[a,b] for |a| even
  Vec q2 = d.q.q[2].apply_tuple({0, 2});  // e, h in shifted space
  Vec expect(d.shifted);
  expect.add(0, -2);  // [e,h] = -2e
  CHECK(q2 == expect);

  // abelian with zero differential: zero structure
  GLA ab = make_gla(make_space({{"x", 1}, {"y", 2}}), {});
  Decalage dab = decalage(ab);
  CHECK(dab.q.q[1].is_zero());
  CHECK(dab.q.q[2].is_zero());

  // breaking Jacobi breaks the arity-3 component of Q o Q
  auto s = make_space({{"e", 0}, {"f", 0}, {"h", 0}});
  Vec h(s), e3(s), fm2(s);
  h.add(2, 1);
  e3.add(0, 3);
  fm2.add(1, -2);
  GLA bad = make_gla(s, {{0, 1, h}, {2, 0, e3}, {2, 1, fm2}});
  Decalage dbad = decalage(bad);
  auto rep = check_linfty(dbad.q, 4);
  CHECK(!rep.ok);
  CHECK(rep.first_failure()->arity == 3);
}

TEST_CASE("decalage with differential and morphism equation") {
  // dgla: d(x) = y, bracket zero; strict identity-like morphism checks
  auto s = make_space({{"x", 0}, {"y", 1}});
  LinearMap d(s, s, 1);
  d.set(0, basis_vec(s, 1));
  GLA g = make_gla(s, {}, d);
  Decalage dec = decalage(g);
  CHECK(check_linfty(dec.q, 3).ok);
  Vec q1 = dec.q.q[1].apply_tuple({0});
  Vec expect(dec.shifted);
  expect.add(1, -1);  // q1(s x) = -s d x
  CHECK(q1 == expect);
  CoalgMorphism id = identity_morphism(dec.shifted);
  CHECK(check_morphism_equation(id, dec.q, dec.q, 3).ok);
}

TEST_CASE("curvature, maurer-cartan and twisting on a decalage") {
  // dgla sl2 (degree 0): MC elements x with [x,x] = 0 after shift... in the
  // shifted picture s^-1 sl2 sits in degree -1, so V^0 = 0 and only x = 0 is
  // admissible; use End-style graded dgla instead.
  auto s = make_space({{"a", -1}, {"b", 0}, {"c", 1}});
  // bracket: [a, c] = b (degrees -1 + 1 = 0), d = 0
  Vec b(s);
  b.add(1, 1);
  GLA g = make_gla(s, {{0, 2, b}});
  CHECK(validate_gla(g).ok);
  Decalage dec = decalage(g);
  // x = s^-1 c has degree 0 in the shifted space
  Vec x(dec.shifted);
  x.add(2, 1);
  Vec curv = curvature(dec.q, x);
  // curvature = q1(x) + 1/2 q2(x,x) = 0 + 1/2 (-1)^{|c|} s[c,c] = 0
  CHECK(curv.is_zero());
  CHECK(is_maurer_cartan(dec.q, x));

  // twist by x: q_x,1(s a) = q1(sa) + q2(x . sa) = (-1)^{|c|} s[c,a]
  Coderivation tw = twist_structure(dec.q, x);
  Vec got = tw.q[1].apply_tuple({0});
  // q2(s c . s a) = (-1)^{|c|} s[c, a] = -s[c,a] = +s[a,c] = s b
  // but the tuple (x, sa) normalizes to (sa, x) with a Koszul swap sign
  Vec expect(dec.shifted);
  Vec sb = dec.q.q[2].apply_tuple({2, 0});
  expect += sb;
  CHECK(got == expect);
  CHECK(check_linfty(tw, 3).ok);

  // twist by 0 changes nothing
  Coderivation tw0 = twist_structure(dec.q, Vec(dec.shifted));
  CHECK(compare_coderivations(tw0, dec.q, 2, "twist_zero").ok);
}

TEST_CASE("twisting equals decalage of twisted differential") {
  // dgla with d = 0 and an MC element x (degree 1 in the algebra):
  // twisted structure should be the decalage of (M, [x,-], bracket)
  auto s = make_space({{"p", 1}, {"q", 2}, {"r", 0}});
  // [p, r] = p? keep it simple: [p, r] = 2p, [q, r] = 2q? check jacobi:
  // use r central instead: [p, p] = q (p odd), all else zero.
  Vec q(s);
  q.add(1, 1);
  GLA g = make_gla(s, {{0, 0, q}});
  REQUIRE(validate_gla(g).ok);
  Decalage dec = decalage(g);
  Vec x(dec.shifted);
  x.add(0, 1);  // s^-1 p has degree 0
  // curvature: 1/2 q2(x,x) = 1/2 (-1)^{|p|} s[p,p] = -1/2 s q != 0 -> not MC
  CHECK(!is_maurer_cartan(dec.q, x));

  // element 2-nilpotent differential route: d' = [p, -] has d'^2 = ad_[p,p]/2
  // nonzero, so instead verify the twist formula coefficientwise by hand:
  Coderivation tw = twist_structure(dec.q, x);
  // q_x,1(s p) = q2(x . s p) = (-1)^{|p|} s [p, p] = -s q
  Vec expect(dec.shifted);
  expect.add(1, -1);
  CHECK(tw.q[1].apply_tuple({0}) == expect);
}

TEST_CASE("extension from morphism and back") {
  auto v = make_space({{"V:x", 0}, {"V:y", 1}});
  auto w = make_space({{"W:p", 0}, {"W:q", 1}});
  std::mt19937_64 rng(31);
  Coderivation baseq = random_coderivation(v, 1, Flavor::reduced, 3, rng);
  Coderivation fiber = random_coderivation(w, 1, Flavor::reduced, 3, rng);

  ClassifyingMorphism cm;
  cm.base = v;
  cm.fiber = w;
  cm.max_arity = 2;
  cm.complete = true;
  cm.coeff.resize(3);
  std::uniform_int_distribution<int> coef(-2, 2);
  for (int i = 1; i <= 2; ++i)
    for (const Word& vw : all_words(v, i)) {
      Coderivation c = make_coderivation(w, word_degree(vw, v) + 1, Flavor::unreduced, 2, true);
      bool any = false;
      for (int j = 0; j <= 2; ++j)
        for (const Word& ww : all_words(w, j)) {
          Vec val(w);
          int want = word_degree(ww, w) + c.degree;
          for (int b = 0; b < w->dim(); ++b)
            if (w->degree(b) == want) val.add(b, coef(rng));
          if (!val.is_zero()) {
            c.q[static_cast<size_t>(j)].set(ww, std::move(val));
            any = true;
          }
        }
      if (any) cm.coeff[static_cast<size_t>(i)].emplace(vw, std::move(c));
    }

  Extension ext = extension_from_morphism(baseq, fiber, cm, 4);
  // F = 0 gives the product structure
  ClassifyingMorphism zero_cm;
  zero_cm.base = v;
  zero_cm.fiber = w;
  zero_cm.max_arity = 2;
  zero_cm.complete = true;
  zero_cm.coeff.resize(3);
  Extension prod = extension_from_morphism(baseq, fiber, zero_cm, 4);
  for (int n = 1; n <= 4; ++n)
    for (const auto& [pw, val] : prod.theta.q[static_cast<size_t>(n)].entries) {
      bool pure_v = pw.back() < prod.base_dim;
      bool pure_w = pw.front() >= prod.base_dim;
      CHECK((pure_v || pure_w));
    }

  // roundtrip
  ExtensionSplit split = morphism_from_extension(ext, v, w);
  CHECK(split.ideal_check.ok);
  CHECK(compare_coderivations(split.base_q, baseq, 3, "base").ok);
  CHECK(compare_coderivations(split.fiber_r, fiber, 3, "fiber").ok);
  for (int i = 1; i <= 2; ++i) {
    for (const auto& [vw, c] : cm.coeff[static_cast<size_t>(i)]) {
      auto it = split.cm.coeff[static_cast<size_t>(i)].find(vw);
      bool found = it != split.cm.coeff[static_cast<size_t>(i)].end();
      if (!found) {
        // all coefficients of c must then vanish in the window
        for (int j = 0; j <= 2; ++j) CHECK(c.q[static_cast<size_t>(j)].is_zero());
        continue;
      }
      CHECK(compare_coderivations(it->second, c, 2, "cm").ok);
    }
  }
  Extension again = extension_from_morphism(split.base_q, split.fiber_r, split.cm, 4);
  CHECK(compare_coderivations(again.theta, ext.theta, 4, "roundtrip").ok);
}

TEST_CASE("exactness at the middle of the evaluation sequence") {
  auto s = dim2_space();
  std::mt19937_64 rng(41);
  // kernel of the evaluation = image of the embedding of reduced ones
  Coderivation q = random_coderivation(s, 1, Flavor::reduced, 3, rng);
  Coderivation emb = embed_unreduced(q);
  CHECK(evaluate_at_unit(emb).is_zero());
  // conversely an unreduced coderivation with q_0(1) = 0 is an embedding
  Coderivation u = random_coderivation(s, 1, Flavor::unreduced, 3, rng);
  u.q[0] = MultiMap(0, 1, s, s);
  Coderivation red = u;
  red.flavor = Flavor::reduced;
  CHECK(compare_coderivations(embed_unreduced(red), u, 3, "exactness").ok);
}

TEST_CASE("pushforward of a maurer-cartan element") {
  // strict morphism: push_mc = f_1(x)
  auto s = make_space({{"a", 0}, {"b", 0}});
  LinearMap f1(s, s, 0);
  f1.set(0, Rat(2) * basis_vec(s, 1));
  CoalgMorphism f = strict_morphism(f1);
  Vec x = basis_vec(s, 0);
  CHECK(push_mc(f, x) == Rat(2) * basis_vec(s, 1));
  // quadratic coefficient contributes with the 1/2! weight
  CoalgMorphism f2 = make_morphism(s, s, 2, true);
  f2.f[1] = f.f[1];
  f2.f[2].set({0, 0}, basis_vec(s, 0));
  Vec expect = Rat(2) * basis_vec(s, 1);
  expect += Rat(1, 2) * basis_vec(s, 0);
  CHECK(push_mc(f2, x) == expect);
}

TEST_CASE("curvature of an abelian structure is the differential") {
  auto s = make_space({{"a", 0}, {"b", 1}});
  Coderivation q = make_coderivation(s, 1, Flavor::reduced, 1, true);
  q.q[1].set({0}, basis_vec(s, 1));
  Vec x = Rat(3) * basis_vec(s, 0);
  CHECK(curvature(q, x) == Rat(3) * basis_vec(s, 1));
  CHECK(!is_maurer_cartan(q, x));
  CHECK(is_maurer_cartan(q, Vec(s)));
}

TEST_CASE("morphism completion reports obstructions") {
  // no morphism with identity linear part exists from a nonabelian
  // structure to the zero structure
  GLA g = sl2();
  Decalage dec = decalage(g);
  Coderivation zero = make_coderivation(dec.shifted, 1, Flavor::reduced, 3, true);
  auto got = solve_morphism(dec.q, zero, identity_map(dec.shifted), 3);
  CHECK(!got.has_value());
  // and the identity works when the structures agree
  auto ok = solve_morphism(dec.q, dec.q, identity_map(dec.shifted), 3);
  REQUIRE(ok.has_value());
  CHECK(check_morphism_equation(*ok, dec.q, dec.q, 3).ok);
}
