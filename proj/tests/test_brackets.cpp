#include <numeric>
#include <random>

#include "doctest.h"
#include "hdb/brackets.hpp"
#include "hdb/fixtures.hpp"

using namespace hdb;

namespace {

// Independent low-arity evaluators, written directly from the displayed
// low-arity formulas (no shared code with the double-sum evaluator).
Vec golden_phiD1(const GLA&, const LinearMap& P, const LinearMap& D, int a) {
  return P.apply(D.apply_basis(a));
}

Vec golden_phiM1(const GLA& g, const LinearMap& P, const Vec& m, int a) {
  Vec av = basis_vec(g.space, a);
  Vec out = P.apply(g.bracket(m, av));
  Vec t = g.bracket(P.apply(m), av);
  t *= Rat(-1, 2);
  out += t;
  return out;
}

Vec golden_phiD2(const GLA& g, const LinearMap& P, const LinearMap& D, int a1, int a2) {
  Vec out(g.space);
  std::vector<std::pair<int, int>> orders{{a1, a2}, {a2, a1}};
  std::vector<int> degs{g.space->degree(a1), g.space->degree(a2)};
  int swap_sign = (degs[0] % 2 != 0 && degs[1] % 2 != 0) ? -1 : 1;
  int signs[2] = {1, swap_sign};
  for (int t = 0; t < 2; ++t) {
    auto [x, y] = orders[static_cast<size_t>(t)];
    Vec term = P.apply(g.bracket(D.apply_basis(x), basis_vec(g.space, y)));
    Vec term2 = g.bracket(P.apply(D.apply_basis(x)), basis_vec(g.space, y));
    term2 *= Rat(-1);
    term += term2;
    term *= Rat(signs[t]) * Rat(1, 2);
    out += term;
  }
  return out;
}

Vec golden_phiM2(const GLA& g, const LinearMap& P, const Vec& m, int a1, int a2) {
  Vec out(g.space);
  std::vector<std::pair<int, int>> orders{{a1, a2}, {a2, a1}};
  std::vector<int> degs{g.space->degree(a1), g.space->degree(a2)};
  int swap_sign = (degs[0] % 2 != 0 && degs[1] % 2 != 0) ? -1 : 1;
  int signs[2] = {1, swap_sign};
  for (int t = 0; t < 2; ++t) {
    auto [x, y] = orders[static_cast<size_t>(t)];
    Vec xv = basis_vec(g.space, x), yv = basis_vec(g.space, y);
    Vec acc = P.apply(g.bracket(g.bracket(m, xv), yv));
    acc *= Rat(1, 2);
    Vec t2 = g.bracket(P.apply(g.bracket(m, xv)), yv);
    t2 *= Rat(-1, 2);
    acc += t2;
    Vec t3 = g.bracket(g.bracket(P.apply(m), xv), yv);
    t3 *= Rat(1, 12);
    acc += t3;
    acc *= Rat(signs[t]);
    out += acc;
  }
  return out;
}

}  // namespace

TEST_CASE("shipped fixtures validate") {
  for (const Fixture& f : fixture_corpus()) {
    CHECK(validate_gla(f.gla).ok);
  }
}

TEST_CASE("low-arity brackets match the displayed formulas") {
  Fixture fx = fixture_graded6();
  const GLA& g = fx.gla;
  auto [P, Pp] = projections(g);
  Subspace a = make_part_space(g, Part::A);
  const LinearMap& D = fx.derivations[0];
  Vec m = fx.elements[0];  // h + f, with Pm = h nonzero

  Coderivation phiD = phi_derivation(g, D, 2);
  Coderivation phiM = phi_element(g, m, 2);

  // Phi(m)_0(1) = Pm
  CHECK(evaluate_at_unit(phiM) == restrict_to_part(a, P.apply(m)));

  bool saw_nonzero_d1 = false, saw_nonzero_d2 = false;
  bool saw_nonzero_m1 = false, saw_nonzero_m2 = false;
  for (int k = 0; k < a.space->dim(); ++k) {
    int amb = a.ambient_index[static_cast<size_t>(k)];
    Vec d1 = golden_phiD1(g, P, D, amb);
    CHECK(phiD.q[1].apply_tuple({k}) == restrict_to_part(a, d1));
    saw_nonzero_d1 = saw_nonzero_d1 || !d1.is_zero();
    Vec m1 = golden_phiM1(g, P, m, amb);
    CHECK(phiM.q[1].apply_tuple({k}) == restrict_to_part(a, m1));
    saw_nonzero_m1 = saw_nonzero_m1 || !m1.is_zero();
  }
  for (const Word& w : all_words(a.space, 2)) {
    int x = a.ambient_index[static_cast<size_t>(w[0])];
    int y = a.ambient_index[static_cast<size_t>(w[1])];
    Vec d2 = golden_phiD2(g, P, D, x, y);
    CHECK(phiD.q[2].apply_tuple(w) == restrict_to_part(a, d2));
    saw_nonzero_d2 = saw_nonzero_d2 || !d2.is_zero();
    Vec m2 = golden_phiM2(g, P, m, x, y);
    CHECK(phiM.q[2].apply_tuple(w) == restrict_to_part(a, m2));
    saw_nonzero_m2 = saw_nonzero_m2 || !m2.is_zero();
  }
  // the fixture is rich enough to exercise every displayed term
  CHECK(saw_nonzero_d1);
  CHECK(saw_nonzero_d2);
  CHECK(saw_nonzero_m1);
  CHECK(saw_nonzero_m2);
  // and the 1/12 term specifically: [[Pm,a],a'] != 0 somewhere
  bool twelfth = false;
  for (int x : g.part_indices(Part::A))
    for (int y : g.part_indices(Part::A))
      if (!g.bracket(g.bracket(P.apply(m), basis_vec(g.space, x)), basis_vec(g.space, y))
               .is_zero())
        twelfth = true;
  CHECK(twelfth);
}

TEST_CASE("graded symmetry of computed brackets") {
  Fixture fx = fixture_super_heisenberg();
  Coderivation phi = phi_element(fx.gla, fx.elements[0], 3);
  Subspace a = make_part_space(fx.gla, Part::A);
  for (const Word& w : all_words(a.space, 3)) {
    std::vector<int> perm(w.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> degs;
    for (int t : w) degs.push_back(a.space->degree(t));
    Vec base = phi.q[3].apply_tuple(w);
    do {
      Word pw;
      for (int p : perm) pw.push_back(w[static_cast<size_t>(p)]);
      Vec lhs = phi.q[3].apply_tuple(pw);
      Vec rhs = base;
      rhs *= Rat(koszul_sign(perm, degs));
      CHECK(lhs == rhs);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
}

TEST_CASE("lie morphism identities on shipped fixtures") {
  for (const Fixture& fx : fixture_corpus()) {
    CheckReport rep = phi_lie_morphism_report(fx.gla, fx.elements, fx.derivations, 3);
    if (!rep.ok) {
      const Check* c = rep.first_failure();
      MESSAGE(fx.name, ": ", c->identity, " arity ", c->arity, " word ", c->word, " lhs=", c->lhs,
              " rhs=", c->rhs);
    }
    CHECK(rep.ok);
  }
}

TEST_CASE("lie morphism identities on random fixtures") {
  for (const Fixture& fx : random_fixture_suite(2024, 6)) {
    CheckReport rep = phi_lie_morphism_report(fx.gla, fx.elements, fx.derivations, 3);
    CHECK(rep.ok);
  }
}

TEST_CASE("phi of a square-zero degree-one derivation is an L-infinity structure") {
  for (const Fixture& fx : {fixture_graded6(), fixture_gl11_borel(), fixture_block_end()}) {
    for (const LinearMap& d : fx.derivations) {
      if (d.degree != 1 || !derivation_bracket(d, d).is_zero()) continue;
      CheckReport rep = phi_squares_to_zero_report(fx.gla, d, 4);
      CHECK(rep.ok);
    }
  }
}

TEST_CASE("projection morphism into the desuspended subalgebra") {
  Fixture fx = fixture_graded6();
  ProjectionMorphism pm = projection_morphism(fx.gla, fx.derivations[0], 3);
  CHECK(pm.morphism_equation.ok);
  auto [P, Pp] = projections(fx.gla);
  Subspace l = make_part_space(fx.gla, Part::L);
  for (int k = 0; k < pm.a_part.space->dim(); ++k) {
    Vec expect = Pp.apply(fx.derivations[0].apply_basis(
        pm.a_part.ambient_index[static_cast<size_t>(k)]));
    Vec got = pm.f.f[1].apply_tuple({k});
    CHECK(got.c == restrict_to_part(l, expect).c);
  }
}

TEST_CASE("abelian complement reduces to the single-term brackets") {
  for (const Fixture& fx : {fixture_block_end(), fixture_tower()}) {
    for (const Vec& m : fx.elements) {
      Coderivation a = phi_element(fx.gla, m, 5);
      Coderivation b = voronov_element(fx.gla, m, 5);
      CHECK(compare_coderivations(a, b, 5, "voronov_element").ok);
    }
    for (const LinearMap& d : fx.derivations) {
      Coderivation a = phi_derivation(fx.gla, d, 5);
      Coderivation b = voronov_derivation(fx.gla, d, 5);
      CHECK(compare_coderivations(a, b, 5, "voronov_derivation").ok);
    }
  }
  Fixture bad = fixture_sl2_split();
  CHECK_THROWS(voronov_element(bad.gla, bad.elements[0], 2));
  Fixture fx = fixture_block_end();
  Coderivation deep = phi_element(fx.gla, fx.elements[1], 3);
  CHECK(!deep.q[2].is_zero());
  // block splittings die at arity three: [L,A] stays in A here
  CHECK(deep.q[3].is_zero());
}

TEST_CASE("element and inner-derivation brackets differ by the Pm terms") {
  Fixture fx = fixture_graded6();
  const GLA& g = fx.gla;
  Vec m = basis_vec(g.space, *g.space->find("u"));
  CHECK(in_normalizer(g, m));
  auto [P, Pp] = projections(g);
  CHECK(!P.apply(m).is_zero());
  Coderivation phi_m = phi_element(g, m, 3);
  Coderivation phi_ad = phi_derivation(g, adjoint(g, m), 3);
  CheckReport cmp = compare_coderivations(embed_unreduced(phi_ad), phi_m, 3, "separation");
  CHECK(!cmp.ok);

  Vec l = basis_vec(g.space, *g.space->find("f"));
  Coderivation phi_l = phi_element(g, l, 3);
  Coderivation phi_adl = phi_derivation(g, adjoint(g, l), 3);
  CHECK(evaluate_at_unit(phi_l).is_zero());
  CHECK(compare_coderivations(embed_unreduced(phi_adl), phi_l, 3, "inner_agree").ok);
}

TEST_CASE("derived brackets of a coderivation return the coderivation") {
  auto v = make_space({{"v0", 0}, {"v1", 1}});
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> coef(-2, 2);
  for (int trial = 0; trial < 3; ++trial) {
    Coderivation r = make_coderivation(v, 1 - trial % 2, Flavor::unreduced, 3, true);
    for (int i = 0; i <= 3; ++i)
      for (const Word& w : all_words(v, i)) {
        Vec val(v);
        int want = word_degree(w, v) + r.degree;
        for (int b = 0; b < v->dim(); ++b)
          if (v->degree(b) == want) val.add(b, coef(rng));
        if (!val.is_zero()) r.q[static_cast<size_t>(i)].set(w, std::move(val));
      }
    CHECK(phi_identity_on_coderivations(r, 3).ok);
  }
  Coderivation sig = sigma_section(basis_vec(v, 0));
  CHECK(phi_identity_on_coderivations(sig, 2).ok);
}

TEST_CASE("adjoint morphism identity") {
  auto v = make_space({{"v0", 0}, {"v1", 1}});
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> coef(-2, 2);
  Coderivation q = make_coderivation(v, 1, Flavor::reduced, 3, true);
  for (int i = 1; i <= 3; ++i)
    for (const Word& w : all_words(v, i)) {
      Vec val(v);
      int want = word_degree(w, v) + 1;
      for (int b = 0; b < v->dim(); ++b)
        if (v->degree(b) == want) val.add(b, coef(rng));
      if (!val.is_zero()) q.q[static_cast<size_t>(i)].set(w, std::move(val));
    }
  CHECK(adjoint_morphism_report(q, 3).ok);

  Coderivation lin = make_coderivation(v, 1, Flavor::reduced, 1, true);
  lin.q[1].set({0}, basis_vec(v, 1));
  CHECK(adjoint_morphism_report(lin, 3).ok);
  for (int i = 1; i <= 2; ++i)
    for (const Word& w : all_words(v, i)) {
      Coderivation c = embed_unreduced(lin);
      for (int t : w) c = nr_bracket(c, sigma_section(basis_vec(v, t)));
      for (int k = 1; k <= c.max_arity; ++k) CHECK(c.q[static_cast<size_t>(k)].is_zero());
    }
}

TEST_CASE("koszul brackets on a noncommutative algebra") {
  AssocAlgebra alg = assoc_mat2();
  const SpacePtr& s = alg.space;
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> coef(-2, 2);
  LinearMap f(s, s, 0);
  for (int b = 0; b < s->dim(); ++b) {
    Vec v(s);
    for (int t = 0; t < s->dim(); ++t)
      if (s->degree(t) == s->degree(b)) v.add(t, coef(rng));
    f.set(b, v);
  }
  KoszulBrackets kb = koszul_brackets(alg, f, 2);
  Vec f1 = f.apply_basis(alg.unit);
  for (int b = 0; b < s->dim(); ++b) {
    Vec expect = f.apply_basis(b);
    expect -= alg.jordan(f1, basis_vec(s, b));
    CHECK(kb.phi.q[1].apply_tuple({b}) == expect);
  }
  CHECK(evaluate_at_unit(kb.phi) == f1);

  LinearMap g0(s, s, 0);
  for (int b = 0; b < s->dim(); ++b) {
    if (b == alg.unit) continue;
    Vec v(s);
    for (int t = 0; t < s->dim(); ++t)
      if (s->degree(t) == s->degree(b)) v.add(t, coef(rng));
    g0.set(b, v);
  }
  KoszulBrackets kb0 = koszul_brackets(alg, g0, 2);
  for (const Word& w : all_words(s, 2)) {
    Vec a = basis_vec(s, w[0]), b = basis_vec(s, w[1]);
    Vec expect = g0.apply(alg.jordan(a, b));
    expect -= alg.jordan(g0.apply(a), b);
    Vec t = alg.jordan(a, g0.apply(b));
    if (s->degree(w[0]) % 2 != 0 && g0.degree % 2 != 0) t *= Rat(-1);
    expect -= t;
    CHECK(kb0.phi.q[2].apply_tuple(w) == expect);
  }
}

TEST_CASE("operator order bounds on the truncated polynomial ring") {
  AssocAlgebra alg = assoc_poly2();
  const SpacePtr& s = alg.space;
  auto idx = [&](const char* n) { return *s->find(n); };
  // Euler-type fields descend to the quotient and are genuine derivations;
  // naive partial derivatives do not (they break Leibniz against the
  // truncation ideal).
  LinearMap xdx(s, s, 0);
  xdx.set(idx("x"), basis_vec(s, idx("x")));
  xdx.set(idx("x2"), Rat(2) * basis_vec(s, idx("x2")));
  xdx.set(idx("xy"), basis_vec(s, idx("xy")));
  LinearMap ydy(s, s, 0);
  ydy.set(idx("y"), basis_vec(s, idx("y")));
  ydy.set(idx("y2"), Rat(2) * basis_vec(s, idx("y2")));
  ydy.set(idx("xy"), basis_vec(s, idx("xy")));
  CHECK(*operator_order_bound(alg, xdx, 3, 4) == 1);

  // multiplication operators have order zero
  LinearMap mx(s, s, 0);
  for (int b = 0; b < s->dim(); ++b)
    mx.set(b, alg.product(basis_vec(s, idx("x")), basis_vec(s, b)));
  CHECK(*operator_order_bound(alg, mx, 3, 4) == 0);

  // a product of two derivations has order exactly two here
  LinearMap f2 = compose(xdx, ydy);
  auto got = operator_order_bound(alg, f2, 3, 4);
  REQUIRE(got.has_value());
  CHECK(*got == 2);
  CHECK(!operator_order_bound(alg, f2, 1, 4).has_value());

  // bracket filtration: [order i, order j] has order <= i + j - 1
  LinearMap br = compose(xdx, mx);
  br -= compose(mx, xdx);
  CHECK(*operator_order_bound(alg, br, 3, 4) <= 0);
  LinearMap br2 = compose(f2, mx);
  br2 -= compose(mx, f2);
  CHECK(*operator_order_bound(alg, br2, 3, 4) <= 1);
}

TEST_CASE("subcomplex brackets vanish above arity two") {
  auto v = make_space({{"w1", 0}, {"w2", 1}, {"c1", 0}, {"c2", 1}});
  LinearMap d(v, v, 1);
  d.set(0, basis_vec(v, 1));
  Vec dc1(v);
  dc1.add(3, 1);
  dc1.add(1, 2);  // c1 -> c2 + 2 w2
  d.set(2, dc1);
  std::vector<Part> parts{Part::L, Part::L, Part::A, Part::A};
  SubcomplexBrackets sb = subcomplex_brackets(v, d, parts, 4);
  if (!sb.report.ok) {
    const Check* c = sb.report.first_failure();
    MESSAGE(c->identity, " arity ", c->arity, " ", c->word, " lhs=", c->lhs, " rhs=", c->rhs);
  }
  CHECK(sb.report.ok);

  auto [P, Pp] = projections_of_parts(v, parts);
  for (int k = 0; k < sb.setup.a_part.space->dim(); ++k) {
    int amb = sb.setup.a_part.ambient_index[static_cast<size_t>(k)];
    const LinearMap& fmap = sb.setup.basis_maps[static_cast<size_t>(amb)];
    Vec coords = sb.phi.q[1].apply_tuple({k});
    LinearMap got(v, v, fmap.degree + 1);
    for (const auto& [b, r] : coords.c) {
      LinearMap t = sb.setup.basis_maps[static_cast<size_t>(
          sb.setup.a_part.ambient_index[static_cast<size_t>(b)])];
      t *= r;
      got += t;
    }
    LinearMap expect = compose(P, compose(d, fmap));
    LinearMap t2 = compose(fmap, d);
    t2 *= Rat(fmap.degree % 2 != 0 ? 1 : -1);
    expect += t2;
    // the displayed formula is a map on W; the End element extends by zero
    for (int u = 0; u < v->dim(); ++u)
      if (parts[static_cast<size_t>(u)] == Part::L)
        CHECK(got.apply_basis(u) == expect.apply_basis(u));
      else
        CHECK(got.apply_basis(u).is_zero());
  }

  for (const Word& w2 : all_words(sb.setup.a_part.space, 2)) {
    int amb_f = sb.setup.a_part.ambient_index[static_cast<size_t>(w2[0])];
    int amb_g = sb.setup.a_part.ambient_index[static_cast<size_t>(w2[1])];
    const LinearMap& fmap = sb.setup.basis_maps[static_cast<size_t>(amb_f)];
    const LinearMap& gmap = sb.setup.basis_maps[static_cast<size_t>(amb_g)];
    Vec coords = sb.phi.q[2].apply_tuple(w2);
    LinearMap got(v, v, fmap.degree + gmap.degree + 1);
    for (const auto& [b, r] : coords.c) {
      LinearMap t = sb.setup.basis_maps[static_cast<size_t>(
          sb.setup.a_part.ambient_index[static_cast<size_t>(b)])];
      t *= r;
      got += t;
    }
    LinearMap expect = compose(fmap, compose(Pp, compose(d, gmap)));
    int sf = fmap.degree, sg = gmap.degree;
    expect *= Rat((sf + 1) % 2 != 0 ? -1 : 1);
    LinearMap t2 = compose(gmap, compose(Pp, compose(d, fmap)));
    int sign2 = (((sf + 1) % 2 != 0) ? -1 : 1) * ((((sf + 1) * (sg + 1)) % 2 != 0) ? -1 : 1) * -1;
    t2 *= Rat(sign2);
    expect += t2;
    for (int u = 0; u < v->dim(); ++u)
      if (parts[static_cast<size_t>(u)] == Part::L)
        CHECK(got.apply_basis(u) == expect.apply_basis(u));
      else
        CHECK(got.apply_basis(u).is_zero());
  }
}

TEST_CASE("degree-splitting brackets and their closed form") {
  Fixture fx = fixture_getzler();
  GetzlerBrackets gb = getzler_brackets(fx.gla, 4);
  if (!gb.report.ok) {
    const Check* c = gb.report.first_failure();
    MESSAGE(c->identity, " arity ", c->arity, " ", c->word, " lhs=", c->lhs, " rhs=", c->rhs);
  }
  CHECK(gb.report.ok);
  bool nonzero = false;
  for (int i = 2; i <= 4; ++i)
    nonzero = nonzero || !gb.closed_form.q[static_cast<size_t>(i)].is_zero();
  CHECK(nonzero);
  Subspace a = make_part_space(gb.split, Part::A);
  for (int k = 0; k < a.space->dim(); ++k) {
    int amb = a.ambient_index[static_cast<size_t>(k)];
    Vec got = gb.definition_route.q[1].apply_tuple({k});
    if (gb.split.space->degree(amb) == -1)
      CHECK(got.is_zero());
    else
      CHECK(got.c == restrict_to_part(a, gb.split.differential->apply_basis(amb)).c);
  }
}
