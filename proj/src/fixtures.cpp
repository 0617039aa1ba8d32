#include "hdb/fixtures.hpp"

#include <random>
#include <stdexcept>

namespace hdb {

namespace {

Vec vec_of(const SpacePtr& s, std::initializer_list<std::pair<const char*, int>> terms) {
  Vec v(s);
  for (const auto& [name, coeff] : terms) v.add(*s->find(name), coeff);
  return v;
}

void must_validate(Fixture& f) {
  CheckReport rep = validate_gla(f.gla);
  if (!rep.ok)
    throw std::logic_error("fixture " + f.name + " fails validation: " +
                           rep.first_failure()->identity);
  for (const LinearMap& d : f.derivations) {
    CheckReport dr = validate_derivation(f.gla, d, true);
    if (!dr.ok) throw std::logic_error("fixture " + f.name + " has a bad derivation");
  }
  for (const Vec& m : f.elements)
    if (!m.is_homogeneous()) throw std::logic_error("fixture " + f.name + " has a bad element");
}

}  // namespace

Fixture fixture_sl2_split() {
  auto s = make_space({{"e", 0}, {"f", 0}, {"h", 0}});
  GLA g = make_gla(s,
                   {{0, 1, vec_of(s, {{"h", 1}})},
                    {2, 0, vec_of(s, {{"e", 2}})},
                    {2, 1, vec_of(s, {{"f", -2}})}},
                   LinearMap(s, s, 1),
                   std::vector<Part>{Part::A, Part::L, Part::A});
  Fixture f{"sl2_split", std::move(g), {}, {}};
  f.elements = {vec_of(s, {{"h", 1}, {"f", 1}}), vec_of(s, {{"e", 1}}),
                vec_of(s, {{"f", 2}})};
  // inner derivations by normalizer elements of L = span(f)
  f.derivations = {adjoint(f.gla, vec_of(s, {{"f", 1}})),
                   adjoint(f.gla, vec_of(s, {{"h", 1}}))};
  must_validate(f);
  return f;
}

Fixture fixture_graded6() {
  // sl2 (degree 0) acting on its 2-dimensional module u, w placed in odd
  // degree, plus an odd central z in degree -1
  auto s = make_space({{"e", 0}, {"f", 0}, {"h", 0}, {"u", 1}, {"w", 1}, {"z", -1}});
  int e = 0, f = 1, h = 2, u = 3, w = 4;
  std::vector<std::tuple<int, int, Vec>> table{
      {e, f, vec_of(s, {{"h", 1}})},  {h, e, vec_of(s, {{"e", 2}})},
      {h, f, vec_of(s, {{"f", -2}})}, {e, w, vec_of(s, {{"u", 1}})},
      {f, u, vec_of(s, {{"w", 1}})},  {h, u, vec_of(s, {{"u", 1}})},
      {h, w, vec_of(s, {{"w", -1}})}};
  LinearMap d(s, s, 1);
  d.set(e, vec_of(s, {{"u", 1}}));
  d.set(f, vec_of(s, {{"w", 1}}));
  d.set(h, vec_of(s, {{"u", 1}, {"w", -1}}));
  GLA g = make_gla(s, table, d,
                   std::vector<Part>{Part::A, Part::L, Part::A, Part::A, Part::L, Part::L});
  Fixture fix{"graded6", std::move(g), {}, {}};
  (void)u;
  (void)w;
  fix.elements = {vec_of(s, {{"h", 1}, {"f", 1}}), vec_of(s, {{"e", 1}}),
                  vec_of(s, {{"u", 1}, {"w", 2}}), vec_of(s, {{"z", 3}})};
  fix.derivations = {d, adjoint(fix.gla, vec_of(s, {{"f", 1}}))};
  must_validate(fix);
  return fix;
}

Fixture fixture_gl11_borel() {
  // gl(1|1): a = E00, b = E11, p = E10 (odd), q = E01 (odd);
  // Borel: [t, x] = x with x odd
  auto s = make_space({{"a", 0}, {"b", 0}, {"p", 1}, {"q", -1}, {"t", 0}, {"x", 1}});
  std::vector<std::tuple<int, int, Vec>> table{
      {0, 2, vec_of(s, {{"p", -1}})},          // [a,p] = -p
      {1, 2, vec_of(s, {{"p", 1}})},           // [b,p] = p
      {0, 3, vec_of(s, {{"q", 1}})},           // [a,q] = q
      {1, 3, vec_of(s, {{"q", -1}})},          // [b,q] = -q
      {2, 3, vec_of(s, {{"a", 1}, {"b", 1}})}, // [p,q] = a + b
      {4, 5, vec_of(s, {{"x", 1}})}};          // [t,x] = x
  LinearMap d(s, s, 1);
  d.set(4, vec_of(s, {{"x", 1}}));  // t -> x
  GLA g = make_gla(s, table, d,
                   std::vector<Part>{Part::L, Part::L, Part::A, Part::L, Part::A, Part::A});
  Fixture fix{"gl11_borel", std::move(g), {}, {}};
  fix.elements = {vec_of(s, {{"a", 1}}), vec_of(s, {{"p", 1}, {"x", -1}}),
                  vec_of(s, {{"t", 2}, {"b", 1}})};
  fix.derivations = {d};
  must_validate(fix);
  return fix;
}

Fixture fixture_super_heisenberg() {
  auto s = make_space({{"x", 1}, {"y", 1}, {"c", 2}, {"l", 0}});
  std::vector<std::tuple<int, int, Vec>> table{
      {0, 1, vec_of(s, {{"c", 1}})},   // [x,y] = c
      {3, 0, vec_of(s, {{"x", 1}})},   // [l,x] = x
      {3, 1, vec_of(s, {{"y", -1}})}}; // [l,y] = -y
  GLA g = make_gla(s, table, LinearMap(s, s, 1),
                   std::vector<Part>{Part::A, Part::A, Part::A, Part::L});
  Fixture fix{"super_heisenberg", std::move(g), {}, {}};
  fix.elements = {vec_of(s, {{"x", 1}}), vec_of(s, {{"l", 1}}), vec_of(s, {{"c", 1}, {"c", 1}})};
  fix.derivations = {adjoint(fix.gla, vec_of(s, {{"l", 1}}))};
  must_validate(fix);
  return fix;
}

Fixture fixture_getzler() {
  // inside End(U) for U with degrees (0,1,-1): the closed span of
  // {E00+E11, E22, E01, E10, E20, E21}, graded commutator, D = ad(E10)
  auto u = make_space({{"u0", 0}, {"u1", 1}, {"u2", -1}});
  std::vector<std::pair<std::string, LinearMap>> maps;
  auto unit_map = [&](int from, int to) {
    LinearMap m(u, u, u->degree(to) - u->degree(from));
    m.set(from, basis_vec(u, to));
    return m;
  };
  LinearMap id01 = unit_map(0, 0);
  id01 += unit_map(1, 1);
  maps.emplace_back("I01", id01);
  maps.emplace_back("E22", unit_map(2, 2));
  maps.emplace_back("E01", unit_map(1, 0));
  maps.emplace_back("E10", unit_map(0, 1));
  maps.emplace_back("E20", unit_map(0, 2));
  maps.emplace_back("E21", unit_map(1, 2));

  std::vector<std::pair<std::string, int>> names;
  for (auto& [n, m] : maps) names.emplace_back(n, m.degree);
  auto s = make_space(names);
  auto decompose = [&](const LinearMap& f) {
    // the span is closed; decompose by matching matrix entries
    Vec out(s);
    LinearMap rest = f;
    // I01 coefficient: entry (u0 -> u0)
    auto entry = [&](const LinearMap& m, int from, int to) {
      auto it = m.apply_basis(from).c.find(to);
      return it == m.apply_basis(from).c.end() ? Rat(0) : it->second;
    };
    Rat c = entry(rest, 0, 0);
    out.add(0, c);
    out.add(1, entry(rest, 2, 2));
    out.add(2, entry(rest, 1, 0));
    out.add(3, entry(rest, 0, 1));
    out.add(4, entry(rest, 0, 2));
    out.add(5, entry(rest, 1, 2));
    // verify exactness of the decomposition
    LinearMap check(u, u, f.degree);
    for (const auto& [b, r] : out.c) {
      LinearMap t = maps[static_cast<size_t>(b)].second;
      t *= r;
      check += t;
    }
    if (!(check == f)) throw std::logic_error("getzler fixture: span not closed");
    return out;
  };
  std::vector<std::tuple<int, int, Vec>> table;
  for (int x = 0; x < 6; ++x)
    for (int y = x; y < 6; ++y) {
      if (x == y && s->degree(x) % 2 == 0) continue;
      Vec v = decompose(derivation_bracket(maps[static_cast<size_t>(x)].second,
                                           maps[static_cast<size_t>(y)].second));
      if (!v.is_zero()) table.emplace_back(x, y, v);
    }
  LinearMap d(s, s, 1);
  for (int b = 0; b < 6; ++b)
    d.set(b, decompose(derivation_bracket(maps[3].second, maps[static_cast<size_t>(b)].second)));
  GLA g = make_gla(s, table, d);
  Fixture fix{"getzler6", std::move(g), {}, {}};
  fix.elements = {basis_vec(s, 2)};
  fix.derivations = {};
  CheckReport rep = validate_gla(fix.gla);
  if (!rep.ok) throw std::logic_error("getzler fixture invalid");
  return fix;
}

Fixture fixture_block_end() {
  auto v = make_space({{"w1", 0}, {"w2", 1}, {"c1", 0}, {"c2", 1}});
  LinearMap d(v, v, 1);
  d.set(0, basis_vec(v, 1));  // w1 -> w2
  d.set(2, basis_vec(v, 3));  // c1 -> c2
  std::vector<Part> parts{Part::L, Part::L, Part::A, Part::A};
  EndSetup setup = end_of_complex(v, parts);
  LinearMap ad_d = ad_in_end(setup, d);
  GLA g = setup.end_gla;
  g.differential = ad_d;
  Fixture fix{"block_end", std::move(g), {}, {}};
  // elements: d itself (in L), and a generic mixed endomorphism
  fix.elements.push_back(setup.to_coords(d));
  LinearMap m(v, v, 0);
  m.set(0, basis_vec(v, 2));
  m.set(3, basis_vec(v, 1));
  fix.elements.push_back(setup.to_coords(m));
  fix.derivations = {ad_d};
  must_validate(fix);
  return fix;
}

Fixture fixture_tower() {
  // [T, a_i] = a_{i+1} on an abelian tower, L = span(T)
  auto s = make_space({{"T", 0}, {"a0", 0}, {"a1", 0}, {"a2", 0}, {"a3", 0}});
  std::vector<std::tuple<int, int, Vec>> table;
  for (int i = 0; i < 3; ++i) table.emplace_back(0, 1 + i, basis_vec(s, 2 + i));
  GLA g = make_gla(s, table, LinearMap(s, s, 1),
                   std::vector<Part>{Part::L, Part::A, Part::A, Part::A, Part::A});
  Fixture fix{"tower", std::move(g), {}, {}};
  fix.elements = {basis_vec(s, 0), vec_of(s, {{"T", 1}, {"a0", 1}})};
  fix.derivations = {adjoint(fix.gla, basis_vec(s, 0))};
  must_validate(fix);
  return fix;
}

std::vector<Fixture> fixture_corpus() {
  return {fixture_sl2_split(), fixture_graded6(), fixture_gl11_borel(),
          fixture_super_heisenberg(), fixture_block_end(), fixture_tower()};
}

AssocAlgebra assoc_mat2() {
  // 2x2 matrices: 1, h = E11 - E22, p = E12, q = E21; grading |p| = 1,
  // |q| = -1
  auto s = make_space({{"one", 0}, {"h", 0}, {"p", 1}, {"q", -1}});
  AssocAlgebra alg;
  alg.space = s;
  alg.unit = 0;
  auto set = [&](int i, int j, std::initializer_list<std::pair<const char*, Rat>> terms) {
    Vec v(s);
    for (const auto& [n, c] : terms) v.add(*s->find(n), c);
    alg.mult[{i, j}] = std::move(v);
  };
  int one = 0, h = 1, p = 2, q = 3;
  for (int i = 0; i < 4; ++i) {
    alg.mult[{one, i}] = basis_vec(s, i);
    if (i != one) alg.mult[{i, one}] = basis_vec(s, i);
  }
  set(h, h, {{"one", 1}});
  set(h, p, {{"p", 1}});
  set(p, h, {{"p", -1}});
  set(h, q, {{"q", -1}});
  set(q, h, {{"q", 1}});
  set(p, p, {});
  set(q, q, {});
  set(p, q, {{"one", Rat(1, 2)}, {"h", Rat(1, 2)}});
  set(q, p, {{"one", Rat(1, 2)}, {"h", Rat(-1, 2)}});
  CheckReport rep = validate_assoc(alg);
  if (!rep.ok) throw std::logic_error("assoc_mat2 invalid: " + rep.first_failure()->identity);
  return alg;
}

AssocAlgebra assoc_poly2() {
  // Q[x,y]/(x,y)^3: basis 1, x, y, x2, xy, y2 in degree zero
  auto s = make_space({{"1", 0}, {"x", 0}, {"y", 0}, {"x2", 0}, {"xy", 0}, {"y2", 0}});
  AssocAlgebra alg;
  alg.space = s;
  alg.unit = 0;
  auto mono = [&](int dx, int dy) -> int {
    if (dx + dy > 2) return -1;
    static const std::map<std::pair<int, int>, int> table{
        {{0, 0}, 0}, {{1, 0}, 1}, {{0, 1}, 2}, {{2, 0}, 3}, {{1, 1}, 4}, {{0, 2}, 5}};
    return table.at({dx, dy});
  };
  std::vector<std::pair<int, int>> expo{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      int dx = expo[static_cast<size_t>(i)].first + expo[static_cast<size_t>(j)].first;
      int dy = expo[static_cast<size_t>(i)].second + expo[static_cast<size_t>(j)].second;
      int t = mono(dx, dy);
      Vec v(s);
      if (t >= 0) v.add(t, 1);
      alg.mult[{i, j}] = std::move(v);
    }
  CheckReport rep = validate_assoc(alg);
  if (!rep.ok) throw std::logic_error("assoc_poly2 invalid");
  return alg;
}

Fixture random_end_fixture(uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> deg(-1, 1);
  // graded U of dimension 3; E(i>j) maps u_j to u_i, degree d_i - d_j
  std::vector<int> d{deg(rng), deg(rng), deg(rng)};
  std::vector<std::pair<std::string, int>> names;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      names.emplace_back("E" + std::to_string(i) + std::to_string(j),
                         d[static_cast<size_t>(i)] - d[static_cast<size_t>(j)]);
  auto s = make_space(names);
  auto idx = [](int i, int j) { return 3 * i + j; };
  auto odd = [&](int b) { return s->degree(b) % 2 != 0; };
  // graded commutator structure constants
  std::vector<std::tuple<int, int, Vec>> table;
  for (int b1 = 0; b1 < 9; ++b1)
    for (int b2 = b1; b2 < 9; ++b2) {
      int i = b1 / 3, j = b1 % 3, k = b2 / 3, l = b2 % 3;
      Vec v(s);
      if (j == k) v.add(idx(i, l), 1);
      int sign = (odd(b1) && odd(b2)) ? 1 : -1;
      if (l == i) v.add(idx(k, j), sign);
      if (b1 == b2 && !odd(b1)) continue;  // even diagonal must vanish
      if (!v.is_zero()) table.emplace_back(b1, b2, v);
    }
  // triangular splitting: A = strictly upper, L = lower including diagonal
  std::vector<Part> parts(9, Part::L);
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) parts[static_cast<size_t>(idx(i, j))] = Part::A;
  // an odd square-zero element of L for D = ad(x)
  std::vector<int> lower;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j <= i; ++j)
      if (i != j && s->degree(idx(i, j)) == 1) lower.push_back(idx(i, j));
  GLA g = make_gla(s, table, std::nullopt, parts);
  Fixture fix{"end3_seed" + std::to_string(seed), std::move(g), {}, {}};
  for (int b : lower) {
    Vec x = basis_vec(s, b);
    if (fix.gla.bracket(x, x).is_zero()) {
      LinearMap ad_x = adjoint(fix.gla, x);
      LinearMap dd = derivation_bracket(ad_x, ad_x);
      if (dd.is_zero()) {
        fix.derivations.push_back(ad_x);
        fix.gla.differential = ad_x;
        break;
      }
    }
  }
  if (!fix.gla.differential) fix.gla.differential = LinearMap(s, s, 1);
  // homogeneous random sources
  std::uniform_int_distribution<int> coef(-2, 2);
  for (int trial = 0; trial < 3; ++trial) {
    int want = deg(rng);
    Vec m(s);
    for (int b = 0; b < 9; ++b)
      if (s->degree(b) == want) m.add(b, coef(rng));
    if (!m.is_zero()) fix.elements.push_back(m);
  }
  if (fix.elements.empty()) fix.elements.push_back(basis_vec(s, idx(1, 0)));
  must_validate(fix);
  return fix;
}

Fixture random_sparse_fixture(uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> deg(-1, 1), coef(-2, 2), pick(0, 2);
  for (int attempt = 0; attempt < 400; ++attempt) {
    int n = 3 + static_cast<int>(rng() % 2);
    std::vector<std::pair<std::string, int>> names;
    for (int i = 0; i < n; ++i) names.emplace_back("g" + std::to_string(i), deg(rng));
    auto s = make_space(names);
    std::vector<std::tuple<int, int, Vec>> table;
    int entries = 1 + static_cast<int>(rng() % 2);
    for (int t = 0; t < entries; ++t) {
      int i = static_cast<int>(rng() % static_cast<uint64_t>(n));
      int j = static_cast<int>(rng() % static_cast<uint64_t>(n));
      if (i > j) std::swap(i, j);
      if (i == j && s->degree(i) % 2 == 0) continue;
      int want = s->degree(i) + s->degree(j);
      Vec v(s);
      for (int b = 0; b < n; ++b)
        if (s->degree(b) == want && coef(rng) != 0) v.add(b, coef(rng));
      if (v.is_zero()) continue;
      bool dup = false;
      for (auto& [a, bb, vv] : table)
        if (a == i && bb == j) dup = true;
      if (!dup) table.emplace_back(i, j, v);
    }
    GLA g;
    try {
      g = make_gla(s, table);
    } catch (const std::invalid_argument&) {
      continue;
    }
    if (!validate_gla(g).ok) continue;  // rejection sampling on Jacobi
    // random splitting with both parts closed
    std::vector<Part> parts;
    for (int i = 0; i < n; ++i) parts.push_back(rng() % 2 == 0 ? Part::L : Part::A);
    GLA gs = make_gla(s, table, std::nullopt, parts);
    CheckReport rep = validate_gla(gs);
    if (!rep.ok) continue;
    Fixture fix{"sparse_seed" + std::to_string(seed), std::move(gs), {}, {}};
    for (int b = 0; b < n; ++b)
      if (rng() % 2 == 0) fix.elements.push_back(basis_vec(s, b));
    if (fix.elements.empty()) fix.elements.push_back(basis_vec(s, 0));
    must_validate(fix);
    return fix;
  }
  throw std::runtime_error("random_sparse_fixture: no Jacobi-valid sample found");
}

std::vector<Fixture> random_fixture_suite(uint64_t seed, int count) {
  std::vector<Fixture> out;
  for (int i = 0; i < count; ++i) {
    if (i % 2 == 0)
      out.push_back(random_end_fixture(seed + static_cast<uint64_t>(i)));
    else
      out.push_back(random_sparse_fixture(seed + static_cast<uint64_t>(i)));
  }
  return out;
}

}  // namespace hdb
