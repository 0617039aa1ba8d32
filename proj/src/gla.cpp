#include "hdb/gla.hpp"

#include <algorithm>
#include <stdexcept>

namespace hdb {

Vec GLA::bracket_basis(int i, int j) const {
  bool flip = i > j;
  if (flip) std::swap(i, j);
  auto it = table.find({i, j});
  if (it == table.end()) return Vec(space);
  Vec v = it->second;
  if (flip) {
    // [e_j, e_i] = -(-1)^{|e_i||e_j|} [e_i, e_j]
    int sign = (space->degree(i) % 2 != 0 && space->degree(j) % 2 != 0) ? 1 : -1;
    v *= Rat(sign);
  }
  return v;
}

Vec GLA::bracket(const Vec& x, const Vec& y) const {
  if (!same_space(x.space, space) || !same_space(y.space, space))
    throw std::invalid_argument("bracket: vector not in this algebra's space");
  Vec out(space);
  for (const auto& [i, a] : x.c)
    for (const auto& [j, b] : y.c) {
      Vec t = bracket_basis(i, j);
      t *= a * b;
      out += t;
    }
  return out;
}

std::vector<int> GLA::part_indices(Part p) const {
  std::vector<int> out;
  if (!splitting) return out;
  for (int i = 0; i < space->dim(); ++i)
    if ((*splitting)[static_cast<size_t>(i)] == p) out.push_back(i);
  return out;
}

GLA make_gla(SpacePtr space, const std::vector<std::tuple<int, int, Vec>>& entries,
             std::optional<LinearMap> differential, std::optional<std::vector<Part>> splitting) {
  GLA g;
  g.space = std::move(space);
  for (const auto& [i0, j0, v0] : entries) {
    int i = i0, j = j0;
    Vec v = v0;
    if (i > j) {
      std::swap(i, j);
      int sign = (g.space->degree(i) % 2 != 0 && g.space->degree(j) % 2 != 0) ? 1 : -1;
      v *= Rat(sign);
    }
    if (v.is_zero()) continue;
    if (g.table.count({i, j}))
      throw std::invalid_argument("duplicate structure constant for (" + g.space->name(i) +
                                  "," + g.space->name(j) + ")");
    g.table[{i, j}] = std::move(v);
  }
  if (differential && static_cast<int>(differential->col.size()) != g.space->dim())
    throw std::invalid_argument("differential dimension mismatch");
  g.differential = std::move(differential);
  if (splitting && static_cast<int>(splitting->size()) != g.space->dim())
    throw std::invalid_argument("splitting size mismatch");
  g.splitting = std::move(splitting);
  return g;
}

namespace {
std::string pair_word(const GLA& g, int i, int j) {
  return g.space->name(i) + "," + g.space->name(j);
}

bool supported_in(const GLA& g, const Vec& v, Part p) {
  for (const auto& [i, r] : v.c)
    if (!g.in_part(i, p)) return false;
  return true;
}
}  // namespace

CheckReport validate_gla(const GLA& g) {
  CheckReport rep;
  int n = g.space->dim();

  // bracket degrees and even diagonals
  for (const auto& [key, v] : g.table) {
    auto [i, j] = key;
    int d;
    if (!v.is_homogeneous(&d) || (!v.is_zero() && d != g.space->degree(i) + g.space->degree(j)))
      rep.fail("bracket_degree", 2, pair_word(g, i, j));
    if (i == j && g.space->degree(i) % 2 == 0 && !v.is_zero())
      rep.fail("antisymmetry", 2, pair_word(g, i, i), rat_str(v.c.begin()->second), "0");
  }

  // graded Jacobi: [x,[y,z]] = [[x,y],z] + (-1)^{|x||y|}[y,[x,z]]
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Vec lhs = g.bracket(basis_vec(g.space, i), g.bracket_basis(j, k));
        Vec rhs = g.bracket(g.bracket_basis(i, j), basis_vec(g.space, k));
        Vec t = g.bracket(basis_vec(g.space, j), g.bracket_basis(i, k));
        int sign = (g.space->degree(i) % 2 != 0 && g.space->degree(j) % 2 != 0) ? -1 : 1;
        t *= Rat(sign);
        rhs += t;
        if (!(lhs == rhs))
          rep.fail("jacobi", 3,
                   g.space->name(i) + "," + g.space->name(j) + "," + g.space->name(k));
      }

  if (g.differential) {
    const LinearMap& d = *g.differential;
    if (d.degree != 1) rep.fail("differential_degree");
    try {
      check_degree(d);
    } catch (const std::runtime_error&) {
      rep.fail("differential_degree");
    }
    LinearMap dd = compose(d, d);
    for (int i = 0; i < n; ++i)
      if (!dd.apply_basis(i).is_zero()) rep.fail("d_squared", 1, g.space->name(i));
    CheckReport leib = validate_derivation(g, d, g.has_splitting());
    rep.merge(leib);
  }

  if (g.has_splitting()) {
    for (Part p : {Part::L, Part::A}) {
      auto idx = g.part_indices(p);
      for (size_t a = 0; a < idx.size(); ++a)
        for (size_t b = a; b < idx.size(); ++b) {
          Vec v = g.bracket_basis(idx[a], idx[b]);
          if (!supported_in(g, v, p))
            rep.fail(p == Part::L ? "L_closed" : "A_closed", 2,
                     pair_word(g, idx[a], idx[b]));
        }
    }
  }

  if (rep.checks.empty() || rep.ok) rep.pass("gla_axioms");
  return rep;
}

std::pair<LinearMap, LinearMap> projections(const GLA& g) {
  if (!g.has_splitting()) throw std::invalid_argument("projections: no splitting present");
  LinearMap P(g.space, g.space, 0), Pperp(g.space, g.space, 0);
  for (int i = 0; i < g.space->dim(); ++i) {
    if (g.in_part(i, Part::A))
      P.set(i, basis_vec(g.space, i));
    else
      Pperp.set(i, basis_vec(g.space, i));
  }
  return {P, Pperp};
}

CheckReport validate_derivation(const GLA& g, const LinearMap& d, bool require_preserves_L) {
  CheckReport rep;
  int n = g.space->dim();
  int ddeg = d.degree;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Vec lhs = d.apply(g.bracket_basis(i, j));
      Vec rhs = g.bracket(d.apply_basis(i), basis_vec(g.space, j));
      Vec t = g.bracket(basis_vec(g.space, i), d.apply_basis(j));
      int sign = (ddeg % 2 != 0 && g.space->degree(i) % 2 != 0) ? -1 : 1;
      t *= Rat(sign);
      rhs += t;
      if (!(lhs == rhs)) rep.fail("leibniz", 2, pair_word(g, i, j));
    }
  if (require_preserves_L && g.has_splitting()) {
    // D(L) in L, equivalently P D P = P D
    for (int i : g.part_indices(Part::L))
      if (!supported_in(g, d.apply_basis(i), Part::L))
        rep.fail("PDP_PD", 1, g.space->name(i));
  }
  if (rep.ok) rep.pass("derivation");
  return rep;
}

bool in_normalizer(const GLA& g, const Vec& x) {
  if (!g.has_splitting()) throw std::invalid_argument("in_normalizer: no splitting");
  for (int i : g.part_indices(Part::L))
    if (!supported_in(g, g.bracket(x, basis_vec(g.space, i)), Part::L)) return false;
  return true;
}

LinearMap derivation_bracket(const LinearMap& d1, const LinearMap& d2) {
  LinearMap a = compose(d1, d2);
  LinearMap b = compose(d2, d1);
  int sign = (d1.degree % 2 != 0 && d2.degree % 2 != 0) ? 1 : -1;
  b *= Rat(sign);
  a += b;
  return a;
}

LinearMap adjoint(const GLA& g, const Vec& x) {
  int xdeg = 0;
  if (!x.is_homogeneous(&xdeg)) throw std::invalid_argument("adjoint: x not homogeneous");
  LinearMap m(g.space, g.space, xdeg);
  for (int i = 0; i < g.space->dim(); ++i) m.set(i, g.bracket(x, basis_vec(g.space, i)));
  return m;
}

Subspace make_part_space(const GLA& g, Part p) {
  if (!g.has_splitting()) throw std::invalid_argument("make_part_space: no splitting");
  Subspace s;
  s.part_index.assign(static_cast<size_t>(g.space->dim()), -1);
  std::vector<std::pair<std::string, int>> basis;
  for (int i : g.part_indices(p)) {
    s.part_index[static_cast<size_t>(i)] = static_cast<int>(s.ambient_index.size());
    s.ambient_index.push_back(i);
    basis.emplace_back(g.space->name(i), g.space->degree(i));
  }
  s.space = make_space(basis);
  return s;
}

Subspace subspace_from_indices(const SpacePtr& space, const std::vector<int>& indices) {
  Subspace s;
  s.part_index.assign(static_cast<size_t>(space->dim()), -1);
  std::vector<std::pair<std::string, int>> basis;
  for (int i : indices) {
    if (s.part_index.at(static_cast<size_t>(i)) >= 0)
      throw std::invalid_argument("subspace_from_indices: duplicate index");
    s.part_index[static_cast<size_t>(i)] = static_cast<int>(s.ambient_index.size());
    s.ambient_index.push_back(i);
    basis.emplace_back(space->name(i), space->degree(i));
  }
  s.space = make_space(basis);
  return s;
}

GLA restrict_gla(const GLA& g, const Subspace& sub) {
  std::vector<std::tuple<int, int, Vec>> entries;
  for (size_t a = 0; a < sub.ambient_index.size(); ++a)
    for (size_t b = a; b < sub.ambient_index.size(); ++b) {
      Vec v = g.bracket_basis(sub.ambient_index[a], sub.ambient_index[b]);
      if (v.is_zero()) continue;
      entries.emplace_back(static_cast<int>(a), static_cast<int>(b), restrict_to_part(sub, v));
    }
  std::optional<LinearMap> diff;
  if (g.differential) {
    LinearMap dl(sub.space, sub.space, 1);
    for (int k = 0; k < sub.space->dim(); ++k)
      dl.set(k, restrict_to_part(
                    sub, g.differential->apply_basis(sub.ambient_index[static_cast<size_t>(k)])));
    diff = dl;
  }
  return make_gla(sub.space, entries, diff);
}

Vec restrict_to_part(const Subspace& s, const Vec& ambient) {
  Vec out(s.space);
  for (const auto& [i, r] : ambient.c) {
    int k = s.part_index.at(static_cast<size_t>(i));
    if (k < 0) throw std::runtime_error("restrict_to_part: vector leaves the part");
    out.add(k, r);
  }
  return out;
}

Vec include_from_part(const SpacePtr& ambient, const Subspace& s, const Vec& v) {
  Vec out(ambient);
  for (const auto& [k, r] : v.c) out.add(s.ambient_index.at(static_cast<size_t>(k)), r);
  return out;
}

}  // namespace hdb
