#include "hdb/graded.hpp"

#include <algorithm>
#include <stdexcept>

namespace hdb {

SpacePtr make_space(const std::vector<std::pair<std::string, int>>& basis) {
  auto s = std::make_shared<GradedSpace>();
  for (const auto& [name, deg] : basis) {
    if (s->index_of.count(name))
      throw std::invalid_argument("duplicate basis name: " + name);
    s->index_of[name] = static_cast<int>(s->names.size());
    s->names.push_back(name);
    s->degrees.push_back(deg);
  }
  return s;
}

SpacePtr concat_spaces(const std::vector<SpacePtr>& parts) {
  std::vector<std::pair<std::string, int>> basis;
  for (const auto& p : parts)
    for (int i = 0; i < p->dim(); ++i) basis.emplace_back(p->name(i), p->degree(i));
  return make_space(basis);
}

SpacePtr shift_space(const SpacePtr& v, int k, const std::string& prefix) {
  std::vector<std::pair<std::string, int>> basis;
  for (int i = 0; i < v->dim(); ++i)
    basis.emplace_back(prefix + v->name(i), v->degree(i) - k);
  return make_space(basis);
}

bool same_space(const SpacePtr& a, const SpacePtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return a->names == b->names && a->degrees == b->degrees;
}

void Vec::add(int i, const Rat& r) {
  if (r == 0) return;
  auto it = c.find(i);
  if (it == c.end()) {
    c.emplace(i, r);
  } else {
    it->second += r;
    if (it->second == 0) c.erase(it);
  }
}

Vec& Vec::operator+=(const Vec& o) {
  for (const auto& [i, r] : o.c) add(i, r);
  return *this;
}

Vec& Vec::operator-=(const Vec& o) {
  for (const auto& [i, r] : o.c) add(i, -r);
  return *this;
}

Vec& Vec::operator*=(const Rat& r) {
  if (r == 0) {
    c.clear();
    return *this;
  }
  for (auto& [i, v] : c) v *= r;
  return *this;
}

bool Vec::is_homogeneous(int* degree_out) const {
  if (c.empty()) return true;
  int d = space->degree(c.begin()->first);
  for (const auto& [i, r] : c)
    if (space->degree(i) != d) return false;
  if (degree_out) *degree_out = d;
  return true;
}

Vec basis_vec(const SpacePtr& s, int i) {
  Vec v(s);
  v.add(i, 1);
  return v;
}

std::string vec_str(const Vec& v) {
  if (v.is_zero()) return "0";
  std::string out;
  for (const auto& [i, r] : v.c) {
    if (!out.empty()) out += " + ";
    out += rat_str(r) + "*" + v.space->name(i);
  }
  return out;
}

int koszul_sign(const std::vector<int>& perm, const std::vector<int>& degrees) {
  if (perm.size() != degrees.size())
    throw std::invalid_argument("koszul_sign: length mismatch");
  int odd_inversions = 0;
  for (size_t p = 0; p < perm.size(); ++p)
    for (size_t q = p + 1; q < perm.size(); ++q)
      if (perm[p] > perm[q] && degrees[static_cast<size_t>(perm[p])] % 2 != 0 &&
          degrees[static_cast<size_t>(perm[q])] % 2 != 0)
        ++odd_inversions;
  return odd_inversions % 2 == 0 ? 1 : -1;
}

std::vector<std::vector<int>> unshuffles(int i, int j) {
  return multi_unshuffles({i, j});
}

namespace {
void multi_unshuffle_rec(const std::vector<int>& blocks, size_t b,
                         std::vector<int>& remaining, std::vector<int>& acc,
                         std::vector<std::vector<int>>& out) {
  if (b == blocks.size()) {
    out.push_back(acc);
    return;
  }
  int k = blocks[b];
  int n = static_cast<int>(remaining.size());
  if (k == 0) {
    multi_unshuffle_rec(blocks, b + 1, remaining, acc, out);
    return;
  }
  // choose k of the remaining (sorted) values, lexicographically
  std::vector<int> pick(static_cast<size_t>(k));
  std::vector<int> idx(static_cast<size_t>(k));
  for (int t = 0; t < k; ++t) idx[static_cast<size_t>(t)] = t;
  while (true) {
    std::vector<int> rest;
    {
      std::vector<bool> used(static_cast<size_t>(n), false);
      for (int t = 0; t < k; ++t) used[static_cast<size_t>(idx[static_cast<size_t>(t)])] = true;
      for (int t = 0; t < n; ++t)
        if (!used[static_cast<size_t>(t)]) rest.push_back(remaining[static_cast<size_t>(t)]);
      for (int t = 0; t < k; ++t)
        acc.push_back(remaining[static_cast<size_t>(idx[static_cast<size_t>(t)])]);
    }
    std::swap(remaining, rest);
    multi_unshuffle_rec(blocks, b + 1, remaining, acc, out);
    std::swap(remaining, rest);
    acc.resize(acc.size() - static_cast<size_t>(k));
    // next combination
    int t = k - 1;
    while (t >= 0 && idx[static_cast<size_t>(t)] == n - k + t) --t;
    if (t < 0) break;
    ++idx[static_cast<size_t>(t)];
    for (int u = t + 1; u < k; ++u) idx[static_cast<size_t>(u)] = idx[static_cast<size_t>(u - 1)] + 1;
  }
}
}  // namespace

std::vector<std::vector<int>> multi_unshuffles(const std::vector<int>& blocks) {
  int n = 0;
  for (int b : blocks) {
    if (b < 0) throw std::invalid_argument("multi_unshuffles: negative block");
    n += b;
  }
  std::vector<int> remaining(static_cast<size_t>(n));
  for (int t = 0; t < n; ++t) remaining[static_cast<size_t>(t)] = t;
  std::vector<int> acc;
  std::vector<std::vector<int>> out;
  multi_unshuffle_rec(blocks, 0, remaining, acc, out);
  return out;
}

LinearMap::LinearMap(SpacePtr d, SpacePtr c, int deg)
    : dom(std::move(d)), cod(std::move(c)), degree(deg) {
  col.assign(static_cast<size_t>(dom->dim()), Vec(cod));
}

Vec LinearMap::apply(const Vec& x) const {
  Vec out(cod);
  for (const auto& [i, r] : x.c) {
    Vec t = col.at(static_cast<size_t>(i));
    t *= r;
    out += t;
  }
  return out;
}

bool LinearMap::is_zero() const {
  for (const auto& v : col)
    if (!v.is_zero()) return false;
  return true;
}

bool LinearMap::operator==(const LinearMap& o) const {
  if (col.size() != o.col.size()) return false;
  for (size_t i = 0; i < col.size(); ++i)
    if (!(col[i] == o.col[i])) return false;
  return true;
}

LinearMap& LinearMap::operator+=(const LinearMap& o) {
  for (size_t i = 0; i < col.size(); ++i) col[i] += o.col[i];
  return *this;
}

LinearMap& LinearMap::operator-=(const LinearMap& o) {
  for (size_t i = 0; i < col.size(); ++i) col[i] -= o.col[i];
  return *this;
}

LinearMap& LinearMap::operator*=(const Rat& r) {
  for (auto& v : col) v *= r;
  return *this;
}

LinearMap identity_map(const SpacePtr& s) {
  LinearMap m(s, s, 0);
  for (int i = 0; i < s->dim(); ++i) m.set(i, basis_vec(s, i));
  return m;
}

LinearMap zero_map(const SpacePtr& dom, const SpacePtr& cod, int degree) {
  return LinearMap(dom, cod, degree);
}

LinearMap compose(const LinearMap& f, const LinearMap& g) {
  LinearMap m(g.dom, f.cod, f.degree + g.degree);
  for (int i = 0; i < g.dom->dim(); ++i) m.set(i, f.apply(g.apply_basis(i)));
  return m;
}

void check_degree(const LinearMap& m) {
  for (int i = 0; i < m.dom->dim(); ++i) {
    int d;
    const Vec& v = m.col[static_cast<size_t>(i)];
    if (!v.is_homogeneous(&d))
      throw std::runtime_error("linear map image not homogeneous at basis " +
                               m.dom->name(i));
    if (!v.is_zero() && d != m.dom->degree(i) + m.degree)
      throw std::runtime_error("linear map degree mismatch at basis " + m.dom->name(i));
  }
}

}  // namespace hdb
