#include "hdb/cocone.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "hdb/brackets.hpp"

namespace hdb {

bool PolyForm::is_zero() const { return p0.empty() && p1.empty(); }

void PolyForm::add0(int k, const Vec& v) {
  if (v.is_zero()) return;
  auto it = p0.find(k);
  if (it == p0.end()) {
    p0.emplace(k, v);
  } else {
    it->second += v;
    if (it->second.is_zero()) p0.erase(it);
  }
}

void PolyForm::add1(int k, const Vec& v) {
  if (v.is_zero()) return;
  auto it = p1.find(k);
  if (it == p1.end()) {
    p1.emplace(k, v);
  } else {
    it->second += v;
    if (it->second.is_zero()) p1.erase(it);
  }
}

PolyForm& PolyForm::operator+=(const PolyForm& o) {
  for (const auto& [k, v] : o.p0) add0(k, v);
  for (const auto& [k, v] : o.p1) add1(k, v);
  return *this;
}

PolyForm& PolyForm::operator*=(const Rat& r) {
  if (r == 0) {
    p0.clear();
    p1.clear();
    return *this;
  }
  for (auto& [k, v] : p0) v *= r;
  for (auto& [k, v] : p1) v *= r;
  return *this;
}

bool PolyForm::is_homogeneous(int* degree_out) const {
  std::optional<int> deg;
  for (const auto& [k, v] : p0) {
    int d;
    if (!v.is_homogeneous(&d)) return false;
    if (deg && *deg != d) return false;
    deg = d;
  }
  for (const auto& [k, v] : p1) {
    int d;
    if (!v.is_homogeneous(&d)) return false;
    if (deg && *deg != d + 1) return false;
    deg = d + 1;
  }
  if (deg && degree_out) *degree_out = *deg;
  return true;
}

int PolyForm::max_t_degree() const {
  int m = 0;
  if (!p0.empty()) m = std::max(m, p0.rbegin()->first);
  if (!p1.empty()) m = std::max(m, p1.rbegin()->first);
  return m;
}

PolyForm pf_d(const GLA& m, const PolyForm& w) {
  PolyForm out(w.space);
  for (const auto& [k, v] : w.p0) {
    if (k >= 1) {
      Vec t = v;
      t *= Rat(k);
      out.add1(k - 1, t);
    }
    if (m.differential) out.add0(k, m.differential->apply(v));
  }
  for (const auto& [k, v] : w.p1) {
    if (m.differential) {
      Vec t = m.differential->apply(v);
      t *= Rat(-1);
      out.add1(k, t);
    }
  }
  return out;
}

PolyForm pf_bracket(const GLA& m, const PolyForm& a, const PolyForm& b) {
  PolyForm out(a.space);
  for (const auto& [j, xv] : a.p0)
    for (const auto& [k, yv] : b.p0) out.add0(j + k, m.bracket(xv, yv));
  for (const auto& [j, xv] : a.p0)
    for (const auto& [k, yv] : b.p1)
      for (const auto& [bx, cx] : xv.c) {
        // [t^j x, t^k dt y] = (-1)^{|x|} t^{j+k} dt [x, y]
        Vec x(a.space);
        x.add(bx, cx);
        Vec br = m.bracket(x, yv);
        if (m.space->degree(bx) % 2 != 0) br *= Rat(-1);
        out.add1(j + k, br);
      }
  for (const auto& [j, xv] : a.p1)
    for (const auto& [k, yv] : b.p0) out.add1(j + k, m.bracket(xv, yv));
  return out;
}

Vec pf_eval(const PolyForm& w, const Rat& s) {
  Vec out(w.space);
  for (const auto& [k, v] : w.p0) {
    Rat p = 1;
    for (int t = 0; t < k; ++t) p *= s;
    Vec tv = v;
    tv *= p;
    out += tv;
  }
  return out;
}

Vec pf_int01(const PolyForm& w) {
  Vec out(w.space);
  for (const auto& [k, v] : w.p1) {
    Vec tv = v;
    tv *= Rat(1, k + 1);
    out += tv;
  }
  return out;
}

PolyForm pf_int0t(const PolyForm& w) {
  PolyForm out(w.space);
  for (const auto& [k, v] : w.p1) {
    Vec tv = v;
    tv *= Rat(1, k + 1);
    out.add0(k + 1, tv);
  }
  return out;
}

bool fiber_product_membership(const Vec& l, const Vec& n, const PolyForm& w, const LinearMap& f,
                              const LinearMap& g) {
  return pf_eval(w, 0) == f.apply(l) && pf_eval(w, 1) == g.apply(n);
}

CheckReport validate_dgla_morphism(const GLA& dom, const GLA& cod, const LinearMap& f) {
  CheckReport rep;
  if (f.degree != 0) {
    rep.fail("morphism_degree");
    return rep;
  }
  LinearMap zero_dom = dom.differential ? *dom.differential : LinearMap(dom.space, dom.space, 1);
  LinearMap zero_cod = cod.differential ? *cod.differential : LinearMap(cod.space, cod.space, 1);
  if (!(compose(f, zero_dom) == compose(zero_cod, f))) rep.fail("chain_map");
  int nd = dom.space->dim();
  for (int i = 0; i < nd; ++i)
    for (int j = i; j < nd; ++j) {
      Vec lhs = f.apply(dom.bracket_basis(i, j));
      Vec rhs = cod.bracket(f.apply_basis(i), f.apply_basis(j));
      if (!(lhs == rhs)) rep.fail("bracket_map", 2, dom.space->name(i) + "," + dom.space->name(j));
    }
  if (rep.ok) rep.pass("dgla_morphism");
  return rep;
}

ConeSpace make_cone_space(const SpacePtr& n, const SpacePtr& l, const SpacePtr& m) {
  ConeSpace c;
  c.n_space = n;
  c.l_space = l;
  c.m_space = m;
  c.n_dim = n->dim();
  c.l_dim = l->dim();
  std::vector<std::pair<std::string, int>> basis;
  for (int i = 0; i < n->dim(); ++i) basis.emplace_back("sN:" + n->name(i), n->degree(i) - 1);
  for (int i = 0; i < l->dim(); ++i) basis.emplace_back("sL:" + l->name(i), l->degree(i) - 1);
  for (int i = 0; i < m->dim(); ++i) basis.emplace_back("M:" + m->name(i), m->degree(i));
  c.space = make_space(basis);
  return c;
}

namespace {

Vec slot_vec(const ConeSpace& c, int offset_kind, const Vec& v) {
  Vec out(c.space);
  for (const auto& [i, r] : v.c) {
    int idx = offset_kind == 0 ? c.sn(i) : (offset_kind == 1 ? c.sl(i) : c.m(i));
    out.add(idx, r);
  }
  return out;
}

}  // namespace

Cocylinder cocylinder_structure(const GLA& n, const GLA& l, const GLA& m, const LinearMap& g,
                                const LinearMap& f, int cap) {
  {
    CheckReport gm = validate_dgla_morphism(n, m, g);
    CheckReport fm = validate_dgla_morphism(l, m, f);
    if (!gm.ok || !fm.ok)
      throw std::invalid_argument("cocylinder_structure: inputs are not dgla morphisms");
  }
  Cocylinder out{make_cone_space(n.space, l.space, m.space), {}};
  const ConeSpace& c = out.cone;
  out.r = make_coderivation(c.space, 1, Flavor::reduced, cap, false);

  // r_1
  for (int i = 0; i < n.space->dim(); ++i) {
    Vec val(c.space);
    if (n.differential) {
      Vec t = n.differential->apply_basis(i);
      t *= Rat(-1);
      val += slot_vec(c, 0, t);
    }
    val += slot_vec(c, 2, g.apply_basis(i));
    if (!val.is_zero()) out.r.q[1].set({c.sn(i)}, val);
  }
  for (int i = 0; i < l.space->dim(); ++i) {
    Vec val(c.space);
    if (l.differential) {
      Vec t = l.differential->apply_basis(i);
      t *= Rat(-1);
      val += slot_vec(c, 1, t);
    }
    Vec t = f.apply_basis(i);
    t *= Rat(-1);
    val += slot_vec(c, 2, t);
    if (!val.is_zero()) out.r.q[1].set({c.sl(i)}, val);
  }
  if (m.differential)
    for (int i = 0; i < m.space->dim(); ++i) {
      Vec dm = m.differential->apply_basis(i);
      if (!dm.is_zero()) out.r.q[1].set({c.m(i)}, slot_vec(c, 2, dm));
    }

  // r_2 on suspended pairs
  if (cap >= 2) {
    for (int i = 0; i < n.space->dim(); ++i)
      for (int j = i; j < n.space->dim(); ++j) {
        if (i == j && c.space->degree(c.sn(i)) % 2 != 0) continue;
        Vec br = n.bracket_basis(i, j);
        if (br.is_zero()) continue;
        br *= Rat(n.space->degree(i) % 2 != 0 ? -1 : 1);
        out.r.q[2].set({c.sn(i), c.sn(j)}, slot_vec(c, 0, br));
      }
    for (int i = 0; i < l.space->dim(); ++i)
      for (int j = i; j < l.space->dim(); ++j) {
        if (i == j && c.space->degree(c.sl(i)) % 2 != 0) continue;
        Vec br = l.bracket_basis(i, j);
        if (br.is_zero()) continue;
        br *= Rat(l.space->degree(i) % 2 != 0 ? -1 : 1);
        out.r.q[2].set({c.sl(i), c.sl(j)}, slot_vec(c, 1, br));
      }
  }

  // Bernoulli families
  for (int i = 1; i + 1 <= cap; ++i) {
    Rat coeff_n = bernoulli_second(static_cast<unsigned>(i)) /
                  Rat(factorial(static_cast<unsigned>(i)));
    Rat coeff_l = -bernoulli_first(static_cast<unsigned>(i)) /
                  Rat(factorial(static_cast<unsigned>(i)));
    for (const Word& mw : all_words(m.space, i)) {
      std::vector<int> degs(mw.size());
      for (size_t t = 0; t < mw.size(); ++t) degs[t] = m.space->degree(mw[t]);
      auto family = [&](const Vec& head) {
        Vec acc(m.space);
        std::vector<int> perm(mw.size());
        std::iota(perm.begin(), perm.end(), 0);
        do {
          int eps = koszul_sign(perm, degs);
          Vec val = head;
          for (size_t t = 0; t < mw.size(); ++t)
            val = m.bracket(val, basis_vec(m.space, mw[static_cast<size_t>(perm[t])]));
          val *= Rat(eps);
          acc += val;
        } while (std::next_permutation(perm.begin(), perm.end()));
        return acc;
      };
      Word tail(mw.size());
      for (size_t t = 0; t < mw.size(); ++t) tail[t] = c.m(mw[t]);
      if (coeff_n != 0)
        for (int x = 0; x < n.space->dim(); ++x) {
          Word w;
          w.push_back(c.sn(x));
          w.insert(w.end(), tail.begin(), tail.end());
          if (!normalize_word(w, c.space)) continue;
          Vec acc = family(g.apply_basis(x));
          acc *= coeff_n;
          if (!acc.is_zero()) out.r.q[static_cast<size_t>(i + 1)].set(w, slot_vec(c, 2, acc));
        }
      if (coeff_l != 0)
        for (int y = 0; y < l.space->dim(); ++y) {
          Word w;
          w.push_back(c.sl(y));
          w.insert(w.end(), tail.begin(), tail.end());
          if (!normalize_word(w, c.space)) continue;
          Vec acc = family(f.apply_basis(y));
          acc *= coeff_l;
          if (!acc.is_zero()) out.r.q[static_cast<size_t>(i + 1)].set(w, slot_vec(c, 2, acc));
        }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// element of the desuspended fiber product, kept as an exact triple
struct ConeElem {
  Vec n, l;
  PolyForm w;
  int sdeg = 0;  // shifted degree

  bool is_zero() const { return n.is_zero() && l.is_zero() && w.is_zero(); }
};

ConeElem elem_zero(const GLA& ng, const GLA& lg, const GLA& mg, int sdeg) {
  ConeElem e{Vec(ng.space), Vec(lg.space), PolyForm(mg.space), sdeg};
  return e;
}

ConeElem elem_add(ConeElem a, const ConeElem& b) {
  a.n += b.n;
  a.l += b.l;
  a.w += b.w;
  return a;
}

ConeElem elem_scale(const Rat& r, ConeElem a) {
  a.n *= r;
  a.l *= r;
  a.w *= r;
  return a;
}

}  // namespace

Coderivation polyform_transfer(const GLA& n, const GLA& l, const GLA& m, const LinearMap& g,
                               const LinearMap& f, int cap) {
  Cocylinder target = cocylinder_structure(n, l, m, g, f, 1);  // for the cone space only
  const ConeSpace& c = target.cone;

  auto q1 = [&](const ConeElem& e) {
    ConeElem out = elem_zero(n, l, m, e.sdeg + 1);
    if (n.differential) out.n = n.differential->apply(e.n);
    if (l.differential) out.l = l.differential->apply(e.l);
    out.w = pf_d(m, e.w);
    return elem_scale(Rat(-1), std::move(out));
  };
  auto q2 = [&](const ConeElem& a, const ConeElem& b) {
    ConeElem out = elem_zero(n, l, m, a.sdeg + b.sdeg + 1);
    out.n = n.bracket(a.n, b.n);
    out.l = l.bracket(a.l, b.l);
    out.w = pf_bracket(m, a.w, b.w);
    int sign = (a.sdeg + 1) % 2 != 0 ? -1 : 1;
    return elem_scale(Rat(sign), std::move(out));
  };
  auto khtp = [&](const ConeElem& e) {
    ConeElem out = elem_zero(n, l, m, e.sdeg - 1);
    out.w = pf_int0t(e.w);
    Vec i01 = pf_int01(e.w);
    i01 *= Rat(-1);
    out.w.add0(1, i01);
    return out;
  };
  auto proj = [&](const ConeElem& e) {
    Vec out(c.space);
    out += slot_vec(c, 0, e.n);
    out += slot_vec(c, 1, e.l);
    out += slot_vec(c, 2, pf_int01(e.w));
    return out;
  };
  auto f1 = [&](int idx) {
    if (idx < c.n_dim) {
      ConeElem e = elem_zero(n, l, m, c.space->degree(idx));
      e.n = basis_vec(n.space, idx);
      Vec gx = g.apply_basis(idx);
      e.w.add0(0, gx);
      gx *= Rat(-1);
      e.w.add0(1, gx);
      return e;
    }
    if (idx < c.n_dim + c.l_dim) {
      int y = idx - c.n_dim;
      ConeElem e = elem_zero(n, l, m, c.space->degree(idx));
      e.l = basis_vec(l.space, y);
      e.w.add0(1, f.apply_basis(y));
      return e;
    }
    int z = idx - c.n_dim - c.l_dim;
    ConeElem e = elem_zero(n, l, m, c.space->degree(idx));
    e.w.add1(0, basis_vec(m.space, z));
    return e;
  };

  // fixed-point recursion on the cone words
  std::vector<std::map<Word, ConeElem>> fs(static_cast<size_t>(cap) + 1);
  for (int i = 0; i < c.space->dim(); ++i) fs[1].emplace(Word{i}, f1(i));
  auto f_at = [&](int j, const Word& w) -> std::optional<ConeElem> {
    auto norm = normalize_word(w, c.space);
    if (!norm) return std::nullopt;
    auto it = fs[static_cast<size_t>(j)].find(norm->first);
    if (it == fs[static_cast<size_t>(j)].end()) return std::nullopt;
    return elem_scale(Rat(norm->second), it->second);
  };

  Coderivation out = make_coderivation(c.space, 1, Flavor::reduced, cap, false);
  // arity one re-derived through the retraction (equals the cone r_1)
  for (int i = 0; i < c.space->dim(); ++i) {
    Vec val = proj(q1(f1(i)));
    if (!val.is_zero()) out.q[1].set({i}, val);
  }
  for (int i = 2; i <= cap; ++i) {
    for (const Word& w : all_words(c.space, i)) {
      std::vector<int> degs(w.size());
      for (size_t t = 0; t < w.size(); ++t) degs[t] = c.space->degree(w[t]);
      ConeElem inner = elem_zero(n, l, m, word_degree(w, c.space) + 1);
      // only q_2 survives on a decalage: inner = q_2(F^2_i(w)) with
      // F^2_i = (1/2) sum over compositions and unshuffles
      for (int j1 = 1; j1 <= i - 1; ++j1) {
        int j2 = i - j1;
        for (const auto& sigma : multi_unshuffles({j1, j2})) {
          int eps = koszul_sign(sigma, degs);
          Word wa(static_cast<size_t>(j1)), wb(static_cast<size_t>(j2));
          for (int t = 0; t < j1; ++t) wa[static_cast<size_t>(t)] = w[static_cast<size_t>(sigma[static_cast<size_t>(t)])];
          for (int t = 0; t < j2; ++t)
            wb[static_cast<size_t>(t)] = w[static_cast<size_t>(sigma[static_cast<size_t>(j1 + t)])];
          auto ea = f_at(j1, wa);
          if (!ea) continue;
          auto eb = f_at(j2, wb);
          if (!eb) continue;
          ConeElem term = q2(*ea, *eb);
          inner = elem_add(std::move(inner), elem_scale(Rat(eps, 2), std::move(term)));
        }
      }
      ConeElem fi = khtp(inner);
      if (!fi.is_zero()) fs[static_cast<size_t>(i)].emplace(w, std::move(fi));
      Vec ri = proj(inner);
      if (!ri.is_zero()) out.q[static_cast<size_t>(i)].set(w, std::move(ri));
    }
  }
  return out;
}

PolyFormRetraction cocylinder_retraction(const GLA& n, const GLA& l, const GLA& m,
                                         const LinearMap& g, const LinearMap& f, int tmax) {
  PolyFormRetraction out;
  out.cone = make_cone_space(n.space, l.space, m.space);
  const ConeSpace& c = out.cone;

  // basis of the bounded fiber product (desuspended)
  struct BigBasis {
    int kind;  // 0 kappa, 1 lambda, 2 bulk (t^a - t), 3 dt form
    int idx;   // underlying basis index
    int k;     // t exponent for bulk / dt
  };
  std::vector<BigBasis> catalog;
  std::vector<std::pair<std::string, int>> names;
  for (int i = 0; i < n.space->dim(); ++i) {
    catalog.push_back({0, i, 0});
    names.emplace_back("k:" + n.space->name(i), n.space->degree(i) - 1);
  }
  for (int i = 0; i < l.space->dim(); ++i) {
    catalog.push_back({1, i, 0});
    names.emplace_back("h:" + l.space->name(i), l.space->degree(i) - 1);
  }
  for (int z = 0; z < m.space->dim(); ++z)
    for (int a = 2; a <= tmax; ++a) {
      catalog.push_back({2, z, a});
      names.emplace_back("b:" + m.space->name(z) + ":" + std::to_string(a),
                         m.space->degree(z) - 1);
    }
  for (int z = 0; z < m.space->dim(); ++z)
    for (int k = 0; k + 1 <= tmax; ++k) {
      catalog.push_back({3, z, k});
      names.emplace_back("c:" + m.space->name(z) + ":" + std::to_string(k), m.space->degree(z));
    }
  out.big = make_space(names);

  auto realize = [&](int b) {
    const BigBasis& bb = catalog[static_cast<size_t>(b)];
    ConeElem e = elem_zero(n, l, m, out.big->degree(b));
    if (bb.kind == 0) {
      e.n = basis_vec(n.space, bb.idx);
      Vec gx = g.apply_basis(bb.idx);
      e.w.add0(0, gx);
      gx *= Rat(-1);
      e.w.add0(1, gx);
    } else if (bb.kind == 1) {
      e.l = basis_vec(l.space, bb.idx);
      e.w.add0(1, f.apply_basis(bb.idx));
    } else if (bb.kind == 2) {
      Vec z = basis_vec(m.space, bb.idx);
      e.w.add0(bb.k, z);
      z *= Rat(-1);
      e.w.add0(1, z);
    } else {
      e.w.add1(bb.k, basis_vec(m.space, bb.idx));
    }
    return e;
  };
  auto decompose = [&](const ConeElem& e) {
    // (n, l, w) with e_0(w) = g(n), e_1(w) = f(l); remainder is bulk + dt
    Vec out_v(out.big);
    PolyForm rest = e.w;
    for (const auto& [i, r] : e.n.c) {
      out_v.add(i, r);
      ConeElem kap = realize(i);
      kap.w *= r;
      rest.add0(0, [&] {
        Vec t(m.space);
        return t;
      }());
      PolyForm neg = kap.w;
      neg *= Rat(-1);
      rest += neg;
    }
    int l_off = n.space->dim();
    for (const auto& [i, r] : e.l.c) {
      out_v.add(l_off + i, r);
      ConeElem lam = realize(l_off + i);
      PolyForm neg = lam.w;
      neg *= Rat(-1);
      neg *= r;
      rest += neg;
    }
    // rest must now satisfy e_0 = e_1 = 0 on the dt-free part
    if (!pf_eval(rest, 0).is_zero() || !pf_eval(rest, 1).is_zero())
      throw std::runtime_error("polyform decompose: boundary mismatch");
    if (rest.max_t_degree() > tmax)
      throw std::runtime_error("polyform decompose: t-degree bound exceeded");
    auto find_name = [&](const std::string& nm) { return *out.big->find(nm); };
    for (const auto& [k, v] : rest.p0) {
      if (k == 1) continue;  // consumed by the t^a - t basis below
      if (k == 0) {
        if (!v.is_zero()) throw std::runtime_error("polyform decompose: constant remainder");
        continue;
      }
      for (const auto& [z, r] : v.c)
        out_v.add(find_name("b:" + m.space->name(z) + ":" + std::to_string(k)), r);
    }
    for (const auto& [k, v] : rest.p1)
      for (const auto& [z, r] : v.c)
        out_v.add(find_name("c:" + m.space->name(z) + ":" + std::to_string(k)), r);
    return out_v;
  };

  RetractionData data;
  data.big = out.big;
  data.small = c.space;
  data.d_big = LinearMap(out.big, out.big, 1);
  data.pi = LinearMap(out.big, c.space, 0);
  data.f1 = LinearMap(c.space, out.big, 0);
  data.k = LinearMap(out.big, out.big, -1);
  data.d_small = LinearMap(c.space, c.space, 1);

  for (int b = 0; b < out.big->dim(); ++b) {
    ConeElem e = realize(b);
    // q_1 = -s d
    ConeElem de = elem_zero(n, l, m, e.sdeg + 1);
    if (n.differential) de.n = n.differential->apply(e.n);
    if (l.differential) de.l = l.differential->apply(e.l);
    de.w = pf_d(m, e.w);
    de = elem_scale(Rat(-1), std::move(de));
    data.d_big.set(b, decompose(de));
    // pi
    Vec pv(c.space);
    pv += slot_vec(c, 0, e.n);
    pv += slot_vec(c, 1, e.l);
    pv += slot_vec(c, 2, pf_int01(e.w));
    data.pi.set(b, pv);
    // K
    ConeElem ke = elem_zero(n, l, m, e.sdeg - 1);
    ke.w = pf_int0t(e.w);
    Vec i01 = pf_int01(e.w);
    i01 *= Rat(-1);
    ke.w.add0(1, i01);
    data.k.set(b, decompose(ke));
  }
  for (int i = 0; i < c.space->dim(); ++i) {
    if (i < c.n_dim) {
      data.f1.set(i, basis_vec(out.big, i));
    } else if (i < c.n_dim + c.l_dim) {
      data.f1.set(i, basis_vec(out.big, i));
    } else {
      int z = i - c.n_dim - c.l_dim;
      data.f1.set(i, basis_vec(out.big, *out.big->find("c:" + m.space->name(z) + ":0")));
    }
  }
  // d_small: the cone differential r_1
  Cocylinder cyl = cocylinder_structure(n, l, m, g, f, 1);
  data.d_small = linear_part(cyl.r);
  out.data = std::move(data);
  return out;
}

// ---------------------------------------------------------------------------

PsiResult psi_morphism(const GLA& g, const LinearMap& d, int cap) {
  if (!g.has_splitting()) throw std::invalid_argument("psi_morphism: splitting required");
  CheckReport dr = validate_derivation(g, d, true);
  if (!dr.ok) throw std::invalid_argument("psi_morphism: D must be an L-preserving derivation");

  // cocylinder of the inclusion of the L part, with trivial differentials
  Subspace lsub = make_part_space(g, Part::L);
  GLA l_gla = part_gla(g, Part::L, lsub);
  l_gla.differential = std::nullopt;
  GLA m_gla = g;
  m_gla.differential = std::nullopt;
  m_gla.splitting = std::nullopt;
  LinearMap incl(lsub.space, g.space, 0);
  for (int k = 0; k < lsub.space->dim(); ++k)
    incl.set(k, basis_vec(g.space, lsub.ambient_index[static_cast<size_t>(k)]));

  PsiResult out{cocylinder_structure(m_gla, l_gla, m_gla, identity_map(g.space), incl, cap),
                {},
                {}};
  const ConeSpace& c = out.cyl.cone;
  out.psi = make_coderivation(c.space, d.degree, Flavor::reduced, 1, true);
  int sign = d.degree % 2 != 0 ? -1 : 1;
  for (int i = 0; i < g.space->dim(); ++i) {
    Vec dv = d.apply_basis(i);
    Vec sv = slot_vec(c, 0, dv);
    sv *= Rat(sign);
    if (!sv.is_zero()) out.psi.q[1].set({c.sn(i)}, sv);
    Vec mv = slot_vec(c, 2, dv);
    if (!mv.is_zero()) out.psi.q[1].set({c.m(i)}, mv);
  }
  for (int k = 0; k < lsub.space->dim(); ++k) {
    Vec dv = d.apply_basis(lsub.ambient_index[static_cast<size_t>(k)]);
    Vec sv = slot_vec(c, 1, restrict_to_part(lsub, dv));
    sv *= Rat(sign);
    if (!sv.is_zero()) out.psi.q[1].set({c.sl(k)}, sv);
  }
  Coderivation br = nr_bracket(out.cyl.r, out.psi, cap);
  for (int i = 1; i <= std::min(cap, br.max_arity); ++i)
    for (const auto& [w, v] : br.q[static_cast<size_t>(i)].entries)
      out.commutes.fail("psi_commutes", i, word_name(w, c.space), vec_str(v), "0");
  if (out.commutes.ok) out.commutes.pass("psi_commutes");
  return out;
}

// ---------------------------------------------------------------------------

FiberModel model_fiber_product(const GLA& g, const LinearMap& d,
                               const std::vector<int>& n_indices, int cap) {
  if (!g.has_splitting()) throw std::invalid_argument("model_fiber_product: splitting required");
  CheckReport dr = validate_derivation(g, d, true);
  if (!dr.ok || d.degree != 1 || !derivation_bracket(d, d).is_zero())
    throw std::invalid_argument("model_fiber_product: D must be square-zero degree-one");

  FiberModel out;
  out.n_part = subspace_from_indices(g.space, n_indices);
  out.a_part = make_part_space(g, Part::A);
  auto projs = projections(g);
  const LinearMap& P = projs.first;
  const LinearMap& Pperp = projs.second;
  Subspace lsub = make_part_space(g, Part::L);

  // N and L as sub dglas with the differential d
  GLA g_with_d = g;
  g_with_d.differential = d;
  GLA n_gla = restrict_gla(g_with_d, out.n_part);  // throws if not closed
  GLA l_gla = restrict_gla(g_with_d, lsub);
  GLA m_gla = g_with_d;
  m_gla.splitting = std::nullopt;
  LinearMap incl_n(out.n_part.space, g.space, 0);
  for (int k = 0; k < out.n_part.space->dim(); ++k)
    incl_n.set(k, basis_vec(g.space, out.n_part.ambient_index[static_cast<size_t>(k)]));
  LinearMap incl_l(lsub.space, g.space, 0);
  for (int k = 0; k < lsub.space->dim(); ++k)
    incl_l.set(k, basis_vec(g.space, lsub.ambient_index[static_cast<size_t>(k)]));
  out.target = cocylinder_structure(n_gla, l_gla, m_gla, incl_n, incl_l, cap);

  // model space [sN | A]
  std::vector<std::pair<std::string, int>> names;
  for (int k = 0; k < out.n_part.space->dim(); ++k)
    names.emplace_back("sN:" + out.n_part.space->name(k), out.n_part.space->degree(k) - 1);
  for (int k = 0; k < out.a_part.space->dim(); ++k)
    names.emplace_back(out.a_part.space->name(k), out.a_part.space->degree(k));
  out.model_space = make_space(names);
  int a_off = out.n_part.space->dim();
  auto sn_vec = [&](const Vec& ambient) {
    Vec v(out.model_space);
    for (const auto& [i, r] : restrict_to_part(out.n_part, ambient).c) v.add(i, r);
    return v;
  };
  auto a_vec = [&](const Vec& ambient) {
    Vec v(out.model_space);
    for (const auto& [i, r] : restrict_to_part(out.a_part, ambient).c) v.add(a_off + i, r);
    return v;
  };

  out.r_d = make_coderivation(out.model_space, 1, Flavor::reduced, cap, false);
  // r_1(s n, a) = (-s Dn, P(Da + n))
  for (int k = 0; k < out.n_part.space->dim(); ++k) {
    int amb = out.n_part.ambient_index[static_cast<size_t>(k)];
    Vec dn = d.apply_basis(amb);
    dn *= Rat(-1);
    Vec val = sn_vec(dn);
    val += a_vec(P.apply(basis_vec(g.space, amb)));
    if (!val.is_zero()) out.r_d.q[1].set({k}, val);
  }
  for (int k = 0; k < out.a_part.space->dim(); ++k) {
    int amb = out.a_part.ambient_index[static_cast<size_t>(k)];
    Vec val = a_vec(P.apply(d.apply_basis(amb)));
    if (!val.is_zero()) out.r_d.q[1].set({a_off + k}, val);
  }
  // r_2 on sN pairs
  if (cap >= 2)
    for (int x = 0; x < out.n_part.space->dim(); ++x)
      for (int y = x; y < out.n_part.space->dim(); ++y) {
        if (x == y && out.model_space->degree(x) % 2 != 0) continue;
        Vec br = g.bracket_basis(out.n_part.ambient_index[static_cast<size_t>(x)],
                                 out.n_part.ambient_index[static_cast<size_t>(y)]);
        if (br.is_zero()) continue;
        br *= Rat(out.n_part.space->degree(x) % 2 != 0 ? -1 : 1);
        out.r_d.q[2].set({x, y}, sn_vec(br));
      }
  // Phi families
  std::vector<Coderivation> phi_n;
  for (int x = 0; x < out.n_part.space->dim(); ++x)
    phi_n.push_back(phi_element(
        g, basis_vec(g.space, out.n_part.ambient_index[static_cast<size_t>(x)]), cap - 1));
  Coderivation phi_d = phi_derivation(g, d, cap);
  for (int i = 1; i + 1 <= cap; ++i) {
    for (const Word& aw : all_words(out.a_part.space, i)) {
      Word tail(aw.size());
      for (size_t t = 0; t < aw.size(); ++t) tail[t] = a_off + aw[t];
      for (int x = 0; x < out.n_part.space->dim(); ++x) {
        Vec val = phi_n[static_cast<size_t>(x)].q[static_cast<size_t>(i)].apply_tuple(aw);
        if (val.is_zero()) continue;
        Word w;
        w.push_back(x);
        w.insert(w.end(), tail.begin(), tail.end());
        if (!normalize_word(w, out.model_space)) continue;
        Vec mv(out.model_space);
        for (const auto& [b, r] : val.c) mv.add(a_off + b, r);
        out.r_d.q[static_cast<size_t>(i + 1)].add(w, mv);
      }
    }
  }
  for (int i = 2; i <= cap; ++i)
    for (const auto& [aw, val] : phi_d.q[static_cast<size_t>(i)].entries) {
      Word w(aw.size());
      for (size_t t = 0; t < aw.size(); ++t) w[t] = a_off + aw[t];
      Vec mv(out.model_space);
      for (const auto& [b, r] : val.c) mv.add(a_off + b, r);
      out.r_d.q[static_cast<size_t>(i)].add(w, mv);
    }

  // F_D into the cone
  const ConeSpace& c = out.target.cone;
  out.f_d = make_morphism(out.model_space, c.space, cap, false);
  for (int k = 0; k < out.n_part.space->dim(); ++k) {
    int amb = out.n_part.ambient_index[static_cast<size_t>(k)];
    Vec val(c.space);
    val.add(c.sn(k), 1);
    val += slot_vec(c, 1, restrict_to_part(lsub, Pperp.apply(basis_vec(g.space, amb))));
    out.f_d.f[1].set({k}, val);
  }
  for (int k = 0; k < out.a_part.space->dim(); ++k) {
    int amb = out.a_part.ambient_index[static_cast<size_t>(k)];
    Vec val(c.space);
    val += slot_vec(c, 1, restrict_to_part(lsub, Pperp.apply(d.apply_basis(amb))));
    val.add(c.m(amb), 1);
    out.f_d.f[1].set({a_off + k}, val);
  }
  // nested-bracket families into the sL slot (the pure A family reaches
  // arity cap; the sN-headed family stops one lower)
  for (int i = 1; i <= cap; ++i) {
    Rat inv_fact = Rat(1) / Rat(factorial(static_cast<unsigned>(i)));
    for (const Word& aw : all_words(out.a_part.space, i)) {
      std::vector<int> ambient(aw.size()), degs(aw.size());
      for (size_t t = 0; t < aw.size(); ++t) {
        ambient[t] = out.a_part.ambient_index[static_cast<size_t>(aw[t])];
        degs[t] = g.space->degree(ambient[t]);
      }
      auto family = [&](const Vec& head, bool head_is_derivation) {
        Vec acc(g.space);
        std::vector<int> perm(aw.size());
        std::iota(perm.begin(), perm.end(), 0);
        do {
          int eps = koszul_sign(perm, degs);
          Vec val;
          size_t start;
          if (head_is_derivation) {
            val = d.apply_basis(ambient[static_cast<size_t>(perm[0])]);
            start = 1;
          } else {
            val = head;
            start = 0;
          }
          for (size_t t = start; t < aw.size(); ++t)
            val = g.bracket(val, basis_vec(g.space, ambient[static_cast<size_t>(perm[t])]));
          val *= Rat(eps);
          acc += val;
        } while (std::next_permutation(perm.begin(), perm.end()));
        acc = Pperp.apply(acc);
        acc *= inv_fact;
        return acc;
      };
      // f_{i+1}(s n . a..) with head n
      Word tail(aw.size());
      for (size_t t = 0; t < aw.size(); ++t) tail[t] = a_off + aw[t];
      for (int x = 0; i + 1 <= cap && x < out.n_part.space->dim(); ++x) {
        Vec acc = family(
            basis_vec(g.space, out.n_part.ambient_index[static_cast<size_t>(x)]), false);
        if (acc.is_zero()) continue;
        Word w;
        w.push_back(x);
        w.insert(w.end(), tail.begin(), tail.end());
        if (!normalize_word(w, out.model_space)) continue;
        out.f_d.f[static_cast<size_t>(i + 1)].add(w, slot_vec(c, 1, restrict_to_part(lsub, acc)));
      }
      // f_i(a..) with head D a_{sigma(1)}, for i >= 2
      if (i >= 2) {
        Vec acc = family(Vec(g.space), true);
        if (!acc.is_zero())
          out.f_d.f[static_cast<size_t>(i)].add(tail,
                                                slot_vec(c, 1, restrict_to_part(lsub, acc)));
      }
    }
  }

  // checks
  out.report.merge(check_linfty(out.r_d, std::min(cap, 4)));
  out.report.merge(check_morphism_equation(out.f_d, out.r_d, out.target.r, cap));
  // retraction of the proof: pi(s n, s y, z) = (s n, P z), K(s n, s y, z) = (0, s Pperp z, 0)
  {
    RetractionData data;
    data.big = c.space;
    data.small = out.model_space;
    data.d_big = linear_part(out.target.r);
    data.d_small = linear_part(out.r_d);
    data.pi = LinearMap(c.space, out.model_space, 0);
    for (int k = 0; k < out.n_part.space->dim(); ++k)
      data.pi.set(c.sn(k), basis_vec(out.model_space, k));
    for (int z = 0; z < g.space->dim(); ++z) data.pi.set(c.m(z), a_vec(P.apply_basis(z)));
    data.f1 = LinearMap(out.model_space, c.space, 0);
    for (int k = 0; k < out.model_space->dim(); ++k)
      data.f1.set(k, out.f_d.f[1].apply_tuple({k}));
    data.k = LinearMap(c.space, c.space, -1);
    for (int z = 0; z < g.space->dim(); ++z)
      data.k.set(c.m(z), slot_vec(c, 1, restrict_to_part(lsub, Pperp.apply_basis(z))));
    out.report.merge(validate_retraction(data));
  }
  // twisting route: twist the derivation-extended closed-form structure by
  // (s D, 0, 0) and restrict to [sN | A]
  {
    GLA g0 = g;
    g0.differential = std::nullopt;
    HdbTransferSetup setup = hdb_transfer_setup(g0, {d}, cap + 2);
    Coderivation closed = hdb_closed_form(setup, g0, cap + 2);
    Vec x(setup.small);
    x.add(setup.small_der, 1);
    Coderivation twisted = twist_structure(closed, x, 2);
    // restriction: words over the sM:(N indices) and A slots
    std::vector<int> keep;
    for (int k = 0; k < out.n_part.space->dim(); ++k)
      keep.push_back(setup.small_sm + out.n_part.ambient_index[static_cast<size_t>(k)]);
    for (int k = 0; k < out.a_part.space->dim(); ++k) keep.push_back(setup.small_a + k);
    Subspace sub = subspace_from_indices(setup.small, keep);
    CheckReport twist_rep;
    for (int i = 1; i <= std::min(cap, twisted.max_arity); ++i) {
      for (const Word& mw : all_words(out.model_space, i)) {
        Word tw(mw.size());
        for (size_t t = 0; t < mw.size(); ++t)
          tw[t] = keep[static_cast<size_t>(mw[t])];
        Vec val = twisted.q[static_cast<size_t>(i)].apply_tuple(tw);
        Vec expect = out.r_d.q[static_cast<size_t>(i)].apply_tuple(mw);
        // translate the twisted value into model coordinates
        Vec got(out.model_space);
        bool outside = false;
        for (const auto& [b, r] : val.c) {
          int pos = -1;
          for (size_t t = 0; t < keep.size(); ++t)
            if (keep[t] == b) pos = static_cast<int>(t);
          if (pos < 0) {
            outside = true;
            break;
          }
          got.add(pos, r);
        }
        if (outside) {
          twist_rep.fail("twist_restriction_closed", i, word_name(mw, out.model_space));
        } else if (!(got == expect)) {
          twist_rep.fail("twisting_route", i, word_name(mw, out.model_space), vec_str(got),
                         vec_str(expect));
        }
      }
    }
    if (twist_rep.ok) twist_rep.pass("twisting_route");
    out.report.merge(twist_rep);
    (void)sub;
  }
  return out;
}

ReplacementDiagram homotopy_replacement_diagram(const GLA& g, const LinearMap& d, int cap) {
  ReplacementDiagram out;
  std::vector<int> all(static_cast<size_t>(g.space->dim()));
  std::iota(all.begin(), all.end(), 0);
  out.model = model_fiber_product(g, d, all, cap);
  const ConeSpace& c = out.model.target.cone;
  Subspace lsub = make_part_space(g, Part::L);
  GLA g_with_d = g;
  g_with_d.differential = d;
  GLA l_gla = restrict_gla(g_with_d, lsub);
  Decalage dl = decalage(l_gla);

  // strict section s^-1 L -> model: y -> (s y, 0)
  LinearMap sec(dl.shifted, out.model.model_space, 0);
  for (int k = 0; k < lsub.space->dim(); ++k) {
    // the sN slot of the model is all of s^-1 M here
    int amb = lsub.ambient_index[static_cast<size_t>(k)];
    sec.set(k, basis_vec(out.model.model_space, amb));
  }
  out.section = strict_morphism(sec);
  out.report.merge(check_morphism_equation(out.section, dl.q, out.model.r_d, cap));

  // down: p_{sL} o F_D
  LinearMap psl(c.space, dl.shifted, 0);
  for (int k = 0; k < lsub.space->dim(); ++k) psl.set(c.sl(k), basis_vec(dl.shifted, k));
  CoalgMorphism psl_m = strict_morphism(psl);
  out.report.merge(check_morphism_equation(psl_m, out.model.target.r, dl.q, cap));
  out.down = compose_morphisms(psl_m, out.model.f_d, cap);
  out.report.merge(check_morphism_equation(out.down, out.model.r_d, dl.q, cap));

  // down o section = identity
  CoalgMorphism comp = compose_morphisms(out.down, out.section, cap);
  out.report.merge(compare_morphisms(comp, identity_morphism(dl.shifted), cap, "down_section_id"));

  // strict inclusion of (A, Phi(D))
  Coderivation phi_d = phi_derivation(g, d, cap);
  int a_off = g.space->dim();  // N = M here
  LinearMap inc(out.model.a_part.space, out.model.model_space, 0);
  for (int k = 0; k < out.model.a_part.space->dim(); ++k)
    inc.set(k, basis_vec(out.model.model_space, a_off + k));
  out.include_a = strict_morphism(inc);
  out.report.merge(check_morphism_equation(out.include_a, phi_d, out.model.r_d, cap));

  // left triangle: down o include_a = the projection morphism
  CoalgMorphism left = compose_morphisms(out.down, out.include_a, cap);
  ProjectionMorphism pm = projection_morphism(g, d, cap);
  out.report.merge(compare_morphisms(left, pm.f, cap, "left_triangle"));

  // vertical pair: linear parts give inverse homology isomorphisms
  LinearMap down1(out.model.model_space, dl.shifted, 0);
  for (int k = 0; k < out.model.model_space->dim(); ++k)
    down1.set(k, out.down.f[1].apply_tuple({k}));
  InducedMap im = induced_homology_map(down1, linear_part(out.model.r_d), linear_part(dl.q));
  if (im.injective && im.surjective)
    out.report.pass("vertical_homology_iso");
  else
    out.report.fail("vertical_homology_iso");
  return out;
}

}  // namespace hdb
