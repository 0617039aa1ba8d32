#include "hdb/coalgebra.hpp"

#include <algorithm>
#include <limits>

#include "hdb/linalg.hpp"
#include <stdexcept>

namespace hdb {

std::optional<std::pair<Word, int>> normalize_word(const Word& indices, const SpacePtr& space) {
  Word w = indices;
  int sign = 1;
  // insertion sort, tracking odd-odd transpositions
  for (size_t p = 1; p < w.size(); ++p) {
    int cur = w[p];
    int cur_odd = space->degree(cur) % 2 != 0;
    size_t t = p;
    while (t > 0 && w[t - 1] > cur) {
      w[t] = w[t - 1];
      if (cur_odd && space->degree(w[t - 1]) % 2 != 0) sign = -sign;
      --t;
    }
    w[t] = cur;
  }
  for (size_t p = 1; p < w.size(); ++p)
    if (w[p] == w[p - 1] && space->degree(w[p]) % 2 != 0) return std::nullopt;
  return std::make_pair(std::move(w), sign);
}

int word_degree(const Word& w, const SpacePtr& space) {
  int d = 0;
  for (int i : w) d += space->degree(i);
  return d;
}

std::string word_name(const Word& w, const SpacePtr& space) {
  if (w.empty()) return "1";
  std::string out;
  for (int i : w) {
    if (!out.empty()) out += ",";
    out += space->name(i);
  }
  return out;
}

std::vector<Word> all_words(const SpacePtr& space, int arity) {
  std::vector<Word> out;
  Word cur;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(cur.size()) == arity) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i < space->dim(); ++i) {
      if (!cur.empty() && cur.back() == i && space->degree(i) % 2 != 0) continue;
      cur.push_back(i);
      rec(i);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

void word_sum_add(WordSum& ws, const Word& w, const Rat& r, const SpacePtr& space) {
  if (r == 0) return;
  auto norm = normalize_word(w, space);
  if (!norm) return;
  Rat& slot = ws[norm->first];
  slot += Rat(norm->second) * r;
  if (slot == 0) ws.erase(norm->first);
}

// ---------------------------------------------------------------------------

void MultiMap::set(const Word& w, Vec v) {
  if (static_cast<int>(w.size()) != arity) throw std::invalid_argument("MultiMap::set: arity mismatch");
  if (v.is_zero()) {
    entries.erase(w);
    return;
  }
  entries[w] = std::move(v);
}

void MultiMap::add(const Word& w, const Vec& v) {
  if (v.is_zero()) return;
  auto it = entries.find(w);
  if (it == entries.end()) {
    entries[w] = v;
  } else {
    it->second += v;
    if (it->second.is_zero()) entries.erase(it);
  }
}

Vec MultiMap::apply_tuple(const Word& tuple) const {
  if (static_cast<int>(tuple.size()) != arity)
    throw std::invalid_argument("MultiMap::apply_tuple: arity mismatch");
  auto norm = normalize_word(tuple, dom);
  if (!norm) return Vec(cod);
  auto it = entries.find(norm->first);
  if (it == entries.end()) return Vec(cod);
  Vec v = it->second;
  v *= Rat(norm->second);
  return v;
}

bool MultiMap::is_zero() const { return entries.empty(); }

bool MultiMap::operator==(const MultiMap& o) const { return entries == o.entries; }

MultiMap& MultiMap::operator+=(const MultiMap& o) {
  for (const auto& [w, v] : o.entries) add(w, v);
  return *this;
}

MultiMap& MultiMap::operator*=(const Rat& r) {
  if (r == 0) {
    entries.clear();
    return *this;
  }
  for (auto& [w, v] : entries) v *= r;
  return *this;
}

void check_multimap(const MultiMap& m) {
  for (const auto& [w, v] : m.entries) {
    int d;
    if (!v.is_homogeneous(&d))
      throw std::runtime_error("multimap value not homogeneous at " + word_name(w, m.dom));
    if (!v.is_zero() && d != word_degree(w, m.dom) + m.degree)
      throw std::runtime_error("multimap degree mismatch at " + word_name(w, m.dom));
  }
}

// ---------------------------------------------------------------------------

Coderivation make_coderivation(SpacePtr space, int degree, Flavor flavor, int max_arity,
                               bool complete) {
  Coderivation c;
  c.space = space;
  c.degree = degree;
  c.flavor = flavor;
  c.max_arity = max_arity;
  c.complete = complete;
  for (int i = 0; i <= max_arity; ++i) c.q.emplace_back(i, degree, space, space);
  return c;
}

Coderivation sigma_section(const Vec& v) {
  int d = 0;
  if (!v.is_homogeneous(&d)) throw std::invalid_argument("sigma_section: v not homogeneous");
  Coderivation c = make_coderivation(v.space, d, Flavor::unreduced, 0, true);
  c.q[0].set({}, v);
  return c;
}

Vec evaluate_at_unit(const Coderivation& q) {
  if (q.flavor != Flavor::unreduced)
    throw std::invalid_argument("evaluate_at_unit: reduced coderivation has no q_0");
  return q.q[0].apply_tuple({});
}

Coderivation embed_unreduced(const Coderivation& q) {
  if (q.flavor == Flavor::unreduced) return q;
  Coderivation c = q;
  c.flavor = Flavor::unreduced;
  return c;
}

namespace {
// Is the arity-k coefficient exactly known? (complete => zero beyond window)
bool coeff_known(const Coderivation& c, int k, bool* zero) {
  if (k < c.min_arity()) {
    *zero = true;
    return true;
  }
  if (k <= c.max_arity) {
    *zero = false;
    return true;
  }
  *zero = c.complete;
  return c.complete;
}

std::vector<int> word_degrees(const Word& w, const SpacePtr& s) {
  std::vector<int> d(w.size());
  for (size_t i = 0; i < w.size(); ++i) d[i] = s->degree(w[i]);
  return d;
}
}  // namespace

WordSum coderivation_apply(const Coderivation& c, const Word& w) {
  int i = static_cast<int>(w.size());
  WordSum out;
  const SpacePtr& sp = c.space;
  std::vector<int> degs = word_degrees(w, sp);
  if (c.flavor == Flavor::unreduced) {
    Vec v0 = c.q[0].apply_tuple({});
    for (const auto& [b, r] : v0.c) {
      Word nw;
      nw.push_back(b);
      nw.insert(nw.end(), w.begin(), w.end());
      word_sum_add(out, nw, r, sp);
    }
  }
  for (int k = 1; k <= i; ++k) {
    bool zero;
    if (!coeff_known(c, k, &zero))
      throw std::runtime_error("coderivation_apply: arity window too small");
    if (zero) continue;
    for (const auto& sigma : unshuffles(k, i - k)) {
      int eps = koszul_sign(sigma, degs);
      Word head(static_cast<size_t>(k)), tail(static_cast<size_t>(i - k));
      for (int t = 0; t < k; ++t) head[static_cast<size_t>(t)] = w[static_cast<size_t>(sigma[static_cast<size_t>(t)])];
      for (int t = k; t < i; ++t) tail[static_cast<size_t>(t - k)] = w[static_cast<size_t>(sigma[static_cast<size_t>(t)])];
      Vec val = c.q[static_cast<size_t>(k)].apply_tuple(head);
      for (const auto& [b, r] : val.c) {
        Word nw;
        nw.push_back(b);
        nw.insert(nw.end(), tail.begin(), tail.end());
        word_sum_add(out, nw, Rat(eps) * r, sp);
      }
    }
  }
  return out;
}

Coderivation nr_product(const Coderivation& a, const Coderivation& b, int cap) {
  if (!same_space(a.space, b.space)) throw std::invalid_argument("nr_product: space mismatch");
  Flavor flavor =
      (a.flavor == Flavor::unreduced || b.flavor == Flavor::unreduced) ? Flavor::unreduced
                                                                       : Flavor::reduced;
  int natural_top = a.max_arity + b.max_arity - (b.flavor == Flavor::unreduced ? 0 : 1);
  int limit = cap >= 0 ? cap : (a.complete && b.complete ? natural_top
                                                         : std::max(a.max_arity, b.max_arity));

  // find the largest arity whose every term is exactly determined
  int max_exact = -1;
  for (int i = (flavor == Flavor::unreduced ? 0 : 1); i <= limit; ++i) {
    bool ok = true;
    for (int k = (b.flavor == Flavor::unreduced ? 0 : 1); k <= i && ok; ++k) {
      bool zb, za;
      if (!coeff_known(b, k, &zb)) ok = false;
      else if (!zb && !coeff_known(a, i - k + 1, &za)) ok = false;
    }
    if (!ok) break;
    max_exact = i;
  }
  if (max_exact < (flavor == Flavor::unreduced ? 0 : 1) - 1) max_exact = (flavor == Flavor::unreduced ? 0 : 1) - 1;

  Coderivation out = make_coderivation(a.space, a.degree + b.degree, flavor,
                                       std::max(max_exact, 0), false);
  out.max_arity = max_exact;
  out.q.clear();
  for (int i = 0; i <= std::max(max_exact, 0); ++i)
    out.q.emplace_back(i, out.degree, a.space, a.space);
  out.complete = a.complete && b.complete && max_exact >= natural_top;

  const SpacePtr& sp = a.space;
  for (int i = (flavor == Flavor::unreduced ? 0 : 1); i <= max_exact; ++i) {
    for (const Word& w : all_words(sp, i)) {
      Vec acc(sp);
      std::vector<int> degs = word_degrees(w, sp);
      int kmin = b.flavor == Flavor::unreduced ? 0 : 1;
      for (int k = kmin; k <= i; ++k) {
        bool zb, za;
        coeff_known(b, k, &zb);
        if (zb) continue;
        coeff_known(a, i - k + 1, &za);
        if (za) continue;
        const MultiMap& qa = a.q[static_cast<size_t>(i - k + 1)];
        const MultiMap& rb = b.q[static_cast<size_t>(k)];
        for (const auto& sigma : unshuffles(k, i - k)) {
          int eps = koszul_sign(sigma, degs);
          Word head(static_cast<size_t>(k)), tail(static_cast<size_t>(i - k));
          for (int t = 0; t < k; ++t) head[static_cast<size_t>(t)] = w[static_cast<size_t>(sigma[static_cast<size_t>(t)])];
          for (int t = k; t < i; ++t) tail[static_cast<size_t>(t - k)] = w[static_cast<size_t>(sigma[static_cast<size_t>(t)])];
          Vec rval = rb.apply_tuple(head);
          for (const auto& [bb, rr] : rval.c) {
            Word arg;
            arg.push_back(bb);
            arg.insert(arg.end(), tail.begin(), tail.end());
            Vec t2 = qa.apply_tuple(arg);
            t2 *= Rat(eps) * rr;
            acc += t2;
          }
        }
      }
      if (!acc.is_zero()) out.q[static_cast<size_t>(i)].set(w, std::move(acc));
    }
  }
  return out;
}

Coderivation coderivation_add(const Coderivation& a, const Coderivation& b) {
  if (!same_space(a.space, b.space) || a.degree != b.degree)
    throw std::invalid_argument("coderivation_add: mismatch");
  Flavor flavor =
      (a.flavor == Flavor::unreduced || b.flavor == Flavor::unreduced) ? Flavor::unreduced
                                                                       : Flavor::reduced;
  int amax = a.complete ? std::max(a.max_arity, b.max_arity) : a.max_arity;
  int bmax = b.complete ? std::max(a.max_arity, b.max_arity) : b.max_arity;
  int m = std::min(amax, bmax);
  Coderivation out = make_coderivation(a.space, a.degree, flavor, std::max(m, 0), false);
  out.max_arity = m;
  out.complete = a.complete && b.complete;
  for (int i = out.min_arity(); i <= m; ++i) {
    if (i <= a.max_arity && i >= a.min_arity()) out.q[static_cast<size_t>(i)] += a.q[static_cast<size_t>(i)];
    if (i <= b.max_arity && i >= b.min_arity()) out.q[static_cast<size_t>(i)] += b.q[static_cast<size_t>(i)];
  }
  return out;
}

LinearMap linear_part(const Coderivation& q) {
  LinearMap m(q.space, q.space, q.degree);
  if (q.max_arity >= 1)
    for (int i = 0; i < q.space->dim(); ++i) m.set(i, q.q[1].apply_tuple({i}));
  return m;
}

Coderivation coderivation_scale(const Rat& r, Coderivation a) {
  for (auto& m : a.q) m *= r;
  return a;
}

Coderivation nr_bracket(const Coderivation& a, const Coderivation& b, int cap) {
  Coderivation ab = nr_product(a, b, cap);
  Coderivation ba = nr_product(b, a, cap);
  int sign = (a.degree % 2 != 0 && b.degree % 2 != 0) ? 1 : -1;
  return coderivation_add(ab, coderivation_scale(Rat(sign), std::move(ba)));
}

CheckReport compare_coderivations(const Coderivation& a, const Coderivation& b, int n,
                                  const std::string& label) {
  CheckReport rep;
  for (int i = std::min(a.min_arity(), b.min_arity()); i <= n; ++i) {
    bool za, zb;
    if (!coeff_known(a, i, &za) || !coeff_known(b, i, &zb))
      throw std::runtime_error("compare_coderivations: window too small at arity " +
                               std::to_string(i));
    const MultiMap* ma = (!za && i >= a.min_arity()) ? &a.q[static_cast<size_t>(i)] : nullptr;
    const MultiMap* mb = (!zb && i >= b.min_arity()) ? &b.q[static_cast<size_t>(i)] : nullptr;
    std::vector<Word> words;
    if (ma)
      for (const auto& [w, v] : ma->entries) words.push_back(w);
    if (mb)
      for (const auto& [w, v] : mb->entries)
        if (!ma || !ma->entries.count(w)) words.push_back(w);
    std::sort(words.begin(), words.end());
    for (const Word& w : words) {
      Vec va = ma ? ma->apply_tuple(w) : Vec(a.space);
      Vec vb = mb ? mb->apply_tuple(w) : Vec(b.space);
      if (!(va.c == vb.c))
        rep.fail(label, i, word_name(w, a.space), vec_str(va), vec_str(vb));
    }
  }
  if (rep.ok) rep.pass(label);
  return rep;
}

CheckReport check_linfty(const Coderivation& q, int n) {
  if (q.degree != 1) throw std::invalid_argument("check_linfty: degree must be 1");
  Coderivation qq = nr_product(q, q, n);
  if (qq.max_arity < n && !qq.complete)
    throw std::runtime_error("check_linfty: window too small");
  CheckReport rep;
  for (int i = qq.min_arity(); i <= std::min(n, qq.max_arity); ++i)
    for (const auto& [w, v] : qq.q[static_cast<size_t>(i)].entries)
      rep.fail("linfty", i, word_name(w, q.space), vec_str(v), "0");
  if (rep.ok) rep.pass("linfty");
  return rep;
}

// ---------------------------------------------------------------------------

CoalgMorphism make_morphism(SpacePtr dom, SpacePtr cod, int max_arity, bool complete) {
  CoalgMorphism m;
  m.dom = dom;
  m.cod = cod;
  m.max_arity = max_arity;
  m.complete = complete;
  for (int i = 0; i <= max_arity; ++i) m.f.emplace_back(i, 0, dom, cod);
  return m;
}

CoalgMorphism strict_morphism(const LinearMap& f1) {
  if (f1.degree != 0) throw std::invalid_argument("strict_morphism: degree must be 0");
  CoalgMorphism m = make_morphism(f1.dom, f1.cod, 1, true);
  for (int i = 0; i < f1.dom->dim(); ++i) m.f[1].set({i}, f1.apply_basis(i));
  return m;
}

CoalgMorphism identity_morphism(const SpacePtr& s) { return strict_morphism(identity_map(s)); }

namespace {
bool morph_coeff_known(const CoalgMorphism& f, int k, bool* zero) {
  if (k < 1) {
    *zero = true;
    return true;
  }
  if (k <= f.max_arity) {
    *zero = false;
    return true;
  }
  *zero = f.complete;
  return f.complete;
}

void compositions_rec(int total, int parts, std::vector<int>& cur,
                      std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    if (total >= 1) {
      cur.push_back(total);
      out.push_back(cur);
      cur.pop_back();
    }
    return;
  }
  for (int first = 1; first + (parts - 1) <= total; ++first) {
    cur.push_back(first);
    compositions_rec(total - first, parts - 1, cur, out);
    cur.pop_back();
  }
}
}  // namespace

const WordSum& MorphismBlocks::block(int k, int i, const Word& w) {
  auto key = std::make_tuple(k, i, w);
  auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  WordSum out;
  const SpacePtr& dom = fm.dom;
  const SpacePtr& cod = fm.cod;
  if (k >= 1 && k <= i) {
    std::vector<int> degs = word_degrees(w, dom);
    std::vector<std::vector<int>> comps;
    std::vector<int> cur;
    compositions_rec(i, k, cur, comps);
    for (const auto& comp : comps) {
      bool usable = true;
      for (int j : comp) {
        bool zero;
        if (!morph_coeff_known(fm, j, &zero))
          throw std::runtime_error("morphism block: arity window too small");
        if (zero) usable = false;
      }
      if (!usable) continue;
      for (const auto& sigma : multi_unshuffles(comp)) {
        int eps = koszul_sign(sigma, degs);
        // expand f_{j_1}(...) . ... . f_{j_k}(...) keeping factor order
        std::vector<std::pair<Word, Rat>> partial{{Word{}, Rat(eps)}};
        int pos = 0;
        for (int j : comp) {
          Word blockw(static_cast<size_t>(j));
          for (int t = 0; t < j; ++t)
            blockw[static_cast<size_t>(t)] = w[static_cast<size_t>(sigma[static_cast<size_t>(pos + t)])];
          pos += j;
          Vec val = fm.f[static_cast<size_t>(j)].apply_tuple(blockw);
          std::vector<std::pair<Word, Rat>> next;
          for (const auto& [pw, pc] : partial)
            for (const auto& [b, r] : val.c) {
              Word nw = pw;
              nw.push_back(b);
              next.emplace_back(std::move(nw), pc * r);
            }
          partial = std::move(next);
          if (partial.empty()) break;
        }
        for (const auto& [pw, pc] : partial) word_sum_add(out, pw, pc, cod);
      }
    }
    Rat inv_fact = Rat(1) / Rat(factorial(static_cast<unsigned>(k)));
    for (auto& [pw, pc] : out) pc *= inv_fact;
    for (auto it2 = out.begin(); it2 != out.end();)
      it2 = it2->second == 0 ? out.erase(it2) : std::next(it2);
  }
  return memo.emplace(std::move(key), std::move(out)).first->second;
}

WordSum morphism_apply(const CoalgMorphism& f, const Word& w) {
  MorphismBlocks blocks(f);
  WordSum out;
  for (int k = 1; k <= static_cast<int>(w.size()); ++k)
    for (const auto& [u, r] : blocks.block(k, static_cast<int>(w.size()), w)) {
      Rat& slot = out[u];
      slot += r;
      if (slot == 0) out.erase(u);
    }
  return out;
}

CoalgMorphism compose_morphisms(const CoalgMorphism& g, const CoalgMorphism& f, int cap) {
  if (!same_space(f.cod, g.dom)) throw std::invalid_argument("compose_morphisms: space mismatch");
  // exactness needs both windows at arity i; completes contribute zeros beyond
  int big = std::numeric_limits<int>::max() / 4;
  int natural = std::min(f.complete ? big : f.max_arity, g.complete ? big : g.max_arity);
  if (f.complete && g.complete) natural = f.max_arity * g.max_arity;
  int limit = cap >= 0 ? std::min(cap, natural) : natural;
  CoalgMorphism out = make_morphism(f.dom, g.cod, std::max(limit, 1), false);
  out.max_arity = limit;
  out.complete = f.complete && g.complete && limit >= f.max_arity * g.max_arity;
  MorphismBlocks blocks(f);
  for (int i = 1; i <= limit; ++i) {
    for (const Word& w : all_words(f.dom, i)) {
      Vec acc(g.cod);
      for (int j = 1; j <= i; ++j) {
        bool zero;
        if (!morph_coeff_known(g, j, &zero))
          throw std::runtime_error("compose_morphisms: window too small");
        if (zero) continue;
        for (const auto& [u, r] : blocks.block(j, i, w)) {
          Vec t = g.f[static_cast<size_t>(j)].apply_tuple(u);
          t *= r;
          acc += t;
        }
      }
      if (!acc.is_zero()) out.f[static_cast<size_t>(i)].set(w, std::move(acc));
    }
  }
  return out;
}

CheckReport compare_morphisms(const CoalgMorphism& a, const CoalgMorphism& b, int n,
                              const std::string& label) {
  CheckReport rep;
  for (int i = 1; i <= n; ++i) {
    bool za, zb;
    if (!morph_coeff_known(a, i, &za) || !morph_coeff_known(b, i, &zb))
      throw std::runtime_error("compare_morphisms: window too small at arity " + std::to_string(i));
    const MultiMap* ma = !za ? &a.f[static_cast<size_t>(i)] : nullptr;
    const MultiMap* mb = !zb ? &b.f[static_cast<size_t>(i)] : nullptr;
    std::vector<Word> words;
    if (ma)
      for (const auto& [w, v] : ma->entries) words.push_back(w);
    if (mb)
      for (const auto& [w, v] : mb->entries)
        if (!ma || !ma->entries.count(w)) words.push_back(w);
    std::sort(words.begin(), words.end());
    for (const Word& w : words) {
      Vec va = ma ? ma->apply_tuple(w) : Vec(a.cod);
      Vec vb = mb ? mb->apply_tuple(w) : Vec(b.cod);
      if (!(va.c == vb.c)) rep.fail(label, i, word_name(w, a.dom), vec_str(va), vec_str(vb));
    }
  }
  if (rep.ok) rep.pass(label);
  return rep;
}

CheckReport check_morphism_equation(const CoalgMorphism& f, const Coderivation& q,
                                    const Coderivation& r, int n) {
  if (!same_space(f.dom, q.space) || !same_space(f.cod, r.space))
    throw std::invalid_argument("check_morphism_equation: space mismatch");
  CheckReport rep;
  MorphismBlocks blocks(f);
  for (int i = 1; i <= n; ++i) {
    for (const Word& w : all_words(q.space, i)) {
      // p(FQ): apply Q, then the matching Taylor coefficient of F
      Vec lhs(r.space);
      for (const auto& [u, cu] : coderivation_apply(q, w)) {
        int a = static_cast<int>(u.size());
        bool zero;
        if (!morph_coeff_known(f, a, &zero))
          throw std::runtime_error("check_morphism_equation: window too small");
        if (zero) continue;
        Vec t = f.f[static_cast<size_t>(a)].apply_tuple(u);
        t *= cu;
        lhs += t;
      }
      // p(RF)
      Vec rhs(r.space);
      for (int j = 1; j <= i; ++j) {
        bool zero;
        if (!coeff_known(r, j, &zero))
          throw std::runtime_error("check_morphism_equation: R window too small");
        if (zero || j < r.min_arity()) continue;
        for (const auto& [u, cu] : blocks.block(j, i, w)) {
          Vec t = r.q[static_cast<size_t>(j)].apply_tuple(u);
          t *= cu;
          rhs += t;
        }
      }
      if (!(lhs == rhs))
        rep.fail("morphism_equation", i, word_name(w, q.space), vec_str(lhs), vec_str(rhs));
    }
  }
  if (rep.ok) rep.pass("morphism_equation");
  return rep;
}

std::map<std::pair<Word, Word>, Rat> reduced_coproduct(const SpacePtr& space, const Word& w) {
  std::map<std::pair<Word, Word>, Rat> out;
  int i = static_cast<int>(w.size());
  std::vector<int> degs = word_degrees(w, space);
  for (int k = 1; k <= i - 1; ++k) {
    for (const auto& sigma : unshuffles(k, i - k)) {
      int eps = koszul_sign(sigma, degs);
      Word left(static_cast<size_t>(k)), right(static_cast<size_t>(i - k));
      for (int t = 0; t < k; ++t) left[static_cast<size_t>(t)] = w[static_cast<size_t>(sigma[static_cast<size_t>(t)])];
      for (int t = k; t < i; ++t) right[static_cast<size_t>(t - k)] = w[static_cast<size_t>(sigma[static_cast<size_t>(t)])];
      auto nl = normalize_word(left, space);
      auto nr = normalize_word(right, space);
      if (!nl || !nr) continue;
      Rat& slot = out[{nl->first, nr->first}];
      slot += Rat(eps * nl->second * nr->second);
      if (slot == 0) out.erase({nl->first, nr->first});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

Decalage decalage(const GLA& g, const std::string& prefix) {
  Decalage d;
  d.shifted = shift_space(g.space, 1, prefix);
  d.q = make_coderivation(d.shifted, 1, Flavor::reduced, 2, true);
  for (int i = 0; i < g.space->dim(); ++i) {
    if (g.differential) {
      Vec dv = g.differential->apply_basis(i);
      Vec sh(d.shifted);
      for (const auto& [b, r] : dv.c) sh.add(b, -r);
      d.q.q[1].set({i}, std::move(sh));
    }
  }
  for (int i = 0; i < g.space->dim(); ++i)
    for (int j = i; j < g.space->dim(); ++j) {
      if (i == j && d.shifted->degree(i) % 2 != 0) continue;  // zero word
      Vec br = g.bracket_basis(i, j);
      Vec sh(d.shifted);
      int sign = g.space->degree(i) % 2 != 0 ? -1 : 1;
      for (const auto& [b, r] : br.c) sh.add(b, Rat(sign) * r);
      d.q.q[2].set({i, j}, std::move(sh));
    }
  return d;
}

CoalgMorphism decalage_morphism(const LinearMap& f, const SpacePtr& shifted_dom,
                                const SpacePtr& shifted_cod) {
  LinearMap sf(shifted_dom, shifted_cod, 0);
  for (int i = 0; i < f.dom->dim(); ++i) {
    Vec v(shifted_cod);
    for (const auto& [b, r] : f.apply_basis(i).c) v.add(b, r);
    sf.set(i, std::move(v));
  }
  return strict_morphism(sf);
}

// ---------------------------------------------------------------------------

namespace {

void require_even_support(const Vec& x) {
  int d = 0;
  if (!x.is_homogeneous(&d) || (!x.is_zero() && d != 0))
    throw std::invalid_argument("twisting element must be homogeneous of degree 0");
}

// (1/j!) q(x^j . w), via multisets of the support of x:
//   (1/j!) sum_ordered = sum_multisets prod_b c_b^{m_b} / m_b! . q(mu . w).
// x is concentrated in degree 0 so no Koszul signs arise.
Vec insert_power_over_fact(const MultiMap& q, const Vec& x, int j, const Word& w) {
  Vec out(q.cod);
  std::vector<std::pair<int, Rat>> supp(x.c.begin(), x.c.end());
  Word mu;
  std::function<void(size_t, int, Rat)> rec = [&](size_t si, int left, Rat coeff) {
    if (left == 0) {
      Word tuple = mu;
      tuple.insert(tuple.end(), w.begin(), w.end());
      Vec t = q.apply_tuple(tuple);
      t *= coeff;
      out += t;
      return;
    }
    if (si >= supp.size()) return;
    Rat pw(1);
    for (int take = 0; take <= left; ++take) {
      if (take > 0) {
        pw *= supp[si].second;
        mu.push_back(supp[si].first);
      }
      rec(si + 1, left - take, coeff * pw / Rat(factorial(static_cast<unsigned>(take))));
    }
    for (int t = 0; t < left; ++t) mu.pop_back();
  };
  rec(0, j, Rat(1));
  return out;
}

// Verifies, on the stored window, that no coefficient pairs more than
// `bound` insertions of x with a nonzero value.
void verify_insertion_bound(const Coderivation& q, const Vec& x, int bound) {
  for (int a = q.min_arity(); a <= q.max_arity; ++a)
    for (int j = bound + 1; j <= a; ++j)
      for (const Word& w : all_words(q.space, a - j))
        if (!insert_power_over_fact(q.q[static_cast<size_t>(a)], x, j, w).is_zero())
          throw std::runtime_error("insertion bound certificate fails at arity " +
                                   std::to_string(a));
}

}  // namespace

Vec curvature(const Coderivation& q, const Vec& x, std::optional<int> insertion_bound) {
  require_even_support(x);
  if (!q.complete && !insertion_bound)
    throw std::runtime_error("curvature: sum not provably finite (window structure)");
  if (!q.complete) verify_insertion_bound(q, x, *insertion_bound);
  int top = q.complete ? q.max_arity : std::min(q.max_arity, *insertion_bound);
  Vec out(q.space);
  for (int i = std::max(q.min_arity(), 1); i <= top; ++i)
    out += insert_power_over_fact(q.q[static_cast<size_t>(i)], x, i, {});
  return out;
}

bool is_maurer_cartan(const Coderivation& q, const Vec& x, std::optional<int> insertion_bound) {
  return curvature(q, x, insertion_bound).is_zero();
}

Coderivation twist_structure(const Coderivation& q, const Vec& x,
                             std::optional<int> insertion_bound) {
  require_even_support(x);
  if (!q.complete && !insertion_bound)
    throw std::runtime_error("twist_structure: sum not provably finite (window structure)");
  if (!q.complete) verify_insertion_bound(q, x, *insertion_bound);
  int out_max = q.complete ? q.max_arity : q.max_arity - *insertion_bound;
  if (out_max < q.min_arity())
    throw std::runtime_error("twist_structure: window too small for certified bound");
  Coderivation out = make_coderivation(q.space, q.degree, q.flavor, out_max, q.complete);
  for (int i = out.min_arity(); i <= out_max; ++i) {
    int jtop = q.complete ? q.max_arity - i : *insertion_bound;
    for (const Word& w : all_words(q.space, i)) {
      Vec acc(q.space);
      for (int j = 0; j <= jtop; ++j) {
        if (i + j < q.min_arity() || i + j > q.max_arity) continue;
        acc += insert_power_over_fact(q.q[static_cast<size_t>(i + j)], x, j, w);
      }
      if (!acc.is_zero()) out.q[static_cast<size_t>(i)].set(w, std::move(acc));
    }
  }
  return out;
}

CoalgMorphism twist_morphism(const CoalgMorphism& f, const Vec& x,
                             std::optional<int> insertion_bound) {
  require_even_support(x);
  if (!f.complete && !insertion_bound)
    throw std::runtime_error("twist_morphism: sum not provably finite (window structure)");
  if (!f.complete) {
    for (int a = 1; a <= f.max_arity; ++a)
      for (int j = *insertion_bound + 1; j <= a; ++j)
        for (const Word& w : all_words(f.dom, a - j))
          if (!insert_power_over_fact(f.f[static_cast<size_t>(a)], x, j, w).is_zero())
            throw std::runtime_error("twist_morphism: insertion bound certificate fails");
  }
  int out_max = f.complete ? f.max_arity : f.max_arity - *insertion_bound;
  if (out_max < 1) throw std::runtime_error("twist_morphism: window too small");
  CoalgMorphism out = make_morphism(f.dom, f.cod, out_max, f.complete);
  for (int i = 1; i <= out_max; ++i) {
    int jtop = f.complete ? f.max_arity - i : *insertion_bound;
    for (const Word& w : all_words(f.dom, i)) {
      Vec acc(f.cod);
      for (int j = 0; j <= jtop; ++j) {
        if (i + j > f.max_arity) continue;
        acc += insert_power_over_fact(f.f[static_cast<size_t>(i + j)], x, j, w);
      }
      if (!acc.is_zero()) out.f[static_cast<size_t>(i)].set(w, std::move(acc));
    }
  }
  return out;
}

Vec push_mc(const CoalgMorphism& f, const Vec& x, std::optional<int> insertion_bound) {
  require_even_support(x);
  if (!f.complete && !insertion_bound)
    throw std::runtime_error("push_mc: sum not provably finite (window structure)");
  int top = f.max_arity;
  if (!f.complete) {
    for (int a = 1; a <= f.max_arity; ++a)
      for (int j = *insertion_bound + 1; j <= a; ++j)
        for (const Word& w : all_words(f.dom, a - j))
          if (!insert_power_over_fact(f.f[static_cast<size_t>(a)], x, j, w).is_zero())
            throw std::runtime_error("push_mc: insertion bound certificate fails");
    top = std::min(top, *insertion_bound);
  }
  Vec out(f.cod);
  for (int i = 1; i <= top; ++i)
    out += insert_power_over_fact(f.f[static_cast<size_t>(i)], x, i, {});
  return out;
}

// ---------------------------------------------------------------------------

Extension extension_from_morphism(const Coderivation& base_q, const Coderivation& fiber_r,
                                  const ClassifyingMorphism& cm, int cap) {
  const SpacePtr& v = base_q.space;
  const SpacePtr& w = fiber_r.space;
  Extension ext;
  ext.base_dim = v->dim();
  ext.product = concat_spaces({v, w});
  ext.theta = make_coderivation(ext.product, 1, Flavor::reduced, cap, false);

  bool complete = base_q.complete && fiber_r.complete && cm.complete;
  for (int n = 1; n <= cap; ++n) {
    for (const Word& pw : all_words(ext.product, n)) {
      Word vw, ww;
      for (int idx : pw)
        (idx < ext.base_dim ? vw : ww).push_back(idx < ext.base_dim ? idx : idx - ext.base_dim);
      int i = static_cast<int>(vw.size());
      int j = static_cast<int>(ww.size());
      Vec val(ext.product);
      if (j == 0) {
        bool zq;
        if (!coeff_known(base_q, n, &zq))
          throw std::runtime_error("extension: base window too small");
        if (!zq) {
          Vec qv = base_q.q[static_cast<size_t>(n)].apply_tuple(vw);
          for (const auto& [b, r] : qv.c) val.add(b, r);
        }
      }
      if (i == 0) {
        bool zr;
        if (!coeff_known(fiber_r, n, &zr))
          throw std::runtime_error("extension: fiber window too small");
        if (!zr) {
          Vec rv = fiber_r.q[static_cast<size_t>(n)].apply_tuple(ww);
          for (const auto& [b, r] : rv.c) val.add(b + ext.base_dim, r);
        }
      }
      if (i >= 1) {
        // s f_i(v..)_j(w..), including the j = 0 evaluation at 1
        bool zcm = i > cm.max_arity;
        if (zcm && !cm.complete) throw std::runtime_error("extension: cm window too small");
        if (!zcm) {
          auto it = cm.coeff[static_cast<size_t>(i)].find(vw);
          if (it != cm.coeff[static_cast<size_t>(i)].end()) {
            const Coderivation& c = it->second;
            bool zc;
            if (!coeff_known(c, j, &zc))
              throw std::runtime_error("extension: coefficient coderivation window too small");
            if (!zc && j >= c.min_arity()) {
              Vec cv = c.q[static_cast<size_t>(j)].apply_tuple(ww);
              for (const auto& [b, r] : cv.c) val.add(b + ext.base_dim, r);
            }
            if (!c.complete) complete = false;
          }
        }
      }
      if (!val.is_zero()) ext.theta.q[static_cast<size_t>(n)].set(pw, std::move(val));
    }
  }
  // completeness would additionally need the cap to clear every natural top;
  // callers treat the result as windowed unless everything is finite
  int top = std::max(base_q.max_arity, fiber_r.max_arity);
  for (int i = 1; i <= std::min(cm.max_arity, cap); ++i)
    for (const auto& [vw, c] : cm.coeff[static_cast<size_t>(i)])
      top = std::max(top, i + c.max_arity);
  ext.theta.complete = complete && cap >= top;
  return ext;
}

ExtensionSplit morphism_from_extension(const Extension& ext, const SpacePtr& base,
                                       const SpacePtr& fiber) {
  ExtensionSplit out;
  int bd = ext.base_dim;
  const Coderivation& th = ext.theta;
  out.base_q = make_coderivation(base, 1, Flavor::reduced, th.max_arity, th.complete);
  out.fiber_r = make_coderivation(fiber, 1, Flavor::reduced, th.max_arity, th.complete);
  out.cm.base = base;
  out.cm.fiber = fiber;
  out.cm.max_arity = th.max_arity;
  out.cm.complete = th.complete;
  out.cm.coeff.resize(static_cast<size_t>(th.max_arity) + 1);

  for (int n = 1; n <= th.max_arity; ++n) {
    for (const auto& [pw, val] : th.q[static_cast<size_t>(n)].entries) {
      Word vw, ww;
      for (int idx : pw) (idx < bd ? vw : ww).push_back(idx < bd ? idx : idx - bd);
      int i = static_cast<int>(vw.size());
      int j = static_cast<int>(ww.size());
      Vec vpart(base), wpart(fiber);
      for (const auto& [b, r] : val.c) {
        if (b < bd)
          vpart.add(b, r);
        else
          wpart.add(b - bd, r);
      }
      if (j > 0 && !vpart.is_zero())
        out.ideal_check.fail("fiber_ideal", n, word_name(pw, ext.product), vec_str(vpart), "0");
      if (j == 0) {
        if (!vpart.is_zero()) out.base_q.q[static_cast<size_t>(n)].set(vw, vpart);
      }
      if (i == 0) {
        if (!wpart.is_zero()) out.fiber_r.q[static_cast<size_t>(n)].set(ww, wpart);
      }
      if (i >= 1 && !wpart.is_zero()) {
        auto& slot = out.cm.coeff[static_cast<size_t>(i)];
        auto it = slot.find(vw);
        if (it == slot.end()) {
          Coderivation c = make_coderivation(fiber, word_degree(vw, base) + 1, Flavor::unreduced,
                                             th.max_arity - i, th.complete);
          it = slot.emplace(vw, std::move(c)).first;
        }
        it->second.q[static_cast<size_t>(j)].set(ww, wpart);
      }
    }
  }
  if (out.ideal_check.ok) out.ideal_check.pass("fiber_ideal");
  return out;
}

std::optional<CoalgMorphism> solve_morphism(const Coderivation& q, const Coderivation& r,
                                            const LinearMap& f1, int n) {
  if (!same_space(f1.dom, q.space) || !same_space(f1.cod, r.space) || f1.degree != 0)
    throw std::invalid_argument("solve_morphism: bad linear part");
  CoalgMorphism fm = make_morphism(q.space, r.space, n, false);
  for (int i = 0; i < q.space->dim(); ++i) fm.f[1].set({i}, f1.apply_basis(i));

  // q with only its linear coefficient, for the unknown-side action
  Coderivation q1 = make_coderivation(q.space, 1, Flavor::reduced, 1, true);
  if (q.max_arity >= 1) q1.q[1] = q.q[1];
  Coderivation qplus = q;  // arities >= 2 only
  qplus.q[1] = MultiMap(1, q.degree, q.space, q.space);

  for (int i = 2; i <= n; ++i) {
    std::vector<Word> words = all_words(q.space, i);
    // variable layout: per word, per codomain basis of matching degree
    std::map<std::pair<Word, int>, int> var;
    for (const Word& w : words) {
      int wd = word_degree(w, q.space);
      for (int b = 0; b < r.space->dim(); ++b)
        if (r.space->degree(b) == wd) {
          int id = static_cast<int>(var.size());
          var[{w, b}] = id;
        }
    }
    // equations: for each word, each codomain basis of degree wd+1
    std::vector<std::map<int, Rat>> rows;
    std::vector<Rat> rhs;
    MorphismBlocks blocks(fm);
    for (const Word& w : words) {
      int wd = word_degree(w, q.space);
      // unknown side: f_i(q_1 . w) - r_1(f_i(w))
      std::map<int, std::map<int, Rat>> coeff_by_out;
      for (const auto& [u, cu] : coderivation_apply(q1, w)) {
        for (int b = 0; b < r.space->dim(); ++b) {
          auto it = var.find({u, b});
          if (it == var.end()) continue;
          // f_i(u) component b contributes to out basis b
          coeff_by_out[b][it->second] += cu;
        }
      }
      if (r.max_arity >= 1)
        for (int b = 0; b < r.space->dim(); ++b) {
          auto it = var.find({w, b});
          if (it == var.end()) continue;
          Vec rb = r.q[1].apply_tuple({b});
          for (const auto& [ob, rr] : rb.c) coeff_by_out[ob][it->second] -= rr;
        }
      // known side: sum_{j>=2} r_j(F^j_i) - sum f_{<i}(q_{>=2}-action)
      Vec known(r.space);
      for (int j = 2; j <= i; ++j) {
        bool zero;
        if (!coeff_known(r, j, &zero))
          throw std::runtime_error("solve_morphism: R window too small");
        if (zero) continue;
        for (const auto& [u, cu] : blocks.block(j, i, w)) {
          Vec t = r.q[static_cast<size_t>(j)].apply_tuple(u);
          t *= cu;
          known += t;
        }
      }
      for (const auto& [u, cu] : coderivation_apply(qplus, w)) {
        int a = static_cast<int>(u.size());
        if (a >= i) continue;  // q_1 part handled as unknown side
        Vec t = fm.f[static_cast<size_t>(a)].apply_tuple(u);
        t *= cu;
        known -= t;
      }
      // every term lives in output degree wd + 1
      for (int ob = 0; ob < r.space->dim(); ++ob) {
        auto itk = known.c.find(ob);
        auto itc = coeff_by_out.find(ob);
        if (r.space->degree(ob) != wd + 1 && itk == known.c.end() && itc == coeff_by_out.end())
          continue;
        std::map<int, Rat> row;
        if (itc != coeff_by_out.end()) row = itc->second;
        rows.push_back(std::move(row));
        rhs.push_back(itk != known.c.end() ? itk->second : Rat(0));
      }
    }
    Mat A(static_cast<int>(rows.size()), static_cast<int>(var.size()));
    for (size_t rI = 0; rI < rows.size(); ++rI)
      for (const auto& [cI, rv] : rows[rI]) A.at(static_cast<int>(rI), cI) = rv;
    auto sol = solve(A, rhs);
    if (!sol) return std::nullopt;
    for (const auto& [key, id] : var) {
      const auto& [w, b] = key;
      if ((*sol)[static_cast<size_t>(id)] == 0) continue;
      Vec cur = fm.f[static_cast<size_t>(i)].apply_tuple(w);
      cur.add(b, (*sol)[static_cast<size_t>(id)]);
      fm.f[static_cast<size_t>(i)].set(w, std::move(cur));
    }
  }
  return fm;
}

}  // namespace hdb
