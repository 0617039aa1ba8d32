#include "hdb/homology.hpp"

#include <stdexcept>

namespace hdb {

namespace {

std::map<int, std::vector<int>> indices_by_degree(const SpacePtr& s) {
  std::map<int, std::vector<int>> by_deg;
  for (int i = 0; i < s->dim(); ++i) by_deg[s->degree(i)].push_back(i);
  return by_deg;
}

std::vector<Rat> coords(const Vec& v, const std::vector<int>& idx) {
  std::vector<Rat> out(idx.size(), Rat(0));
  for (size_t k = 0; k < idx.size(); ++k) {
    auto it = v.c.find(idx[k]);
    if (it != v.c.end()) out[k] = it->second;
  }
  // everything outside idx must be zero
  size_t nz = 0;
  for (const Rat& r : out)
    if (r != 0) ++nz;
  size_t vnz = v.c.size();
  if (nz != vnz) throw std::runtime_error("coords: vector leaves the degree slice");
  return out;
}

Vec from_coords(const SpacePtr& s, const std::vector<int>& idx, const std::vector<Rat>& x) {
  Vec v(s);
  for (size_t k = 0; k < idx.size(); ++k) v.add(idx[k], x[k]);
  return v;
}

// Greedily extend `base` (columns, may be empty) by candidates that raise
// the rank; returns the chosen candidate positions.
std::vector<size_t> complete_basis(std::vector<std::vector<Rat>> base,
                                   const std::vector<std::vector<Rat>>& cands, int len) {
  std::vector<size_t> chosen;
  int r = base.empty() ? 0 : rank(columns_matrix(base, len));
  for (size_t c = 0; c < cands.size(); ++c) {
    base.push_back(cands[c]);
    int r2 = rank(columns_matrix(base, len));
    if (r2 > r) {
      chosen.push_back(c);
      r = r2;
    } else {
      base.pop_back();
    }
  }
  return chosen;
}

}  // namespace

HomologyData homology(const SpacePtr& space, const LinearMap& d) {
  if (d.degree != 1) throw std::invalid_argument("homology: differential degree must be 1");
  LinearMap dd = compose(d, d);
  if (!dd.is_zero()) throw std::invalid_argument("homology: d^2 != 0");

  auto by_deg = indices_by_degree(space);
  HomologyData out;
  for (const auto& [deg, idx] : by_deg) {
    // cycles: kernel of d restricted to this degree
    auto next_it = by_deg.find(deg + 1);
    std::vector<int> next_idx = next_it == by_deg.end() ? std::vector<int>{} : next_it->second;
    Mat dmat(static_cast<int>(next_idx.size()), static_cast<int>(idx.size()));
    for (size_t j = 0; j < idx.size(); ++j) {
      std::vector<Rat> im = coords(d.apply_basis(idx[j]), next_idx);
      for (size_t i = 0; i < next_idx.size(); ++i) dmat.at(static_cast<int>(i), static_cast<int>(j)) = im[i];
    }
    std::vector<Vec> cycles;
    for (const auto& k : kernel_basis(dmat)) cycles.push_back(from_coords(space, idx, k));

    // boundaries: span of d(previous degree), reduced to a basis
    std::vector<Vec> bounds;
    auto prev_it = by_deg.find(deg - 1);
    if (prev_it != by_deg.end()) {
      std::vector<std::vector<Rat>> cands;
      for (int j : prev_it->second) {
        Vec im = d.apply_basis(j);
        if (!im.is_zero()) cands.push_back(coords(im, idx));
      }
      for (size_t c : complete_basis({}, cands, static_cast<int>(idx.size())))
        bounds.push_back(from_coords(space, idx, cands[c]));
    }
    out.cycles[deg] = cycles;
    out.boundaries[deg] = bounds;
    out.dim[deg] = static_cast<int>(cycles.size()) - static_cast<int>(bounds.size());
  }
  return out;
}

namespace {

// Per-degree homology presentation: index slice, representative cycles
// completing the boundaries, and the boundary columns.
struct DegreeSlice {
  std::vector<int> idx;
  std::vector<std::vector<Rat>> reps;
  std::vector<std::vector<Rat>> bounds;
};

std::map<int, DegreeSlice> slices(const SpacePtr& s, const HomologyData& h) {
  std::map<int, DegreeSlice> out;
  auto by_deg = indices_by_degree(s);
  for (const auto& [deg, idx] : by_deg) {
    DegreeSlice sl;
    sl.idx = idx;
    for (const Vec& b : h.boundaries.at(deg)) sl.bounds.push_back(coords(b, idx));
    std::vector<std::vector<Rat>> cyc;
    for (const Vec& z : h.cycles.at(deg)) cyc.push_back(coords(z, idx));
    for (size_t c : complete_basis(sl.bounds, cyc, static_cast<int>(idx.size())))
      sl.reps.push_back(cyc[c]);
    out[deg] = std::move(sl);
  }
  return out;
}

}  // namespace

InducedMap induced_homology_map(const LinearMap& f, const LinearMap& dv, const LinearMap& dw) {
  if (f.degree != 0) throw std::invalid_argument("induced_homology_map: map degree must be 0");
  LinearMap lhs = compose(f, dv), rhs = compose(dw, f);
  if (!(lhs == rhs)) throw std::invalid_argument("induced_homology_map: not a chain map");

  HomologyData hv = homology(f.dom, dv);
  HomologyData hw = homology(f.cod, dw);
  auto sv = slices(f.dom, hv);
  auto sw = slices(f.cod, hw);

  InducedMap out;
  std::map<int, DegreeSlice> empty;
  for (int deg : [&] {
         std::vector<int> degs;
         for (const auto& [d, _] : sv) degs.push_back(d);
         for (const auto& [d, _] : sw)
           if (!sv.count(d)) degs.push_back(d);
         return degs;
       }()) {
    const DegreeSlice* a = sv.count(deg) ? &sv.at(deg) : nullptr;
    const DegreeSlice* b = sw.count(deg) ? &sw.at(deg) : nullptr;
    size_t na = a ? a->reps.size() : 0;
    size_t nb = b ? b->reps.size() : 0;
    Mat block(static_cast<int>(nb), static_cast<int>(na));
    if (a && na > 0) {
      if (!b && nb == 0) {
        // target homology zero in this degree: classes map to zero
      }
      for (size_t j = 0; j < na; ++j) {
        Vec img = f.apply(from_coords(f.dom, a->idx, a->reps[j]));
        if (!b) {
          if (!img.is_zero()) throw std::runtime_error("induced map leaves graded support");
          continue;
        }
        std::vector<Rat> y = coords(img, b->idx);
        // solve [reps | bounds] x = y, read off rep coefficients
        std::vector<std::vector<Rat>> colsv = b->reps;
        for (const auto& c : b->bounds) colsv.push_back(c);
        auto sol = solve(columns_matrix(colsv, static_cast<int>(b->idx.size())), y);
        if (!sol) throw std::runtime_error("chain map image is not a cycle");
        for (size_t i = 0; i < nb; ++i) block.at(static_cast<int>(i), static_cast<int>(j)) = (*sol)[i];
      }
    }
    int r = rank(block);
    if (r < static_cast<int>(na)) out.injective = false;
    if (r < static_cast<int>(nb)) out.surjective = false;
    out.blocks[deg] = std::move(block);
  }
  return out;
}

AbelianityResult homotopy_abelian_criterion(const GLA& g) {
  if (!g.differential || !g.has_splitting())
    throw std::invalid_argument("homotopy_abelian_criterion: needs differential and splitting");
  const LinearMap& d = *g.differential;
  auto [P, Pperp] = projections(g);

  Subspace L = make_part_space(g, Part::L);
  Subspace A = make_part_space(g, Part::A);

  // d restricted to L (validated elsewhere as D(L) in L)
  LinearMap dL(L.space, L.space, 1);
  for (int k = 0; k < L.space->dim(); ++k)
    dL.set(k, restrict_to_part(L, d.apply_basis(L.ambient_index[static_cast<size_t>(k)])));
  // Pd restricted to A
  LinearMap dA(A.space, A.space, 1);
  for (int k = 0; k < A.space->dim(); ++k)
    dA.set(k, restrict_to_part(A, P.apply(d.apply_basis(A.ambient_index[static_cast<size_t>(k)]))));

  LinearMap incl(L.space, g.space, 0);
  for (int k = 0; k < L.space->dim(); ++k)
    incl.set(k, basis_vec(g.space, L.ambient_index[static_cast<size_t>(k)]));
  LinearMap proj(g.space, A.space, 0);
  for (int i = 0; i < g.space->dim(); ++i) proj.set(i, restrict_to_part(A, P.apply_basis(i)));

  AbelianityResult res;
  InducedMap hi = induced_homology_map(incl, dL, d);
  InducedMap hp = induced_homology_map(proj, d, dA);
  res.injective_HL = hi.injective;
  res.surjective_HP = hp.surjective;

  if (!hi.injective) {
    // find an L-cycle whose class dies in M
    HomologyData hL = homology(L.space, dL);
    auto sl = slices(L.space, hL);
    for (const auto& [deg, block] : hi.blocks) {
      if (!sl.count(deg)) continue;
      auto ker = kernel_basis(block);
      if (ker.empty()) continue;
      const DegreeSlice& s = sl.at(deg);
      std::vector<Rat> combo(s.idx.size(), Rat(0));
      for (size_t j = 0; j < s.reps.size(); ++j)
        for (size_t t = 0; t < s.idx.size(); ++t) combo[t] += ker[0][j] * s.reps[j][t];
      res.witness = incl.apply(from_coords(L.space, s.idx, combo));
      break;
    }
  }

  if (res.injective_HL == res.surjective_HP)
    res.report.pass("H_injective_iff_HP_surjective");
  else
    res.report.fail("H_injective_iff_HP_surjective", 0, "",
                    res.injective_HL ? "injective" : "not injective",
                    res.surjective_HP ? "surjective" : "not surjective");
  return res;
}

}  // namespace hdb
