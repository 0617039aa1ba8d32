// Polynomial forms M[t,dt], homotopy fiber products, and the cocylinder /
// cocone models of a pair of dgla morphisms g : N -> M, f : L -> M:
// the structure on s^-1 N x s^-1 L x M with
//   r_1(s n, s l, m) = (-s d n, -s d l, d m + g(n) - f(l))
//   r_2 the shifted brackets of N and of L,
//   r_{i+1}(s n . m_1..m_i) =  B_i(1)/i! sum eps [..[g(n),m_s1]..,m_si]
//   r_{i+1}(s l . m_1..m_i) = -B_i(0)/i! sum eps [..[f(l),m_s1]..,m_si]
// and zero otherwise, together with the retraction data
//   f_1(n,l,m) = (n, l, s((1-t) g(n) + t f(l) + dt m))
//   pi(n,l,w)  = (n, l, int_0^1 w)
//   K(n,l,w)   = (0, 0, s(int_0^t w - t int_0^1 w))
// from the desuspended fiber product realized in exact polynomial forms.
#pragma once

#include "hdb/coalgebra.hpp"
#include "hdb/gla.hpp"
#include "hdb/transfer.hpp"

namespace hdb {

// Element of M[t,dt]: finitely many t^k (x) m and t^k dt (x) m terms.
struct PolyForm {
  SpacePtr space;
  std::map<int, Vec> p0;  // t^k (x) m
  std::map<int, Vec> p1;  // t^k dt (x) m

  explicit PolyForm(SpacePtr s = nullptr) : space(std::move(s)) {}
  bool is_zero() const;
  void add0(int k, const Vec& v);
  void add1(int k, const Vec& v);
  PolyForm& operator+=(const PolyForm& o);
  PolyForm& operator*=(const Rat& r);
  bool operator==(const PolyForm& o) const { return p0 == o.p0 && p1 == o.p1; }
  // Homogeneous of the given total degree? (|t^k x m| = |m|, |t^k dt x m| = |m|+1)
  bool is_homogeneous(int* degree_out = nullptr) const;
  int max_t_degree() const;
};

PolyForm pf_d(const GLA& m, const PolyForm& w);                     // total differential
PolyForm pf_bracket(const GLA& m, const PolyForm& a, const PolyForm& b);
Vec pf_eval(const PolyForm& w, const Rat& s);                       // t = s, dt = 0
Vec pf_int01(const PolyForm& w);                                    // integral over [0,1]
PolyForm pf_int0t(const PolyForm& w);                               // primitive in dt

// Membership in the homotopy fiber product of L and N along f and g:
// e_0(w) = f(l) and e_1(w) = g(n).
bool fiber_product_membership(const Vec& l, const Vec& n, const PolyForm& w,
                              const LinearMap& f, const LinearMap& g);

// f must be a morphism of dglas (chain map + bracket map).
CheckReport validate_dgla_morphism(const GLA& dom, const GLA& cod, const LinearMap& f);

struct ConeSpace {
  SpacePtr space;                       // [sN | sL | M]
  SpacePtr n_space, l_space, m_space;   // the unshifted inputs
  int n_dim = 0, l_dim = 0;
  int sn(int i) const { return i; }
  int sl(int i) const { return n_dim + i; }
  int m(int i) const { return n_dim + l_dim + i; }
};
ConeSpace make_cone_space(const SpacePtr& n, const SpacePtr& l, const SpacePtr& m);

struct Cocylinder {
  ConeSpace cone;
  Coderivation r;
};
Cocylinder cocylinder_structure(const GLA& n, const GLA& l, const GLA& m, const LinearMap& g,
                                const LinearMap& f, int cap);

// Bounded-degree realization of the desuspended fiber product together with
// the retraction data, for the elementwise identity checks. Basis:
// kappa_x = s(x,0,(1-t) g x), lambda_y = s(0,y,t f y), bulk s(0,0,(t^a-t) z)
// for 2 <= a <= tmax, and s(0,0,t^k dt z) for 0 <= k < tmax.
struct PolyFormRetraction {
  ConeSpace cone;
  SpacePtr big;
  RetractionData data;
};
PolyFormRetraction cocylinder_retraction(const GLA& n, const GLA& l, const GLA& m,
                                         const LinearMap& g, const LinearMap& f, int tmax);

// Element-based transfer over the exact (unbounded) polynomial-form fiber
// product; returns the transferred Taylor coefficients on the cone space.
// This is the independent oracle for cocylinder_structure.
Coderivation polyform_transfer(const GLA& n, const GLA& l, const GLA& m, const LinearMap& g,
                               const LinearMap& f, int cap);

// ---------------------------------------------------------------------------
// The linear coderivation Psi(D) on the cocylinder of an inclusion of
// graded Lie algebras, for an L-preserving derivation D:
//   Psi(D)_1(s m, s y, z) = ((-1)^{|D|} s Dm, (-1)^{|D|} s Dy, Dz).
// [R, Psi(D)] must vanish.
struct PsiResult {
  Cocylinder cyl;
  Coderivation psi;
  CheckReport commutes;
};
PsiResult psi_morphism(const GLA& g, const LinearMap& d, int cap);

// ---------------------------------------------------------------------------
// The fiber-product model on s^-1 N x A for a split (M, D) and a sub-dgla
// N (given by ambient basis indices):
//   r_1(s n, a) = (-s Dn, P(Da + n)),  r_2(s n_1 . s n_2) = shifted bracket,
//   r_{i+1}(s n . a..) = Phi(n)_i,     r_i(a..) = Phi(D)_i  (i >= 2),
// with the morphism F_D into the cocylinder of (N,D) and (L,D) in (M,D):
//   f_1(s n, a) = (s n, s Pperp(n + Da), a)
//   f_{i+1}(s n . a..) = (0, s (1/i!) sum eps Pperp [..[n,a_s1]..,a_si], 0)
//   f_i(a..)          = (0, s (1/i!) sum eps Pperp [..[Da_s1,a_s2]..,a_si], 0).
struct FiberModel {
  SpacePtr model_space;   // [sN | A]
  Subspace n_part;        // of the ambient algebra
  Subspace a_part;
  Coderivation r_d;
  Cocylinder target;      // cone of (N,D) and (L,D) in (M,D)
  CoalgMorphism f_d;
  CheckReport report;     // structure, morphism equation, retraction, twisting route
};
// n_indices: ambient basis indices spanning N. The checks assume the
// generic position where N meets the complement cleanly; bases with
// N overlapping L are accepted but the twisting-route comparison is the
// only guard there.
FiberModel model_fiber_product(const GLA& g, const LinearMap& d,
                               const std::vector<int>& n_indices, int cap);

// The replacement diagram for N = M: the strict section s^-1 L -> model,
// the composite model -> s^-1 L through the cocylinder, and the strict
// inclusion of (A, Phi(D)); all morphism equations and the homology
// isomorphism of the vertical pair are checked.
struct ReplacementDiagram {
  FiberModel model;                 // on s^-1 M x A
  CoalgMorphism section;            // s^-1 L -> model
  CoalgMorphism down;               // model -> s^-1 L
  CoalgMorphism include_a;          // (A, Phi(D)) -> model
  CheckReport report;
};
ReplacementDiagram homotopy_replacement_diagram(const GLA& g, const LinearMap& d, int cap);

}  // namespace hdb
