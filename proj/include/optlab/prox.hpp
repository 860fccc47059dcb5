#ifndef OPTLAB_PROX_HPP
#define OPTLAB_PROX_HPP

#include <functional>
#include <memory>
#include <vector>

#include "optlab/types.hpp"

namespace optlab {

// Scalar convex function used inside linear compositions phi(a^T x).
// The prox is analytic for the shipped shapes; custom functions supply a
// subgradient and the prox is found by bisection on the monotone
// optimality residual (tol 1e-12).
struct Phi1D {
  enum class Kind { abs, pwl, custom };

  static Phi1D abs(double lambda);
  // phi(t) = slope_neg * t for t <= 0, slope_pos * t for t > 0, slope_neg < slope_pos.
  static Phi1D pwl(double slope_neg, double slope_pos);
  static Phi1D custom(std::function<double(double)> value,
                      std::function<double(double)> subgradient);

  double value(double t) const;
  // argmin_u { eta * phi(u) + (u - t)^2 / 2 }; ties at kinks resolve to 0.
  double prox(double eta, double t) const;

  Kind kind = Kind::abs;
  double lambda = 0.0;
  double slope_neg = 0.0, slope_pos = 0.0;
  std::function<double(double)> fn;
  std::function<double(double)> grad_fn;
};

// A non-smooth term with an exact proximal map. prox(gamma, x) returns
// the minimizer of gamma * term(u) + ||u - x||^2 / 2.
class ProxTerm {
 public:
  enum class Kind {
    zero,
    l1,             // lambda ||x||_1
    sqnorm,         // (lambda / 2) ||x||^2
    elastic,        // lambda1 ||x||_1 + (lambda2 / 2) ||x||^2
    group_l2,       // lambda * sum_g ||x_g||, disjoint groups
    hinge,          // max{0, 1 - b a^T x}
    hyperplane,     // ind{a^T x = b}
    dantzig_slab,   // ind{|a^T x - c| <= lambda}
    consensus,      // ind{x_1 = ... = x_M} + R(x_1) on stacked vectors
    linear_comp,    // phi(a^T x) for scalar phi
    point,          // ind{x = b_vec}; prox maps everything to b_vec
  };

  ProxTerm() = default;  // zero term

  static ProxTerm zero();
  static ProxTerm l1(double lambda);
  static ProxTerm sqnorm(double lambda);
  static ProxTerm elastic(double lambda1, double lambda2);
  // Groups must be pairwise disjoint: an overlapping collection is only
  // meaningful split across separate terms, one group each.
  static ProxTerm group_l2(std::vector<std::vector<int>> groups, double lambda);
  static ProxTerm hinge(Vec a, double b);
  static ProxTerm hyperplane(Vec a, double b);
  static ProxTerm dantzig_slab(Vec a, double c, double lambda);
  static ProxTerm consensus(int m_blocks, ProxTerm inner);
  static ProxTerm linear_comp(Vec a, Phi1D phi);
  static ProxTerm point(Vec target);

  // The m slab terms of the sparse-recovery constraint
  // |(A^T (b - A x))_j| <= lambda, one per row of A^T A.
  static std::vector<ProxTerm> dantzig_terms(const Mat& A, const Vec& b,
                                             double lambda);

  Kind kind() const { return kind_; }
  bool is_zero() const { return kind_ == Kind::zero; }
  double mu() const { return mu_; }

  double value(const Vec& x) const;  // +inf encoded as a large finite constant for indicators off-domain
  Vec prox(double gamma, const Vec& x) const;

  // Data accessors used by solvers (hyperplane/slab rows, consensus blocks).
  const Vec& a() const { return a_; }
  double b() const { return b_; }
  double lambda() const { return lam1_; }
  int blocks() const { return m_blocks_; }
  const ProxTerm& inner() const;

 private:
  Kind kind_ = Kind::zero;
  double lam1_ = 0.0, lam2_ = 0.0;
  Vec a_;
  double b_ = 0.0;
  std::vector<std::vector<int>> groups_;
  int m_blocks_ = 0;
  std::shared_ptr<ProxTerm> inner_;
  Phi1D phi_;
  double mu_ = 0.0;
};

// Fixed-point residual || x - prox_{gamma psi}(x - gamma grad_f(x)) ||;
// zero exactly at minimizers of f + psi.
class FiniteSumObjective;
double prox_fixed_point_check(const ProxTerm& term, const FiniteSumObjective& f,
                              double gamma, const Vec& x_star);

// Exact prox of lambda * sum_j |x_j - x_{j+1}| (chain total variation) by
// the direct taut-string scan. Ground truth for fused-lasso problems; with
// an additional l1 penalty the combined prox is the soft threshold of this
// result.
Vec prox_tv_chain(const Vec& y, double lambda);

}  // namespace optlab

#endif
