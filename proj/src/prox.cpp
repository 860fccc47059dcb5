#include "optlab/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "optlab/objective.hpp"

namespace optlab {

namespace {

constexpr double kIndicatorInfinity = 1e300;

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;  // ties at the kink resolve to 0
}

}  // namespace

Phi1D Phi1D::abs(double lambda) {
  if (lambda < 0) throw ConfigError("abs penalty needs lambda >= 0");
  Phi1D p;
  p.kind = Kind::abs;
  p.lambda = lambda;
  return p;
}

Phi1D Phi1D::pwl(double slope_neg, double slope_pos) {
  if (!(slope_neg < slope_pos))
    throw ConfigError("piecewise-linear phi needs slope_neg < slope_pos");
  Phi1D p;
  p.kind = Kind::pwl;
  p.slope_neg = slope_neg;
  p.slope_pos = slope_pos;
  return p;
}

Phi1D Phi1D::custom(std::function<double(double)> value,
                    std::function<double(double)> subgradient) {
  if (!value || !subgradient)
    throw ConfigError("custom phi needs a value and a subgradient");
  Phi1D p;
  p.kind = Kind::custom;
  p.fn = std::move(value);
  p.grad_fn = std::move(subgradient);
  return p;
}

double Phi1D::value(double t) const {
  switch (kind) {
    case Kind::abs:
      return lambda * std::abs(t);
    case Kind::pwl:
      return t <= 0 ? slope_neg * t : slope_pos * t;
    case Kind::custom:
      return fn(t);
  }
  return 0.0;
}

double Phi1D::prox(double eta, double t) const {
  switch (kind) {
    case Kind::abs:
      return soft_threshold(t, eta * lambda);
    case Kind::pwl: {
      if (t < eta * slope_neg) return t - eta * slope_neg;
      if (t > eta * slope_pos) return t - eta * slope_pos;
      return 0.0;
    }
    case Kind::custom: {
      // The residual r(u) = u - t + eta * phi'(u) is strictly increasing,
      // so bisection localizes the prox to 1e-12.
      auto residual = [&](double u) { return u - t + eta * grad_fn(u); };
      double lo = t, hi = t;
      double step = 1.0 + std::abs(t);
      while (residual(lo) > 0.0 && step < 1e30) {
        lo -= step;
        step *= 2.0;
      }
      step = 1.0 + std::abs(t);
      while (residual(hi) < 0.0 && step < 1e30) {
        hi += step;
        step *= 2.0;
      }
      for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        (residual(mid) < 0.0 ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
  }
  return t;
}

ProxTerm ProxTerm::zero() { return ProxTerm(); }

ProxTerm ProxTerm::l1(double lambda) {
  if (lambda < 0) throw ConfigError("l1 needs lambda >= 0");
  ProxTerm t;
  t.kind_ = Kind::l1;
  t.lam1_ = lambda;
  return t;
}

ProxTerm ProxTerm::sqnorm(double lambda) {
  if (lambda < 0) throw ConfigError("sqnorm needs lambda >= 0");
  ProxTerm t;
  t.kind_ = Kind::sqnorm;
  t.lam2_ = lambda;
  t.mu_ = lambda;
  return t;
}

ProxTerm ProxTerm::elastic(double lambda1, double lambda2) {
  if (lambda1 < 0 || lambda2 < 0) throw ConfigError("elastic needs lambdas >= 0");
  ProxTerm t;
  t.kind_ = Kind::elastic;
  t.lam1_ = lambda1;
  t.lam2_ = lambda2;
  t.mu_ = lambda2;
  return t;
}

ProxTerm ProxTerm::group_l2(std::vector<std::vector<int>> groups, double lambda) {
  if (lambda < 0) throw ConfigError("group_l2 needs lambda >= 0");
  std::vector<int> seen;
  for (const auto& g : groups)
    for (int i : g) seen.push_back(i);
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
    throw ConfigError(
        "group_l2 groups overlap; overlapping groups are only valid as "
        "separate single-group terms, not as one regularizer");
  ProxTerm t;
  t.kind_ = Kind::group_l2;
  t.lam1_ = lambda;
  t.groups_ = std::move(groups);
  return t;
}

ProxTerm ProxTerm::hinge(Vec a, double b) {
  if (a.squaredNorm() == 0.0) throw ConfigError("hinge needs a nonzero row");
  ProxTerm t;
  t.kind_ = Kind::hinge;
  t.a_ = std::move(a);
  t.b_ = b;
  return t;
}

ProxTerm ProxTerm::hyperplane(Vec a, double b) {
  if (a.squaredNorm() == 0.0) throw ConfigError("hyperplane needs a nonzero row");
  ProxTerm t;
  t.kind_ = Kind::hyperplane;
  t.a_ = std::move(a);
  t.b_ = b;
  return t;
}

ProxTerm ProxTerm::dantzig_slab(Vec a, double c, double lambda) {
  if (a.squaredNorm() == 0.0) throw ConfigError("slab needs a nonzero row");
  if (lambda < 0) throw ConfigError("slab needs lambda >= 0");
  ProxTerm t;
  t.kind_ = Kind::dantzig_slab;
  t.a_ = std::move(a);
  t.b_ = c;
  t.lam1_ = lambda;
  return t;
}

ProxTerm ProxTerm::consensus(int m_blocks, ProxTerm inner) {
  if (m_blocks < 1) throw ConfigError("consensus needs at least one block");
  ProxTerm t;
  t.kind_ = Kind::consensus;
  t.m_blocks_ = m_blocks;
  t.inner_ = std::make_shared<ProxTerm>(std::move(inner));
  return t;
}

ProxTerm ProxTerm::linear_comp(Vec a, Phi1D phi) {
  if (a.squaredNorm() == 0.0)
    throw ConfigError(
        "linear composition needs a full-column-rank (nonzero) vector; for "
        "affine constraints use the hyperplane or slab kinds instead");
  ProxTerm t;
  t.kind_ = Kind::linear_comp;
  t.a_ = std::move(a);
  t.phi_ = std::move(phi);
  return t;
}

ProxTerm ProxTerm::point(Vec target) {
  ProxTerm t;
  t.kind_ = Kind::point;
  t.a_ = std::move(target);
  return t;
}

std::vector<ProxTerm> ProxTerm::dantzig_terms(const Mat& A, const Vec& b,
                                              double lambda) {
  if (A.rows() != b.size()) throw ConfigError("selector shape mismatch");
  Mat gram = A.transpose() * A;
  Vec target = A.transpose() * b;
  std::vector<ProxTerm> terms;
  for (Eigen::Index j = 0; j < gram.rows(); ++j)
    terms.push_back(dantzig_slab(gram.row(j).transpose(), target[j], lambda));
  return terms;
}

const ProxTerm& ProxTerm::inner() const {
  static const ProxTerm none;
  return inner_ ? *inner_ : none;
}

double ProxTerm::value(const Vec& x) const {
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::l1:
      return lam1_ * x.lpNorm<1>();
    case Kind::sqnorm:
      return 0.5 * lam2_ * x.squaredNorm();
    case Kind::elastic:
      return lam1_ * x.lpNorm<1>() + 0.5 * lam2_ * x.squaredNorm();
    case Kind::group_l2: {
      double s = 0.0;
      for (const auto& g : groups_) {
        double q = 0.0;
        for (int i : g) q += x[i] * x[i];
        s += std::sqrt(q);
      }
      return lam1_ * s;
    }
    case Kind::hinge:
      return std::max(0.0, 1.0 - b_ * a_.dot(x));
    case Kind::hyperplane:
      return std::abs(a_.dot(x) - b_) <= 1e-12 * (1.0 + std::abs(b_))
                 ? 0.0
                 : kIndicatorInfinity;
    case Kind::dantzig_slab:
      return std::abs(a_.dot(x) - b_) <= lam1_ + 1e-12 ? 0.0
                                                       : kIndicatorInfinity;
    case Kind::consensus: {
      const int d = static_cast<int>(x.size()) / m_blocks_;
      for (int m = 1; m < m_blocks_; ++m)
        if ((x.segment(m * d, d) - x.segment(0, d)).norm() > 1e-12)
          return kIndicatorInfinity;
      return inner().value(x.segment(0, d));
    }
    case Kind::linear_comp:
      return phi_.value(a_.dot(x));
    case Kind::point:
      return (x - a_).norm() <= 1e-12 * (1.0 + a_.norm()) ? 0.0
                                                          : kIndicatorInfinity;
  }
  return 0.0;
}

Vec ProxTerm::prox(double gamma, const Vec& x) const {
  if (gamma <= 0) throw ConfigError("prox needs gamma > 0");
  switch (kind_) {
    case Kind::zero:
      return x;
    case Kind::l1: {
      Vec out(x.size());
      const double t = gamma * lam1_;
      for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = soft_threshold(x[i], t);
      return out;
    }
    case Kind::sqnorm:
      return x / (1.0 + gamma * lam2_);
    case Kind::elastic: {
      Vec out(x.size());
      const double t = gamma * lam1_;
      const double scale = 1.0 / (1.0 + gamma * lam2_);
      for (Eigen::Index i = 0; i < x.size(); ++i)
        out[i] = scale * soft_threshold(x[i], t);
      return out;
    }
    case Kind::group_l2: {
      Vec out = x;
      for (const auto& g : groups_) {
        double q = 0.0;
        for (int i : g) q += x[i] * x[i];
        double nrm = std::sqrt(q);
        double shrink = nrm > 0.0 ? std::max(0.0, 1.0 - gamma * lam1_ / nrm) : 0.0;
        for (int i : g) out[i] = shrink * x[i];
      }
      return out;
    }
    case Kind::hinge: {
      const double t = (1.0 - b_ * a_.dot(x)) / a_.squaredNorm();
      const double step = std::clamp(t, 0.0, gamma);
      return x + step * b_ * a_;
    }
    case Kind::hyperplane:
      return x - ((a_.dot(x) - b_) / a_.squaredNorm()) * a_;
    case Kind::dantzig_slab: {
      const double r = a_.dot(x) - b_;
      if (r > lam1_) return x - ((r - lam1_) / a_.squaredNorm()) * a_;
      if (r < -lam1_) return x - ((r + lam1_) / a_.squaredNorm()) * a_;
      return x;
    }
    case Kind::consensus: {
      // Projection onto the consensus subspace followed by the inner prox
      // with stepsize gamma / M.
      const int d = static_cast<int>(x.size()) / m_blocks_;
      Vec mean = Vec::Zero(d);
      for (int m = 0; m < m_blocks_; ++m) mean += x.segment(m * d, d);
      mean /= static_cast<double>(m_blocks_);
      Vec z = inner().prox(gamma / static_cast<double>(m_blocks_), mean);
      Vec out(x.size());
      for (int m = 0; m < m_blocks_; ++m) out.segment(m * d, d) = z;
      return out;
    }
    case Kind::linear_comp: {
      // x - prox(x) stays in span(a): reduce to the scalar prox in the
      // (a^T a)^{-1} metric, i.e. prox_{gamma ||a||^2 phi} at a^T x.
      const double asq = a_.squaredNorm();
      const double t = a_.dot(x);
      const double u = phi_.prox(gamma * asq, t);
      return x + ((u - t) / asq) * a_;
    }
    case Kind::point:
      return a_;
  }
  return x;
}

double prox_fixed_point_check(const ProxTerm& term, const FiniteSumObjective& f,
                              double gamma, const Vec& x_star) {
  Vec step = x_star - gamma * f.grad(x_star);
  return (x_star - term.prox(gamma, step)).norm();
}

Vec prox_tv_chain(const Vec& y, double lambda) {
  const int n = static_cast<int>(y.size());
  if (lambda < 0) throw ConfigError("TV prox needs lambda >= 0");
  Vec x(n);
  if (n == 0) return x;
  if (n == 1 || lambda == 0.0) return y;

  // Direct non-iterative scan (Condat 2013): maintain the tube
  // [vmin, vmax] and jump bookkeeping while walking the signal once.
  int k = 0, k0 = 0, km = 0, kp = 0;
  double vmin = y[0] - lambda, vmax = y[0] + lambda;
  double umin = lambda, umax = -lambda;
  for (;;) {
    if (k == n - 1) {
      if (umin < 0.0) {
        do x[k0++] = vmin; while (k0 <= km);
        k = km = k0;
        kp = std::max(kp, k0);
        vmin = y[k];
        umin = lambda;
        umax = y[k] + lambda - vmax;
      } else if (umax > 0.0) {
        do x[k0++] = vmax; while (k0 <= kp);
        k = kp = k0;
        km = std::max(km, k0);
        vmax = y[k];
        umax = -lambda;
        umin = y[k] - lambda - vmin;
      } else {
        const double v = vmin + umin / static_cast<double>(k - k0 + 1);
        while (k0 <= k) x[k0++] = v;
        return x;
      }
      if (k0 > n - 1) {  // walked off the end after flushing a segment
        return x;
      }
      if (k == n - 1) continue;
    }
    if (y[k + 1] + umin < vmin - lambda) {  // negative jump certain
      do x[k0++] = vmin; while (k0 <= km);
      k = km = kp = k0;
      vmin = y[k];
      vmax = y[k] + 2.0 * lambda;
      umin = lambda;
      umax = -lambda;
    } else if (y[k + 1] + umax > vmax + lambda) {  // positive jump certain
      do x[k0++] = vmax; while (k0 <= kp);
      k = km = kp = k0;
      vmin = y[k] - 2.0 * lambda;
      vmax = y[k];
      umin = lambda;
      umax = -lambda;
    } else {  // no jump decided yet: extend the segment
      ++k;
      umin += y[k] - vmin;
      umax += y[k] - vmax;
      if (umin >= lambda) {
        vmin += (umin - lambda) / static_cast<double>(k - k0 + 1);
        umin = lambda;
        km = k;
      }
      if (umax <= -lambda) {
        vmax += (umax + lambda) / static_cast<double>(k - k0 + 1);
        umax = -lambda;
        kp = k;
      }
    }
  }
}

}  // namespace optlab
