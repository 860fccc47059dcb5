#include "optlab/problems.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace optlab {

namespace {

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  double e = std::exp(t);
  return e / (1.0 + e);
}

// log(1 + exp(t)) without overflow
double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

// Largest eigenvalue of A^T A through matrix-vector products.
double power_iteration_sq(int dim,
                          const std::function<Vec(const Vec&)>& ata_apply) {
  if (dim == 0) return 0.0;
  RngStream rng(0x9e3779b9u, "power-iteration");
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.normal();
  double nv = v.norm();
  if (nv == 0.0) v[0] = 1.0; else v /= nv;
  double lambda = 0.0;
  for (int it = 0; it < 1000; ++it) {
    Vec w = ata_apply(v);
    double nw = w.norm();
    if (nw == 0.0) return 0.0;  // v in the kernel and nothing to amplify
    double next = v.dot(w);
    w /= nw;
    if (it > 0 && std::abs(next - lambda) <= 1e-10 * std::abs(next)) {
      return std::max(next, 0.0);
    }
    lambda = next;
    v = w;
  }
  return std::max(lambda, 0.0);
}

}  // namespace

double spectral_norm_rows(const Dataset& ds) {
  auto apply = [&ds](const Vec& v) {
    Vec out = Vec::Zero(v.size());
    for (const auto& row : ds.rows) row.add_scaled_to(row.dot(v), out);
    return out;
  };
  return std::sqrt(power_iteration_sq(ds.n_features, apply));
}

double spectral_norm_dense(const Mat& A) {
  auto apply = [&A](const Vec& v) { return Vec(A.transpose() * (A * v)); };
  return std::sqrt(power_iteration_sq(static_cast<int>(A.cols()), apply));
}

FiniteSumObjective make_logistic(const Dataset& ds, double lambda2) {
  if (lambda2 < 0) throw ConfigError("logistic needs lambda2 >= 0");
  for (double l : ds.labels)
    if (l != 0.0 && l != 1.0)
      throw ConfigError("logistic regression needs labels in {0, 1}");
  const int n = ds.n_samples();
  const int d = ds.n_features;
  auto rows = std::make_shared<Dataset>(ds);

  std::vector<Component> comps;
  std::vector<double> L_i;
  comps.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    comps.push_back(Component{
        [rows, i, lambda2](const Vec& x) {
          const double t = rows->rows[static_cast<size_t>(i)].dot(x);
          const double b = rows->labels[static_cast<size_t>(i)];
          return b * softplus(-t) + (1.0 - b) * softplus(t) +
                 0.5 * lambda2 * x.squaredNorm();
        },
        [rows, i, lambda2, d](const Vec& x) {
          const double t = rows->rows[static_cast<size_t>(i)].dot(x);
          const double b = rows->labels[static_cast<size_t>(i)];
          Vec g = lambda2 * x;
          rows->rows[static_cast<size_t>(i)].add_scaled_to(sigmoid(t) - b, g);
          return g;
        }});
    L_i.push_back(rows->rows[static_cast<size_t>(i)].squared_norm() / 4.0 +
                  lambda2);
  }
  const double spec = spectral_norm_rows(ds);
  const double L = spec * spec / (4.0 * static_cast<double>(n)) + lambda2;
  return FiniteSumObjective(ObjectiveKind::logistic_l2, d, std::move(comps),
                            std::move(L_i), L, lambda2);
}

FiniteSumObjective make_least_squares(Mat A, Vec b, double lambda2) {
  if (A.rows() != b.size()) throw ConfigError("least squares shape mismatch");
  const int n = static_cast<int>(A.rows());
  const int d = static_cast<int>(A.cols());
  auto Ap = std::make_shared<Mat>(std::move(A));
  auto bp = std::make_shared<Vec>(std::move(b));

  std::vector<Component> comps;
  std::vector<double> L_i;
  for (int i = 0; i < n; ++i) {
    comps.push_back(Component{
        [Ap, bp, i, lambda2](const Vec& x) {
          const double r = Ap->row(i).dot(x) - (*bp)[i];
          return 0.5 * r * r + 0.5 * lambda2 * x.squaredNorm();
        },
        [Ap, bp, i, lambda2](const Vec& x) {
          const double r = Ap->row(i).dot(x) - (*bp)[i];
          return Vec(r * Ap->row(i).transpose() + lambda2 * x);
        }});
    L_i.push_back(Ap->row(i).squaredNorm() + lambda2);
  }
  const double spec = spectral_norm_dense(*Ap);
  const double L = spec * spec / static_cast<double>(n) + lambda2;
  return FiniteSumObjective(ObjectiveKind::least_squares_l2, d,
                            std::move(comps), std::move(L_i), L, lambda2);
}

FiniteSumObjective make_quadratic_distance(Vec x0) {
  auto c = std::make_shared<Vec>(std::move(x0));
  std::vector<Component> comps{Component{
      [c](const Vec& x) { return 0.5 * (x - *c).squaredNorm(); },
      [c](const Vec& x) { return Vec(x - *c); }}};
  return FiniteSumObjective(ObjectiveKind::quadratic_distance,
                            static_cast<int>(c->size()), std::move(comps),
                            {1.0}, 1.0, 1.0);
}

FiniteSumObjective make_component_quadratics(std::vector<double> weights,
                                             std::vector<Vec> centers) {
  if (weights.size() != centers.size() || weights.empty())
    throw ConfigError("quadratics need matching nonempty weights/centers");
  const int d = static_cast<int>(centers[0].size());
  double L = 0.0, mu = weights[0];
  std::vector<Component> comps;
  std::vector<double> L_i;
  for (size_t i = 0; i < weights.size(); ++i) {
    const double w = weights[i];
    if (w <= 0) throw ConfigError("quadratic weights must be positive");
    auto c = std::make_shared<Vec>(std::move(centers[i]));
    comps.push_back(Component{
        [w, c](const Vec& x) { return 0.5 * w * (x - *c).squaredNorm(); },
        [w, c](const Vec& x) { return Vec(w * (x - *c)); }});
    L_i.push_back(w);
    L = std::max(L, w);
    mu = std::min(mu, w);
  }
  return FiniteSumObjective(ObjectiveKind::custom, d, std::move(comps),
                            std::move(L_i), L, mu);
}

FiniteSumObjective make_linear_components(std::vector<Vec> coefs) {
  if (coefs.empty()) throw ConfigError("need at least one linear component");
  const int d = static_cast<int>(coefs[0].size());
  std::vector<Component> comps;
  std::vector<double> L_i;
  for (auto& coef : coefs) {
    auto c = std::make_shared<Vec>(std::move(coef));
    comps.push_back(Component{[c](const Vec& x) { return c->dot(x); },
                              [c](const Vec&) { return *c; }});
    L_i.push_back(0.0);
  }
  return FiniteSumObjective(ObjectiveKind::custom, d, std::move(comps),
                            std::move(L_i), 0.0, 0.0);
}

GaussianSystem gaussian_system(int d, RngStream& rng) {
  if (d < 1) throw ConfigError("gaussian system needs d >= 1");
  const double sd = 1.0 / std::sqrt(static_cast<double>(d));
  Mat M(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) M(i, j) = sd * rng.normal();
  GaussianSystem sys;
  sys.W = M * M.transpose() + 1e-2 * Mat::Identity(d, d);
  sys.x_star = Vec(d);
  for (int i = 0; i < d; ++i) sys.x_star[i] = rng.normal();
  sys.b = sys.W * sys.x_star;
  return sys;
}

Reference reference_solution(const FiniteSumObjective& f, const ProxTerm& psi,
                             double tol, Vec x0) {
  if (tol <= 0) throw ConfigError("reference solver needs tol > 0");
  if (f.L() <= 0)
    throw ConfigError("reference solver needs a positive smoothness constant");
  const double gamma = 1.0 / f.L();
  Vec x = x0.size() == static_cast<Eigen::Index>(f.dim()) ? x0 : Vec::Zero(f.dim());
  Vec x_prev = x;
  Vec z = x;
  double t = 1.0;
  const long cap = 2000000;
  double residual = std::numeric_limits<double>::infinity();
  for (long k = 1; k <= cap; ++k) {
    Vec g = f.grad(z);
    Vec x_next = psi.prox(gamma, z - gamma * g);
    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    // adaptive restart keeps momentum useful on strongly convex problems
    if ((z - x_next).dot(x_next - x) > 0) {
      t = 1.0;
      t_next = 1.0;
      z = x_next;
    } else {
      z = x_next + ((t - 1.0) / t_next) * (x_next - x);
    }
    x_prev = x;
    x = x_next;
    t = t_next;
    residual = (x - x_prev).norm();
    if (residual <= tol * std::max(1.0, x_prev.norm())) {
      return Reference{x, f.value(x) + psi.value(x), k};
    }
  }
  std::ostringstream msg;
  msg << "reference solver did not converge within " << cap
      << " iterations; last residual " << residual;
  throw NumericalError(msg.str());
}

double sigma_star(const FiniteSumObjective& f, const Vec& x_star) {
  Vec mean = f.component_mean_grad(x_star);
  double s = 0.0;
  for (int i = 0; i < f.n(); ++i) s += (f.grad_i(i, x_star) - mean).squaredNorm();
  return s / static_cast<double>(f.n());
}

}  // namespace optlab
