#ifndef OPTLAB_PROBLEMS_HPP
#define OPTLAB_PROBLEMS_HPP

#include <utility>

#include "optlab/dataset.hpp"
#include "optlab/objective.hpp"
#include "optlab/prox.hpp"
#include "optlab/rng.hpp"

namespace optlab {

// Binary logistic regression with l2 regularization:
//   f_i(x) = -(b_i log h(a_i^T x) + (1 - b_i) log(1 - h(a_i^T x))) + (l2/2)||x||^2,
// h the sigmoid, computed in the numerically stable branch form.
// L_i = ||a_i||^2 / 4 + l2, L = ||A||^2 / (4n) + l2 (spectral norm via
// power iteration), mu = l2. Requires labels in {0, 1}.
FiniteSumObjective make_logistic(const Dataset& ds, double lambda2);

// Least squares f_i(x) = (a_i^T x - b_i)^2 / 2 + (l2/2)||x||^2 with rows of
// a dense matrix. L_i = ||a_i||^2 + l2, L = ||A||^2 / n + l2, mu = l2.
FiniteSumObjective make_least_squares(Mat A, Vec b, double lambda2);

// f(x) = ||x - x0||^2 / 2 as a single-component sum; L = mu = 1.
FiniteSumObjective make_quadratic_distance(Vec x0);

// Separable quadratics f_i(x) = (w_i / 2) ||x - c_i||^2 given curvature
// weights and centers; L = max w, mu = min w, minimizer of the mean is the
// w-weighted average of the centers.
FiniteSumObjective make_component_quadratics(std::vector<double> weights,
                                             std::vector<Vec> centers);

// Linear components f_i(x) = <c_i, x>; zero curvature (L = 0 for each
// component but stored smoothness is 0, aggregate L = 0).
FiniteSumObjective make_linear_components(std::vector<Vec> coefs);

struct GaussianSystem {
  Mat W;
  Vec b;
  Vec x_star;
};

// W = M M^T + 1e-2 I with M entries iid N(0, 1/sqrt(d)); x* standard
// normal; b = W x*. Symmetric positive definite by construction.
GaussianSystem gaussian_system(int d, RngStream& rng);

// Spectral norm ||A|| of the data matrix whose rows are the dataset rows;
// deterministic power iteration on A^T A, relative tolerance 1e-10,
// 1000-iteration cap, seed-derived start vector.
double spectral_norm_rows(const Dataset& ds);
double spectral_norm_dense(const Mat& A);

struct Reference {
  Vec x;
  double fval;  // smooth part + psi at x
  long iterations;
};

// High-accuracy solver defining ground truth: accelerated proximal
// gradient (with adaptive restart) at stepsize 1/L until
// ||x_{k+1} - x_k|| <= tol * max(1, ||x_k||). Throws NumericalError with
// the last residual if the iteration cap is hit.
Reference reference_solution(const FiniteSumObjective& f, const ProxTerm& psi,
                             double tol, Vec x0 = Vec());

// Population variance of the component gradients at x*:
//   (1/n) sum_i || grad f_i(x*) - mean_j grad f_j(x*) ||^2.
double sigma_star(const FiniteSumObjective& f, const Vec& x_star);

inline double bregman(const FiniteSumObjective& f, const Vec& x, const Vec& y) {
  return f.bregman(x, y);
}

}  // namespace optlab

#endif
