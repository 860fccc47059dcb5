#ifndef OPTLAB_OBJECTIVE_HPP
#define OPTLAB_OBJECTIVE_HPP

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "optlab/types.hpp"

namespace optlab {

enum class ObjectiveKind { logistic_l2, least_squares_l2, quadratic_distance, custom };

struct Component {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
};

// Finite sum f(x) = scale * sum_i f_i(x). By default scale = 1/n so that
// f is the mean of its components; importance resampling produces
// objectives whose component count differs from the normalizer, which is
// why the scale is stored explicitly.
class FiniteSumObjective {
 public:
  FiniteSumObjective() = default;
  FiniteSumObjective(ObjectiveKind kind, int dim, std::vector<Component> comps,
                     std::vector<double> smoothness_i, double smoothness,
                     double strong_convexity, double scale = 0.0)
      : kind_(kind),
        dim_(dim),
        comps_(std::move(comps)),
        L_i_(std::move(smoothness_i)),
        L_(smoothness),
        mu_(strong_convexity),
        scale_(scale) {
    if (scale_ == 0.0) scale_ = comps_.empty() ? 1.0 : 1.0 / static_cast<double>(comps_.size());
    if (L_i_.size() != comps_.size())
      throw ConfigError("per-component smoothness count mismatch");
    if (mu_ > L_ + 1e-12 * std::abs(L_))
      throw ConfigError("strong convexity exceeds smoothness");
  }

  int n() const { return static_cast<int>(comps_.size()); }
  int dim() const { return dim_; }
  ObjectiveKind kind() const { return kind_; }
  double scale() const { return scale_; }

  double L() const { return L_; }
  double mu() const { return mu_; }
  double L_i(int i) const { return L_i_[static_cast<size_t>(i)]; }
  const std::vector<double>& L_all() const { return L_i_; }
  double L_max() const;

  double value(const Vec& x) const;
  Vec grad(const Vec& x) const;
  double value_i(int i, const Vec& x) const { return comps_[static_cast<size_t>(i)].value(x); }
  Vec grad_i(int i, const Vec& x) const { return comps_[static_cast<size_t>(i)].grad(x); }

  // Mean of the component gradients; equals grad() when scale == 1/n.
  Vec component_mean_grad(const Vec& x) const;

  // Bregman divergence D_f(x, y) = f(x) - f(y) - <grad f(y), x - y>.
  double bregman(const Vec& x, const Vec& y) const;
  double bregman_i(int i, const Vec& x, const Vec& y) const;

 private:
  ObjectiveKind kind_ = ObjectiveKind::custom;
  int dim_ = 0;
  std::vector<Component> comps_;
  std::vector<double> L_i_;
  double L_ = 0.0;
  double mu_ = 0.0;
  double scale_ = 1.0;
};

}  // namespace optlab

#endif
