#include "optlab/objective.hpp"

#include <algorithm>

namespace optlab {

double FiniteSumObjective::L_max() const {
  double m = 0.0;
  for (double l : L_i_) m = std::max(m, l);
  return m;
}

double FiniteSumObjective::value(const Vec& x) const {
  double s = 0.0;
  for (const auto& c : comps_) s += c.value(x);
  return scale_ * s;
}

Vec FiniteSumObjective::grad(const Vec& x) const {
  Vec g = Vec::Zero(dim_);
  for (const auto& c : comps_) g += c.grad(x);
  return scale_ * g;
}

Vec FiniteSumObjective::component_mean_grad(const Vec& x) const {
  Vec g = Vec::Zero(dim_);
  for (const auto& c : comps_) g += c.grad(x);
  return g / static_cast<double>(comps_.size());
}

double FiniteSumObjective::bregman(const Vec& x, const Vec& y) const {
  return value(x) - value(y) - grad(y).dot(x - y);
}

double FiniteSumObjective::bregman_i(int i, const Vec& x, const Vec& y) const {
  const auto& c = comps_[static_cast<size_t>(i)];
  return c.value(x) - c.value(y) - c.grad(y).dot(x - y);
}

}  // namespace optlab
