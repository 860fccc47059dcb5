#ifndef OPTLAB_TYPES_HPP
#define OPTLAB_TYPES_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace optlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Bad inputs, malformed configs, dimension mismatches.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Parse failures carry the 1-based line number of the offending line.
class ParseError : public ConfigError {
 public:
  ParseError(const std::string& msg, long line)
      : ConfigError(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

// Divergence, non-convergence within iteration caps, NaNs.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Divergence guard shared by the solver loops.
inline void guard_iterate(const Vec& x, const char* who) {
  if (!x.allFinite() || x.norm() > 1e100)
    throw NumericalError(std::string(who) +
                         " diverged; check the stepsize against the problem "
                         "constants");
}

}  // namespace optlab

#endif
