#ifndef OPTLAB_DATASET_HPP
#define OPTLAB_DATASET_HPP

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "optlab/types.hpp"

namespace optlab {

// One sparse sample: (index, value) pairs with strictly increasing
// 0-based indices.
struct SparseRow {
  std::vector<std::pair<int, double>> entries;

  double dot(const Vec& x) const;
  void add_scaled_to(double coef, Vec& out) const;
  double squared_norm() const;
};

struct Dataset {
  std::vector<SparseRow> rows;
  std::vector<double> labels;
  int n_features = 0;

  int n_samples() const { return static_cast<int>(rows.size()); }
  Dataset slice(int begin, int end) const;  // [begin, end)
};

// LIBSVM text format: each nonempty line is `label idx:val idx:val ...`
// with 1-based strictly increasing indices. `#` starts a comment that runs
// to the end of the line; CRLF and LF both accepted. Indices are stored
// 0-based; n_features is the largest index seen. If the label set is a
// subset of {-1,+1} the labels are remapped -1 -> 0, +1 -> 1; otherwise if
// it is a subset of {1,2} they are remapped 1 -> 0, 2 -> 1; otherwise they
// are kept as-is.
Dataset parse_libsvm(std::string_view text);
Dataset load_libsvm_file(const std::string& path);

// Inverse of parse_libsvm up to label remapping (0/1 labels serialize as
// written). parse_libsvm(serialize_libsvm(ds)) == ds for any parsed ds.
std::string serialize_libsvm(const Dataset& ds);

}  // namespace optlab

#endif
