#include "optlab/dataset.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace optlab {

double SparseRow::dot(const Vec& x) const {
  double s = 0.0;
  for (const auto& [idx, val] : entries) s += val * x[idx];
  return s;
}

void SparseRow::add_scaled_to(double coef, Vec& out) const {
  for (const auto& [idx, val] : entries) out[idx] += coef * val;
}

double SparseRow::squared_norm() const {
  double s = 0.0;
  for (const auto& [idx, val] : entries) s += val * val;
  return s;
}

Dataset Dataset::slice(int begin, int end) const {
  Dataset out;
  out.n_features = n_features;
  out.rows.assign(rows.begin() + begin, rows.begin() + end);
  out.labels.assign(labels.begin() + begin, labels.begin() + end);
  return out;
}

namespace {

double parse_double(std::string_view tok, long line) {
  const std::string s(tok);
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || s.empty() || errno == ERANGE ||
      !std::isfinite(v)) {
    throw ParseError("non-numeric token '" + s + "'", line);
  }
  return v;
}

long parse_index(std::string_view tok, long line) {
  const std::string s(tok);
  errno = 0;
  char* end = nullptr;
  long v = std::strtol(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size() || s.empty() || errno == ERANGE) {
    throw ParseError("malformed feature index '" + s + "'", line);
  }
  return v;
}

}  // namespace

Dataset parse_libsvm(std::string_view text) {
  Dataset ds;
  size_t pos = 0;
  long line_no = 0;
  while (pos <= text.size()) {
    if (pos == text.size()) break;
    size_t eol = text.find('\n', pos);
    std::string_view line = (eol == std::string_view::npos)
                                ? text.substr(pos)
                                : text.substr(pos, eol - pos);
    pos = (eol == std::string_view::npos) ? text.size() : eol + 1;
    ++line_no;

    if (size_t hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' ||
                             line.back() == '\t'))
      line.remove_suffix(1);
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t'))
      line.remove_prefix(1);
    if (line.empty()) continue;

    std::istringstream ss{std::string(line)};
    std::string tok;
    ss >> tok;
    double label = parse_double(tok, line_no);

    SparseRow row;
    long prev_idx = 0;
    while (ss >> tok) {
      size_t colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 ||
          colon == tok.size() - 1) {
        throw ParseError("malformed index:value pair '" + tok + "'", line_no);
      }
      long idx = parse_index(std::string_view(tok).substr(0, colon), line_no);
      double val = parse_double(std::string_view(tok).substr(colon + 1),
                                line_no);
      if (idx < 1) throw ParseError("feature index must be >= 1", line_no);
      if (idx <= prev_idx)
        throw ParseError("feature indices not strictly increasing", line_no);
      prev_idx = idx;
      row.entries.emplace_back(static_cast<int>(idx - 1), val);
      if (idx > ds.n_features) ds.n_features = static_cast<int>(idx);
    }
    ds.rows.push_back(std::move(row));
    ds.labels.push_back(label);
  }

  // Label convention: LIBSVM corpora mix {-1,+1} and {1,2}; remap to {0,1}.
  std::set<double> values(ds.labels.begin(), ds.labels.end());
  auto subset_of = [&](std::initializer_list<double> allowed) {
    for (double v : values) {
      bool ok = false;
      for (double a : allowed) ok = ok || (v == a);
      if (!ok) return false;
    }
    return !values.empty();
  };
  if (subset_of({-1.0, 1.0})) {
    for (double& l : ds.labels) l = (l > 0.0) ? 1.0 : 0.0;
  } else if (subset_of({1.0, 2.0})) {
    for (double& l : ds.labels) l = (l == 2.0) ? 1.0 : 0.0;
  }
  return ds;
}

Dataset load_libsvm_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open dataset file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_libsvm(buf.str());
}

std::string serialize_libsvm(const Dataset& ds) {
  std::ostringstream out;
  out.precision(17);
  for (int i = 0; i < ds.n_samples(); ++i) {
    out << ds.labels[static_cast<size_t>(i)];
    for (const auto& [idx, val] : ds.rows[static_cast<size_t>(i)].entries)
      out << ' ' << (idx + 1) << ':' << val;
    out << '\n';
  }
  return out.str();
}

}  // namespace optlab
