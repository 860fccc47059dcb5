#include "optlab/trace.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace optlab {

void MetricTrace::add(TraceRow r) {
  if (!rows.empty()) {
    const TraceRow& prev = rows.back();
    if (r.grads < prev.grads || r.proxes < prev.proxes || r.bits < prev.bits)
      throw NumericalError("trace counters must be nondecreasing");
  }
  rows.push_back(r);
}

namespace {

void append_double(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

double parse_field_double(const std::string& tok, long line) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || tok.empty())
    throw ParseError("bad CSV number '" + tok + "'", line);
  return v;
}

long parse_field_long(const std::string& tok, long line) {
  errno = 0;
  char* end = nullptr;
  long v = std::strtol(tok.c_str(), &end, 10);
  if (end != tok.c_str() + tok.size() || tok.empty() || errno == ERANGE)
    throw ParseError("bad CSV integer '" + tok + "'", line);
  return v;
}

}  // namespace

std::string to_csv(const MetricTrace& trace) {
  std::string out = "step,grads,proxes,bits,f_gap,dist_sq,wall_ns\n";
  for (const TraceRow& r : trace.rows) {
    out += std::to_string(r.step);
    out += ',';
    out += std::to_string(r.grads);
    out += ',';
    out += std::to_string(r.proxes);
    out += ',';
    append_double(out, r.bits);
    out += ',';
    append_double(out, r.f_gap);
    out += ',';
    append_double(out, r.dist_sq);
    out += ',';
    out += std::to_string(r.wall_ns);
    out += '\n';
  }
  return out;
}

void write_csv(const MetricTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << to_csv(trace);
  if (!out) throw ConfigError("failed writing: " + path);
}

MetricTrace parse_csv(const std::string& text) {
  MetricTrace trace;
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "step,grads,proxes,bits,f_gap,dist_sq,wall_ns")
        throw ParseError("unexpected CSV header '" + line + "'", line_no);
      header_seen = true;
      continue;
    }
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, ',')) fields.push_back(tok);
    if (fields.size() != 7) throw ParseError("expected 7 CSV fields", line_no);
    TraceRow r;
    r.step = parse_field_long(fields[0], line_no);
    r.grads = parse_field_long(fields[1], line_no);
    r.proxes = parse_field_long(fields[2], line_no);
    r.bits = parse_field_double(fields[3], line_no);
    r.f_gap = parse_field_double(fields[4], line_no);
    r.dist_sq = parse_field_double(fields[5], line_no);
    r.wall_ns = parse_field_long(fields[6], line_no);
    trace.rows.push_back(r);
  }
  if (!header_seen) throw ParseError("missing CSV header", line_no);
  return trace;
}

MetricTrace read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open trace file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

}  // namespace optlab
