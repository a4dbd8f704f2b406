#include "dfgt/dataset.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dfgt {

PointSet::PointSet(std::size_t n, std::size_t dim, std::vector<double> data)
  : n_(n)
  , dim_(dim)
  , data_(std::move(data))
{
  if (n_ == 0 || dim_ == 0) {
    throw std::invalid_argument("PointSet requires N >= 1 and D >= 1");
  }
  if (data_.size() != n_ * dim_) {
    throw std::invalid_argument("PointSet data size does not match N x D");
  }
}

GaussianKernel::GaussianKernel(double bandwidth)
  : h_(bandwidth)
  , scale_(-1.0 / (2.0 * bandwidth * bandwidth))
{
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw std::invalid_argument("bandwidth must be positive and finite");
  }
}

double gaussian_normalizer(std::size_t dim, double bandwidth)
{
  if (dim == 0 || !(bandwidth > 0.0)) {
    throw std::invalid_argument("gaussian_normalizer requires D >= 1 and h > 0");
  }
  constexpr double two_pi = 6.283185307179586476925286766559;
  return std::pow(two_pi * bandwidth * bandwidth, 0.5 * static_cast<double>(dim));
}

double squared_distance(std::span<const double> a, std::span<const double> b)
{
  double sq = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    sq += diff * diff;
  }
  return sq;
}

namespace {

void split_line(const std::string& line, char delim, std::vector<std::string>& out)
{
  out.clear();
  if (delim == ' ') {
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
      out.push_back(tok);
    }
    return;
  }
  std::string tok;
  std::istringstream ss(line);
  while (std::getline(ss, tok, delim)) {
    out.push_back(tok);
  }
}

double parse_field(const std::string& tok, std::size_t line_no)
{
  // std::from_chars skips no whitespace, so trim first.
  std::size_t b = tok.find_first_not_of(" \t\r");
  std::size_t e = tok.find_last_not_of(" \t\r");
  if (b == std::string::npos) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": empty field");
  }
  double value = 0.0;
  const char* first = tok.data() + b;
  const char* last = tok.data() + e + 1;
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": unparseable numeric field '" +
                             tok.substr(b, e - b + 1) + "'");
  }
  if (!std::isfinite(value)) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": non-finite value");
  }
  return value;
}

} // namespace

PointSet load_points(const std::string& path, std::optional<char> delimiter)
{
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "'");
  }

  std::vector<double> data;
  std::size_t dim = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::string line;
  std::vector<std::string> fields;
  char delim = delimiter.value_or('\0');

  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    if (delim == '\0') {
      delim = line.find(',') != std::string::npos ? ',' : ' ';
    }
    split_line(line, delim, fields);
    if (fields.empty()) {
      continue;
    }
    if (dim == 0) {
      dim = fields.size();
    } else if (fields.size() != dim) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected " +
                               std::to_string(dim) + " fields, got " +
                               std::to_string(fields.size()));
    }
    for (const auto& tok : fields) {
      data.push_back(parse_field(tok, line_no));
    }
    ++rows;
  }
  if (rows == 0) {
    throw std::runtime_error("'" + path + "' contains no points");
  }
  return PointSet(rows, dim, std::move(data));
}

void write_values(const std::string& path, std::span<const double> values)
{
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write '" + path + "'");
  }
  char buf[64];
  for (double v : values) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", v);
    out << buf;
  }
  if (!out) {
    throw std::runtime_error("write failed for '" + path + "'");
  }
}

} // namespace dfgt
