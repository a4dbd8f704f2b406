#pragma once

#include "dfgt/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace testsupport {

//! Self-deleting temp file; write() fills it with literal text.
class TempFile {
public:
  explicit TempFile(const std::string& tag)
  {
    static int counter = 0;
    path_ = (std::filesystem::temp_directory_path() /
             ("dfgt_test_" + tag + "_" + std::to_string(counter++) + ".csv"))
              .string();
  }
  ~TempFile() { std::remove(path_.c_str()); }

  const std::string& path() const { return path_; }

  void write(const std::string& text) const
  {
    std::ofstream out(path_);
    out << text;
  }

private:
  std::string path_;
};

inline dfgt::PointSet make_points(std::size_t dim, std::vector<double> flat)
{
  const std::size_t n = flat.size() / dim;
  return dfgt::PointSet(n, dim, std::move(flat));
}

//! Brute-force far-field moment oracle: M_alpha = sum (1/alpha!) u^alpha with
//! u = (r - center)/sqrt(2 h^2), computed with explicit pow loops.
inline double moment_oracle(const dfgt::PointSet& pts, const std::vector<int>& idx,
                            const std::vector<double>& center, double h,
                            const std::vector<int>& alpha)
{
  double total = 0.0;
  const double scale = 1.0 / (h * std::sqrt(2.0));
  for (int r : idx) {
    double term = 1.0;
    for (std::size_t d = 0; d < center.size(); ++d) {
      const double u = (pts.row(r)[d] - center[d]) * scale;
      for (int k = 0; k < alpha[d]; ++k) {
        term *= u;
      }
    }
    total += term;
  }
  double fact = 1.0;
  for (int a : alpha) {
    for (int k = 2; k <= a; ++k) {
      fact *= k;
    }
  }
  return total / fact;
}

//! Explicit Hermite polynomials H_0..H_5 evaluated from their coefficients,
//! independent of the recurrence implementation.
inline double hermite_poly_oracle(int n, double t)
{
  switch (n) {
  case 0:
    return 1.0;
  case 1:
    return 2.0 * t;
  case 2:
    return 4.0 * t * t - 2.0;
  case 3:
    return 8.0 * t * t * t - 12.0 * t;
  case 4:
    return 16.0 * std::pow(t, 4) - 48.0 * t * t + 12.0;
  case 5:
    return 32.0 * std::pow(t, 5) - 160.0 * t * t * t + 120.0 * t;
  default:
    return 0.0;
  }
}

inline double hermite_fn_oracle(int n, double t)
{
  return std::exp(-t * t) * hermite_poly_oracle(n, t);
}

} // namespace testsupport
