#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dfgt {

//! A fixed set of D-dimensional points stored as an N x D row-major matrix.
//! The row index is the stable identity of a point; tree construction works
//! on permuted index arrays and never reorders the rows.
class PointSet {
public:
  PointSet(std::size_t n, std::size_t dim)
    : n_(n)
    , dim_(dim)
    , data_(n * dim, 0.0)
  {
  }

  PointSet(std::size_t n, std::size_t dim, std::vector<double> data);

  std::size_t size() const { return n_; }
  std::size_t dim() const { return dim_; }

  std::span<const double> row(std::size_t i) const
  {
    return { data_.data() + i * dim_, dim_ };
  }
  std::span<double> row(std::size_t i) { return { data_.data() + i * dim_, dim_ }; }

  const std::vector<double>& data() const { return data_; }

private:
  std::size_t n_;
  std::size_t dim_;
  std::vector<double> data_;
};

//! Isotropic Gaussian kernel K_h(d) = exp(-d^2 / (2 h^2)).
//! K_h(0) = 1 and the value decreases monotonically with distance.
class GaussianKernel {
public:
  explicit GaussianKernel(double bandwidth);

  double bandwidth() const { return h_; }

  double value(double dist) const { return value_sq(dist * dist); }

  //! Kernel evaluated on a squared distance; the engines work with squared
  //! distances throughout to avoid square roots in inner loops.
  double value_sq(double dist_sq) const { return std::exp(scale_ * dist_sq); }

private:
  double h_;
  double scale_; // -1 / (2 h^2)
};

//! Integral of the D-dimensional Gaussian kernel, (2 pi h^2)^(D/2).
//! Dividing a raw kernel sum by |R| * gaussian_normalizer turns it into a
//! density estimate.
double gaussian_normalizer(std::size_t dim, double bandwidth);

//! Squared Euclidean distance between two equal-length vectors.
double squared_distance(std::span<const double> a, std::span<const double> b);

//! Parses a text file with one point per line, fields separated by a comma
//! or whitespace (auto-detected from the first non-empty line unless given).
//! The dimension is inferred from the first row. Ragged rows, unparseable
//! fields and non-finite values are reported with their line number.
PointSet load_points(const std::string& path, std::optional<char> delimiter = {});

//! Writes one value per line with 17 significant digits, in input order.
//! The output parses back through load_points as an N x 1 point set.
void write_values(const std::string& path, std::span<const double> values);

} // namespace dfgt
