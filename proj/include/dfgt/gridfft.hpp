#pragma once

#include "dfgt/dataset.hpp"

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace dfgt {

//! Tensor grid of M_d nodes per dimension spanning [g_min, g_max], with a
//! count matrix filled by linear binning. Layout is row-major with
//! dimension 0 slowest.
struct Grid {
  std::vector<std::size_t> sizes;
  std::vector<double> g_min;
  std::vector<double> g_max;
  std::vector<double> spacing; // (g_max - g_min) / (M_d - 1)
  std::vector<double> counts;  // prod M_d entries

  std::size_t cell_count() const;
};

//! Grid over an explicit extent; every size must be >= 2.
Grid make_grid(std::span<const double> g_min, std::span<const double> g_max,
               std::span<const std::size_t> sizes);

//! Grid spanning the joint extent of both point sets (so queries can be
//! interpolated later).
Grid make_grid(const PointSet& refs, const PointSet& queries,
               std::span<const std::size_t> sizes);

//! Distributes each point's unit weight to the 2^D corners of its cell with
//! tensor-product linear interpolation weights. Total weight is conserved.
void bin_linear(const PointSet& points, Grid& grid);

//! Raised when the requested grid exceeds the cell cap or the dimension
//! limit (D <= 3; storage is exponential in D).
class GridInfeasibleError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

//! Grid-binned FFT kernel summation: linear binning, truncated kernel weight
//! matrix (per-dimension radius L_d = min(floor(4 h / delta_d), M_d - 1)),
//! zero-padded circular convolution via FFT, then linear interpolation of
//! the per-query sums from the grid estimates. Returns unnormalized sums to
//! match the other engines.
std::vector<double> gridfft_kde(const PointSet& queries, const PointSet& refs, double h,
                                std::span<const std::size_t> grid_sizes,
                                std::size_t cell_cap);

//! In-place radix-2 complex FFT; size must be a power of two. The inverse
//! transform includes the 1/N scaling.
void fft_radix2(std::span<std::complex<double>> data, bool inverse);

//! FFT along every axis of a row-major array of the given shape (all shape
//! entries powers of two).
void fft_nd(std::span<std::complex<double>> data, std::span<const std::size_t> shape,
            bool inverse);

} // namespace dfgt
