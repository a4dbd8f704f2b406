#include "dfgt/gridfft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dfgt {

std::size_t Grid::cell_count() const
{
  std::size_t n = 1;
  for (std::size_t m : sizes) {
    n *= m;
  }
  return n;
}

Grid make_grid(std::span<const double> g_min, std::span<const double> g_max,
               std::span<const std::size_t> sizes)
{
  Grid grid;
  grid.sizes.assign(sizes.begin(), sizes.end());
  grid.g_min.assign(g_min.begin(), g_min.end());
  grid.g_max.assign(g_max.begin(), g_max.end());
  grid.spacing.resize(sizes.size());
  for (std::size_t d = 0; d < sizes.size(); ++d) {
    if (sizes[d] < 2) {
      throw std::invalid_argument("grid needs at least 2 nodes per dimension");
    }
    if (!(grid.g_max[d] > grid.g_min[d])) {
      grid.g_max[d] = grid.g_min[d] + 1.0; // collapsed extent
    }
    grid.spacing[d] =
      (grid.g_max[d] - grid.g_min[d]) / static_cast<double>(sizes[d] - 1);
  }
  grid.counts.assign(grid.cell_count(), 0.0);
  return grid;
}

Grid make_grid(const PointSet& refs, const PointSet& queries,
               std::span<const std::size_t> sizes)
{
  const std::size_t dim = refs.dim();
  std::vector<double> lo(refs.row(0).begin(), refs.row(0).end());
  std::vector<double> hi = lo;
  auto widen = [&](const PointSet& pts) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto row = pts.row(i);
      for (std::size_t d = 0; d < dim; ++d) {
        lo[d] = std::min(lo[d], row[d]);
        hi[d] = std::max(hi[d], row[d]);
      }
    }
  };
  widen(refs);
  widen(queries);
  return make_grid(lo, hi, sizes);
}

namespace {

//! Per-point cell anchor and interpolation fraction along each dimension.
void cell_coords(const Grid& grid, std::span<const double> point,
                 std::span<std::size_t> anchor, std::span<double> frac)
{
  for (std::size_t d = 0; d < grid.sizes.size(); ++d) {
    const double t = (point[d] - grid.g_min[d]) / grid.spacing[d];
    std::size_t i = static_cast<std::size_t>(std::max(0.0, std::floor(t)));
    i = std::min(i, grid.sizes[d] - 2);
    anchor[d] = i;
    frac[d] = t - static_cast<double>(i);
  }
}

std::vector<std::size_t> row_major_strides(std::span<const std::size_t> shape)
{
  std::vector<std::size_t> strides(shape.size());
  std::size_t s = 1;
  for (std::size_t d = shape.size(); d-- > 0;) {
    strides[d] = s;
    s *= shape[d];
  }
  return strides;
}

} // namespace

void bin_linear(const PointSet& points, Grid& grid)
{
  const std::size_t dim = grid.sizes.size();
  const auto strides = row_major_strides(grid.sizes);
  std::vector<std::size_t> anchor(dim);
  std::vector<double> frac(dim);
  for (std::size_t i = 0; i < points.size(); ++i) {
    cell_coords(grid, points.row(i), anchor, frac);
    for (std::size_t corner = 0; corner < (std::size_t{ 1 } << dim); ++corner) {
      double w = 1.0;
      std::size_t index = 0;
      for (std::size_t d = 0; d < dim; ++d) {
        const bool high = (corner >> d) & 1;
        w *= high ? frac[d] : 1.0 - frac[d];
        index += (anchor[d] + (high ? 1 : 0)) * strides[d];
      }
      grid.counts[index] += w;
    }
  }
}

void fft_radix2(std::span<std::complex<double>> data, bool inverse)
{
  const std::size_t n = data.size();
  if (n == 0 || (n & (n - 1)) != 0) {
    throw std::invalid_argument("FFT size must be a power of two");
  }
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) {
      j ^= bit;
    }
    j ^= bit;
    if (i < j) {
      std::swap(data[i], data[j]);
    }
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle =
      (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wl(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = data[i + k];
        const std::complex<double> v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& x : data) {
      x *= scale;
    }
  }
}

void fft_nd(std::span<std::complex<double>> data, std::span<const std::size_t> shape,
            bool inverse)
{
  const auto strides = row_major_strides(shape);
  std::vector<std::complex<double>> line;
  for (std::size_t d = 0; d < shape.size(); ++d) {
    const std::size_t n = shape[d];
    if (n == 1) {
      continue;
    }
    line.resize(n);
    const std::size_t stride = strides[d];
    std::size_t outer_count = 1;
    for (std::size_t k = 0; k < d; ++k) {
      outer_count *= shape[k];
    }
    for (std::size_t outer = 0; outer < outer_count; ++outer) {
      const std::size_t outer_base = outer * n * stride;
      for (std::size_t inner = 0; inner < stride; ++inner) {
        const std::size_t base = outer_base + inner;
        for (std::size_t i = 0; i < n; ++i) {
          line[i] = data[base + i * stride];
        }
        fft_radix2(line, inverse);
        for (std::size_t i = 0; i < n; ++i) {
          data[base + i * stride] = line[i];
        }
      }
    }
  }
}

namespace {

std::size_t next_pow2(std::size_t n)
{
  std::size_t p = 1;
  while (p < n) {
    p <<= 1;
  }
  return p;
}

} // namespace

std::vector<double> gridfft_kde(const PointSet& queries, const PointSet& refs, double h,
                                std::span<const std::size_t> grid_sizes,
                                std::size_t cell_cap)
{
  const std::size_t dim = refs.dim();
  if (queries.dim() != dim) {
    throw std::invalid_argument("query and reference dimensions differ");
  }
  if (grid_sizes.size() != dim) {
    throw std::invalid_argument("grid_sizes must have one entry per dimension");
  }
  if (dim > 3) {
    throw GridInfeasibleError("grid infeasible: D > 3");
  }
  if (!(h > 0.0)) {
    throw std::invalid_argument("bandwidth must be positive");
  }

  Grid grid = make_grid(refs, queries, grid_sizes);

  // Truncation radius and padded shape per dimension.
  std::vector<std::size_t> radius(dim);
  std::vector<std::size_t> padded(dim);
  std::size_t padded_cells = 1;
  for (std::size_t d = 0; d < dim; ++d) {
    const double raw = std::floor(4.0 * h / grid.spacing[d]);
    radius[d] = std::min(static_cast<std::size_t>(std::max(0.0, raw)),
                         grid.sizes[d] - 1);
    padded[d] = next_pow2(grid.sizes[d] + radius[d]);
    if (padded_cells > cell_cap / padded[d]) {
      throw GridInfeasibleError("grid infeasible: padded grid exceeds cell cap");
    }
    padded_cells *= padded[d];
  }

  bin_linear(refs, grid);

  const auto grid_strides = row_major_strides(grid.sizes);
  const auto pad_strides = row_major_strides(padded);

  // Zero-padded count matrix: the M_1 x ... x M_D block sits in the corner.
  std::vector<std::complex<double>> count_z(padded_cells);
  {
    std::vector<std::size_t> idx(dim, 0);
    for (std::size_t flat = 0; flat < grid.counts.size(); ++flat) {
      std::size_t padded_index = 0;
      for (std::size_t d = 0; d < dim; ++d) {
        padded_index += idx[d] * pad_strides[d];
      }
      count_z[padded_index] = grid.counts[flat];
      for (std::size_t d = dim; d-- > 0;) {
        if (++idx[d] < grid.sizes[d]) {
          break;
        }
        idx[d] = 0;
      }
    }
  }

  // Wrap-around kernel weight matrix: separable, so take the tensor product
  // of per-dimension wrapped vectors (positive lags up front, mirrored tail
  // for negative lags, zeros between).
  std::vector<std::vector<double>> wrapped(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    wrapped[d].assign(padded[d], 0.0);
    for (std::size_t l = 0; l <= radius[d]; ++l) {
      const double x = static_cast<double>(l) * grid.spacing[d];
      const double w = std::exp(-0.5 * x * x / (h * h));
      wrapped[d][l] = w;
      if (l > 0) {
        wrapped[d][padded[d] - l] = w;
      }
    }
  }
  std::vector<std::complex<double>> kernel_z(padded_cells);
  {
    std::vector<std::size_t> idx(dim, 0);
    for (std::size_t flat = 0; flat < padded_cells; ++flat) {
      double w = 1.0;
      for (std::size_t d = 0; d < dim; ++d) {
        w *= wrapped[d][idx[d]];
      }
      kernel_z[flat] = w;
      for (std::size_t d = dim; d-- > 0;) {
        if (++idx[d] < padded[d]) {
          break;
        }
        idx[d] = 0;
      }
    }
  }

  fft_nd(count_z, padded, false);
  fft_nd(kernel_z, padded, false);
  for (std::size_t i = 0; i < padded_cells; ++i) {
    count_z[i] *= kernel_z[i];
  }
  fft_nd(count_z, padded, true);

  // Extract the corner block holding the grid-node sums.
  std::vector<double> grid_sums(grid.counts.size());
  {
    std::vector<std::size_t> idx(dim, 0);
    for (std::size_t flat = 0; flat < grid_sums.size(); ++flat) {
      std::size_t padded_index = 0;
      for (std::size_t d = 0; d < dim; ++d) {
        padded_index += idx[d] * pad_strides[d];
      }
      grid_sums[flat] = count_z[padded_index].real();
      for (std::size_t d = dim; d-- > 0;) {
        if (++idx[d] < grid.sizes[d]) {
          break;
        }
        idx[d] = 0;
      }
    }
  }

  // Gather per-query estimates with the same linear weights used to bin.
  std::vector<double> sums(queries.size(), 0.0);
  std::vector<std::size_t> anchor(dim);
  std::vector<double> frac(dim);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    cell_coords(grid, queries.row(i), anchor, frac);
    double value = 0.0;
    for (std::size_t corner = 0; corner < (std::size_t{ 1 } << dim); ++corner) {
      double w = 1.0;
      std::size_t index = 0;
      for (std::size_t d = 0; d < dim; ++d) {
        const bool high = (corner >> d) & 1;
        w *= high ? frac[d] : 1.0 - frac[d];
        index += (anchor[d] + (high ? 1 : 0)) * grid_strides[d];
      }
      value += w * grid_sums[index];
    }
    sums[i] = value;
  }
  return sums;
}

} // namespace dfgt
