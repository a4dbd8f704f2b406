#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dfgt/datagen.hpp"
#include "dfgt/engine.hpp"
#include "dfgt/gridfft.hpp"
#include "support.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

using namespace dfgt;
using testsupport::make_points;

namespace {

//! Nearest-neighbor binning oracle: all weight to the closest grid node.
std::vector<double> nn_bin_oracle(const PointSet& points, const Grid& grid)
{
  std::vector<double> counts(grid.cell_count(), 0.0);
  const std::size_t dim = grid.sizes.size();
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::size_t index = 0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double t = (points.row(i)[d] - grid.g_min[d]) / grid.spacing[d];
      const auto nearest =
        std::min(static_cast<std::size_t>(std::llround(t)), grid.sizes[d] - 1);
      index = index * grid.sizes[d] + nearest;
    }
    counts[index] += 1.0;
  }
  return counts;
}

} // namespace

TEST_CASE("linear binning reproduces the worked 2-D weights")
{
  // Cell corners at (0,0), (0,150), (150,150), (150,0); the point (50,50)
  // splits its unit weight 4/9, 2/9, 1/9, 2/9.
  const std::vector<double> lo{ 0.0, 0.0 };
  const std::vector<double> hi{ 150.0, 150.0 };
  const std::vector<std::size_t> sizes{ 2, 2 };
  Grid grid = make_grid(lo, hi, sizes);
  const PointSet pt = make_points(2, { 50.0, 50.0 });
  bin_linear(pt, grid);

  CHECK(grid.counts[0] == doctest::Approx(4.0 / 9.0).epsilon(1e-12)); // (0,0)
  CHECK(grid.counts[1] == doctest::Approx(2.0 / 9.0).epsilon(1e-12)); // (0,150)
  CHECK(grid.counts[2] == doctest::Approx(2.0 / 9.0).epsilon(1e-12)); // (150,0)
  CHECK(grid.counts[3] == doctest::Approx(1.0 / 9.0).epsilon(1e-12)); // (150,150)

  const auto nn = nn_bin_oracle(pt, grid);
  CHECK(nn[0] == 1.0);
  CHECK(nn[1] + nn[2] + nn[3] == 0.0);
}

TEST_CASE("a point on a grid node gets all its weight")
{
  const std::vector<double> lo{ 0.0 };
  const std::vector<double> hi{ 3.0 };
  const std::vector<std::size_t> sizes{ 4 };
  Grid grid = make_grid(lo, hi, sizes);
  const PointSet pt = make_points(1, { 2.0 });
  bin_linear(pt, grid);
  CHECK(grid.counts[2] == 1.0);
  CHECK(grid.counts[0] + grid.counts[1] + grid.counts[3] == 0.0);
}

TEST_CASE("binning conserves total weight")
{
  const PointSet pts = generate_points(Distribution::gaussian_mixture, 5000, 2, 8);
  const std::vector<std::size_t> sizes{ 37, 21 };
  Grid grid = make_grid(pts, pts, sizes);
  bin_linear(pts, grid);
  double total = 0.0;
  for (double c : grid.counts) {
    total += c;
  }
  CHECK(total == doctest::Approx(5000.0).epsilon(1e-9));
}

TEST_CASE("radix-2 FFT matches a direct DFT")
{
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const std::size_t n = 32;
  std::vector<std::complex<double>> data(n);
  for (auto& x : data) {
    x = { dist(rng), dist(rng) };
  }
  auto reference = [&](std::size_t k) {
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k * j) /
                           static_cast<double>(n);
      acc += data[j] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    return acc;
  };
  std::vector<std::complex<double>> expected(n);
  for (std::size_t k = 0; k < n; ++k) {
    expected[k] = reference(k);
  }
  std::vector<std::complex<double>> transformed = data;
  fft_radix2(transformed, false);
  for (std::size_t k = 0; k < n; ++k) {
    CHECK(std::abs(transformed[k] - expected[k]) < 1e-10);
  }
  fft_radix2(transformed, true);
  for (std::size_t k = 0; k < n; ++k) {
    CHECK(std::abs(transformed[k] - data[k]) < 1e-12);
  }
  CHECK_THROWS_AS(fft_radix2(std::span<std::complex<double>>(data.data(), 12), false),
                  std::invalid_argument);
}

TEST_CASE("gridfft approaches the kernel for a point mass on a node")
{
  // One reference on a grid node; queries at grid nodes read the convolved
  // kernel weights directly, so errors shrink as the grid refines.
  const PointSet ref = make_points(1, { 0.5 });
  const PointSet queries = make_points(1, { 0.5, 0.55, 0.6, 0.4 });
  const double h = 0.05;
  const auto exact = naive_kde(queries, ref, h);
  double prev_err = 1e9;
  for (std::size_t m : { 64u, 128u, 256u }) {
    const std::vector<std::size_t> sizes{ m };
    const auto sums = gridfft_kde(queries, ref, h, sizes, 1u << 22);
    const double err = verify_relative_error(sums, exact).max_relative_error;
    CHECK(err < prev_err + 1e-12);
    prev_err = err;
  }
  CHECK(prev_err < 1e-3);
}

TEST_CASE("identical points give sums near the count after refinement")
{
  PointSet pts(50, 2);
  for (std::size_t i = 0; i < 50; ++i) {
    pts.row(i)[0] = 0.25;
    pts.row(i)[1] = 0.75;
  }
  // Widen the extent with a second far point so the grid is non-degenerate.
  PointSet queries = make_points(2, { 0.25, 0.75, 1.0, 0.0 });
  const double h = 0.3;
  const std::vector<std::size_t> sizes{ 128, 128 };
  const auto sums = gridfft_kde(queries, pts, h, sizes, 1u << 22);
  CHECK(std::fabs(sums[0] - 50.0) / 50.0 < 1e-3);
}

TEST_CASE("doubling the 1-D grid monotonically reduces the error")
{
  const PointSet pts = generate_points(Distribution::uniform, 400, 1, 10);
  const double h = 0.02; // comparable to the mean spacing
  const auto exact = naive_kde(pts, pts, h);
  double prev = 1e18;
  int improvements = 0;
  for (std::size_t m = 32; m <= 1024; m *= 2) {
    const std::vector<std::size_t> sizes{ m };
    const auto sums = gridfft_kde(pts, pts, h, sizes, 1u << 22);
    const double err = verify_relative_error(sums, exact).max_relative_error;
    if (err < prev) {
      ++improvements;
    }
    prev = err;
  }
  CHECK(improvements >= 3);
}

TEST_CASE("three-dimensional grids converge at moderate bandwidths")
{
  const PointSet pts = generate_points(Distribution::gaussian_mixture, 500, 3, 12);
  const double h = 0.4;
  const auto exact = naive_kde(pts, pts, h);
  double prev = 1e18;
  for (std::size_t m : { 8u, 16u, 32u }) {
    const std::vector<std::size_t> sizes(3, m);
    const auto sums = gridfft_kde(pts, pts, h, sizes, 1u << 22);
    const double err = verify_relative_error(sums, exact).max_relative_error;
    CHECK(err <= prev + 1e-12);
    prev = err;
  }
  CHECK(prev < 0.05);
}

TEST_CASE("gridfft refuses high dimensions and oversized grids")
{
  const PointSet pts = generate_points(Distribution::uniform, 50, 4, 3);
  const std::vector<std::size_t> sizes4(4, 16);
  CHECK_THROWS_AS(gridfft_kde(pts, pts, 0.1, sizes4, 1u << 22), GridInfeasibleError);

  const PointSet flat = generate_points(Distribution::uniform, 50, 2, 3);
  const std::vector<std::size_t> big{ 4096, 4096 };
  CHECK_THROWS_AS(gridfft_kde(flat, flat, 0.1, big, 1u << 20), GridInfeasibleError);
}

TEST_CASE("kernel weights are symmetric under lag negation")
{
  // A single reference on a grid node must produce a smoothed field that is
  // symmetric around it; this fails if the wrapped kernel layout does not
  // mirror K_l to K_{-l} per dimension.
  const double h = 0.1;
  const std::vector<std::size_t> sizes{ 33, 33 }; // spacing 1/32, node at 0.5
  const PointSet refs = make_points(2, { 0.5, 0.5 });
  const double off = 3.0 / 32.0;
  const PointSet queries = make_points(2, {
                                             0.5 + off, 0.5,       // +x
                                             0.5 - off, 0.5,       // -x
                                             0.5, 0.5 + off,       // +y
                                             0.5, 0.5 - off,       // -y
                                             0.0, 0.0, 1.0, 1.0,   // extent anchors
                                           });
  const auto sums = gridfft_kde(queries, refs, h, sizes, 1u << 22);
  CHECK(sums[0] == doctest::Approx(sums[1]).epsilon(1e-12));
  CHECK(sums[2] == doctest::Approx(sums[3]).epsilon(1e-12));
  CHECK(sums[0] == doctest::Approx(sums[2]).epsilon(1e-12));
}
