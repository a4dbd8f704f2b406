#include "dfgt/datagen.hpp"

#include <random>

namespace dfgt {

std::optional<Distribution> parse_distribution(std::string_view name)
{
  if (name == "gaussian-mixture") {
    return Distribution::gaussian_mixture;
  }
  if (name == "uniform") {
    return Distribution::uniform;
  }
  if (name == "clustered") {
    return Distribution::clustered;
  }
  return std::nullopt;
}

std::string_view distribution_name(Distribution dist)
{
  switch (dist) {
  case Distribution::gaussian_mixture:
    return "gaussian-mixture";
  case Distribution::uniform:
    return "uniform";
  case Distribution::clustered:
    return "clustered";
  }
  return "unknown";
}

PointSet generate_points(Distribution kind, std::size_t n, std::size_t dim,
                         std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  PointSet points(n, dim);

  if (kind == Distribution::uniform) {
    std::uniform_real_distribution<double> coord(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (double& x : points.row(i)) {
        x = coord(rng);
      }
    }
    return points;
  }

  const std::size_t components = kind == Distribution::gaussian_mixture ? 3 : 10;
  const double spread_lo = kind == Distribution::gaussian_mixture ? 0.04 : 0.008;
  const double spread_hi = kind == Distribution::gaussian_mixture ? 0.12 : 0.015;

  std::uniform_real_distribution<double> coord(0.0, 1.0);
  std::uniform_real_distribution<double> spread(spread_lo, spread_hi);
  std::vector<double> means(components * dim);
  std::vector<double> sigma(components);
  for (std::size_t c = 0; c < components; ++c) {
    for (std::size_t d = 0; d < dim; ++d) {
      means[c * dim + d] = coord(rng);
    }
    sigma[c] = spread(rng);
  }

  std::uniform_int_distribution<std::size_t> pick(0, components - 1);
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = pick(rng);
    auto row = points.row(i);
    for (std::size_t d = 0; d < dim; ++d) {
      row[d] = means[c * dim + d] + sigma[c] * unit_normal(rng);
    }
  }
  return points;
}

} // namespace dfgt
