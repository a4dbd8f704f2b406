#pragma once

#include "dfgt/dataset.hpp"

#include <cstdint>
#include <optional>
#include <string_view>

namespace dfgt {

enum class Distribution {
  gaussian_mixture, // a few well-separated isotropic Gaussian blobs
  uniform,          // uniform on the unit box
  clustered,        // many tight clusters
};

std::optional<Distribution> parse_distribution(std::string_view name);
std::string_view distribution_name(Distribution dist);

//! Deterministic synthetic point set; identical (kind, n, dim, seed) always
//! produces identical coordinates.
PointSet generate_points(Distribution kind, std::size_t n, std::size_t dim,
                         std::uint64_t seed);

} // namespace dfgt
