#include "dfgt/cv.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace dfgt {

namespace {

//! Leave-one-out density at a reference point from its Q = R kernel sum:
//! the exact self-term K_h(0) = 1 is subtracted rather than re-running the
//! engine without the point. Non-positive results (approximation slack at
//! tiny bandwidths) are clamped to the smallest positive normal double.
double leave_one_out_density(double sum, double normalizer, int& clamped)
{
  double loo = sum - 1.0;
  if (loo <= 0.0) {
    loo = std::numeric_limits<double>::min();
    ++clamped;
  }
  return loo / normalizer;
}

double convolution_bandwidth(double h, const CvOptions& options)
{
  return options.sqrt2_convolution ? std::sqrt(2.0) * h : 2.0 * h;
}

class SumProvider {
public:
  SumProvider(const PointSet& refs, const CvOptions& options)
    : refs_(refs)
    , options_(options)
  {
    if (options.algorithm == Algorithm::dfd) {
      engine_.emplace(refs, DualTreeEngine::Mode::centroid, options.engine);
    } else if (options.algorithm == Algorithm::dfgt) {
      engine_.emplace(refs, DualTreeEngine::Mode::series, options.engine);
    }
  }

  std::vector<double> operator()(double h)
  {
    if (engine_) {
      return engine_->compute(refs_, h);
    }
    return compute_sums(options_.algorithm, refs_, refs_, h, options_.engine);
  }

private:
  const PointSet& refs_;
  const CvOptions& options_;
  std::optional<DualTreeEngine> engine_;
};

} // namespace

ScoreResult lkcv_from_sums(const PointSet& refs, double h, std::span<const double> sums)
{
  const std::size_t n = refs.size();
  if (n < 2) {
    throw std::invalid_argument("likelihood CV requires at least 2 points");
  }
  const double normalizer =
    static_cast<double>(n - 1) * gaussian_normalizer(refs.dim(), h);
  ScoreResult result;
  double acc = 0.0;
  for (double sum : sums) {
    acc += std::log(leave_one_out_density(sum, normalizer, result.clamped));
  }
  result.score = acc / static_cast<double>(n);
  return result;
}

ScoreResult lscv_from_sums(const PointSet& refs, double h, std::span<const double> sums,
                           double conv_h, std::span<const double> conv_sums)
{
  const std::size_t n = refs.size();
  if (n < 2) {
    throw std::invalid_argument("least-squares CV requires at least 2 points");
  }
  const double norm_h = static_cast<double>(n - 1) * gaussian_normalizer(refs.dim(), h);
  const double norm_conv =
    static_cast<double>(n - 1) * gaussian_normalizer(refs.dim(), conv_h);
  ScoreResult result;
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double density = (sums[j] - 1.0) / norm_h;
    const double conv_density = (conv_sums[j] - 1.0) / norm_conv;
    acc += conv_density - 2.0 * density;
  }
  result.score = acc / static_cast<double>(n);
  return result;
}

ScoreResult lkcv_score(const PointSet& refs, double h, const CvOptions& options)
{
  SumProvider provider(refs, options);
  return lkcv_from_sums(refs, h, provider(h));
}

ScoreResult lscv_score(const PointSet& refs, double h, const CvOptions& options)
{
  SumProvider provider(refs, options);
  const double conv_h = convolution_bandwidth(h, options);
  return lscv_from_sums(refs, h, provider(h), conv_h, provider(conv_h));
}

double pilot_bandwidth(const PointSet& refs)
{
  const std::size_t n = refs.size();
  if (n < 2) {
    throw std::invalid_argument("pilot bandwidth requires at least 2 points");
  }
  const std::size_t dim = refs.dim();
  double sigma_sum = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mean += refs.row(i)[d];
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double diff = refs.row(i)[d] - mean;
      var += diff * diff;
    }
    sigma_sum += std::sqrt(var / static_cast<double>(n - 1));
  }
  const double sigma = sigma_sum / static_cast<double>(dim);
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("pilot bandwidth undefined for zero-variance data");
  }
  return sigma *
         std::pow(static_cast<double>(n), -1.0 / (static_cast<double>(dim) + 4.0));
}

std::vector<CvRow> bandwidth_sweep(const PointSet& refs, std::span<const double> scales,
                                   double base_h, CvScore kind, const CvOptions& options)
{
  if (!(base_h > 0.0)) {
    throw std::invalid_argument("base bandwidth must be positive");
  }
  for (std::size_t i = 1; i < scales.size(); ++i) {
    if (!(scales[i] > scales[i - 1])) {
      throw std::invalid_argument("scales must be strictly increasing");
    }
  }

  SumProvider provider(refs, options);
  std::vector<CvRow> rows;
  rows.reserve(scales.size());
  for (double scale : scales) {
    CvRow row;
    row.scale = scale;
    row.h = scale * base_h;

    const auto start = std::chrono::steady_clock::now();
    const std::vector<double> sums = provider(row.h);
    ScoreResult score;
    if (kind == CvScore::likelihood) {
      score = lkcv_from_sums(refs, row.h, sums);
    } else {
      const double conv_h = convolution_bandwidth(row.h, options);
      score = lscv_from_sums(refs, row.h, sums, conv_h, provider(conv_h));
    }
    const auto stop = std::chrono::steady_clock::now();

    row.score = score.score;
    row.clamped = score.clamped;
    row.seconds = std::chrono::duration<double>(stop - start).count();
    if (options.verify_against_naive && options.algorithm != Algorithm::naive) {
      const auto exact = naive_kde(refs, refs, row.h);
      row.max_rel_err = verify_relative_error(sums, exact).max_relative_error;
    }
    rows.push_back(row);
  }
  return rows;
}

} // namespace dfgt
