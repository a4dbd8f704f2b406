#pragma once

#include "dfgt/dataset.hpp"
#include "dfgt/kdtree.hpp"
#include "dfgt/series.hpp"
#include "dfgt/truncation.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace dfgt {

struct EngineConfig {
  double epsilon = 0.01;
  int leaf_threshold = 20;
  std::optional<int> p_max; // default: default_p_max(dim)
  CostModel cost_model = CostModel::exponential;

  // gridfft parameters, used only when that engine is selected.
  std::size_t grid_size = 256;
  std::size_t grid_cell_cap = std::size_t{ 1 } << 22;
};

//! Exact Gaussian kernel sums G(q) = sum_r exp(-|q-r|^2 / (2 h^2)).
std::vector<double> naive_kde(const PointSet& queries, const PointSet& refs, double h);

//! Which accounting channel absorbed a (query node, reference node) pair.
enum class AccountChannel {
  exhaustive,
  farfield,
  direct_local,
  far_to_local,
  finite_diff,
};

//! Read-only snapshot of traversal state handed to probes.
struct TraversalView {
  const KdTree& query_tree;
  std::span<const double> node_lower;
  std::span<const double> node_upper;
  std::span<const double> node_delta_lower;
  std::span<const double> node_delta_upper;
  std::span<const double> query_lower;
  std::span<const double> query_upper;
};

//! Test instrumentation hooks; all callbacks default to no-ops.
class TraversalProbe {
public:
  virtual ~TraversalProbe() = default;

  //! Called on entry of every node-pair visit.
  virtual void on_checkpoint(const TraversalView& /*view*/) {}

  //! Called once per prune or base case with the covered point index spans.
  virtual void on_account(AccountChannel /*channel*/, std::span<const int> /*queries*/,
                          std::span<const int> /*refs*/)
  {
  }
};

struct TraversalStats {
  std::uint64_t kernel_evaluations = 0;
  std::uint64_t pairs_visited = 0;
  std::uint64_t base_cases = 0;
  std::uint64_t prunes_finite_diff = 0;
  std::uint64_t prunes_farfield = 0;
  std::uint64_t prunes_direct_local = 0;
  std::uint64_t prunes_far_to_local = 0;
};

//! Dual-tree summation engine with per-query relative error guarantee.
//! Mode::centroid prunes only via the kernel-difference rule (the DFD
//! baseline); Mode::series additionally uses far-field evaluation, direct
//! local accumulation and far-to-local translation, picking the cheapest
//! admissible method per pair.
//!
//! The reference tree is built once; far-field moments are cached per
//! bandwidth so sweeps over h reuse the topology. The engine borrows the
//! reference PointSet, which must outlive it. A single compute() call is
//! single-threaded; concurrent calls require separate engine instances.
class DualTreeEngine {
public:
  enum class Mode { centroid, series };

  DualTreeEngine(const PointSet& refs, Mode mode, EngineConfig config = {});

  //! Per-query kernel sums with |approx - exact| <= epsilon * exact.
  std::vector<double> compute(const PointSet& queries, double h,
                              TraversalProbe* probe = nullptr);

  const TraversalStats& last_stats() const { return last_stats_; }
  const KdTree& reference_tree() const { return ref_tree_; }
  int p_max() const { return geometry_.max_order(); }

private:
  const std::vector<double>& moments_for(double h);

  const PointSet& refs_;
  Mode mode_;
  EngineConfig config_;
  KdTree ref_tree_;
  SeriesGeometry geometry_;
  SeriesWorkspace workspace_;
  std::map<double, std::vector<double>> moments_cache_;
  TraversalStats last_stats_;
};

std::vector<double> dfd_kde(const PointSet& queries, const PointSet& refs, double h,
                            double epsilon, int leaf_threshold = 20);

std::vector<double> dfgt_kde(const PointSet& queries, const PointSet& refs, double h,
                             const EngineConfig& config = {});

struct RelativeErrorReport {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
};

//! max_i |approx_i - exact_i| / exact_i and the offending index.
//! Requires equal lengths and strictly positive exact sums.
RelativeErrorReport verify_relative_error(std::span<const double> approx,
                                          std::span<const double> exact);

enum class Algorithm { naive, dfd, dfgt, gridfft };

std::optional<Algorithm> parse_algorithm(std::string_view name);
std::string_view algorithm_name(Algorithm algorithm);

//! Uniform entry point used by the CV and CLI layers.
std::vector<double> compute_sums(Algorithm algorithm, const PointSet& queries,
                                 const PointSet& refs, double h,
                                 const EngineConfig& config = {});

} // namespace dfgt
