#include "dfgt/engine.hpp"

#include "dfgt/gridfft.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dfgt {

namespace {

void check_dims(const PointSet& queries, const PointSet& refs)
{
  if (queries.dim() != refs.dim()) {
    throw std::invalid_argument("query and reference dimensions differ");
  }
}

} // namespace

std::vector<double> naive_kde(const PointSet& queries, const PointSet& refs, double h)
{
  check_dims(queries, refs);
  const GaussianKernel kernel(h);
  std::vector<double> sums(queries.size(), 0.0);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto q = queries.row(i);
    double g = 0.0;
    for (std::size_t j = 0; j < refs.size(); ++j) {
      g += kernel.value_sq(squared_distance(q, refs.row(j)));
    }
    sums[i] = g;
  }
  return sums;
}

namespace {

//! One dual-tree run over a fixed (queries, refs, h); owns all mutable
//! traversal state. Bounds bookkeeping: every query node carries running
//! node-wide bounds plus postponed changes that apply lazily to its subtree.
class Traversal {
public:
  Traversal(const PointSet& queries, const PointSet& refs, const KdTree& query_tree,
            const KdTree& ref_tree, const SeriesGeometry& geometry,
            SeriesWorkspace& workspace, std::span<const double> ref_moments, double h,
            double epsilon, bool use_series, CostModel cost_model,
            TraversalProbe* probe)
    : queries_(queries)
    , refs_(refs)
    , qt_(query_tree)
    , rt_(ref_tree)
    , geom_(geometry)
    , ws_(workspace)
    , ref_moments_(ref_moments)
    , kernel_(h)
    , h_(h)
    , epsilon_(epsilon)
    , total_refs_(static_cast<double>(refs.size()))
    , use_series_(use_series)
    , cost_model_(cost_model)
    , probe_(probe)
    , table_size_(geometry.table_size())
  {
    const std::size_t nq = queries.size();
    const std::size_t nodes = static_cast<std::size_t>(qt_.node_count());
    q_lower_.assign(nq, 0.0);
    q_upper_.assign(nq, total_refs_);
    sum_exhaustive_.assign(nq, 0.0);
    sum_farfield_.assign(nq, 0.0);
    sum_local_.assign(nq, 0.0);
    node_lower_.assign(nodes, 0.0);
    node_upper_.assign(nodes, total_refs_);
    node_dlower_.assign(nodes, 0.0);
    node_dupper_.assign(nodes, 0.0);
    local_.assign(nodes * static_cast<std::size_t>(table_size_), 0.0);
    local_order_.assign(nodes, 0);
  }

  std::vector<double> run()
  {
    recurse(qt_.root(), rt_.root());
    post_process(qt_.root());
    std::vector<double> final(queries_.size());
    for (std::size_t i = 0; i < queries_.size(); ++i) {
      final[i] = sum_local_[i] + sum_farfield_[i] + sum_exhaustive_[i];
    }
    return final;
  }

  const TraversalStats& stats() const { return stats_; }

private:
  std::span<double> local_of(int node)
  {
    return { local_.data() + static_cast<std::size_t>(node) * table_size_,
             static_cast<std::size_t>(table_size_) };
  }

  std::span<const double> moments_of(int node) const
  {
    return { ref_moments_.data() + static_cast<std::size_t>(node) * table_size_,
             static_cast<std::size_t>(table_size_) };
  }

  TraversalView view() const
  {
    return { qt_,          node_lower_, node_upper_, node_dlower_,
             node_dupper_, q_lower_,    q_upper_ };
  }

  void recurse(int qn, int rn)
  {
    ++stats_.pairs_visited;
    if (probe_) {
      probe_->on_checkpoint(view());
    }

    const DistanceBounds dist_sq =
      box_distance_bounds_sq(qt_.lower(qn), qt_.upper(qn), rt_.lower(rn), rt_.upper(rn));
    const double k_max = kernel_.value_sq(dist_sq.lower); // kernel at closest approach
    const double k_min = kernel_.value_sq(dist_sq.upper);
    stats_.kernel_evaluations += 2;

    const double n_ref = static_cast<double>(rt_.count(rn));
    const double delta_lower = n_ref * k_min;
    const double delta_upper = n_ref * (k_max - 1.0);
    const double g_lower_new = node_lower_[qn] + node_dlower_[qn] + delta_lower;

    const double tau = epsilon_ * n_ref * g_lower_new / total_refs_;

    // Kernel-difference prune: approximating every pairwise interaction by
    // the midpoint of the kernel bounds errs by at most half their spread.
    // No node size constraint, so this is what retires well-separated and
    // fully-overlapping pairs at extreme bandwidths.
    if (0.5 * n_ref * (k_max - k_min) <= tau) {
      node_dlower_[qn] += delta_lower;
      node_dupper_[qn] += delta_upper;
      local_of(qn)[0] += 0.5 * n_ref * (k_max + k_min);
      local_order_[qn] = std::max(local_order_[qn], 1);
      ++stats_.prunes_finite_diff;
      if (probe_) {
        probe_->on_account(AccountChannel::finite_diff, qt_.points_of(qn),
                           rt_.points_of(rn));
      }
      return;
    }

    if (use_series_) {
      const ApproxChoice choice = choose_best_method(
        static_cast<double>(qt_.count(qn)), n_ref, qt_.max_side(qn), rt_.max_side(rn), h_,
        tau, geom_.max_order(), geom_.dim(), cost_model_);
      if (!choice.is_exhaustive()) {
        node_dlower_[qn] += delta_lower;
        node_dupper_[qn] += delta_upper;
        summarize(qn, rn, choice);
        return;
      }
    }

    if (qt_.is_leaf(qn)) {
      if (rt_.is_leaf(rn)) {
        base_case(qn, rn);
      } else {
        recurse(qn, rt_.left(rn));
        recurse(qn, rt_.right(rn));
      }
      return;
    }

    const int ql = qt_.left(qn);
    const int qr = qt_.right(qn);
    node_dlower_[ql] += node_dlower_[qn];
    node_dlower_[qr] += node_dlower_[qn];
    node_dupper_[ql] += node_dupper_[qn];
    node_dupper_[qr] += node_dupper_[qn];
    node_dlower_[qn] = 0.0;
    node_dupper_[qn] = 0.0;

    if (rt_.is_leaf(rn)) {
      recurse(ql, rn);
      recurse(qr, rn);
    } else {
      recurse(ql, rt_.left(rn));
      recurse(ql, rt_.right(rn));
      recurse(qr, rt_.left(rn));
      recurse(qr, rt_.right(rn));
    }

    node_lower_[qn] = std::min(node_lower_[ql] + node_dlower_[ql],
                               node_lower_[qr] + node_dlower_[qr]);
    node_upper_[qn] = std::max(node_upper_[ql] + node_dupper_[ql],
                               node_upper_[qr] + node_dupper_[qr]);
  }

  void summarize(int qn, int rn, const ApproxChoice& choice)
  {
    switch (choice.kind) {
    case ApproxChoice::Kind::farfield_eval: {
      for (int q : qt_.points_of(qn)) {
        sum_farfield_[q] += eval_farfield(geom_, moments_of(rn), rt_.centroid(rn),
                                          queries_.row(q), h_, choice.order, ws_);
      }
      ++stats_.prunes_farfield;
      if (probe_) {
        probe_->on_account(AccountChannel::farfield, qt_.points_of(qn),
                           rt_.points_of(rn));
      }
      break;
    }
    case ApproxChoice::Kind::direct_local: {
      accumulate_direct_local(geom_, refs_, rt_.points_of(rn), qt_.centroid(qn), h_,
                              choice.order, ws_, local_of(qn));
      local_order_[qn] = std::max(local_order_[qn], choice.order);
      ++stats_.prunes_direct_local;
      if (probe_) {
        probe_->on_account(AccountChannel::direct_local, qt_.points_of(qn),
                           rt_.points_of(rn));
      }
      break;
    }
    case ApproxChoice::Kind::far_to_local: {
      trans_far_to_local(geom_, moments_of(rn), rt_.centroid(rn), qt_.centroid(qn), h_,
                         choice.order, ws_, local_of(qn));
      local_order_[qn] = std::max(local_order_[qn], choice.order);
      ++stats_.prunes_far_to_local;
      if (probe_) {
        probe_->on_account(AccountChannel::far_to_local, qt_.points_of(qn),
                           rt_.points_of(rn));
      }
      break;
    }
    case ApproxChoice::Kind::exhaustive:
      break;
    }
  }

  void base_case(int qn, int rn)
  {
    node_lower_[qn] = std::numeric_limits<double>::infinity();
    node_upper_[qn] = -std::numeric_limits<double>::infinity();
    const auto ref_idx = rt_.points_of(rn);
    for (int q : qt_.points_of(qn)) {
      double lower = q_lower_[q] + node_dlower_[qn];
      double upper = q_upper_[q] + node_dupper_[qn];
      double exhaustive = sum_exhaustive_[q];
      const auto row = queries_.row(q);
      for (int r : ref_idx) {
        const double v = kernel_.value_sq(squared_distance(row, refs_.row(r)));
        lower += v;
        exhaustive += v;
        upper += v - 1.0; // undo the K = 1 assumption made at initialization
      }
      q_lower_[q] = lower;
      q_upper_[q] = upper;
      sum_exhaustive_[q] = exhaustive;
      node_lower_[qn] = std::min(node_lower_[qn], lower);
      node_upper_[qn] = std::max(node_upper_[qn], upper);
    }
    node_dlower_[qn] = 0.0;
    node_dupper_[qn] = 0.0;
    ++stats_.base_cases;
    stats_.kernel_evaluations +=
      static_cast<std::uint64_t>(qt_.count(qn)) * static_cast<std::uint64_t>(rt_.count(rn));
    if (probe_) {
      probe_->on_account(AccountChannel::exhaustive, qt_.points_of(qn), rt_.points_of(rn));
    }
  }

  void post_process(int qn)
  {
    if (qt_.is_leaf(qn)) {
      node_lower_[qn] = std::numeric_limits<double>::infinity();
      node_upper_[qn] = -std::numeric_limits<double>::infinity();
      const int order = local_order_[qn];
      for (int q : qt_.points_of(qn)) {
        q_lower_[q] += node_dlower_[qn];
        q_upper_[q] += node_dupper_[qn];
        node_lower_[qn] = std::min(node_lower_[qn], q_lower_[q]);
        node_upper_[qn] = std::max(node_upper_[qn], q_upper_[q]);
        if (order > 0) {
          sum_local_[q] =
            eval_local(geom_, local_of(qn), qt_.centroid(qn), queries_.row(q), h_, order,
                       ws_);
        }
      }
      node_dlower_[qn] = 0.0;
      node_dupper_[qn] = 0.0;
      std::fill(local_of(qn).begin(), local_of(qn).end(), 0.0);
      return;
    }

    const int ql = qt_.left(qn);
    const int qr = qt_.right(qn);
    const int order = local_order_[qn];
    if (order > 0) {
      trans_local_to_local(geom_, local_of(qn), qt_.centroid(qn), qt_.centroid(ql), h_,
                           order, ws_, local_of(ql));
      trans_local_to_local(geom_, local_of(qn), qt_.centroid(qn), qt_.centroid(qr), h_,
                           order, ws_, local_of(qr));
      local_order_[ql] = std::max(local_order_[ql], order);
      local_order_[qr] = std::max(local_order_[qr], order);
    }
    node_dlower_[ql] += node_dlower_[qn];
    node_dlower_[qr] += node_dlower_[qn];
    node_dupper_[ql] += node_dupper_[qn];
    node_dupper_[qr] += node_dupper_[qn];
    node_dlower_[qn] = 0.0;
    node_dupper_[qn] = 0.0;
    std::fill(local_of(qn).begin(), local_of(qn).end(), 0.0);

    post_process(ql);
    post_process(qr);

    node_lower_[qn] = std::min(node_lower_[ql], node_lower_[qr]);
    node_upper_[qn] = std::max(node_upper_[ql], node_upper_[qr]);
  }

  const PointSet& queries_;
  const PointSet& refs_;
  const KdTree& qt_;
  const KdTree& rt_;
  const SeriesGeometry& geom_;
  SeriesWorkspace& ws_;
  std::span<const double> ref_moments_;
  GaussianKernel kernel_;
  double h_;
  double epsilon_;
  double total_refs_;
  bool use_series_;
  CostModel cost_model_;
  TraversalProbe* probe_;
  int table_size_;

  std::vector<double> q_lower_;
  std::vector<double> q_upper_;
  std::vector<double> sum_exhaustive_;
  std::vector<double> sum_farfield_;
  std::vector<double> sum_local_;
  std::vector<double> node_lower_;
  std::vector<double> node_upper_;
  std::vector<double> node_dlower_;
  std::vector<double> node_dupper_;
  std::vector<double> local_;
  std::vector<int> local_order_;
  TraversalStats stats_;
};

} // namespace

DualTreeEngine::DualTreeEngine(const PointSet& refs, Mode mode, EngineConfig config)
  : refs_(refs)
  , mode_(mode)
  , config_(config)
  , ref_tree_(KdTree::build(refs, config.leaf_threshold))
  , geometry_(static_cast<int>(refs.dim()),
              mode == Mode::centroid
                ? 1
                : config.p_max.value_or(default_p_max(static_cast<int>(refs.dim()))))
  , workspace_(geometry_)
{
  if (config_.epsilon < 0.0) {
    throw std::invalid_argument("epsilon must be >= 0");
  }
}

const std::vector<double>& DualTreeEngine::moments_for(double h)
{
  auto it = moments_cache_.find(h);
  if (it != moments_cache_.end()) {
    return it->second;
  }

  std::vector<double> moments(static_cast<std::size_t>(ref_tree_.node_count()) *
                                static_cast<std::size_t>(geometry_.table_size()),
                              0.0);
  const std::size_t stride = static_cast<std::size_t>(geometry_.table_size());
  // Leaf moments from the points, internal moments by re-centering children.
  auto table_of = [&](int node) {
    return std::span<double>(moments.data() + static_cast<std::size_t>(node) * stride,
                             stride);
  };
  auto init = [&](auto&& self, int node) -> void {
    if (ref_tree_.is_leaf(node)) {
      accumulate_farfield_moments(geometry_, refs_, ref_tree_.points_of(node),
                                  ref_tree_.centroid(node), h, workspace_,
                                  table_of(node));
      return;
    }
    const int left = ref_tree_.left(node);
    const int right = ref_tree_.right(node);
    self(self, left);
    self(self, right);
    trans_far_to_far(geometry_, table_of(left), ref_tree_.centroid(left),
                     ref_tree_.centroid(node), h, workspace_, table_of(node));
    trans_far_to_far(geometry_, table_of(right), ref_tree_.centroid(right),
                     ref_tree_.centroid(node), h, workspace_, table_of(node));
  };
  init(init, ref_tree_.root());

  return moments_cache_.emplace(h, std::move(moments)).first->second;
}

std::vector<double> DualTreeEngine::compute(const PointSet& queries, double h,
                                            TraversalProbe* probe)
{
  check_dims(queries, refs_);
  if (!(h > 0.0)) {
    throw std::invalid_argument("bandwidth must be positive");
  }

  static const std::vector<double> no_moments;
  const std::vector<double>& moments =
    mode_ == Mode::series ? moments_for(h) : no_moments;

  const KdTree query_tree = KdTree::build(queries, config_.leaf_threshold);
  Traversal traversal(queries, refs_, query_tree, ref_tree_, geometry_, workspace_,
                      moments, h, config_.epsilon, mode_ == Mode::series,
                      config_.cost_model, probe);
  auto result = traversal.run();
  last_stats_ = traversal.stats();
  return result;
}

std::vector<double> dfd_kde(const PointSet& queries, const PointSet& refs, double h,
                            double epsilon, int leaf_threshold)
{
  EngineConfig config;
  config.epsilon = epsilon;
  config.leaf_threshold = leaf_threshold;
  DualTreeEngine engine(refs, DualTreeEngine::Mode::centroid, config);
  return engine.compute(queries, h);
}

std::vector<double> dfgt_kde(const PointSet& queries, const PointSet& refs, double h,
                             const EngineConfig& config)
{
  DualTreeEngine engine(refs, DualTreeEngine::Mode::series, config);
  return engine.compute(queries, h);
}

RelativeErrorReport verify_relative_error(std::span<const double> approx,
                                          std::span<const double> exact)
{
  if (approx.size() != exact.size()) {
    throw std::invalid_argument("approx and exact lengths differ");
  }
  RelativeErrorReport report;
  for (std::size_t i = 0; i < approx.size(); ++i) {
    if (!(exact[i] > 0.0)) {
      throw std::invalid_argument("exact sums must be strictly positive");
    }
    const double rel = std::fabs(approx[i] - exact[i]) / exact[i];
    if (rel > report.max_relative_error) {
      report.max_relative_error = rel;
      report.worst_index = i;
    }
  }
  return report;
}

std::optional<Algorithm> parse_algorithm(std::string_view name)
{
  if (name == "naive") {
    return Algorithm::naive;
  }
  if (name == "dfd") {
    return Algorithm::dfd;
  }
  if (name == "dfgt") {
    return Algorithm::dfgt;
  }
  if (name == "gridfft") {
    return Algorithm::gridfft;
  }
  return std::nullopt;
}

std::string_view algorithm_name(Algorithm algorithm)
{
  switch (algorithm) {
  case Algorithm::naive:
    return "naive";
  case Algorithm::dfd:
    return "dfd";
  case Algorithm::dfgt:
    return "dfgt";
  case Algorithm::gridfft:
    return "gridfft";
  }
  return "unknown";
}

std::vector<double> compute_sums(Algorithm algorithm, const PointSet& queries,
                                 const PointSet& refs, double h,
                                 const EngineConfig& config)
{
  switch (algorithm) {
  case Algorithm::naive:
    return naive_kde(queries, refs, h);
  case Algorithm::dfd:
    return dfd_kde(queries, refs, h, config.epsilon, config.leaf_threshold);
  case Algorithm::dfgt:
    return dfgt_kde(queries, refs, h, config);
  case Algorithm::gridfft: {
    const std::vector<std::size_t> grid(queries.dim(), config.grid_size);
    return gridfft_kde(queries, refs, h, grid, config.grid_cell_cap);
  }
  }
  throw std::invalid_argument("unknown algorithm");
}

} // namespace dfgt
