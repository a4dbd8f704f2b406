#include "dfgt/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <stdexcept>

namespace dfgt {

namespace {

struct BuildState {
  const PointSet* points;
  int leaf_threshold;
  KdTree* tree;
};

} // namespace

KdTree KdTree::build(const PointSet& points, int leaf_threshold)
{
  if (leaf_threshold < 1) {
    throw std::invalid_argument("leaf_threshold must be >= 1");
  }
  KdTree tree;
  tree.dim_ = points.dim();
  tree.perm_.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    tree.perm_[i] = static_cast<int>(i);
  }

  const std::size_t dim = points.dim();

  // Appends a node covering perm_[begin, begin+count) and recurses.
  std::function<int(std::size_t, int)> build_node = [&](std::size_t begin, int count) -> int {
    const int node = tree.node_count();
    tree.begin_.push_back(begin);
    tree.count_.push_back(count);
    tree.left_.push_back(kNoChild);
    tree.right_.push_back(kNoChild);
    tree.split_dim_.push_back(-1);
    tree.split_coord_.push_back(0.0);

    const std::size_t off = tree.bounds_lo_.size();
    tree.bounds_lo_.resize(off + dim);
    tree.bounds_hi_.resize(off + dim);
    tree.centroid_.resize(off + dim);
    for (std::size_t d = 0; d < dim; ++d) {
      double lo = points.row(tree.perm_[begin])[d];
      double hi = lo;
      for (int i = 1; i < count; ++i) {
        const double x = points.row(tree.perm_[begin + i])[d];
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
      tree.bounds_lo_[off + d] = lo;
      tree.bounds_hi_[off + d] = hi;
      tree.centroid_[off + d] = 0.5 * (lo + hi);
    }

    int widest = 0;
    double width = tree.bounds_hi_[off] - tree.bounds_lo_[off];
    for (std::size_t d = 1; d < dim; ++d) {
      const double w = tree.bounds_hi_[off + d] - tree.bounds_lo_[off + d];
      if (w > width) {
        width = w;
        widest = static_cast<int>(d);
      }
    }
    tree.max_side_.push_back(width);

    if (count <= leaf_threshold) {
      return node;
    }

    const double mid =
      0.5 * (tree.bounds_lo_[off + widest] + tree.bounds_hi_[off + widest]);
    int* perm = tree.perm_.data();
    int* split = std::partition(perm + begin, perm + begin + count,
                                [&](int idx) { return points.row(idx)[widest] <= mid; });
    std::size_t left_count = static_cast<std::size_t>(split - (perm + begin));
    double split_coord = mid;

    if (left_count == 0 || left_count == static_cast<std::size_t>(count)) {
      // Degenerate midpoint split; fall back to a positional median split on
      // the same dimension so both sides stay non-empty.
      int* mid_it = perm + begin + count / 2;
      std::nth_element(perm + begin, mid_it, perm + begin + count, [&](int a, int b) {
        return points.row(a)[widest] < points.row(b)[widest];
      });
      left_count = static_cast<std::size_t>(count / 2);
      split_coord = points.row(*mid_it)[widest];
    }

    tree.split_dim_[node] = widest;
    tree.split_coord_[node] = split_coord;

    const int left = build_node(begin, static_cast<int>(left_count));
    tree.left_[node] = left;
    const int right =
      build_node(begin + left_count, count - static_cast<int>(left_count));
    tree.right_[node] = right;
    return node;
  };

  build_node(0, static_cast<int>(points.size()));
  return tree;
}

int KdTree::height() const
{
  std::function<int(int)> depth = [&](int node) -> int {
    if (is_leaf(node)) {
      return 1;
    }
    return 1 + std::max(depth(left_[node]), depth(right_[node]));
  };
  return depth(0);
}

DistanceBounds box_distance_bounds_sq(std::span<const double> a_lo,
                                      std::span<const double> a_hi,
                                      std::span<const double> b_lo,
                                      std::span<const double> b_hi)
{
  double lo_sq = 0.0;
  double hi_sq = 0.0;
  for (std::size_t k = 0; k < a_lo.size(); ++k) {
    // (x + |x|) keeps only the positive part; at most one of the two gap
    // terms can be positive for a pair of boxes.
    const double gap_ba = b_lo[k] - a_hi[k];
    const double gap_ab = a_lo[k] - b_hi[k];
    const double lo_k =
      0.5 * (gap_ba + std::fabs(gap_ba) + gap_ab + std::fabs(gap_ab));
    lo_sq += lo_k * lo_k;
    const double hi_k = std::max(b_hi[k] - a_lo[k], a_hi[k] - b_lo[k]);
    hi_sq += hi_k * hi_k;
  }
  return { lo_sq, hi_sq };
}

DistanceBounds box_distance_bounds(std::span<const double> a_lo, std::span<const double> a_hi,
                                   std::span<const double> b_lo, std::span<const double> b_hi)
{
  const DistanceBounds sq = box_distance_bounds_sq(a_lo, a_hi, b_lo, b_hi);
  return { std::sqrt(sq.lower), std::sqrt(sq.upper) };
}

DistanceBounds node_distance_bounds(const KdTree& query_tree, int query_node,
                                    const KdTree& ref_tree, int ref_node)
{
  return box_distance_bounds(query_tree.lower(query_node), query_tree.upper(query_node),
                             ref_tree.lower(ref_node), ref_tree.upper(ref_node));
}

void dump_tree(const KdTree& tree, std::ostream& out)
{
  std::function<void(int, int)> visit = [&](int node, int depth) {
    for (int i = 0; i < depth; ++i) {
      out << "  ";
    }
    out << (tree.is_leaf(node) ? "leaf" : "node") << " #" << node
        << " count=" << tree.count(node) << " box=";
    for (std::size_t d = 0; d < tree.dim(); ++d) {
      out << (d == 0 ? "[" : " x [") << tree.lower(node)[d] << ", "
          << tree.upper(node)[d] << "]";
    }
    out << '\n';
    if (!tree.is_leaf(node)) {
      visit(tree.left(node), depth + 1);
      visit(tree.right(node), depth + 1);
    }
  };
  visit(tree.root(), 0);
}

} // namespace dfgt
