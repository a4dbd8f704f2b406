#pragma once

#include "dfgt/dataset.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace dfgt {

//! Mid-point kd-tree over a PointSet. Nodes are addressed by integer ids
//! (root = 0); per-node bounding boxes, centroids and point spans live in
//! flat arrays indexed by node id. The tree owns a permutation of point
//! indices; the underlying rows never move.
class KdTree {
public:
  static constexpr int kNoChild = -1;

  //! Splits the widest bounding-box side at its midpoint until a node holds
  //! at most leaf_threshold points. A midpoint that leaves one side empty
  //! falls back to a median split on the same dimension.
  static KdTree build(const PointSet& points, int leaf_threshold);

  int node_count() const { return static_cast<int>(count_.size()); }
  int root() const { return 0; }
  std::size_t dim() const { return dim_; }

  bool is_leaf(int node) const { return left_[node] == kNoChild; }
  int left(int node) const { return left_[node]; }
  int right(int node) const { return right_[node]; }
  int count(int node) const { return count_[node]; }
  int split_dim(int node) const { return split_dim_[node]; }
  double split_coord(int node) const { return split_coord_[node]; }

  std::span<const double> lower(int node) const
  {
    return { bounds_lo_.data() + static_cast<std::size_t>(node) * dim_, dim_ };
  }
  std::span<const double> upper(int node) const
  {
    return { bounds_hi_.data() + static_cast<std::size_t>(node) * dim_, dim_ };
  }
  std::span<const double> centroid(int node) const
  {
    return { centroid_.data() + static_cast<std::size_t>(node) * dim_, dim_ };
  }

  //! Longest side of the node's bounding box.
  double max_side(int node) const { return max_side_[node]; }

  //! Indices (into the PointSet) of the points owned by the node.
  std::span<const int> points_of(int node) const
  {
    return { perm_.data() + begin_[node], static_cast<std::size_t>(count_[node]) };
  }

  int height() const;

private:
  KdTree() = default;

  std::size_t dim_ = 0;
  std::vector<double> bounds_lo_;
  std::vector<double> bounds_hi_;
  std::vector<double> centroid_;
  std::vector<double> max_side_;
  std::vector<int> left_;
  std::vector<int> right_;
  std::vector<int> split_dim_;
  std::vector<double> split_coord_;
  std::vector<std::size_t> begin_;
  std::vector<int> count_;
  std::vector<int> perm_;
};

struct DistanceBounds {
  double lower;
  double upper;
};

//! Lower and upper bounds on the pairwise distance between any point of box
//! [a_lo, a_hi] and any point of box [b_lo, b_hi], O(D).
DistanceBounds box_distance_bounds(std::span<const double> a_lo, std::span<const double> a_hi,
                                   std::span<const double> b_lo, std::span<const double> b_hi);

//! Same bounds but squared, for kernels that consume squared distances.
DistanceBounds box_distance_bounds_sq(std::span<const double> a_lo,
                                      std::span<const double> a_hi,
                                      std::span<const double> b_lo,
                                      std::span<const double> b_hi);

DistanceBounds node_distance_bounds(const KdTree& query_tree, int query_node,
                                    const KdTree& ref_tree, int ref_node);

//! Indented text dump of node bounds and counts, for debugging.
void dump_tree(const KdTree& tree, std::ostream& out);

} // namespace dfgt
