#pragma once

#include "dfgt/engine.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace testsupport {

//! Counts how often each (query, reference) pair is accounted for across
//! the prune and base-case channels.
class CoverageProbe : public dfgt::TraversalProbe {
public:
  CoverageProbe(std::size_t nq, std::size_t nr)
    : counts_(nq * nr, 0)
    , nr_(nr)
  {
  }

  void on_account(dfgt::AccountChannel, std::span<const int> queries,
                  std::span<const int> refs) override
  {
    for (int q : queries) {
      for (int r : refs) {
        ++counts_[static_cast<std::size_t>(q) * nr_ + static_cast<std::size_t>(r)];
      }
    }
  }

  bool covered_exactly_once() const
  {
    for (auto c : counts_) {
      if (c != 1) {
        return false;
      }
    }
    return true;
  }

private:
  std::vector<std::uint16_t> counts_;
  std::size_t nr_;
};

//! Checks, at every traversal checkpoint, that each query's true kernel sum
//! lies between the effective bounds (node bounds plus postponed changes
//! along the ancestor path).
class BoundsProbe : public dfgt::TraversalProbe {
public:
  explicit BoundsProbe(std::vector<double> exact)
    : exact_(std::move(exact))
  {
  }

  void on_checkpoint(const dfgt::TraversalView& view) override
  {
    walk(view, view.query_tree.root(), 0.0, 0.0);
    ++checkpoints_;
  }

  int checkpoints() const { return checkpoints_; }
  int violations() const { return violations_; }

private:
  void walk(const dfgt::TraversalView& view, int node, double path_dl, double path_du)
  {
    constexpr double slack = 1e-8;
    path_dl += view.node_delta_lower[node];
    path_du += view.node_delta_upper[node];
    for (int q : view.query_tree.points_of(node)) {
      const double g = exact_[static_cast<std::size_t>(q)];
      if (view.node_lower[node] + path_dl > g + slack ||
          view.node_upper[node] + path_du < g - slack) {
        ++violations_;
      }
    }
    if (view.query_tree.is_leaf(node)) {
      for (int q : view.query_tree.points_of(node)) {
        const double g = exact_[static_cast<std::size_t>(q)];
        if (view.query_lower[q] + path_dl > g + slack ||
            view.query_upper[q] + path_du < g - slack) {
          ++violations_;
        }
      }
      return;
    }
    walk(view, view.query_tree.left(node), path_dl, path_du);
    walk(view, view.query_tree.right(node), path_dl, path_du);
  }

  std::vector<double> exact_;
  int checkpoints_ = 0;
  int violations_ = 0;
};

} // namespace testsupport
