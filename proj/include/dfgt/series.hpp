#pragma once

#include "dfgt/dataset.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace dfgt {

//! Converts a position in a linear array of p^D coefficients to its
//! multi-index, i.e. the base-p digit expansion of the position with
//! dimension 1 as the most significant digit.
std::vector<int> position_to_multiindex(int pos, int order, int dim);

//! Inverse of position_to_multiindex (Horner accumulation x <- x*p + a[d]).
int multiindex_to_position(std::span<const int> alpha, int order);

//! All monomials x^alpha for alpha < p, laid out in base-p position order.
//! Each entry is its ancestor entry (first nonzero digit decremented) times
//! one coordinate; entry 0 is 1.
std::vector<double> multiindex_expansion(std::span<const double> x, int order);

//! Shared layout metadata for coefficient tables of a fixed (dim, p_max)
//! pair. Tables are linear arrays of p_max^dim doubles in base-p_max
//! position order. Terms are enumerated so that the first p^dim entries are
//! exactly the multi-indices with every digit < p, with ancestors appearing
//! before descendants; truncated order-p operations iterate a prefix.
class SeriesGeometry {
public:
  SeriesGeometry(int dim, int max_order);

  int dim() const { return dim_; }
  int max_order() const { return max_order_; }
  int table_size() const { return table_size_; }
  int block_size(int order) const { return block_size_[order]; }

  struct Term {
    int pos;             // storage position in the coefficient table
    int parent;          // term index of the ancestor (-1 for alpha = 0)
    int parent_dim;      // coordinate whose power grows from the ancestor
    int degree;          // |alpha|
    double inv_factorial; // 1 / alpha!
  };

  const std::vector<Term>& terms() const { return terms_; }

  std::span<const std::uint8_t> digits(int term_index) const
  {
    return { digits_.data() + static_cast<std::size_t>(term_index) * dim_,
             static_cast<std::size_t>(dim_) };
  }

  double factorial_at_pos(int pos) const { return factorial_by_pos_[pos]; }
  double inv_factorial_at_pos(int pos) const { return inv_factorial_by_pos_[pos]; }

private:
  int dim_;
  int max_order_;
  int table_size_;
  std::vector<int> block_size_;
  std::vector<Term> terms_;
  std::vector<std::uint8_t> digits_;
  std::vector<double> factorial_by_pos_;
  std::vector<double> inv_factorial_by_pos_;
};

//! Per-dimension table of scaled Gaussian derivatives: H[d][k] = h_k(a[d])
//! with h_0(t) = exp(-t^2) and h_{k+1}(t) = 2t h_k(t) - 2k h_{k-1}(t).
class DerivTable {
public:
  DerivTable(int dim, int max_orders);

  void compute(std::span<const double> a, int orders);

  double at(int d, int k) const
  {
    return values_[static_cast<std::size_t>(d) * stride_ + k];
  }

  int dim() const { return dim_; }
  int orders() const { return orders_; }

private:
  int dim_;
  int stride_;
  int orders_ = 0;
  std::vector<double> values_;
};

//! Product of one-dimensional Hermite functions, prod_d H[d][alpha[d]].
double hermite_value(const DerivTable& table, std::span<const int> alpha);
double hermite_value(const DerivTable& table, std::span<const std::uint8_t> alpha);

//! Scratch buffers reused across series calls within one traversal.
struct SeriesWorkspace {
  explicit SeriesWorkspace(const SeriesGeometry& geometry);

  DerivTable derivs;
  std::vector<double> expansion;
  std::vector<double> contribution;
  std::vector<double> scaled;
};

//! Far-field moments M_alpha = sum_r (1/alpha!) ((r - center)/sqrt(2 h^2))^alpha
//! for every alpha < p_max, accumulated over the given point indices.
//! `moments` must be zeroed by the caller.
void accumulate_farfield_moments(const SeriesGeometry& g, const PointSet& points,
                                 std::span<const int> idx, std::span<const double> center,
                                 double h, SeriesWorkspace& ws, std::span<double> moments);

//! Re-centers far-field moments from src_center to dst_center and adds them
//! into dst: M_gamma(dst) += sum_{alpha <= gamma} M_alpha(src)
//! ((src_center - dst_center)/sqrt(2 h^2))^(gamma - alpha) / (gamma - alpha)!.
void trans_far_to_far(const SeriesGeometry& g, std::span<const double> src,
                      std::span<const double> src_center, std::span<const double> dst_center,
                      double h, SeriesWorkspace& ws, std::span<double> dst);

//! Evaluates the order-p far-field expansion at q:
//! sum_{alpha < p} M_alpha h_alpha((q - center)/sqrt(2 h^2)).
double eval_farfield(const SeriesGeometry& g, std::span<const double> moments,
                     std::span<const double> center, std::span<const double> q, double h,
                     int order, SeriesWorkspace& ws);

//! Adds the direct local moments of the given reference points about
//! `center`: L_beta += sum_r ((-1)^|beta| / beta!) h_beta((center - r)/sqrt(2 h^2))
//! for beta < p.
void accumulate_direct_local(const SeriesGeometry& g, const PointSet& points,
                             std::span<const int> idx, std::span<const double> center,
                             double h, int order, SeriesWorkspace& ws,
                             std::span<double> local);

//! Converts far-field moments about src_center into local moments about
//! dst_center (F2L) and adds them into `local`:
//! L_beta += ((-1)^|beta| / beta!) sum_{alpha < p} M_alpha
//!           h_{alpha+beta}((dst_center - src_center)/sqrt(2 h^2)).
void trans_far_to_local(const SeriesGeometry& g, std::span<const double> moments,
                        std::span<const double> src_center,
                        std::span<const double> dst_center, double h, int order,
                        SeriesWorkspace& ws, std::span<double> local);

//! Re-centers a local expansion from src_center to dst_center (L2L) and adds
//! it into dst: L_alpha(dst) += sum_{beta >= alpha} beta!/(alpha! (beta-alpha)!)
//! L_beta(src) ((dst_center - src_center)/sqrt(2 h^2))^(beta - alpha).
void trans_local_to_local(const SeriesGeometry& g, std::span<const double> src,
                          std::span<const double> src_center,
                          std::span<const double> dst_center, double h, int order,
                          SeriesWorkspace& ws, std::span<double> dst);

//! Evaluates the order-p local expansion at q:
//! sum_{beta < p} L_beta ((q - center)/sqrt(2 h^2))^beta.
double eval_local(const SeriesGeometry& g, std::span<const double> local,
                  std::span<const double> center, std::span<const double> q, double h,
                  int order, SeriesWorkspace& ws);

} // namespace dfgt
