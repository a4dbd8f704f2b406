#pragma once

#include <optional>

namespace dfgt {

//! A selected truncation order, or empty when the node size constraint fails
//! or no order up to p_max meets the error budget.
using OrderResult = std::optional<int>;

//! Error bound for evaluating an order-p far-field expansion of a reference
//! node whose points all lie within r*h (infinity norm) of the expansion
//! center, r < 1:
//!   count/(1-r)^D * sum_{k=0}^{D-1} C(D,k) (1-r^p)^k (r^p/sqrt(p!))^(D-k).
double farfield_error_bound(double count, double r, int order, int dim);

//! Same formula with r now the query-node size ratio.
double local_error_bound(double count, double r, int order, int dim);

//! Error bound for a truncated local expansion converted from an already
//! truncated far-field expansion; both nodes within r*h of their centers,
//! r < 1/2:
//!   count/(1-2r)^(2D) * sum_{k=0}^{D-1} C(D,k) ((1-(2r)^p)^2)^k
//!                        * ((2r)^p (2-(2r)^p)/sqrt(p!))^(D-k).
double f2l_error_bound(double count, double r, int order, int dim);

//! Least order p <= p_max with farfield_error_bound <= tau, using the size
//! ratio r = max_side_ref / (2h); empty when r >= 1 or no order suffices.
OrderResult farfield_order(double max_side_ref, double count, double h, double tau,
                           int p_max, int dim);

//! Least order for direct local accumulation; r = max_side_query / (2h).
OrderResult local_accum_order(double max_side_query, double count, double h, double tau,
                              int p_max, int dim);

//! Least order for far-field-to-local conversion;
//! r = max(max_side_query, max_side_ref) / (4h), rejected when r >= 1/2.
OrderResult f2l_order(double max_side_query, double max_side_ref, double count, double h,
                      double tau, int p_max, int dim);

//! How a (query node, reference node) pair gets summarized.
struct ApproxChoice {
  enum class Kind {
    exhaustive,
    farfield_eval, // F(R.c, p): evaluate R's far-field expansion per query
    direct_local,  // D(Q.c, p): accumulate local moments from R's points
    far_to_local,  // T(Q.c, p): translate R's far-field moments into Q
  };
  Kind kind = Kind::exhaustive;
  int order = 0; // meaningful for the non-exhaustive kinds

  bool is_exhaustive() const { return kind == Kind::exhaustive; }
};

//! Cost model for comparing approximation methods. The exponential model is
//! the decision procedure used as-is (c_F = N_Q D^(p_F+1), c_D = N_R
//! D^(p_D+1), c_T = D^(2 p_T+1), c_E = D N_Q N_R); term_count instead
//! charges the actual number of series terms (c_F = N_Q p_F^D, c_D = N_R
//! p_D^D, c_T = D p_T^(2D)), for experimentation.
enum class CostModel { exponential, term_count };

//! Picks the admissible approximation with the least cost under the chosen
//! model, with ties broken in the order F, D, T, E.
ApproxChoice choose_best_method(double n_query, double n_ref, double max_side_query,
                                double max_side_ref, double h, double tau, int p_max,
                                int dim, CostModel model = CostModel::exponential);

//! Default truncation order limit per dimension: 8, 6, 4, 2, 2 for
//! D = 1..5 and 1 for D >= 6.
int default_p_max(int dim);

} // namespace dfgt
