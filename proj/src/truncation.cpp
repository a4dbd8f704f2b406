#include "dfgt/truncation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dfgt {

namespace {

double binomial(int n, int k)
{
  double b = 1.0;
  for (int i = 1; i <= k; ++i) {
    b *= static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return b;
}

double sqrt_factorial(int p)
{
  double f = 1.0;
  for (int k = 2; k <= p; ++k) {
    f *= k;
  }
  return std::sqrt(f);
}

double int_pow(double x, int n)
{
  double r = 1.0;
  for (int i = 0; i < n; ++i) {
    r *= x;
  }
  return r;
}

// count/(1-s)^(D*dpow) * sum_{k<D} C(D,k) a^k b^(D-k); falls back to log
// space when the prefactor overflows.
double bound_sum(double count, double s, int dpow, double a, double b, int dim)
{
  double sum = 0.0;
  for (int k = 0; k < dim; ++k) {
    sum += binomial(dim, k) * int_pow(a, k) * int_pow(b, dim - k);
  }
  const double prefactor = count / int_pow(1.0 - s, dim * dpow);
  double bound = prefactor * sum;
  if (!std::isfinite(bound) && count > 0.0 && sum > 0.0) {
    const double log_bound =
      std::log(count) - dim * dpow * std::log1p(-s) + std::log(sum);
    bound = std::exp(log_bound);
  }
  return bound;
}

} // namespace

double farfield_error_bound(double count, double r, int order, int dim)
{
  if (count <= 0.0) {
    return 0.0;
  }
  const double rp = int_pow(r, order);
  return bound_sum(count, r, 1, 1.0 - rp, rp / sqrt_factorial(order), dim);
}

double local_error_bound(double count, double r, int order, int dim)
{
  return farfield_error_bound(count, r, order, dim);
}

double f2l_error_bound(double count, double r, int order, int dim)
{
  if (count <= 0.0) {
    return 0.0;
  }
  const double s = 2.0 * r;
  const double sp = int_pow(s, order);
  return bound_sum(count, s, 2, (1.0 - sp) * (1.0 - sp),
                   sp * (2.0 - sp) / sqrt_factorial(order), dim);
}

namespace {

template <typename Bound>
OrderResult least_order(Bound bound, double tau, int p_max)
{
  for (int p = 1; p <= p_max; ++p) {
    if (bound(p) <= tau) {
      return p;
    }
  }
  return std::nullopt;
}

} // namespace

OrderResult farfield_order(double max_side_ref, double count, double h, double tau,
                           int p_max, int dim)
{
  const double r = max_side_ref / (2.0 * h);
  if (r >= 1.0) {
    return std::nullopt;
  }
  return least_order([&](int p) { return farfield_error_bound(count, r, p, dim); }, tau,
                     p_max);
}

OrderResult local_accum_order(double max_side_query, double count, double h, double tau,
                              int p_max, int dim)
{
  const double r = max_side_query / (2.0 * h);
  if (r >= 1.0) {
    return std::nullopt;
  }
  return least_order([&](int p) { return local_error_bound(count, r, p, dim); }, tau,
                     p_max);
}

OrderResult f2l_order(double max_side_query, double max_side_ref, double count, double h,
                      double tau, int p_max, int dim)
{
  const double r = std::max(max_side_query, max_side_ref) / (4.0 * h);
  if (r >= 0.5) {
    return std::nullopt;
  }
  return least_order([&](int p) { return f2l_error_bound(count, r, p, dim); }, tau, p_max);
}

ApproxChoice choose_best_method(double n_query, double n_ref, double max_side_query,
                                double max_side_ref, double h, double tau, int p_max,
                                int dim, CostModel model)
{
  const OrderResult p_f = farfield_order(max_side_ref, n_ref, h, tau, p_max, dim);
  const OrderResult p_d = local_accum_order(max_side_query, n_ref, h, tau, p_max, dim);
  const OrderResult p_t =
    f2l_order(max_side_query, max_side_ref, n_ref, h, tau, p_max, dim);

  constexpr double inf = std::numeric_limits<double>::infinity();
  const double d = static_cast<double>(dim);
  double c_f = inf;
  double c_d = inf;
  double c_t = inf;
  if (model == CostModel::exponential) {
    c_f = p_f ? n_query * std::pow(d, *p_f + 1) : inf;
    c_d = p_d ? n_ref * std::pow(d, *p_d + 1) : inf;
    c_t = p_t ? std::pow(d, 2.0 * *p_t + 1) : inf;
  } else {
    c_f = p_f ? n_query * std::pow(static_cast<double>(*p_f), d) : inf;
    c_d = p_d ? n_ref * std::pow(static_cast<double>(*p_d), d) : inf;
    c_t = p_t ? d * std::pow(static_cast<double>(*p_t), 2.0 * d) : inf;
  }
  const double c_e = d * n_query * n_ref;

  const double best = std::min(std::min(c_f, c_d), std::min(c_t, c_e));
  if (c_f == best) {
    return { ApproxChoice::Kind::farfield_eval, *p_f };
  }
  if (c_d == best) {
    return { ApproxChoice::Kind::direct_local, *p_d };
  }
  if (c_t == best) {
    return { ApproxChoice::Kind::far_to_local, *p_t };
  }
  return { ApproxChoice::Kind::exhaustive, 0 };
}

int default_p_max(int dim)
{
  if (dim < 1) {
    throw std::invalid_argument("dimension must be >= 1");
  }
  switch (dim) {
  case 1:
    return 8;
  case 2:
    return 6;
  case 3:
    return 4;
  case 4:
  case 5:
    return 2;
  default:
    return 1;
  }
}

} // namespace dfgt
