#include "dfgt/series.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dfgt {

std::vector<int> position_to_multiindex(int pos, int order, int dim)
{
  int span = 1;
  for (int d = 0; d < dim; ++d) {
    span *= order;
  }
  if (pos < 0 || pos >= span) {
    throw std::out_of_range("position outside [0, p^D)");
  }
  std::vector<int> alpha(static_cast<std::size_t>(dim));
  for (int d = dim - 1; d >= 0; --d) {
    alpha[d] = pos % order;
    pos /= order;
  }
  return alpha;
}

int multiindex_to_position(std::span<const int> alpha, int order)
{
  int pos = 0;
  for (int digit : alpha) {
    if (digit < 0 || digit >= order) {
      throw std::out_of_range("multi-index digit outside [0, p)");
    }
    pos = pos * order + digit;
  }
  return pos;
}

std::vector<double> multiindex_expansion(std::span<const double> x, int order)
{
  const int dim = static_cast<int>(x.size());
  std::size_t size = 1;
  for (int d = 0; d < dim; ++d) {
    size *= static_cast<std::size_t>(order);
  }
  std::vector<double> out(size);
  out[0] = 1.0;
  std::vector<int> alpha;
  for (std::size_t i = 1; i < size; ++i) {
    alpha = position_to_multiindex(static_cast<int>(i), order, dim);
    int j = 0;
    while (alpha[j] == 0) {
      ++j;
    }
    --alpha[j];
    const int parent = multiindex_to_position(alpha, order);
    out[i] = out[parent] * x[j];
  }
  return out;
}

SeriesGeometry::SeriesGeometry(int dim, int max_order)
  : dim_(dim)
  , max_order_(max_order)
{
  if (dim < 1 || max_order < 1 || max_order > 15) {
    throw std::invalid_argument("SeriesGeometry requires dim >= 1 and 1 <= p_max <= 15");
  }
  {
    long long size = 1;
    for (int d = 0; d < dim; ++d) {
      size *= max_order;
      if (size > 100'000'000) {
        throw std::invalid_argument("p_max^dim coefficient table is too large");
      }
    }
  }
  block_size_.resize(static_cast<std::size_t>(max_order) + 1);
  for (int p = 0; p <= max_order; ++p) {
    int size = 1;
    for (int d = 0; d < dim; ++d) {
      size *= p;
    }
    block_size_[p] = size;
  }
  table_size_ = block_size_[max_order];

  double factorial[16];
  factorial[0] = 1.0;
  for (int k = 1; k < 16; ++k) {
    factorial[k] = factorial[k - 1] * k;
  }

  // Enumerate all positions, then order by (max digit, position) so the
  // first p^dim terms are exactly the multi-indices with every digit < p.
  std::vector<int> order_of_pos(static_cast<std::size_t>(table_size_));
  std::vector<int> ring(static_cast<std::size_t>(table_size_));
  std::vector<int> positions(static_cast<std::size_t>(table_size_));
  factorial_by_pos_.resize(static_cast<std::size_t>(table_size_));
  inv_factorial_by_pos_.resize(static_cast<std::size_t>(table_size_));
  for (int pos = 0; pos < table_size_; ++pos) {
    positions[pos] = pos;
    int rest = pos;
    int max_digit = 0;
    double fact = 1.0;
    for (int d = 0; d < dim; ++d) {
      const int digit = rest % max_order;
      rest /= max_order;
      max_digit = std::max(max_digit, digit);
      fact *= factorial[digit];
    }
    ring[pos] = max_digit;
    factorial_by_pos_[pos] = fact;
    inv_factorial_by_pos_[pos] = 1.0 / fact;
  }
  std::stable_sort(positions.begin(), positions.end(),
                   [&](int a, int b) { return ring[a] < ring[b]; });
  for (int i = 0; i < table_size_; ++i) {
    order_of_pos[positions[i]] = i;
  }

  terms_.resize(static_cast<std::size_t>(table_size_));
  digits_.resize(static_cast<std::size_t>(table_size_) * dim_);
  for (int i = 0; i < table_size_; ++i) {
    const int pos = positions[i];
    Term& term = terms_[i];
    term.pos = pos;
    term.inv_factorial = inv_factorial_by_pos_[pos];
    std::uint8_t* dig = digits_.data() + static_cast<std::size_t>(i) * dim_;
    int rest = pos;
    int degree = 0;
    for (int d = dim - 1; d >= 0; --d) {
      dig[d] = static_cast<std::uint8_t>(rest % max_order);
      rest /= max_order;
      degree += dig[d];
    }
    term.degree = degree;
    if (degree == 0) {
      term.parent = -1;
      term.parent_dim = -1;
    } else {
      int j = 0;
      while (dig[j] == 0) {
        ++j;
      }
      // Decrementing digit j steps down by p_max^(dim-1-j) positions.
      int stride = 1;
      for (int d = j + 1; d < dim; ++d) {
        stride *= max_order;
      }
      term.parent = order_of_pos[pos - stride];
      term.parent_dim = j;
    }
  }
}

DerivTable::DerivTable(int dim, int max_orders)
  : dim_(dim)
  , stride_(max_orders)
  , values_(static_cast<std::size_t>(dim) * max_orders, 0.0)
{
}

void DerivTable::compute(std::span<const double> a, int orders)
{
  orders_ = orders;
  for (int d = 0; d < dim_; ++d) {
    double* h = values_.data() + static_cast<std::size_t>(d) * stride_;
    const double t = a[d];
    h[0] = std::exp(-t * t);
    if (orders > 1) {
      h[1] = 2.0 * t * h[0];
      for (int k = 1; k + 1 < orders; ++k) {
        h[k + 1] = 2.0 * t * h[k] - 2.0 * k * h[k - 1];
      }
    }
  }
}

double hermite_value(const DerivTable& table, std::span<const int> alpha)
{
  double f = 1.0;
  for (int d = 0; d < table.dim(); ++d) {
    f *= table.at(d, alpha[d]);
  }
  return f;
}

double hermite_value(const DerivTable& table, std::span<const std::uint8_t> alpha)
{
  double f = 1.0;
  for (int d = 0; d < table.dim(); ++d) {
    f *= table.at(d, alpha[d]);
  }
  return f;
}

SeriesWorkspace::SeriesWorkspace(const SeriesGeometry& geometry)
  : derivs(geometry.dim(), 2 * geometry.max_order() - 1)
  , expansion(static_cast<std::size_t>(geometry.table_size()), 0.0)
  , contribution(static_cast<std::size_t>(geometry.table_size()), 0.0)
  , scaled(static_cast<std::size_t>(geometry.dim()), 0.0)
{
}

namespace {

// All scaled arguments in the expansions are offsets divided by sqrt(2 h^2).
inline double inv_scale(double h) { return 1.0 / (h * 1.4142135623730951); }

inline void scale_offset(std::span<const double> a, std::span<const double> b, double h,
                         std::span<double> out)
{
  const double s = inv_scale(h);
  for (std::size_t d = 0; d < a.size(); ++d) {
    out[d] = (a[d] - b[d]) * s;
  }
}

// Fills the first block_size(order) terms of `out` (base-p_max layout) with
// x^alpha using the ancestor recurrence; term order guarantees ancestors are
// already filled.
inline void expand_into(const SeriesGeometry& g, std::span<const double> x, int order,
                        std::span<double> out)
{
  const auto& terms = g.terms();
  const int n = g.block_size(order);
  out[terms[0].pos] = 1.0;
  for (int i = 1; i < n; ++i) {
    const auto& t = terms[i];
    out[t.pos] = out[terms[t.parent].pos] * x[t.parent_dim];
  }
}

inline double sign_of_degree(int degree) { return (degree & 1) ? -1.0 : 1.0; }

} // namespace

void accumulate_farfield_moments(const SeriesGeometry& g, const PointSet& points,
                                 std::span<const int> idx, std::span<const double> center,
                                 double h, SeriesWorkspace& ws, std::span<double> moments)
{
  const auto& terms = g.terms();
  const int n = g.table_size();
  for (int r : idx) {
    scale_offset(points.row(r), center, h, ws.scaled);
    expand_into(g, ws.scaled, g.max_order(), ws.expansion);
    for (int i = 0; i < n; ++i) {
      moments[terms[i].pos] += ws.expansion[terms[i].pos];
    }
  }
  for (int i = 0; i < n; ++i) {
    moments[terms[i].pos] *= terms[i].inv_factorial;
  }
}

void trans_far_to_far(const SeriesGeometry& g, std::span<const double> src,
                      std::span<const double> src_center, std::span<const double> dst_center,
                      double h, SeriesWorkspace& ws, std::span<double> dst)
{
  scale_offset(src_center, dst_center, h, ws.scaled);
  expand_into(g, ws.scaled, g.max_order(), ws.expansion);

  const auto& terms = g.terms();
  const int n = g.table_size();
  const int dim = g.dim();
  for (int i = 0; i < n; ++i) {
    const auto gamma = g.digits(i);
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const auto alpha = g.digits(j);
      int diff_pos = 0;
      bool inside = true;
      for (int d = 0; d < dim; ++d) {
        const int diff = static_cast<int>(gamma[d]) - static_cast<int>(alpha[d]);
        if (diff < 0) {
          inside = false;
          break;
        }
        diff_pos = diff_pos * g.max_order() + diff;
      }
      if (inside) {
        acc += g.inv_factorial_at_pos(diff_pos) * src[terms[j].pos] * ws.expansion[diff_pos];
      }
    }
    dst[terms[i].pos] += acc;
  }
}

double eval_farfield(const SeriesGeometry& g, std::span<const double> moments,
                     std::span<const double> center, std::span<const double> q, double h,
                     int order, SeriesWorkspace& ws)
{
  scale_offset(q, center, h, ws.scaled);
  ws.derivs.compute(ws.scaled, order);

  const auto& terms = g.terms();
  const int n = g.block_size(order);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    sum += moments[terms[i].pos] * hermite_value(ws.derivs, g.digits(i));
  }
  return sum;
}

void accumulate_direct_local(const SeriesGeometry& g, const PointSet& points,
                             std::span<const int> idx, std::span<const double> center,
                             double h, int order, SeriesWorkspace& ws,
                             std::span<double> local)
{
  const auto& terms = g.terms();
  const int n = g.block_size(order);
  for (int i = 0; i < n; ++i) {
    ws.contribution[terms[i].pos] = 0.0;
  }
  for (int r : idx) {
    scale_offset(center, points.row(r), h, ws.scaled);
    ws.derivs.compute(ws.scaled, order);
    for (int i = 0; i < n; ++i) {
      ws.contribution[terms[i].pos] += hermite_value(ws.derivs, g.digits(i));
    }
  }
  for (int i = 0; i < n; ++i) {
    const auto& t = terms[i];
    local[t.pos] += sign_of_degree(t.degree) * t.inv_factorial * ws.contribution[t.pos];
  }
}

void trans_far_to_local(const SeriesGeometry& g, std::span<const double> moments,
                        std::span<const double> src_center,
                        std::span<const double> dst_center, double h, int order,
                        SeriesWorkspace& ws, std::span<double> local)
{
  scale_offset(dst_center, src_center, h, ws.scaled);
  ws.derivs.compute(ws.scaled, 2 * order - 1);

  const auto& terms = g.terms();
  const int n = g.block_size(order);
  const int dim = g.dim();
  for (int i = 0; i < n; ++i) {
    const auto beta = g.digits(i);
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const auto alpha = g.digits(j);
      double f = 1.0;
      for (int d = 0; d < dim; ++d) {
        f *= ws.derivs.at(d, alpha[d] + beta[d]);
      }
      acc += moments[terms[j].pos] * f;
    }
    const auto& t = terms[i];
    local[t.pos] += sign_of_degree(t.degree) * t.inv_factorial * acc;
  }
}

void trans_local_to_local(const SeriesGeometry& g, std::span<const double> src,
                          std::span<const double> src_center,
                          std::span<const double> dst_center, double h, int order,
                          SeriesWorkspace& ws, std::span<double> dst)
{
  scale_offset(dst_center, src_center, h, ws.scaled);
  expand_into(g, ws.scaled, order, ws.expansion);

  const auto& terms = g.terms();
  const int n = g.block_size(order);
  const int dim = g.dim();
  for (int i = 0; i < n; ++i) {
    const auto alpha = g.digits(i);
    const double inv_fact_alpha = terms[i].inv_factorial;
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const auto beta = g.digits(j);
      int diff_pos = 0;
      bool dominates = true;
      for (int d = 0; d < dim; ++d) {
        const int diff = static_cast<int>(beta[d]) - static_cast<int>(alpha[d]);
        if (diff < 0) {
          dominates = false;
          break;
        }
        diff_pos = diff_pos * g.max_order() + diff;
      }
      if (dominates) {
        // beta!/(alpha! (beta - alpha)!) as a product of factorial lookups.
        const double binom = g.factorial_at_pos(terms[j].pos) * inv_fact_alpha *
                             g.inv_factorial_at_pos(diff_pos);
        acc += binom * src[terms[j].pos] * ws.expansion[diff_pos];
      }
    }
    dst[terms[i].pos] += acc;
  }
}

double eval_local(const SeriesGeometry& g, std::span<const double> local,
                  std::span<const double> center, std::span<const double> q, double h,
                  int order, SeriesWorkspace& ws)
{
  scale_offset(q, center, h, ws.scaled);
  expand_into(g, ws.scaled, order, ws.expansion);

  const auto& terms = g.terms();
  const int n = g.block_size(order);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    sum += local[terms[i].pos] * ws.expansion[terms[i].pos];
  }
  return sum;
}

} // namespace dfgt
