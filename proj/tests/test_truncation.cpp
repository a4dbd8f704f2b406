#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dfgt/truncation.hpp"

#include <cmath>
#include <random>

using namespace dfgt;

TEST_CASE("far-field bound hand values")
{
  CHECK(farfield_error_bound(10.0, 0.5, 1, 1) == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(farfield_error_bound(0.0, 0.5, 3, 2) == 0.0);
  CHECK(local_error_bound(10.0, 0.5, 1, 1) == doctest::Approx(10.0).epsilon(1e-14));
}

TEST_CASE("f2l bound hand value")
{
  CHECK(f2l_error_bound(1.0, 0.25, 1, 1) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(f2l_error_bound(0.0, 0.25, 1, 1) == 0.0);
}

TEST_CASE("bounds vanish as the order grows")
{
  for (int dim = 1; dim <= 4; ++dim) {
    double prev_ff = farfield_error_bound(100.0, 0.7, 1, dim);
    double prev_f2l = f2l_error_bound(100.0, 0.35, 1, dim);
    const double first_ff = prev_ff;
    const double first_f2l = prev_f2l;
    for (int p = 2; p <= 14; ++p) {
      const double ff = farfield_error_bound(100.0, 0.7, p, dim);
      const double f2l = f2l_error_bound(100.0, 0.35, p, dim);
      CHECK(ff <= prev_ff * (1.0 + 1e-12));
      CHECK(f2l <= prev_f2l * (1.0 + 1e-12));
      prev_ff = ff;
      prev_f2l = f2l;
    }
    CHECK(farfield_error_bound(100.0, 0.7, 14, dim) < 1e-4 * first_ff);
    CHECK(f2l_error_bound(100.0, 0.35, 14, dim) < 1e-4 * first_f2l);
  }
}

TEST_CASE("bounds grow with the size ratio and the count")
{
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> ratio(0.01, 0.95);
  std::uniform_real_distribution<double> count(1.0, 1e6);
  std::uniform_int_distribution<int> order(1, 8);
  std::uniform_int_distribution<int> dim(1, 5);
  for (int trial = 0; trial < 500; ++trial) {
    double r1 = ratio(rng);
    double r2 = ratio(rng);
    if (r1 > r2) {
      std::swap(r1, r2);
    }
    const int p = order(rng);
    const int d = dim(rng);
    const double c = count(rng);
    CHECK(farfield_error_bound(c, r1, p, d) <=
          farfield_error_bound(c, r2, p, d) * (1.0 + 1e-12));
    CHECK(f2l_error_bound(c, 0.5 * r1, p, d) <=
          f2l_error_bound(c, 0.5 * r2, p, d) * (1.0 + 1e-12));
    CHECK(farfield_error_bound(c, r1, p, d) <=
          farfield_error_bound(2.0 * c, r1, p, d) * (1.0 + 1e-12));
  }
}

TEST_CASE("log-space fallback avoids overflow for huge counts near r = 1")
{
  const double bound = farfield_error_bound(1e15, 1.0 - 1e-14, 1, 5);
  CHECK(std::isfinite(bound));
  CHECK(bound > 0.0);
}

TEST_CASE("order selectors reject oversized nodes")
{
  // Reference side above 2h means the ratio check fails outright.
  CHECK(!farfield_order(2.1, 100.0, 1.0, 1e9, 8, 2).has_value());
  CHECK(!local_accum_order(2.1, 100.0, 1.0, 1e9, 8, 2).has_value());
  // F2L rejects ratios at or above 1/2 of the 4h denominator.
  CHECK(!f2l_order(2.0, 1.0, 100.0, 1.0, 1e9, 8, 2).has_value());
  CHECK(f2l_order(1.9, 1.0, 100.0, 1.0, 1e9, 8, 2).has_value());
}

TEST_CASE("order selector edge cases")
{
  // tau exactly at the p = 1 bound returns 1.
  const double r = 0.3;
  const double tau = farfield_error_bound(50.0, r, 1, 2);
  const OrderResult p = farfield_order(2.0 * r * 1.0, 50.0, 1.0, tau, 6, 2);
  REQUIRE(p.has_value());
  CHECK(*p == 1);

  // tau = 0 with a nonempty node can never be met.
  CHECK(!farfield_order(0.5, 50.0, 1.0, 0.0, 6, 2).has_value());
}

TEST_CASE("returned orders are minimal")
{
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> side(0.01, 1.5);
  std::uniform_real_distribution<double> h_pick(0.5, 2.5);
  std::uniform_real_distribution<double> count(1.0, 5e4);
  std::uniform_real_distribution<double> log_tau(-8.0, 3.0);
  std::uniform_int_distribution<int> dim(1, 5);
  int finite_orders = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int d = dim(rng);
    const int p_max = default_p_max(d);
    const double h = h_pick(rng);
    const double tau = std::pow(10.0, log_tau(rng));
    const double c = count(rng);
    const double side_q = side(rng);
    const double side_r = side(rng);

    const auto check_minimal = [&](const OrderResult& result, auto bound) {
      if (!result) {
        return;
      }
      ++finite_orders;
      CHECK(bound(*result) <= tau);
      if (*result > 1) {
        CHECK(bound(*result - 1) > tau);
      }
    };

    check_minimal(farfield_order(side_r, c, h, tau, p_max, d), [&](int p) {
      return farfield_error_bound(c, side_r / (2.0 * h), p, d);
    });
    check_minimal(local_accum_order(side_q, c, h, tau, p_max, d), [&](int p) {
      return local_error_bound(c, side_q / (2.0 * h), p, d);
    });
    check_minimal(f2l_order(side_q, side_r, c, h, tau, p_max, d), [&](int p) {
      return f2l_error_bound(c, std::max(side_q, side_r) / (4.0 * h), p, d);
    });
  }
  CHECK(finite_orders > 100);
}

TEST_CASE("choose_best_method falls back to exhaustive")
{
  // Sides far above the bandwidth: every order selector fails.
  const ApproxChoice choice =
    choose_best_method(100.0, 100.0, 50.0, 50.0, 0.1, 1e-3, 6, 2);
  CHECK(choice.is_exhaustive());
}

TEST_CASE("choose_best_method picks the far-field evaluation for a lone query")
{
  // N_Q = 1, N_R = 1e6, D = 2, budget chosen so the far-field order comes
  // out 2: c_F = 1 * 2^(2+1) = 8, far below every alternative.
  const double h = 1.0;
  const double side_r = 0.6; // reference ratio 0.3
  const double side_q = 1e-3;
  const double tau = 3e5;
  const OrderResult p_f = farfield_order(side_r, 1e6, h, tau, 6, 2);
  REQUIRE(p_f.has_value());
  REQUIRE(*p_f == 2);
  const ApproxChoice choice = choose_best_method(1.0, 1e6, side_q, side_r, h, tau, 6, 2);
  CHECK(choice.kind == ApproxChoice::Kind::farfield_eval);
  CHECK(choice.order == 2);
}

TEST_CASE("exact cost ties prefer the earlier branch")
{
  // Equal node geometry and N_Q = N_R force c_F = c_D; sides at 1.8h keep
  // the far-field/local selectors barely admissible (ratio 0.9) while the
  // F2L bound never reaches the budget, so the cost comparison is an exact
  // F-vs-D tie and the far-field branch must win it.
  const double h = 1.0;
  const double side = 1.8;
  const double tau = farfield_error_bound(64.0, side / (2.0 * h), 1, 2);
  const OrderResult p_f = farfield_order(side, 64.0, h, tau, 6, 2);
  const OrderResult p_d = local_accum_order(side, 64.0, h, tau, 6, 2);
  const OrderResult p_t = f2l_order(side, side, 64.0, h, tau, 6, 2);
  REQUIRE(p_f.has_value());
  REQUIRE(p_d.has_value());
  REQUIRE(*p_f == *p_d);
  REQUIRE(!p_t.has_value());
  const ApproxChoice choice = choose_best_method(64.0, 64.0, side, side, h, tau, 6, 2);
  CHECK(choice.kind == ApproxChoice::Kind::farfield_eval);
}

TEST_CASE("chosen methods always meet the error budget")
{
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> side(0.01, 4.0);
  std::uniform_real_distribution<double> h_pick(0.1, 3.0);
  std::uniform_real_distribution<double> count(1.0, 1e4);
  std::uniform_real_distribution<double> log_tau(-8.0, 2.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int d = 1 + trial % 4;
    const int p_max = default_p_max(d);
    const double h = h_pick(rng);
    const double tau = std::pow(10.0, log_tau(rng));
    const double nq = count(rng);
    const double nr = count(rng);
    const double side_q = side(rng);
    const double side_r = side(rng);
    const ApproxChoice choice =
      choose_best_method(nq, nr, side_q, side_r, h, tau, p_max, d);
    switch (choice.kind) {
    case ApproxChoice::Kind::farfield_eval:
      CHECK(farfield_error_bound(nr, side_r / (2.0 * h), choice.order, d) <= tau);
      break;
    case ApproxChoice::Kind::direct_local:
      CHECK(local_error_bound(nr, side_q / (2.0 * h), choice.order, d) <= tau);
      break;
    case ApproxChoice::Kind::far_to_local:
      CHECK(f2l_error_bound(nr, std::max(side_q, side_r) / (4.0 * h), choice.order, d) <=
            tau);
      break;
    case ApproxChoice::Kind::exhaustive:
      break;
    }
  }
}

TEST_CASE("default p_max table")
{
  CHECK(default_p_max(1) == 8);
  CHECK(default_p_max(2) == 6);
  CHECK(default_p_max(3) == 4);
  CHECK(default_p_max(4) == 2);
  CHECK(default_p_max(5) == 2);
  CHECK(default_p_max(6) == 1);
  CHECK(default_p_max(10) == 1);
}
