#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "idq/errors.hpp"
#include "idq/idrate.hpp"
#include "idq/tcdelta.hpp"

using namespace idq;

namespace {

DistortionMatrix binary_hamming() {
  return distortion_matrix(std::vector<double>{0, 1}, std::vector<double>{0, 1}, Metric::kHamming);
}

// d_s reached by a solver curve at a given rate, by linear interpolation on
// its (rate, d_s) points in slope order.
double ds_at_rate(const TcCurve& c, double rate) {
  for (std::size_t k = 1; k < c.points.size(); ++k) {
    const auto& a = c.points[k - 1];
    const auto& b = c.points[k];
    if (a.rate <= rate && rate <= b.rate) {
      if (b.rate == a.rate) return b.d_s;
      return a.d_s + (b.d_s - a.d_s) * (rate - a.rate) / (b.rate - a.rate);
    }
  }
  FAIL("rate outside the sweep");
  return 0.0;
}

}  // namespace

TEST_SUITE("tcdelta") {
  TEST_CASE("distortion matrices") {
    const auto h = binary_hamming();
    CHECK(h.gamma == Matrix(2, 2, std::vector<double>{0, 1, 1, 0}));

    const std::vector<double> g3{-1, 0, 1};
    const auto q = distortion_matrix(g3, g3, Metric::kQuadratic);
    CHECK(q.gamma(0, 2) == 4.0);
    CHECK(q.gamma == q.gamma.transposed());
    for (std::size_t i = 0; i < 3; ++i) CHECK(q.gamma(i, i) == 0.0);

    const std::vector<double> single{2.5};
    CHECK(distortion_matrix(single, single, Metric::kQuadratic).gamma == Matrix(1, 1, 0.0));
  }

  TEST_CASE("vector distortion is per-sample") {
    const Matrix pts(2, 2, std::vector<double>{0, 0, 1, 3});
    const auto g = vector_distortion_matrix(pts, pts);
    CHECK(g.gamma(0, 1) == 5.0);
    CHECK(g.block_len == 2);
  }

  TEST_CASE("mutual information examples") {
    const Pmf p = bernoulli_pmf(0.5);
    CHECK(mutual_information(p, Channel{Matrix(2, 2, std::vector<double>{0.3, 0.3, 0.7, 0.7})}) == 0.0);
    CHECK(mutual_information(p, Channel{Matrix::identity(2)}) == doctest::Approx(1.0).epsilon(1e-15));
    const Channel bsc{Matrix(2, 2, std::vector<double>{0.75, 0.25, 0.25, 0.75})};
    CHECK(mutual_information(p, bsc) == doctest::Approx(1.0 - binary_entropy(0.25)).epsilon(1e-14));
  }

  TEST_CASE("mutual information survives an underflowing marginal") {
    const Pmf p({0, 1, 2}, {1e-10, 0.5, 0.5 - 1e-10});
    const Channel q{Matrix(2, 3, std::vector<double>{1, 1, 1, 1e-320, 0, 0})};
    const double info = mutual_information(p, q);
    CHECK(std::isfinite(info));
    CHECK(info <= 1e-300);
  }

  TEST_CASE("zero slope is a fixed point") {
    const Pmf p = discretize_gaussian(1.0, 8.0, 33);
    const auto g = distortion_matrix(p.support(), p.support(), Metric::kQuadratic);
    std::vector<double> t(33);
    for (std::size_t j = 0; j < t.size(); ++j) t[j] = (j + 1.0) / (33.0 * 17.0);
    const auto step = ba_step(p, t, g, 0.0);
    for (std::size_t i = 0; i < 33; ++i)
      for (std::size_t j = 0; j < 33; ++j) CHECK(step.channel.q(j, i) == doctest::Approx(t[j]).epsilon(1e-13));
    for (std::size_t j = 0; j < 33; ++j) CHECK(step.t[j] == doctest::Approx(t[j]).epsilon(1e-13));
    CHECK(mutual_information(p, step.channel) <= 1e-14);

    const auto sol = solve_tc_point(p, g, 0.0);
    CHECK(sol.converged);
    CHECK(sol.rate <= 1e-14);
    CHECK(std::abs(sol.d_s) <= 1e-12);
  }

  TEST_CASE("large slope drives the binary channel to identity") {
    const auto sol = solve_tc_point(bernoulli_pmf(0.5), binary_hamming(), 60.0);
    CHECK(sol.channel.q(0, 0) > 1 - 1e-9);
    CHECK(sol.channel.q(1, 1) > 1 - 1e-9);
    CHECK(sol.rate == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(sol.d_id == doctest::Approx(0.5).epsilon(1e-8));
  }

  TEST_CASE("column-stochastic channels and reported quantities") {
    const Pmf p = discretize_gaussian(1.0, 8.0, 129);
    const auto g = distortion_matrix(p.support(), p.support(), Metric::kQuadratic);
    for (double s : {0.7, 2.0, 9.0, 120.0}) {
      const auto sol = solve_tc_point(p, g, s, 1e-9, 3000);
      CHECK(sol.channel.max_column_error() <= 1e-12);
      CHECK(sol.channel.min_entry() >= 0.0);
      CHECK(std::abs(sol.rate - mutual_information(p, sol.channel)) <= 1e-12);
      const auto [prod, joint] = expected_distortions(p, sol.channel, g);
      CHECK(std::abs(sol.d_s - (prod - joint)) <= 1e-12);
      CHECK(sol.d_id == doctest::Approx(std::pow(std::sqrt(prod) - std::sqrt(joint), 2)));
      CHECK(sol.max_objective_increase <= 1e-9);
      const double total = std::accumulate(sol.code_marginal.probs().begin(), sol.code_marginal.probs().end(), 0.0);
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
  }

  TEST_CASE("fixed point consistency") {
    const Pmf p = discretize_gaussian(1.0, 8.0, 65);
    const auto g = distortion_matrix(p.support(), p.support(), Metric::kQuadratic);
    const double tol = 1e-9;
    const auto sol = solve_tc_point(p, g, 4.0, tol, 100000);
    REQUIRE(sol.converged);
    const auto next = ba_step(p, sol.code_marginal.probs(), g, 4.0);
    const auto [prod, joint] = expected_distortions(p, next.channel, g);
    CHECK(std::abs(mutual_information(p, next.channel) - sol.rate) <= 10 * tol);
    CHECK(std::abs((prod - joint) - sol.d_s) <= 10 * tol);
  }

  TEST_CASE("underflow when a column loses all its mass") {
    std::vector<double> t{1.0, 0.0};
    CHECK_THROWS_AS(ba_step(bernoulli_pmf(0.5), t, binary_hamming(), 5000.0), Error);
    try {
      ba_step(bernoulli_pmf(0.5), t, binary_hamming(), 5000.0);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kNumericalUnderflow);
    }
  }

  TEST_CASE("shape checks") {
    CHECK_THROWS_AS(solve_tc_point(bernoulli_pmf(0.5), distortion_matrix(std::vector<double>{0, 1, 2}, std::vector<double>{0}, Metric::kHamming), 1.0), Error);
    CHECK_THROWS_AS(solve_tc_point(bernoulli_pmf(0.5), binary_hamming(), -1.0), Error);
  }

  TEST_CASE("brute-force oracle corner cases") {
    const Pmf p = bernoulli_pmf(0.5);
    const auto g = binary_hamming();
    CHECK(std::abs(brute_force_tc_oracle(p, g, 0.0, 0.01)) <= 1e-12);
    CHECK(brute_force_tc_oracle(p, g, 1.0, 0.01) == doctest::Approx(0.5));
    CHECK(brute_force_tc_oracle(p, g, 1.0 - binary_entropy(0.25), 0.01) ==
          doctest::Approx(0.25).epsilon(0.02 / 0.25));
    CHECK_THROWS_AS(brute_force_tc_oracle(p, g, 0.5, 0.1), Error);
  }

  TEST_CASE("binary closed form agrees with brute force") {
    const Pmf p = bernoulli_pmf(0.5);
    const auto g = binary_hamming();
    for (double d = 0.05; d < 0.46; d += 0.05) {
      const double bf = brute_force_tc_oracle(p, g, binary_hamming_tc_oracle(d), 0.01);
      CHECK(std::abs(bf - d) <= 0.03);
    }
  }

  TEST_CASE("binary solver against brute force and the closed form") {
    const Pmf p = bernoulli_pmf(0.5);
    const auto g = binary_hamming();
    const auto curve = tc_curve(p, g, log_slope_grid(0.05, 20.0, 80));
    for (const auto& pt : curve.points) {
      CHECK(pt.max_lagrangian_increase <= 1e-9);
      CHECK(pt.max_objective_increase <= 1e-9);
      if (pt.d_id <= 0.5) CHECK(std::abs(pt.rate - binary_hamming_tc_oracle(pt.d_id)) <= 1e-6);
    }
    for (double budget : {0.1, 0.25, 0.5, 0.75}) {
      const double bf = brute_force_tc_oracle(p, g, budget, 0.01);
      CHECK(std::abs(ds_at_rate(curve, budget) - bf) <= std::max(1e-3, 3 * 0.01));
    }
  }

  TEST_CASE("binary sweep is monotone") {
    const Pmf p = bernoulli_pmf(0.5);
    std::vector<double> slopes(50);
    for (std::size_t k = 0; k < slopes.size(); ++k) slopes[k] = 10.0 * k / 49.0;
    const auto c = tc_curve(p, binary_hamming(), slopes);
    CHECK(c.curve.satisfies_monotonicity(1e-12));
  }

  TEST_CASE("solver never beats the brute-force envelope on a ternary source") {
    const Pmf p({0, 1, 2}, {0.2, 0.5, 0.3});
    const auto g = distortion_matrix(p.support(), std::vector<double>{0, 2}, Metric::kQuadratic);
    const auto curve = tc_curve(p, g, log_slope_grid(0.1, 30.0, 12));
    for (const auto& pt : curve.points) {
      if (pt.rate <= 1e-6) continue;
      const double bf = brute_force_tc_oracle(p, g, pt.rate, 0.01);
      CHECK(pt.d_s <= bf + 0.03);
    }
  }

  TEST_CASE("Gaussian points sit on or above the identification rate") {
    const Pmf p = discretize_gaussian(1.0, 8.0, 129);
    const auto g = distortion_matrix(p.support(), p.support(), Metric::kQuadratic);
    const auto c = tc_curve(p, g, log_slope_grid(1.5, 200.0, 12), 1e-9, 2000);
    for (const auto& pt : c.points) {
      CHECK(pt.rate >= id_rate_iid(1.0, pt.d_id).value());
      CHECK(pt.max_objective_increase <= 1e-9);
    }
    CHECK(c.curve.satisfies_monotonicity(1e-9));
    CHECK(c.curve.max_d_id() > 1.7);
  }

  TEST_CASE("component curves") {
    const Pmf p = discretize_gaussian(1.0, 8.0, 65);
    const auto g = distortion_matrix(p.support(), p.support(), Metric::kQuadratic);
    const auto slopes = log_slope_grid(1.0, 50.0, 8);
    const auto single = tc_curve(p, g, slopes, 1e-9, 2000);

    const auto one = component_tc_curve({TcComponent{p, g}}, slopes, 1e-9, 2000);
    REQUIRE(one.curve.points.size() == single.curve.points.size());
    for (std::size_t k = 0; k < single.curve.points.size(); ++k) {
      CHECK(one.curve.points[k].d_id == single.curve.points[k].d_id);
      CHECK(one.curve.points[k].rate == single.curve.points[k].rate);
    }

    const auto two = component_tc_curve(gaussian_components(std::vector<double>{1.0, 1.0}, 8.0, 65),
                                        slopes, 1e-9, 2000);
    REQUIRE(two.curve.points.size() == single.curve.points.size());
    for (std::size_t k = 0; k < single.curve.points.size(); ++k) {
      CHECK(two.curve.points[k].d_id == doctest::Approx(single.curve.points[k].d_id).epsilon(1e-14));
      CHECK(two.curve.points[k].rate.value() ==
            doctest::Approx(single.curve.points[k].rate.value()).epsilon(1e-14));
    }
  }

  TEST_CASE("log slope grid") {
    const auto g = log_slope_grid(0.5, 400.0, 5);
    REQUIRE(g.size() == 6);
    CHECK(g[0] == 0.0);
    CHECK(g[1] == 0.5);
    CHECK(g[5] == doctest::Approx(400.0));
    CHECK(std::is_sorted(g.begin(), g.end()));
    CHECK(log_slope_grid(1.0, 2.0, 1, false) == std::vector<double>{1.0});
  }
}
