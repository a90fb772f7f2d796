#include <doctest.h>

#include <cmath>
#include <numbers>

#include "idq/errors.hpp"
#include "idq/simulator.hpp"

using namespace idq;

namespace {

Codebook scalar_book(std::vector<double> values) {
  Codebook cb;
  cb.block_len = 1;
  const std::size_t n = values.size();
  cb.codewords = Matrix(n, 1, std::move(values));
  return cb;
}

// Pr{chi^2_k <= x} for even k via the Poisson tail sum.
double chi2_cdf_even(int k, double x) {
  double term = std::exp(-x / 2);
  double sum = term;
  for (int i = 1; i < k / 2; ++i) {
    term *= (x / 2) / i;
    sum += term;
  }
  return 1.0 - sum;
}

}  // namespace

TEST_SUITE("simulator") {
  TEST_CASE("single codeword is the sample mean") {
    const Matrix s = sample_block(IidGaussian{1.0}, 3, 2000, 4);
    const Codebook cb = train_codebook(s, 0.0, 3, 1);
    REQUIRE(cb.count() == 1);
    for (std::size_t k = 0; k < 3; ++k) {
      double mean = 0.0;
      for (std::size_t r = 0; r < s.rows(); ++r) mean += s(r, k);
      CHECK(cb.codewords(0, k) == doctest::Approx(mean / 2000.0).epsilon(1e-12));
    }
    CHECK(cb.rate_bits() == 0.0);
  }

  TEST_CASE("two-level Lloyd quantizer for N(0,1)") {
    const Matrix s = sample_block(IidGaussian{1.0}, 1, 200000, 9);
    const Codebook cb = train_codebook(s, 1.0, 1, 3);
    REQUIRE(cb.count() == 2);
    const double a = std::min(cb.codewords(0, 0), cb.codewords(1, 0));
    const double b = std::max(cb.codewords(0, 0), cb.codewords(1, 0));
    const double target = std::sqrt(2.0 / std::numbers::pi);
    CHECK(a == doctest::Approx(-target).epsilon(0.01));
    CHECK(b == doctest::Approx(target).epsilon(0.01));
    CHECK(cb.rate_bits() == 1.0);
  }

  TEST_CASE("training is deterministic and guarded") {
    const Matrix s = sample_block(IidGaussian{1.0}, 2, 5000, 2);
    CHECK(train_codebook(s, 2.0, 2, 77).codewords == train_codebook(s, 2.0, 2, 77).codewords);
    CHECK_THROWS_AS(train_codebook(s, 9.0, 2, 1), Error);
    try {
      train_codebook(s, 9.0, 2, 1);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kTooManyCodewords);
    }
    CHECK_THROWS_AS(train_codebook(s, 5.0, 2, 1), Error);  // 1024 codewords, 5000 samples
    CHECK_THROWS_AS(train_codebook(s, 1.0, 3, 1), Error);
  }

  TEST_CASE("signature assignment") {
    const Codebook cb = scalar_book({-1.0, 1.0});
    const Signature exact = assign_signature(cb, std::vector<double>{1.0});
    CHECK(exact.index == 1);
    CHECK(exact.stored_dist == 0.0);
    const Signature near = assign_signature(cb, std::vector<double>{0.2});
    CHECK(near.index == 1);
    CHECK(near.stored_dist == doctest::Approx(0.64));
    CHECK(assign_signature(cb, std::vector<double>{0.0}).index == 0);
    CHECK_THROWS_AS(assign_signature(cb, std::vector<double>{0.0, 1.0}), Error);
  }

  TEST_CASE("decision rule") {
    CHECK(decide(4.0, 0.64, 1.0) == Decision::kNo);
    CHECK(decide(3.2, 0.64, 1.0) == Decision::kMaybe);
    const Codebook cb = scalar_book({0.0, 3.0});
    const Signature sig{0, 0.0};
    CHECK(decide(sig, cb, std::vector<double>{0.0}, 0.0) == Decision::kMaybe);
    CHECK(decide(sig, cb, std::vector<double>{1e-6}, 0.0) == Decision::kNo);
    const std::vector<double> x{0.3};
    const auto out = query_decide(assign_signature(cb, x), cb, x, x, 0.0);
    CHECK(out.decision == Decision::kMaybe);
    CHECK(out.truly_similar);
  }

  TEST_CASE("AND composition") {
    const std::vector<Decision> all{Decision::kMaybe, Decision::kMaybe};
    const std::vector<Decision> one{Decision::kMaybe, Decision::kNo};
    CHECK(combine_and(all) == Decision::kMaybe);
    CHECK(combine_and(one) == Decision::kNo);
  }

  TEST_CASE("sub-block lengths") {
    CHECK(sub_block_length(0.5, 16) == 16);
    CHECK(sub_block_length(1.0, 16) == 8);
    CHECK(sub_block_length(2.0, 16) == 4);
    CHECK(sub_block_length(1.0, 8) == 8);
    CHECK(sub_block_length(0.5, 64) == 16);
    CHECK_THROWS_AS(sub_block_length(9.0, 4), Error);
  }

  TEST_CASE("no false negatives and reproducible estimates") {
    const auto a = estimate_pr_maybe(IidGaussian{1.0}, 1.0, 8, 0.5, 4000, 12);
    const auto b = estimate_pr_maybe(IidGaussian{1.0}, 1.0, 8, 0.5, 4000, 12);
    CHECK(a.false_negatives == 0);
    CHECK(a.estimate == b.estimate);
    const auto c = estimate_pr_maybe(IidGaussian{1.0}, 1.0, 8, 0.5, 4000, 99);
    CHECK(std::abs(a.estimate - c.estimate) <= 3 * std::hypot(a.std_error, c.std_error));
    CHECK(a.std_error == doctest::Approx(std::sqrt(a.estimate * (1 - a.estimate) / 4000)));
    CHECK_THROWS_AS(estimate_pr_maybe(IidGaussian{1.0}, 1.0, 8, 0.5, 999, 1), Error);
  }

  TEST_CASE("memory sources stay admissible") {
    const auto gm = estimate_pr_maybe(GaussMarkov{1.0, 0.8}, 1.0, 8, 0.4, 3000, 5);
    CHECK(gm.false_negatives == 0);
    const SymMatrix cov(4, {1, .5, .25, .125, .5, 1, .5, .25, .25, .5, 1, .5, .125, .25, .5, 1});
    const auto mv = estimate_pr_maybe(MultivariateGaussian{cov}, 1.0, 4, 0.4, 3000, 5);
    CHECK(mv.false_negatives == 0);
  }

  TEST_CASE("above the similarity limit Pr{maybe} tracks Pr{d(X,Y) <= d_id}") {
    const auto est = estimate_pr_maybe(IidGaussian{1.0}, 0.5, 64, 3.0, 4000, 21);
    // d(X,Y) = chi^2_64 * 2 / 64 for unit variance
    const double truth = chi2_cdf_even(64, 3.0 * 64 / 2);
    CHECK(truth > 0.99);
    CHECK(est.estimate >= truth - 3 * std::max(est.std_error, 1.0 / 4000));
    CHECK(est.false_negatives == 0);
  }

  TEST_CASE("component scheme reduces to the scalar scheme for M = 1") {
    const SymMatrix one(1, {1.0});
    const std::vector<double> rate{1.0};
    const std::vector<double> d{0.3};
    const auto comp = component_scheme_pr_maybe(MultivariateGaussian{one}, rate, d, 5000, 8);
    const auto scalar = estimate_pr_maybe(MultivariateGaussian{one}, 1.0, 1, 0.3, 5000, 8);
    CHECK(comp.admissible.estimate == scalar.estimate);
    CHECK(comp.and_rule.estimate == scalar.estimate);
    CHECK(comp.admissible.false_negatives == 0);
  }

  TEST_CASE("component scheme admissibility") {
    const MultivariateGaussian model{SymMatrix(2, {1, 0.7, 0.7, 1})};
    const std::vector<double> rates{2.0, 0.0};
    const std::vector<double> d{0.6, 0.6};
    const auto est = component_scheme_pr_maybe(model, rates, d, 20000, 3);
    CHECK(est.admissible.false_negatives == 0);
    CHECK(est.target_d_id == doctest::Approx(0.6));
    // the per-component AND rule is stricter and can miss similar pairs
    CHECK(est.and_rule.estimate <= est.admissible.estimate);

    const std::vector<double> huge{1e9, 1e9};
    CHECK(component_scheme_pr_maybe(model, rates, huge, 1000, 3).and_rule.estimate == 1.0);

    CHECK_THROWS_AS(component_scheme_pr_maybe(model, rates, d, 1000, 3, 0.7), Error);
    try {
      component_scheme_pr_maybe(model, rates, d, 1000, 3, 0.7);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kAdmissibilityViolation);
    }
    CHECK_THROWS_AS(component_scheme_pr_maybe(model, std::vector<double>{1.0}, d, 1000, 3), Error);
  }

  TEST_CASE("water-filling allocation beats an equal split") {
    const MultivariateGaussian model{SymMatrix(2, {1, 0.7, 0.7, 1})};
    // Water level 1.7 / 4 puts 2 bits on the strong component and none on the
    // weak one; the equal split uses the same totals.
    const double d1 = 2.0 * (1.7 - 1.7 / 4.0);
    const auto wf = component_scheme_pr_maybe(model, std::vector<double>{2.0, 0.0},
                                              std::vector<double>{d1, 0.0}, 40000, 17);
    const auto eq = component_scheme_pr_maybe(model, std::vector<double>{1.0, 1.0},
                                              std::vector<double>{d1 / 2, d1 / 2}, 40000, 17);
    CHECK(wf.admissible.estimate + 3 * std::hypot(wf.admissible.std_error, eq.admissible.std_error) <=
          eq.admissible.estimate);
  }
}
