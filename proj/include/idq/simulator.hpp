#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "idq/matrix.hpp"
#include "idq/sources.hpp"

namespace idq {

inline constexpr std::size_t kMaxCodewords = 1u << 16;
inline constexpr int kLloydIterations = 20;
inline constexpr double kLloydRelTol = 1e-6;

struct Codebook {
  std::size_t block_len = 1;
  Matrix codewords;  ///< one codeword per row

  std::size_t count() const { return codewords.rows(); }
  /// log2(count) / block_len.
  double rate_bits() const;
};

/// Lloyd (k-means) codebook on the rows of `samples` with k-means++ seeding.
/// The codeword count is floor(2^{rate_bits * block_len}), at least 1.
/// Throws TooManyCodewords above 2^16 codewords and DomainError when there are
/// fewer than 10 samples per codeword.
Codebook train_codebook(const Matrix& samples, double rate_bits, std::size_t block_len,
                        std::uint64_t seed);

struct Signature {
  std::size_t index = 0;
  double stored_dist = 0.0;  ///< per-sample distance to the chosen codeword
};

/// Nearest codeword in per-sample quadratic distance; lowest index on ties.
Signature assign_signature(const Codebook& cb, std::span<const double> x);

enum class Decision { kNo, kMaybe };

struct QueryOutcome {
  Decision decision = Decision::kNo;
  bool truly_similar = false;
};

/// maybe iff sqrt(d(xhat, y)) <= sqrt(stored_dist) + sqrt(d_id).
Decision decide(double query_dist, double stored_dist, double d_id);
Decision decide(const Signature& sig, const Codebook& cb, std::span<const double> y, double d_id);

/// Decision plus ground truth d(x, y) <= d_id for the pair the signature came from.
QueryOutcome query_decide(const Signature& sig, const Codebook& cb, std::span<const double> x,
                          std::span<const double> y, double d_id);

struct PrMaybeEstimate {
  double estimate = 0.0;
  double std_error = 0.0;  ///< sqrt(p (1 - p) / trials)
  std::size_t false_negatives = 0;
  std::size_t trials = 0;
};

/// Codewords per sub-block used by the simulator.
inline constexpr std::size_t kSimCodewordCap = 256;

/// Length of the sub-blocks each block is split into so that every sub-block
/// codebook stays within kSimCodewordCap entries. Prefers lengths where
/// rate_bits * length is an integer. Throws TooManyCodewords when even a single
/// sample would need more.
std::size_t sub_block_length(double rate_bits, std::size_t block_len);

/// Monte-Carlo Pr{maybe} of the triangle-rule scheme with a product codebook
/// (one Lloyd codebook per sub-block, shared across positions for stationary
/// sources). Codebooks are trained on samples disjoint from the trial pairs.
PrMaybeEstimate estimate_pr_maybe(const SourceModel& model, double rate_bits,
                                  std::size_t block_len, double d_id, std::size_t trials,
                                  std::uint64_t seed);

struct ComponentEstimate {
  /// Admissible rule: maybe iff mean_m L_m <= mean_m d_m, with
  /// L_m = max(0, |xhat_m - y_m| - sqrt(stored_m))^2 the lower bound each
  /// component certifies on (x_m - y_m)^2.
  PrMaybeEstimate admissible;
  /// Per-component AND rule: maybe iff L_m <= d_m for every m.
  PrMaybeEstimate and_rule;
  double target_d_id = 0.0;
};

/// maybe iff every entry is maybe.
Decision combine_and(std::span<const Decision> decisions);

/// KLT-domain component scheme with one scalar codebook per component.
/// False negatives are counted against the original-domain similarity
/// d(x, y) <= target, where target defaults to the mean component d_id.
/// Throws AdmissibilityViolation when the mean component d_id is below
/// `target_d_id`.
ComponentEstimate component_scheme_pr_maybe(const MultivariateGaussian& model,
                                            std::span<const double> per_component_rates,
                                            std::span<const double> per_component_d_ids,
                                            std::size_t trials, std::uint64_t seed,
                                            double target_d_id = -1.0);

/// Number of training blocks drawn for a codebook of `count` entries.
std::size_t training_size(std::size_t count);

}  // namespace idq
