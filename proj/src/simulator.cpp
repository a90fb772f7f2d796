#include "idq/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "idq/errors.hpp"
#include "idq/linalg.hpp"
#include "idq/parallel.hpp"

namespace idq {

namespace {

// Relative slack on decision thresholds so rounding can never turn a truly
// similar pair into a "no".
constexpr double kThresholdSlack = 1e-12;

std::size_t codeword_count(double rate_bits, std::size_t block_len) {
  if (!(rate_bits >= 0.0) || !std::isfinite(rate_bits))
    throw Error(ErrorKind::kDomainError, "rate_bits must be finite and >= 0");
  const double exponent = rate_bits * static_cast<double>(block_len);
  if (exponent > 16.0 + 1e-9)
    throw Error(ErrorKind::kTooManyCodewords,
                "2^(rate * block_len) exceeds the 2^16 codeword cap");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::exp2(exponent) + 1e-9)));
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    acc += d * d;
  }
  return acc;
}

// Nearest row by squared distance, lowest index on ties.
std::pair<std::size_t, double> nearest(const Matrix& codewords, std::span<const double> x) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < codewords.rows(); ++c) {
    const double d = squared_distance(codewords.row(c), x);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return {best, best_d};
}

Matrix kmeans_pp_seed(const Matrix& samples, std::size_t count, std::mt19937_64& rng) {
  const std::size_t n = samples.rows();
  const std::size_t dim = samples.cols();
  Matrix centers(count, dim);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto copy_row = [&](std::size_t from, std::size_t to) {
    const auto src = samples.row(from);
    std::copy(src.begin(), src.end(), centers.row(to).begin());
  };
  copy_row(pick(rng), 0);
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = squared_distance(samples.row(i), centers.row(0));
  for (std::size_t c = 1; c < count; ++c) {
    const double total = std::accumulate(dist.begin(), dist.end(), 0.0);
    std::size_t chosen = pick(rng);
    if (total > 0.0) {
      double target = unit(rng) * total;
      chosen = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        target -= dist[i];
        if (target < 0.0) {
          chosen = i;
          break;
        }
      }
    }
    copy_row(chosen, c);
    for (std::size_t i = 0; i < n; ++i)
      dist[i] = std::min(dist[i], squared_distance(samples.row(i), centers.row(c)));
  }
  return centers;
}

}  // namespace

double Codebook::rate_bits() const {
  return std::log2(static_cast<double>(count())) / static_cast<double>(block_len);
}

std::size_t training_size(std::size_t count) { return std::max<std::size_t>(50 * count, 20000); }

Codebook train_codebook(const Matrix& samples, double rate_bits, std::size_t block_len,
                        std::uint64_t seed) {
  if (block_len == 0) throw Error(ErrorKind::kDomainError, "block_len must be >= 1");
  if (samples.cols() != block_len)
    throw Error(ErrorKind::kDimensionMismatch, "sample rows must have block_len entries");
  const std::size_t count = codeword_count(rate_bits, block_len);
  const std::size_t n = samples.rows();
  if (n < 10 * count)
    throw Error(ErrorKind::kDomainError, "need at least 10 training samples per codeword");

  Codebook cb;
  cb.block_len = block_len;
  if (count == 1) {
    cb.codewords = Matrix(1, block_len, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < block_len; ++k) cb.codewords(0, k) += samples(i, k);
    for (std::size_t k = 0; k < block_len; ++k) cb.codewords(0, k) /= static_cast<double>(n);
    return cb;
  }

  std::mt19937_64 rng(seed);
  Matrix centers = kmeans_pp_seed(samples, count, rng);
  std::vector<std::size_t> label(n);
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 0; it < kLloydIterations; ++it) {
    double distortion = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto [c, d] = nearest(centers, samples.row(i));
      label[i] = c;
      distortion += d;
    }
    Matrix sums(count, block_len, 0.0);
    std::vector<std::size_t> sizes(count, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++sizes[label[i]];
      for (std::size_t k = 0; k < block_len; ++k) sums(label[i], k) += samples(i, k);
    }
    for (std::size_t c = 0; c < count; ++c) {
      if (sizes[c] == 0) continue;  // empty cell keeps its old centroid
      for (std::size_t k = 0; k < block_len; ++k)
        centers(c, k) = sums(c, k) / static_cast<double>(sizes[c]);
    }
    if (distortion == 0.0 || std::abs(previous - distortion) <= kLloydRelTol * distortion) break;
    previous = distortion;
  }
  cb.codewords = std::move(centers);
  return cb;
}

Signature assign_signature(const Codebook& cb, std::span<const double> x) {
  if (x.size() != cb.block_len)
    throw Error(ErrorKind::kDimensionMismatch, "vector length differs from the codebook block_len");
  const auto [index, dist] = nearest(cb.codewords, x);
  return Signature{index, dist / static_cast<double>(cb.block_len)};
}

Decision decide(double query_dist, double stored_dist, double d_id) {
  const double bound = std::sqrt(stored_dist) + std::sqrt(d_id);
  return std::sqrt(query_dist) <= bound * (1.0 + kThresholdSlack) ? Decision::kMaybe
                                                                  : Decision::kNo;
}

Decision decide(const Signature& sig, const Codebook& cb, std::span<const double> y, double d_id) {
  if (y.size() != cb.block_len)
    throw Error(ErrorKind::kDimensionMismatch, "query length differs from the codebook block_len");
  if (!(d_id >= 0.0)) throw Error(ErrorKind::kDomainError, "d_id must be >= 0");
  const double query = per_sample_distance(cb.codewords.row(sig.index), y);
  return decide(query, sig.stored_dist, d_id);
}

QueryOutcome query_decide(const Signature& sig, const Codebook& cb, std::span<const double> x,
                          std::span<const double> y, double d_id) {
  if (x.size() != y.size())
    throw Error(ErrorKind::kDimensionMismatch, "x and y must have equal length");
  return QueryOutcome{decide(sig, cb, y, d_id), per_sample_distance(x, y) <= d_id};
}

Decision combine_and(std::span<const Decision> decisions) {
  return std::all_of(decisions.begin(), decisions.end(),
                     [](Decision d) { return d == Decision::kMaybe; })
             ? Decision::kMaybe
             : Decision::kNo;
}

std::size_t sub_block_length(double rate_bits, std::size_t block_len) {
  if (block_len == 0) throw Error(ErrorKind::kDomainError, "block_len must be >= 1");
  if (!(rate_bits >= 0.0) || !std::isfinite(rate_bits))
    throw Error(ErrorKind::kDomainError, "rate_bits must be finite and >= 0");
  const double cap_bits = std::log2(static_cast<double>(kSimCodewordCap));
  std::size_t any = 0;
  for (std::size_t b = block_len; b >= 1; --b) {
    if (block_len % b != 0) continue;
    const double bits = rate_bits * static_cast<double>(b);
    if (bits > cap_bits + 1e-9) continue;
    if (std::abs(bits - std::round(bits)) < 1e-9) return b;
    if (any == 0) any = b;
  }
  if (any == 0)
    throw Error(ErrorKind::kTooManyCodewords, "rate too high for a per-sample codebook");
  return any;
}

namespace {

struct Counts {
  std::atomic<std::size_t> maybe{0};
  std::atomic<std::size_t> false_negatives{0};
};

PrMaybeEstimate finish(std::size_t maybe, std::size_t false_negatives, std::size_t trials) {
  PrMaybeEstimate out;
  out.trials = trials;
  out.estimate = static_cast<double>(maybe) / static_cast<double>(trials);
  out.std_error = std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(trials));
  out.false_negatives = false_negatives;
  return out;
}

// Runs fn(trial, rng) over `trials` in chunks; each trial gets its own stream.
template <typename Fn>
void for_each_trial(std::size_t trials, std::uint64_t seed, Fn&& fn) {
  const std::uint64_t base = mix_seed(seed, 1);
  constexpr std::size_t kChunk = 1024;
  const std::size_t chunks = (trials + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t chunk) {
    const std::size_t end = std::min(trials, (chunk + 1) * kChunk);
    for (std::size_t t = chunk * kChunk; t < end; ++t) {
      std::mt19937_64 rng(mix_seed(base, t));
      fn(rng);
    }
  });
}

void check_trials(std::size_t trials) {
  if (trials < 1000) throw Error(ErrorKind::kDomainError, "trials must be >= 1000");
}

}  // namespace

PrMaybeEstimate estimate_pr_maybe(const SourceModel& model, double rate_bits,
                                  std::size_t block_len, double d_id, std::size_t trials,
                                  std::uint64_t seed) {
  validate(model);
  check_trials(trials);
  if (!(d_id >= 0.0)) throw Error(ErrorKind::kDomainError, "d_id must be >= 0");
  const BlockSampler sampler(model, block_len);
  const std::size_t b = sub_block_length(rate_bits, block_len);
  const std::size_t positions = block_len / b;
  const std::size_t count = codeword_count(rate_bits, b);
  const bool shared = !std::holds_alternative<MultivariateGaussian>(model);

  // Held-out training blocks.
  const std::size_t wanted = training_size(count);
  const std::size_t blocks = shared ? (wanted + positions - 1) / positions : wanted;
  std::mt19937_64 train_rng(mix_seed(seed, 0));
  Matrix training(blocks, block_len);
  for (std::size_t r = 0; r < blocks; ++r) sampler.draw(train_rng, training.row(r));

  std::vector<Codebook> books;
  if (shared) {
    Matrix pooled(blocks * positions, b);
    for (std::size_t r = 0; r < blocks; ++r)
      for (std::size_t p = 0; p < positions; ++p)
        for (std::size_t k = 0; k < b; ++k) pooled(r * positions + p, k) = training(r, p * b + k);
    books.push_back(train_codebook(pooled, rate_bits, b, mix_seed(seed, 2)));
  } else {
    for (std::size_t p = 0; p < positions; ++p) {
      Matrix part(blocks, b);
      for (std::size_t r = 0; r < blocks; ++r)
        for (std::size_t k = 0; k < b; ++k) part(r, k) = training(r, p * b + k);
      books.push_back(train_codebook(part, rate_bits, b, mix_seed(seed, 2 + p)));
    }
  }

  Counts counts;
  const double n = static_cast<double>(block_len);
  for_each_trial(trials, seed, [&](std::mt19937_64& rng) {
    std::vector<double> x(block_len);
    std::vector<double> y(block_len);
    sampler.draw(rng, x);
    sampler.draw(rng, y);
    double stored = 0.0;
    double query = 0.0;
    for (std::size_t p = 0; p < positions; ++p) {
      const Codebook& cb = books[shared ? 0 : p];
      const std::span<const double> xs(x.data() + p * b, b);
      const std::span<const double> ys(y.data() + p * b, b);
      const Signature sig = assign_signature(cb, xs);
      stored += sig.stored_dist * static_cast<double>(b);
      query += squared_distance(cb.codewords.row(sig.index), ys);
    }
    const Decision decision = decide(query / n, stored / n, d_id);
    const bool similar = per_sample_distance(x, y) <= d_id;
    if (decision == Decision::kMaybe) ++counts.maybe;
    if (similar && decision == Decision::kNo) ++counts.false_negatives;
  });
  return finish(counts.maybe, counts.false_negatives, trials);
}

ComponentEstimate component_scheme_pr_maybe(const MultivariateGaussian& model,
                                            std::span<const double> per_component_rates,
                                            std::span<const double> per_component_d_ids,
                                            std::size_t trials, std::uint64_t seed,
                                            double target_d_id) {
  const SourceModel source{model};
  validate(source);
  check_trials(trials);
  const std::size_t dim = model.covariance.dim();
  if (per_component_rates.size() != dim || per_component_d_ids.size() != dim)
    throw Error(ErrorKind::kDimensionMismatch, "need one rate and one d_id per component");
  for (double d : per_component_d_ids)
    if (!(d >= 0.0)) throw Error(ErrorKind::kDomainError, "component d_id must be >= 0");
  const double mean_d =
      std::accumulate(per_component_d_ids.begin(), per_component_d_ids.end(), 0.0) /
      static_cast<double>(dim);
  const double target = target_d_id < 0.0 ? mean_d : target_d_id;
  if (mean_d < target * (1.0 - 1e-12))
    throw Error(ErrorKind::kAdmissibilityViolation,
                "mean component d_id is below the target similarity threshold");

  const EigenPair basis = jacobi_eigh(model.covariance);
  const BlockSampler sampler(source, dim);

  std::size_t wanted = 0;
  for (double r : per_component_rates) wanted = std::max(wanted, training_size(codeword_count(r, 1)));
  std::mt19937_64 train_rng(mix_seed(seed, 0));
  Matrix coeffs(wanted, dim);
  std::vector<double> block(dim);
  for (std::size_t r = 0; r < wanted; ++r) {
    sampler.draw(train_rng, block);
    const auto u = klt_forward(basis, block);
    std::copy(u.begin(), u.end(), coeffs.row(r).begin());
  }
  std::vector<Codebook> books;
  for (std::size_t m = 0; m < dim; ++m) {
    Matrix column(wanted, 1);
    for (std::size_t r = 0; r < wanted; ++r) column(r, 0) = coeffs(r, m);
    books.push_back(train_codebook(column, per_component_rates[m], 1, mix_seed(seed, 2 + m)));
  }

  Counts admissible;
  Counts and_rule;
  for_each_trial(trials, seed, [&](std::mt19937_64& rng) {
    std::vector<double> x(dim);
    std::vector<double> y(dim);
    sampler.draw(rng, x);
    sampler.draw(rng, y);
    const bool similar = per_sample_distance(x, y) <= target;
    const auto u = klt_forward(basis, x);
    const auto v = klt_forward(basis, y);
    std::vector<Decision> parts(dim);
    double bound_sum = 0.0;
    for (std::size_t m = 0; m < dim; ++m) {
      const Signature sig = assign_signature(books[m], std::span<const double>(&u[m], 1));
      const double query = std::abs(books[m].codewords(sig.index, 0) - v[m]);
      const double gap = std::max(0.0, query - std::sqrt(sig.stored_dist));
      bound_sum += gap * gap;
      parts[m] = decide(query * query, sig.stored_dist, per_component_d_ids[m]);
    }
    const Decision joint = bound_sum / static_cast<double>(dim) <= mean_d * (1.0 + kThresholdSlack)
                               ? Decision::kMaybe
                               : Decision::kNo;
    const Decision all = combine_and(parts);
    if (joint == Decision::kMaybe) ++admissible.maybe;
    if (similar && joint == Decision::kNo) ++admissible.false_negatives;
    if (all == Decision::kMaybe) ++and_rule.maybe;
    if (similar && all == Decision::kNo) ++and_rule.false_negatives;
  });

  ComponentEstimate out;
  out.admissible = finish(admissible.maybe, admissible.false_negatives, trials);
  out.and_rule = finish(and_rule.maybe, and_rule.false_negatives, trials);
  out.target_d_id = target;
  return out;
}

}  // namespace idq
