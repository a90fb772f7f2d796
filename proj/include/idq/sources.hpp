#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "idq/linalg.hpp"
#include "idq/matrix.hpp"

namespace idq {

struct IidGaussian {
  double variance = 1.0;
};

struct MultivariateGaussian {
  SymMatrix covariance;
};

/// Stationary AR(1) process x_k = rho x_{k-1} + sqrt(1 - rho^2) sigma z_k.
struct GaussMarkov {
  double variance = 1.0;
  double rho = 0.0;
};

struct Bernoulli {
  double p = 0.5;
};

using SourceModel = std::variant<IidGaussian, MultivariateGaussian, GaussMarkov, Bernoulli>;

/// Validates the parameter ranges of a model; throws DomainError.
void validate(const SourceModel& model);

std::string describe(const SourceModel& model);

/// Probability mass function on a strictly increasing grid.
class Pmf {
 public:
  Pmf(std::vector<double> support, std::vector<double> probs);

  /// Pmf over letter indices 0..n-1, for alphabets whose geometry lives
  /// elsewhere (e.g. vector grids).
  static Pmf over_indices(std::vector<double> probs);

  std::size_t size() const { return probs_.size(); }
  std::span<const double> support() const { return support_; }
  std::span<const double> probs() const { return probs_; }
  double mean() const;
  double second_moment() const;

 private:
  std::vector<double> support_;
  std::vector<double> probs_;
};

/// PSD samples on K midpoints of a uniform partition of [-pi, pi].
struct SpectralGrid {
  std::vector<double> omegas;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double max_value() const;
  double min_value() const;
  /// (1/2pi) * midpoint-rule integral of `values` over [-pi, pi].
  double mean() const;
};

/// Autocovariance at `lag` for IidGaussian and GaussMarkov; UnsupportedModel
/// otherwise.
double autocovariance(const SourceModel& model, std::size_t lag);

/// Unit-variance Gauss-Markov PSD (1 - rho^2) / (1 - 2 rho cos w + rho^2).
double psd_gauss_markov(double rho, double omega);

/// PSD of an IidGaussian or GaussMarkov model sampled on `points` midpoints.
SpectralGrid spectral_grid(const SourceModel& model, std::size_t points);

/// Flat PSD of the given level; mostly for tests and the white-noise case.
SpectralGrid flat_spectral_grid(double level, std::size_t points);

inline constexpr double kDefaultGridSigmas = 8.0;
inline constexpr std::size_t kDefaultGridPoints = 513;

/// Uniform grid on [-k sigma, k sigma] with probabilities proportional to the
/// Gaussian density, renormalized. `n_points` must be odd and >= 3.
Pmf discretize_gaussian(double variance, double half_width_sigmas = kDefaultGridSigmas,
                        std::size_t n_points = kDefaultGridPoints);

Pmf bernoulli_pmf(double p);

/// Discretization of a zero-mean Gaussian vector with independent components
/// (e.g. KLT coefficients) on a product grid.
struct VectorGrid {
  Pmf pmf;               ///< over letter indices
  Matrix points;         ///< one grid point per row
};
VectorGrid discretize_gaussian_vector(std::span<const double> variances,
                                      double half_width_sigmas, std::size_t points_per_axis);

/// Draws single blocks of a model from a caller-supplied generator.
class BlockSampler {
 public:
  BlockSampler(const SourceModel& model, std::size_t block_len);

  std::size_t block_len() const { return block_len_; }
  void draw(std::mt19937_64& rng, std::span<double> out) const;

 private:
  SourceModel model_;
  std::size_t block_len_;
  Matrix coloring_;  // A Sigma^{1/2}, multivariate only
};

/// n_blocks x block_len matrix of samples, deterministic for a fixed seed.
Matrix sample_block(const SourceModel& model, std::size_t block_len, std::size_t n_blocks,
                    std::uint64_t seed);

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace idq
