#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "idq/curve.hpp"
#include "idq/sources.hpp"

namespace idq {

/// Reverse water level; positive, in variance units. The upper bound depends on
/// the source and is checked where the level is used.
class WaterLevel {
 public:
  explicit WaterLevel(double tau);
  double value() const { return tau_; }

 private:
  double tau_;
};

/// Identification rate of an i.i.d. Gaussian source:
/// log2(2 sigma^2 / (2 sigma^2 - d_id)), infinite from d_id >= 2 sigma^2 on.
Rate id_rate_iid(double variance, double d_id);

/// One point of the multivariate reverse water-filling sweep together with the
/// per-component similarity allocation max(0, 2(xi - tau)).
struct WaterFillingPoint {
  double tau = 0.0;
  RateSimilarityPoint point;
  std::vector<double> component_d_ids;
  std::vector<double> component_rates;
  std::size_t active_components = 0;
};

WaterFillingPoint id_point_multivariate(std::span<const double> eigenvalues, WaterLevel tau);

std::vector<WaterFillingPoint> water_filling_sweep(std::span<const double> eigenvalues,
                                                   std::span<const double> tau_grid);

/// Curve sorted by d_id ascending (tau descending).
Curve id_curve_multivariate(std::span<const double> eigenvalues, std::span<const double> tau_grid);

inline constexpr std::size_t kDefaultTauPoints = 200;
inline constexpr double kDefaultTauMinRatio = 1e-4;

/// Log-spaced levels in [ratio * peak, peak], ascending.
std::vector<double> default_tau_grid(double peak, std::size_t points = kDefaultTauPoints,
                                     double min_ratio = kDefaultTauMinRatio);

/// Multivariate identification rate at a given similarity threshold, found by
/// bisection on the water level.
Rate id_rate_multivariate_at(std::span<const double> eigenvalues, double d_id);

inline constexpr std::size_t kDefaultSpectralPoints = 4096;

/// Spectral (memory) version: midpoint Riemann sums over the PSD grid.
RateSimilarityPoint id_point_spectral(const SpectralGrid& psd, WaterLevel tau);
Curve id_curve_spectral(const SpectralGrid& psd, std::span<const double> tau_grid);

/// d_id beyond which no scheme gets Pr{maybe} to vanish: 2 sigma^2, or twice
/// the average eigenvalue (trace / M).
double similarity_limit(const SourceModel& model);

/// LC-triangle rate 0.5 log2(1 / (1 - sqrt(2u - u^2))), u = d_id / (2 sigma^2).
Rate lc_delta_rate(double variance, double d_id);

/// LC-triangle point for a Gaussian vector: classical reverse water-filling on
/// distortion (level theta) followed by the triangle-inequality threshold.
RateSimilarityPoint lc_delta_point_multivariate(std::span<const double> eigenvalues, double theta);
Rate lc_delta_rate_multivariate(std::span<const double> eigenvalues, double d_id);

double binary_entropy(double q);

/// 1 - h2(1/2 - d_id): binary symmetric test channels on Bern(1/2) with
/// Hamming distance. DomainError outside [0, 1/2].
double binary_hamming_tc_oracle(double d_id);

}  // namespace idq
