#include "idq/idrate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "idq/errors.hpp"

namespace idq {

WaterLevel::WaterLevel(double tau) : tau_(tau) {
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw Error(ErrorKind::kTauOutOfRange, "water level must be positive");
}

Rate id_rate_iid(double variance, double d_id) {
  if (!(variance > 0.0)) throw Error(ErrorKind::kDomainError, "variance must be positive");
  if (!(d_id >= 0.0)) throw Error(ErrorKind::kDomainError, "d_id must be >= 0");
  const double limit = 2.0 * variance;
  if (d_id >= limit) return Rate::infinite();
  return Rate::bits(std::log2(limit / (limit - d_id)));
}

namespace {

double max_of(std::span<const double> v) {
  if (v.empty()) throw Error(ErrorKind::kDomainError, "no eigenvalues");
  return *std::max_element(v.begin(), v.end());
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void check_eigenvalues(std::span<const double> eigenvalues) {
  for (double xi : eigenvalues)
    if (!(xi >= 0.0)) throw Error(ErrorKind::kDomainError, "eigenvalues must be >= 0");
}

}  // namespace

WaterFillingPoint id_point_multivariate(std::span<const double> eigenvalues, WaterLevel tau) {
  check_eigenvalues(eigenvalues);
  const double peak = max_of(eigenvalues);
  if (tau.value() > peak)
    throw Error(ErrorKind::kTauOutOfRange, "water level above the largest eigenvalue");

  const std::size_t m = eigenvalues.size();
  WaterFillingPoint out;
  out.tau = tau.value();
  out.component_d_ids.resize(m);
  out.component_rates.resize(m);
  double rate = 0.0;
  double d_id = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double xi = eigenvalues[k];
    if (xi > tau.value()) {
      out.component_rates[k] = std::log2(xi / tau.value());
      out.component_d_ids[k] = 2.0 * (xi - tau.value());
      ++out.active_components;
    }
    rate += out.component_rates[k];
    d_id += out.component_d_ids[k];
  }
  out.point.d_id = d_id / static_cast<double>(m);
  out.point.rate = Rate::bits(rate / static_cast<double>(m));
  return out;
}

std::vector<WaterFillingPoint> water_filling_sweep(std::span<const double> eigenvalues,
                                                   std::span<const double> tau_grid) {
  std::vector<WaterFillingPoint> out;
  out.reserve(tau_grid.size());
  for (double tau : tau_grid) out.push_back(id_point_multivariate(eigenvalues, WaterLevel(tau)));
  return out;
}

Curve id_curve_multivariate(std::span<const double> eigenvalues, std::span<const double> tau_grid) {
  Curve curve;
  curve.label = "R_ID multivariate (reverse water-filling)";
  for (const auto& wf : water_filling_sweep(eigenvalues, tau_grid)) curve.points.push_back(wf.point);
  curve.normalize();
  return curve;
}

std::vector<double> default_tau_grid(double peak, std::size_t points, double min_ratio) {
  if (!(peak > 0.0)) throw Error(ErrorKind::kTauOutOfRange, "peak must be positive");
  if (points < 2) throw Error(ErrorKind::kDomainError, "need at least 2 tau points");
  if (!(min_ratio > 0.0 && min_ratio < 1.0))
    throw Error(ErrorKind::kDomainError, "tau min ratio must be in (0, 1)");
  std::vector<double> grid(points);
  const double lo = std::log(min_ratio);
  for (std::size_t k = 0; k < points; ++k) {
    const double f = static_cast<double>(k) / static_cast<double>(points - 1);
    grid[k] = peak * std::exp(lo * (1.0 - f));
  }
  grid.back() = peak;
  return grid;
}

Rate id_rate_multivariate_at(std::span<const double> eigenvalues, double d_id) {
  check_eigenvalues(eigenvalues);
  if (!(d_id >= 0.0)) throw Error(ErrorKind::kDomainError, "d_id must be >= 0");
  const double limit = 2.0 * mean_of(eigenvalues);
  if (d_id >= limit) return Rate::infinite();
  if (d_id == 0.0) return Rate::bits(0.0);
  // d_id(tau) is continuous and strictly decreasing on (0, xi_max].
  double lo = 0.0;
  double hi = max_of(eigenvalues);
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= 0.0) break;
    const double d = id_point_multivariate(eigenvalues, WaterLevel(mid)).point.d_id;
    if (d > d_id) lo = mid; else hi = mid;
  }
  return id_point_multivariate(eigenvalues, WaterLevel(0.5 * (lo + hi))).point.rate;
}

RateSimilarityPoint id_point_spectral(const SpectralGrid& psd, WaterLevel tau) {
  if (psd.size() < 2) throw Error(ErrorKind::kDomainError, "spectral grid needs >= 2 points");
  if (tau.value() > psd.max_value())
    throw Error(ErrorKind::kTauOutOfRange, "water level above the PSD maximum");
  double rate = 0.0;
  double d_id = 0.0;
  for (double phi : psd.values) {
    if (phi > tau.value()) {
      rate += std::log2(phi / tau.value());
      d_id += 2.0 * (phi - tau.value());
    }
  }
  const double k = static_cast<double>(psd.size());
  return RateSimilarityPoint{d_id / k, Rate::bits(rate / k)};
}

Curve id_curve_spectral(const SpectralGrid& psd, std::span<const double> tau_grid) {
  Curve curve;
  curve.label = "R_ID spectral (reverse water-filling over PSD)";
  for (double tau : tau_grid) curve.points.push_back(id_point_spectral(psd, WaterLevel(tau)));
  curve.normalize();
  return curve;
}

double similarity_limit(const SourceModel& model) {
  if (const auto* iid = std::get_if<IidGaussian>(&model)) return 2.0 * iid->variance;
  if (const auto* gm = std::get_if<GaussMarkov>(&model)) return 2.0 * gm->variance;
  if (const auto* mv = std::get_if<MultivariateGaussian>(&model))
    return 2.0 * mv->covariance.trace() / static_cast<double>(mv->covariance.dim());
  throw Error(ErrorKind::kUnsupportedModel, "similarity limit needs a Gaussian model");
}

Rate lc_delta_rate(double variance, double d_id) {
  if (!(variance > 0.0)) throw Error(ErrorKind::kDomainError, "variance must be positive");
  if (!(d_id >= 0.0)) throw Error(ErrorKind::kDomainError, "d_id must be >= 0");
  const double u = d_id / (2.0 * variance);
  if (u >= 1.0) return Rate::infinite();
  const double root = std::sqrt(2.0 * u - u * u);
  return Rate::bits(0.5 * std::log2(1.0 / (1.0 - root)));
}

RateSimilarityPoint lc_delta_point_multivariate(std::span<const double> eigenvalues, double theta) {
  check_eigenvalues(eigenvalues);
  if (!(theta > 0.0)) throw Error(ErrorKind::kDomainError, "distortion level must be positive");
  const std::size_t m = eigenvalues.size();
  double rate = 0.0;
  double distortion = 0.0;
  for (double xi : eigenvalues) {
    const double dk = std::min(theta, xi);
    distortion += dk;
    if (xi > theta) rate += 0.5 * std::log2(xi / theta);
  }
  const double mf = static_cast<double>(m);
  distortion /= mf;
  // Codewords carry variance xi - D_k, so E_prod = 2 mean(xi) - D, E_joint = D.
  const double e_prod = 2.0 * mean_of(eigenvalues) - distortion;
  const double gap = std::sqrt(e_prod) - std::sqrt(distortion);
  return RateSimilarityPoint{gap > 0.0 ? gap * gap : 0.0, Rate::bits(rate / mf)};
}

Rate lc_delta_rate_multivariate(std::span<const double> eigenvalues, double d_id) {
  check_eigenvalues(eigenvalues);
  if (!(d_id >= 0.0)) throw Error(ErrorKind::kDomainError, "d_id must be >= 0");
  if (d_id >= 2.0 * mean_of(eigenvalues)) return Rate::infinite();
  if (d_id == 0.0) return Rate::bits(0.0);
  // d_id(theta) decreases from 2 mean(xi) at theta -> 0 to 0 at xi_max.
  double lo = 0.0;
  double hi = max_of(eigenvalues);
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= 0.0) break;
    if (lc_delta_point_multivariate(eigenvalues, mid).d_id > d_id) lo = mid; else hi = mid;
  }
  return lc_delta_point_multivariate(eigenvalues, 0.5 * (lo + hi)).rate;
}

double binary_entropy(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorKind::kDomainError, "q outside [0,1]");
  if (q == 0.0 || q == 1.0) return 0.0;
  return -q * std::log2(q) - (1.0 - q) * std::log2(1.0 - q);
}

double binary_hamming_tc_oracle(double d_id) {
  if (!(d_id >= 0.0 && d_id <= 0.5))
    throw Error(ErrorKind::kDomainError, "binary Hamming d_id must lie in [0, 1/2]");
  return 1.0 - binary_entropy(0.5 - d_id);
}

}  // namespace idq
