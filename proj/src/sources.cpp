#include "idq/sources.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "idq/errors.hpp"

namespace idq {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

void validate(const SourceModel& model) {
  std::visit(Overloaded{
                 [](const IidGaussian& m) {
                   if (!(m.variance > 0.0))
                     throw Error(ErrorKind::kDomainError, "variance must be positive");
                 },
                 [](const MultivariateGaussian& m) {
                   const EigenPair eig = jacobi_eigh(m.covariance);
                   if (eig.eigenvalues.back() < -1e-10)
                     throw Error(ErrorKind::kDomainError, "covariance is not PSD");
                 },
                 [](const GaussMarkov& m) {
                   if (!(m.variance > 0.0))
                     throw Error(ErrorKind::kDomainError, "variance must be positive");
                   if (!(std::abs(m.rho) < 1.0))
                     throw Error(ErrorKind::kDomainError, "|rho| must be < 1");
                 },
                 [](const Bernoulli& m) {
                   if (!(m.p >= 0.0 && m.p <= 1.0))
                     throw Error(ErrorKind::kDomainError, "Bernoulli p outside [0,1]");
                 },
             },
             model);
}

std::string describe(const SourceModel& model) {
  std::ostringstream os;
  os.precision(12);
  std::visit(Overloaded{
                 [&](const IidGaussian& m) { os << "iid-gaussian(variance=" << m.variance << ")"; },
                 [&](const MultivariateGaussian& m) {
                   os << "multivariate-gaussian(dim=" << m.covariance.dim() << ")";
                 },
                 [&](const GaussMarkov& m) {
                   os << "gauss-markov(variance=" << m.variance << ",rho=" << m.rho << ")";
                 },
                 [&](const Bernoulli& m) { os << "bernoulli(p=" << m.p << ")"; },
             },
             model);
  return os.str();
}

Pmf::Pmf(std::vector<double> support, std::vector<double> probs)
    : support_(std::move(support)), probs_(std::move(probs)) {
  if (support_.size() != probs_.size() || probs_.empty())
    throw Error(ErrorKind::kDimensionMismatch, "Pmf support/probs length mismatch");
  for (std::size_t i = 1; i < support_.size(); ++i)
    if (!(support_[i] > support_[i - 1]))
      throw Error(ErrorKind::kDomainError, "Pmf support must be strictly increasing");
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw Error(ErrorKind::kDomainError, "Pmf probabilities must be >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw Error(ErrorKind::kDomainError, "Pmf probabilities must sum to 1");
}

Pmf Pmf::over_indices(std::vector<double> probs) {
  std::vector<double> support(probs.size());
  std::iota(support.begin(), support.end(), 0.0);
  return Pmf(std::move(support), std::move(probs));
}

double Pmf::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < size(); ++i) m += support_[i] * probs_[i];
  return m;
}

double Pmf::second_moment() const {
  double m = 0.0;
  for (std::size_t i = 0; i < size(); ++i) m += support_[i] * support_[i] * probs_[i];
  return m;
}

double SpectralGrid::max_value() const {
  return *std::max_element(values.begin(), values.end());
}

double SpectralGrid::min_value() const {
  return *std::min_element(values.begin(), values.end());
}

double SpectralGrid::mean() const {
  // Cell width 2pi/K cancels the 1/(2pi) normalization.
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double autocovariance(const SourceModel& model, std::size_t lag) {
  if (const auto* iid = std::get_if<IidGaussian>(&model))
    return lag == 0 ? iid->variance : 0.0;
  if (const auto* gm = std::get_if<GaussMarkov>(&model))
    return gm->variance * std::pow(gm->rho, static_cast<double>(lag));
  throw Error(ErrorKind::kUnsupportedModel,
              "autocovariance needs an IidGaussian or GaussMarkov model");
}

double psd_gauss_markov(double rho, double omega) {
  if (!(std::abs(rho) < 1.0)) throw Error(ErrorKind::kDomainError, "|rho| must be < 1");
  return (1.0 - rho * rho) / (1.0 - 2.0 * rho * std::cos(omega) + rho * rho);
}

namespace {

std::vector<double> midpoint_omegas(std::size_t points) {
  if (points < 2) throw Error(ErrorKind::kDomainError, "spectral grid needs >= 2 points");
  const double width = 2.0 * std::numbers::pi / static_cast<double>(points);
  std::vector<double> omegas(points);
  for (std::size_t k = 0; k < points; ++k)
    omegas[k] = -std::numbers::pi + (static_cast<double>(k) + 0.5) * width;
  return omegas;
}

}  // namespace

SpectralGrid spectral_grid(const SourceModel& model, std::size_t points) {
  SpectralGrid grid;
  grid.omegas = midpoint_omegas(points);
  grid.values.resize(points);
  if (const auto* iid = std::get_if<IidGaussian>(&model)) {
    std::fill(grid.values.begin(), grid.values.end(), iid->variance);
  } else if (const auto* gm = std::get_if<GaussMarkov>(&model)) {
    for (std::size_t k = 0; k < points; ++k)
      grid.values[k] = gm->variance * psd_gauss_markov(gm->rho, grid.omegas[k]);
  } else {
    throw Error(ErrorKind::kUnsupportedModel,
                "spectral grid needs an IidGaussian or GaussMarkov model");
  }
  return grid;
}

SpectralGrid flat_spectral_grid(double level, std::size_t points) {
  if (!(level >= 0.0)) throw Error(ErrorKind::kDomainError, "PSD must be >= 0");
  SpectralGrid grid;
  grid.omegas = midpoint_omegas(points);
  grid.values.assign(points, level);
  return grid;
}

Pmf discretize_gaussian(double variance, double half_width_sigmas, std::size_t n_points) {
  if (!(variance > 0.0)) throw Error(ErrorKind::kDomainError, "variance must be positive");
  if (!(half_width_sigmas > 0.0))
    throw Error(ErrorKind::kDomainError, "half width must be positive");
  if (n_points < 3 || n_points % 2 == 0)
    throw Error(ErrorKind::kDomainError, "n_points must be odd and >= 3");

  const double sigma = std::sqrt(variance);
  const double half = half_width_sigmas * sigma;
  const std::size_t mid = n_points / 2;
  const double step = half / static_cast<double>(mid);

  std::vector<double> support(n_points);
  std::vector<double> weights(n_points);
  for (std::size_t i = 0; i <= mid; ++i) {
    // Work in units of sigma so that rescaled grids give identical weights.
    const double z = half_width_sigmas * static_cast<double>(i) / static_cast<double>(mid);
    const double w = std::exp(-0.5 * z * z);
    weights[mid + i] = w;
    weights[mid - i] = w;
    support[mid + i] = static_cast<double>(i) * step;
    support[mid - i] = -static_cast<double>(i) * step;
  }
  // Pairwise-symmetric summation keeps probs[i] == probs[n-1-i] exactly.
  double total = weights[mid];
  for (std::size_t i = 1; i <= mid; ++i) total += 2.0 * weights[mid + i];
  for (double& w : weights) w /= total;
  return Pmf(std::move(support), std::move(weights));
}

Pmf bernoulli_pmf(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::kDomainError, "p outside [0,1]");
  return Pmf({0.0, 1.0}, {1.0 - p, p});
}

VectorGrid discretize_gaussian_vector(std::span<const double> variances,
                                      double half_width_sigmas, std::size_t points_per_axis) {
  const std::size_t dim = variances.size();
  if (dim == 0) throw Error(ErrorKind::kDomainError, "need at least one component");
  std::vector<Pmf> axes;
  axes.reserve(dim);
  for (double v : variances) axes.push_back(discretize_gaussian(v, half_width_sigmas, points_per_axis));

  std::size_t total = 1;
  for (std::size_t d = 0; d < dim; ++d) total *= points_per_axis;

  Matrix points(total, dim);
  std::vector<double> probs(total);
  std::vector<std::size_t> idx(dim, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    double p = 1.0;
    for (std::size_t d = 0; d < dim; ++d) {
      points(flat, d) = axes[d].support()[idx[d]];
      p *= axes[d].probs()[idx[d]];
    }
    probs[flat] = p;
    for (std::size_t d = dim; d-- > 0;) {
      if (++idx[d] < points_per_axis) break;
      idx[d] = 0;
    }
  }
  const double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (double& p : probs) p /= sum;
  return VectorGrid{Pmf::over_indices(std::move(probs)), std::move(points)};
}

BlockSampler::BlockSampler(const SourceModel& model, std::size_t block_len)
    : model_(model), block_len_(block_len) {
  validate(model_);
  if (block_len_ == 0) throw Error(ErrorKind::kDomainError, "block_len must be >= 1");
  if (const auto* mv = std::get_if<MultivariateGaussian>(&model_)) {
    const std::size_t n = mv->covariance.dim();
    if (n != block_len_)
      throw Error(ErrorKind::kDimensionMismatch, "block_len must match covariance dimension");
    const EigenPair eig = jacobi_eigh(mv->covariance);
    coloring_ = Matrix(n, n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t k = 0; k < n; ++k)
        coloring_(r, k) = eig.eigenvectors(r, k) * std::sqrt(std::max(0.0, eig.eigenvalues[k]));
  }
}

void BlockSampler::draw(std::mt19937_64& rng, std::span<double> out) const {
  if (out.size() != block_len_)
    throw Error(ErrorKind::kDimensionMismatch, "output span has the wrong length");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::visit(Overloaded{
                 [&](const IidGaussian& m) {
                   const double sigma = std::sqrt(m.variance);
                   for (double& v : out) v = sigma * normal(rng);
                 },
                 [&](const MultivariateGaussian&) {
                   const std::size_t n = block_len_;
                   std::vector<double> z(n);
                   for (double& v : z) v = normal(rng);
                   for (std::size_t r = 0; r < n; ++r) {
                     double acc = 0.0;
                     for (std::size_t k = 0; k < n; ++k) acc += coloring_(r, k) * z[k];
                     out[r] = acc;
                   }
                 },
                 [&](const GaussMarkov& m) {
                   const double sigma = std::sqrt(m.variance);
                   const double innovation = sigma * std::sqrt(1.0 - m.rho * m.rho);
                   double prev = sigma * normal(rng);
                   out[0] = prev;
                   for (std::size_t k = 1; k < out.size(); ++k) {
                     prev = m.rho * prev + innovation * normal(rng);
                     out[k] = prev;
                   }
                 },
                 [&](const Bernoulli& m) {
                   std::bernoulli_distribution coin(m.p);
                   for (double& v : out) v = coin(rng) ? 1.0 : 0.0;
                 },
             },
             model_);
}

Matrix sample_block(const SourceModel& model, std::size_t block_len, std::size_t n_blocks,
                    std::uint64_t seed) {
  const BlockSampler sampler(model, block_len);
  std::mt19937_64 rng(mix_seed(seed, 0));
  Matrix out(n_blocks, block_len);
  for (std::size_t b = 0; b < n_blocks; ++b) sampler.draw(rng, out.row(b));
  return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace idq
