#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "idq/curve.hpp"
#include "idq/matrix.hpp"
#include "idq/sources.hpp"

namespace idq {

enum class Metric { kQuadratic, kHamming };

/// Gamma in the codeword-major orientation: entry (j, i) = rho(x_i, xhat_j).
struct DistortionMatrix {
  Matrix gamma;
  Metric metric = Metric::kQuadratic;
  /// Labels of the codeword letters (grid values, or indices for vector grids).
  std::vector<double> code_support;
  /// Samples per source letter; rates are reported per sample.
  std::size_t block_len = 1;

  std::size_t n_code() const { return gamma.rows(); }
  std::size_t n_source() const { return gamma.cols(); }
};

DistortionMatrix distortion_matrix(std::span<const double> x_grid,
                                   std::span<const double> xhat_grid, Metric metric);

/// Per-sample quadratic distortion between rows of two point sets.
DistortionMatrix vector_distortion_matrix(const Matrix& x_points, const Matrix& xhat_points);

/// Conditional probabilities Q(xhat_j | x_i) at entry (j, i); column-stochastic.
struct Channel {
  Matrix q;

  std::size_t n_code() const { return q.rows(); }
  std::size_t n_source() const { return q.cols(); }
  /// Largest |column sum - 1|.
  double max_column_error() const;
  double min_entry() const;
};

struct BaStepResult {
  Channel channel;
  std::vector<double> t;
};

/// One update: Q' = t (.) 2^{-s (Gamma - Gamma P P^T)} column-normalized, then
/// t* = Q P. Zero entries of t stay zero. Throws NumericalUnderflow when a
/// column has no mass left.
BaStepResult ba_step(const Pmf& p_x, std::span<const double> t, const DistortionMatrix& gamma,
                     double s);

/// I(X; Xhat) in bits per letter with t = Q P_X.
double mutual_information(const Pmf& p_x, const Channel& q);

/// E_{P_X x t}[rho] and E_{joint}[rho].
std::pair<double, double> expected_distortions(const Pmf& p_x, const Channel& q,
                                               const DistortionMatrix& gamma);

/// Similarity threshold a triangle-inequality rule can admit given the two
/// expectations: E_prod - E_joint for Hamming, (sqrt E_prod - sqrt E_joint)^2
/// for quadratic.
double admissible_threshold(Metric metric, double e_product, double e_joint);

inline constexpr double kDefaultTol = 1e-9;
inline constexpr int kDefaultMaxIter = 5000;
inline constexpr double kPruneThreshold = 1e-300;

struct TcSolution {
  double slope_s = 0.0;
  Channel channel;
  Pmf code_marginal = Pmf({0.0}, {1.0});
  double e_product = 0.0;
  double e_joint = 0.0;
  double d_s = 0.0;   ///< E_prod - E_joint
  double d_id = 0.0;  ///< admissible_threshold(metric, E_prod, E_joint)
  double rate = 0.0;  ///< bits per sample
  int iterations = 0;
  bool converged = false;
  /// Largest increase of rate - s*d_s between consecutive iterations.
  double max_lagrangian_increase = 0.0;
  /// Largest increase of the functional the updates alternately minimize.
  double max_objective_increase = 0.0;
};

/// Iterates ba_step from `initial_t` (uniform when empty) until both the rate
/// and d_s move by at most `tol`, or `max_iter` iterations.
TcSolution solve_tc_point(const Pmf& p_x, const DistortionMatrix& gamma, double s,
                          double tol = kDefaultTol, int max_iter = kDefaultMaxIter,
                          std::span<const double> initial_t = {});

struct TcSweepPoint {
  double slope_s = 0.0;
  double d_s = 0.0;
  double d_id = 0.0;
  double rate = 0.0;
  int iterations = 0;
  bool converged = false;
  double max_lagrangian_increase = 0.0;
  double max_objective_increase = 0.0;
  std::size_t pruned = 0;  ///< codewords dropped before this solve
};

struct TcCurve {
  Curve curve;
  std::vector<TcSweepPoint> points;  ///< in slope order
};

/// Sweeps ascending slopes. Each solve starts from an even mix of the previous
/// marginal (entries below kPruneThreshold removed) and the uniform pmf.
TcCurve tc_curve(const Pmf& p_x, const DistortionMatrix& gamma, std::span<const double> s_grid,
                 double tol = kDefaultTol, int max_iter = kDefaultMaxIter);

/// Exhaustive search over column-stochastic channels with entries on a
/// `grid_step` lattice (n_source <= 3, n_code <= 3). Returns the largest
/// E_prod - E_joint among channels with I <= rate_budget.
double brute_force_tc_oracle(const Pmf& p_x, const DistortionMatrix& gamma, double rate_budget,
                             double grid_step);

struct TcComponent {
  Pmf p_x;
  DistortionMatrix gamma;
};

/// One discretized N(0, xi) component per eigenvalue on a shared relative grid.
std::vector<TcComponent> gaussian_components(std::span<const double> eigenvalues,
                                             double half_width_sigmas = kDefaultGridSigmas,
                                             std::size_t n_points = kDefaultGridPoints);

struct ComponentTcCurve {
  Curve curve;
  std::vector<TcCurve> components;
};

/// Equal-slope (Pareto) combination: every component solved at each s; rate
/// and d_id averaged over components.
ComponentTcCurve component_tc_curve(const std::vector<TcComponent>& components,
                                    std::span<const double> s_grid, double tol = kDefaultTol,
                                    int max_iter = kDefaultMaxIter);

/// `count` slopes log-spaced in [lo, hi], preceded by s = 0 when `with_zero`.
std::vector<double> log_slope_grid(double lo, double hi, std::size_t count, bool with_zero = true);

}  // namespace idq
