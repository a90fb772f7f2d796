#include "idq/tcdelta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "idq/errors.hpp"
#include "idq/parallel.hpp"

namespace idq {

DistortionMatrix distortion_matrix(std::span<const double> x_grid,
                                   std::span<const double> xhat_grid, Metric metric) {
  if (x_grid.empty() || xhat_grid.empty())
    throw Error(ErrorKind::kDomainError, "distortion grids must be non-empty");
  DistortionMatrix out;
  out.metric = metric;
  out.gamma = Matrix(xhat_grid.size(), x_grid.size());
  out.code_support.assign(xhat_grid.begin(), xhat_grid.end());
  for (std::size_t j = 0; j < xhat_grid.size(); ++j) {
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
      const double diff = x_grid[i] - xhat_grid[j];
      out.gamma(j, i) = metric == Metric::kQuadratic ? diff * diff : (diff != 0.0 ? 1.0 : 0.0);
    }
  }
  return out;
}

DistortionMatrix vector_distortion_matrix(const Matrix& x_points, const Matrix& xhat_points) {
  if (x_points.cols() != xhat_points.cols() || x_points.rows() == 0 || xhat_points.rows() == 0)
    throw Error(ErrorKind::kDimensionMismatch, "point sets must share a dimension");
  DistortionMatrix out;
  out.metric = Metric::kQuadratic;
  out.block_len = x_points.cols();
  out.gamma = Matrix(xhat_points.rows(), x_points.rows());
  out.code_support.resize(xhat_points.rows());
  std::iota(out.code_support.begin(), out.code_support.end(), 0.0);
  for (std::size_t j = 0; j < xhat_points.rows(); ++j)
    for (std::size_t i = 0; i < x_points.rows(); ++i)
      out.gamma(j, i) = per_sample_distance(x_points.row(i), xhat_points.row(j));
  return out;
}

double Channel::max_column_error() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < n_source(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n_code(); ++j) sum += q(j, i);
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

double Channel::min_entry() const {
  const auto d = q.data();
  return *std::min_element(d.begin(), d.end());
}

namespace {

void check_shapes(const Pmf& p_x, const DistortionMatrix& gamma) {
  if (gamma.n_source() != p_x.size())
    throw Error(ErrorKind::kDimensionMismatch, "Gamma columns must match the source alphabet");
  if (gamma.code_support.size() != gamma.n_code())
    throw Error(ErrorKind::kDimensionMismatch, "codeword labels must match Gamma rows");
  if (gamma.block_len == 0) throw Error(ErrorKind::kDomainError, "block_len must be >= 1");
}

// Precomputed per-slope quantities in source-major layout (index i * m + j).
struct Kernel {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<double> exponent;  // stabilized, per-column max is 0
  std::vector<double> weight;    // exp(exponent)
  std::vector<double> gamma_t;
  std::vector<double> g;         // g_j = sum_i p_i Gamma(j, i)
};

Kernel build_kernel(const Pmf& p_x, const DistortionMatrix& gamma, double s) {
  if (!(s >= 0.0) || !std::isfinite(s)) throw Error(ErrorKind::kDomainError, "slope must be >= 0");
  const auto p = p_x.probs();
  Kernel k;
  k.m = gamma.n_code();
  k.n = gamma.n_source();
  k.g.assign(k.m, 0.0);
  for (std::size_t j = 0; j < k.m; ++j)
    for (std::size_t i = 0; i < k.n; ++i) k.g[j] += p[i] * gamma.gamma(j, i);

  // Exponent of 2^{-s (Gamma - Gamma P P^T)} in natural-log units; the shift
  // (Gamma P P^T)(j, i) = g_j p_i.
  const double scale = s * std::numbers::ln2 * static_cast<double>(gamma.block_len);
  k.exponent.resize(k.m * k.n);
  k.weight.resize(k.m * k.n);
  k.gamma_t.resize(k.m * k.n);
  for (std::size_t i = 0; i < k.n; ++i) {
    double* e = k.exponent.data() + i * k.m;
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k.m; ++j) {
      k.gamma_t[i * k.m + j] = gamma.gamma(j, i);
      e[j] = -scale * (gamma.gamma(j, i) - k.g[j] * p[i]);
      peak = std::max(peak, e[j]);
    }
    for (std::size_t j = 0; j < k.m; ++j) {
      e[j] -= peak;
      k.weight[i * k.m + j] = std::exp(e[j]);
    }
  }
  return k;
}

struct StepStats {
  double rate_nats = 0.0;
  double e_product = 0.0;
  double e_joint = 0.0;
  double shift_term = 0.0;  // sum_i p_i^2 sum_j q_ij g_j
};

// q is source-major (row i holds Q(. | x_i)).
StepStats step(const Kernel& k, std::span<const double> p, std::span<const double> t_old,
               std::vector<double>& q, std::vector<double>& t_new) {
  const std::size_t m = k.m;
  std::vector<double> log_t(m);
  for (std::size_t j = 0; j < m; ++j) log_t[j] = t_old[j] > 0.0 ? std::log(t_old[j]) : 0.0;

  std::fill(t_new.begin(), t_new.end(), 0.0);
  q.resize(m * k.n);
  StepStats st;
  double entropy_part = 0.0;
  for (std::size_t i = 0; i < k.n; ++i) {
    const double* w = k.weight.data() + i * m;
    const double* e = k.exponent.data() + i * m;
    const double* gm = k.gamma_t.data() + i * m;
    double* qi = q.data() + i * m;
    double z = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      qi[j] = t_old[j] * w[j];
      z += qi[j];
    }
    if (!(z > 0.0) || !std::isfinite(z))
      throw Error(ErrorKind::kNumericalUnderflow,
                  "a channel column normalized to zero; slope too large for the grid");
    const double inv = 1.0 / z;
    const double pi = p[i];
    double joint = 0.0;
    double shifted = 0.0;
    double neg_entropy = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double v = qi[j] * inv;
      qi[j] = v;
      if (v > 0.0) {
        t_new[j] += pi * v;
        joint += v * gm[j];
        shifted += v * k.g[j];
        neg_entropy += v * (log_t[j] + e[j]);
      }
    }
    entropy_part += pi * (neg_entropy - std::log(z));
    st.e_joint += pi * joint;
    st.shift_term += pi * pi * shifted;
  }
  double marginal_entropy = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    if (t_new[j] > 0.0) marginal_entropy += t_new[j] * std::log(t_new[j]);
    st.e_product += t_new[j] * k.g[j];
  }
  st.rate_nats = entropy_part - marginal_entropy;
  return st;
}

Channel to_channel(const std::vector<double>& q_source_major, std::size_t m, std::size_t n) {
  Channel c{Matrix(m, n)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) c.q(j, i) = q_source_major[i * m + j];
  return c;
}

std::vector<double> uniform(std::size_t m) {
  return std::vector<double>(m, 1.0 / static_cast<double>(m));
}

Pmf marginal_pmf(const DistortionMatrix& gamma, std::vector<double> t) {
  const double total = std::accumulate(t.begin(), t.end(), 0.0);
  for (double& v : t) v /= total;
  return Pmf(gamma.code_support, std::move(t));
}

}  // namespace

BaStepResult ba_step(const Pmf& p_x, std::span<const double> t, const DistortionMatrix& gamma,
                     double s) {
  check_shapes(p_x, gamma);
  if (t.size() != gamma.n_code())
    throw Error(ErrorKind::kDimensionMismatch, "t must match Gamma rows");
  const Kernel k = build_kernel(p_x, gamma, s);
  std::vector<double> q;
  std::vector<double> t_new(k.m);
  step(k, p_x.probs(), t, q, t_new);
  return BaStepResult{to_channel(q, k.m, k.n), std::move(t_new)};
}

double mutual_information(const Pmf& p_x, const Channel& q) {
  if (q.n_source() != p_x.size())
    throw Error(ErrorKind::kDimensionMismatch, "channel columns must match the source");
  const auto p = p_x.probs();
  std::vector<double> t(q.n_code(), 0.0);
  for (std::size_t j = 0; j < q.n_code(); ++j)
    for (std::size_t i = 0; i < q.n_source(); ++i) t[j] += p[i] * q.q(j, i);
  double info = 0.0;
  for (std::size_t j = 0; j < q.n_code(); ++j) {
    // t_j underflows to zero only when every p_i q_ji does; those terms vanish.
    if (!(t[j] > 0.0)) continue;
    for (std::size_t i = 0; i < q.n_source(); ++i) {
      const double v = q.q(j, i);
      if (v > 0.0 && p[i] > 0.0) info += p[i] * v * std::log2(v / t[j]);
    }
  }
  return std::max(0.0, info);
}

std::pair<double, double> expected_distortions(const Pmf& p_x, const Channel& q,
                                               const DistortionMatrix& gamma) {
  check_shapes(p_x, gamma);
  const auto p = p_x.probs();
  double product = 0.0;
  double joint = 0.0;
  for (std::size_t j = 0; j < q.n_code(); ++j) {
    double tj = 0.0;
    for (std::size_t i = 0; i < q.n_source(); ++i) tj += p[i] * q.q(j, i);
    for (std::size_t i = 0; i < q.n_source(); ++i) {
      product += p[i] * tj * gamma.gamma(j, i);
      joint += p[i] * q.q(j, i) * gamma.gamma(j, i);
    }
  }
  return {product, joint};
}

double admissible_threshold(Metric metric, double e_product, double e_joint) {
  if (metric == Metric::kHamming) return std::max(0.0, e_product - e_joint);
  const double gap = std::sqrt(std::max(0.0, e_product)) - std::sqrt(std::max(0.0, e_joint));
  return gap > 0.0 ? gap * gap : 0.0;
}

TcSolution solve_tc_point(const Pmf& p_x, const DistortionMatrix& gamma, double s, double tol,
                          int max_iter, std::span<const double> initial_t) {
  check_shapes(p_x, gamma);
  if (max_iter < 1) throw Error(ErrorKind::kDomainError, "max_iter must be >= 1");
  const Kernel k = build_kernel(p_x, gamma, s);
  const auto p = p_x.probs();
  const double per_letter = static_cast<double>(gamma.block_len);

  std::vector<double> t = initial_t.empty() ? uniform(k.m)
                                            : std::vector<double>(initial_t.begin(), initial_t.end());
  if (t.size() != k.m) throw Error(ErrorKind::kDimensionMismatch, "initial t has wrong length");

  std::vector<double> q;
  std::vector<double> t_new(k.m);
  TcSolution sol;
  sol.slope_s = s;
  double prev_rate = 0.0;
  double prev_ds = 0.0;
  double prev_lagrangian = 0.0;
  double prev_objective = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    const StepStats st = step(k, p, t, q, t_new);
    t.swap(t_new);
    const double rate = st.rate_nats / std::numbers::ln2 / per_letter;
    const double ds = st.e_product - st.e_joint;
    const double lagrangian = rate - s * ds;
    const double objective = rate + s * (st.e_joint - st.shift_term);
    sol.iterations = it;
    if (it > 1) {
      sol.max_lagrangian_increase = std::max(sol.max_lagrangian_increase, lagrangian - prev_lagrangian);
      sol.max_objective_increase = std::max(sol.max_objective_increase, objective - prev_objective);
      if (std::abs(rate - prev_rate) <= tol && std::abs(ds - prev_ds) <= tol) {
        sol.converged = true;
        break;
      }
    }
    prev_rate = rate;
    prev_ds = ds;
    prev_lagrangian = lagrangian;
    prev_objective = objective;
  }

  sol.channel = to_channel(q, k.m, k.n);
  const auto [e_product, e_joint] = expected_distortions(p_x, sol.channel, gamma);
  sol.e_product = e_product;
  sol.e_joint = e_joint;
  sol.d_s = e_product - e_joint;
  sol.d_id = admissible_threshold(gamma.metric, e_product, e_joint);
  sol.rate = mutual_information(p_x, sol.channel) / per_letter;
  sol.code_marginal = marginal_pmf(gamma, t);
  return sol;
}

TcCurve tc_curve(const Pmf& p_x, const DistortionMatrix& gamma, std::span<const double> s_grid,
                 double tol, int max_iter) {
  check_shapes(p_x, gamma);
  if (!std::is_sorted(s_grid.begin(), s_grid.end()))
    throw Error(ErrorKind::kDomainError, "slope grid must be ascending");
  const std::size_t m = gamma.n_code();

  TcCurve out;
  out.curve.label = "R_ID TC-triangle (iterative approximation)";
  out.curve.monotonicity = Monotonicity::kNonDecreasing;
  std::vector<double> warm;
  for (double s : s_grid) {
    std::size_t pruned = 0;
    if (!warm.empty()) {
      // Half of the mass goes back to uniform. A pure warm start leaves the
      // tails (and pruned codewords) far too small for the next, wider
      // solution and the sweep stalls.
      for (double& v : warm) {
        if (v < kPruneThreshold) {
          v = 0.0;
          ++pruned;
        }
      }
      for (double& v : warm) v = 0.5 * v + 0.5 / static_cast<double>(m);
      const double total = std::accumulate(warm.begin(), warm.end(), 0.0);
      for (double& v : warm) v /= total;
    }
    TcSolution sol = solve_tc_point(p_x, gamma, s, tol, max_iter, warm);
    warm.assign(sol.code_marginal.probs().begin(), sol.code_marginal.probs().end());

    out.points.push_back(TcSweepPoint{s, sol.d_s, sol.d_id, sol.rate, sol.iterations,
                                      sol.converged, sol.max_lagrangian_increase,
                                      sol.max_objective_increase, pruned});
    out.curve.points.push_back(RateSimilarityPoint{sol.d_id, Rate::bits(sol.rate)});
  }
  out.curve.normalize();
  return out;
}

namespace {

void compositions(std::size_t parts, int total, std::vector<int>& current,
                  std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    current.push_back(total);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (int v = 0; v <= total; ++v) {
    current.push_back(v);
    compositions(parts - 1, total - v, current, out);
    current.pop_back();
  }
}

}  // namespace

double brute_force_tc_oracle(const Pmf& p_x, const DistortionMatrix& gamma, double rate_budget,
                             double grid_step) {
  check_shapes(p_x, gamma);
  const std::size_t n = gamma.n_source();
  const std::size_t m = gamma.n_code();
  if (n > 3 || m > 3) throw Error(ErrorKind::kDomainError, "brute force supports <= 3x3 channels");
  if (!(grid_step > 0.0 && grid_step <= 0.01))
    throw Error(ErrorKind::kDomainError, "grid_step must lie in (0, 0.01]");
  const int units = static_cast<int>(std::lround(1.0 / grid_step));

  std::vector<std::vector<int>> columns;
  std::vector<int> scratch;
  compositions(m, units, scratch, columns);
  const double combos = std::pow(static_cast<double>(columns.size()), static_cast<double>(n));
  if (combos > 2e8) throw Error(ErrorKind::kDomainError, "brute-force search space too large");

  const auto p = p_x.probs();
  const double step = 1.0 / static_cast<double>(units);
  std::vector<std::size_t> pick(n, 0);
  std::vector<double> t(m);
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    std::fill(t.begin(), t.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) t[j] += p[i] * columns[pick[i]][j] * step;
    double info = 0.0;
    double product = 0.0;
    double joint = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        const double qji = columns[pick[i]][j] * step;
        if (qji > 0.0 && p[i] > 0.0) info += p[i] * qji * std::log2(qji / t[j]);
        product += p[i] * t[j] * gamma.gamma(j, i);
        joint += p[i] * qji * gamma.gamma(j, i);
      }
    }
    if (info <= rate_budget + 1e-12) best = std::max(best, product - joint);

    std::size_t d = 0;
    while (d < n && ++pick[d] == columns.size()) pick[d++] = 0;
    if (d == n) break;
  }
  return best;
}

std::vector<TcComponent> gaussian_components(std::span<const double> eigenvalues,
                                             double half_width_sigmas, std::size_t n_points) {
  std::vector<TcComponent> out;
  out.reserve(eigenvalues.size());
  for (double xi : eigenvalues) {
    Pmf pmf = discretize_gaussian(xi, half_width_sigmas, n_points);
    DistortionMatrix gamma = distortion_matrix(pmf.support(), pmf.support(), Metric::kQuadratic);
    out.push_back(TcComponent{std::move(pmf), std::move(gamma)});
  }
  return out;
}

ComponentTcCurve component_tc_curve(const std::vector<TcComponent>& components,
                                    std::span<const double> s_grid, double tol, int max_iter) {
  if (components.empty()) throw Error(ErrorKind::kDomainError, "need at least one component");
  ComponentTcCurve out;
  out.components.resize(components.size());
  parallel_for(components.size(), [&](std::size_t c) {
    out.components[c] = tc_curve(components[c].p_x, components[c].gamma, s_grid, tol, max_iter);
  });

  const double mf = static_cast<double>(components.size());
  out.curve.label = "R_ID component TC-triangle (equal slopes)";
  out.curve.monotonicity = Monotonicity::kNonDecreasing;
  for (std::size_t k = 0; k < s_grid.size(); ++k) {
    double rate = 0.0;
    double d_id = 0.0;
    for (const auto& comp : out.components) {
      rate += comp.points[k].rate;
      d_id += comp.points[k].d_id;
    }
    out.curve.points.push_back(RateSimilarityPoint{d_id / mf, Rate::bits(rate / mf)});
  }
  out.curve.normalize();
  return out;
}

std::vector<double> log_slope_grid(double lo, double hi, std::size_t count, bool with_zero) {
  if (!(lo > 0.0 && hi >= lo)) throw Error(ErrorKind::kDomainError, "need 0 < lo <= hi");
  if (count == 0) throw Error(ErrorKind::kDomainError, "need at least one slope");
  std::vector<double> grid;
  if (with_zero) grid.push_back(0.0);
  for (std::size_t k = 0; k < count; ++k) {
    const double f = count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(count - 1);
    grid.push_back(lo * std::pow(hi / lo, f));
  }
  return grid;
}

}  // namespace idq
