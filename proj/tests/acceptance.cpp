// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "idq/idrate.hpp"
#include "idq/linalg.hpp"
#include "idq/simulator.hpp"
#include "idq/sources.hpp"
#include "idq/tcdelta.hpp"

using namespace idq;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

// Largest Lagrangian and objective increases seen by the solver runs of
// criteria 5 to 7.
struct DescentLog {
  double lagrangian = 0.0;
  double objective = 0.0;
  std::size_t solves = 0;
  std::string worst_run;

  void add(const std::string& run, const std::vector<TcSweepPoint>& points) {
    for (const auto& pt : points) {
      ++solves;
      if (pt.max_lagrangian_increase > lagrangian) {
        lagrangian = pt.max_lagrangian_increase;
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s s=%.4g", run.c_str(), pt.slope_s);
        worst_run = buf;
      }
      objective = std::max(objective, pt.max_objective_increase);
    }
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double rate_or_nan(const Curve& c, double d) {
  const auto r = c.rate_at(d);
  return r ? *r : std::nan("");
}

// Spectral rate at a given d_id by bisection on the water level.
double spectral_rate_at(const SpectralGrid& psd, double d_id) {
  double lo = 0.0;
  double hi = psd.max_value();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= 0.0 || hi - lo <= 1e-15 * hi) break;
    if (id_point_spectral(psd, WaterLevel(mid)).d_id > d_id) lo = mid; else hi = mid;
  }
  return id_point_spectral(psd, WaterLevel(0.5 * (lo + hi))).rate.value();
}

Verdict criterion1() {
  const double r = id_rate_iid(1.0, 1.0).value();
  const bool inf2 = id_rate_iid(1.0, 2.0).is_infinite() && id_rate_iid(1.0, 3.5).is_infinite();
  return {std::abs(r - 1.0) <= 1e-12 && inf2,
          fmt("R(1)=%.15g, R(2) and R(3.5) infinite=%g", r, inf2)};
}

Verdict criterion2() {
  const std::vector<double> eigs{1.7, 0.3};
  const auto p = id_point_multivariate(eigs, WaterLevel(0.3)).point;
  const double expected = 0.5 * std::log2(1.7 / 0.3);
  const auto top = id_point_multivariate(eigs, WaterLevel(1.7)).point;
  const bool ok = std::abs(p.d_id - 1.4) <= 1e-9 && std::abs(p.rate.value() - expected) <= 1e-9 &&
                  top.d_id == 0.0 && top.rate.value() == 0.0;
  return {ok, fmt("(D, R)=(%.12g, %.12g); at tau=xi_max (%g, 0)", p.d_id, p.rate.value(), top.d_id)};
}

Verdict criterion3() {
  const auto psd = spectral_grid(GaussMarkov{1.0, 0.0}, 1 << 16);
  double worst = 0.0;
  for (int k = 1; k <= 50; ++k) {
    const double d = 1.95 * k / 51.0;
    worst = std::max(worst, std::abs(spectral_rate_at(psd, d) - id_rate_iid(1.0, d).value()));
  }
  return {worst <= 1e-6, fmt("max |R_spectral - R_iid| over 50 d_id = %.3g (tol 1e-6)", worst)};
}

Verdict criterion4() {
  const double rho = 0.5;
  const double tau = 0.5;
  const auto psd = spectral_grid(GaussMarkov{1.0, rho}, 1 << 16);
  const double spectral = id_point_spectral(psd, WaterLevel(tau)).rate.value();
  std::vector<double> gaps;
  std::string detail = "gaps:";
  for (std::size_t m = 8; m <= 256; m *= 2) {
    std::vector<double> ac(m);
    for (std::size_t k = 0; k < m; ++k) ac[k] = std::pow(rho, static_cast<double>(k));
    const auto eigs = jacobi_eigh(toeplitz_covariance(ac, m)).eigenvalues;
    gaps.push_back(std::abs(id_point_multivariate(eigs, WaterLevel(tau)).point.rate.value() - spectral));
    detail += fmt(" M=%g:%.3g", static_cast<double>(m), gaps.back());
  }
  bool monotone = true;
  for (std::size_t k = 1; k < gaps.size(); ++k) monotone = monotone && gaps[k] < gaps[k - 1];
  return {monotone && gaps.back() < 0.02, detail};
}

Verdict criterion5(DescentLog& log) {
  const Pmf p = bernoulli_pmf(0.5);
  const auto g = distortion_matrix(p.support(), p.support(), Metric::kHamming);
  const double step = 0.01;
  double oracle_gap = 0.0;
  double solver_gap = 0.0;
  const auto curve = tc_curve(p, g, log_slope_grid(0.05, 20.0, 80));
  log.add("binary", curve.points);
  for (int k = 1; k <= 9; ++k) {
    const double d = 0.05 * k;
    const double closed = binary_hamming_tc_oracle(d);
    oracle_gap = std::max(oracle_gap, std::abs(brute_force_tc_oracle(p, g, closed, step) - d));
    solver_gap = std::max(solver_gap, std::abs(rate_or_nan(curve.curve, d) - closed));
  }
  const bool ok = oracle_gap <= 3 * step && solver_gap <= 1e-3;
  return {ok, fmt("closed form vs brute force %.3g (tol %.3g); solver vs closed form %.3g (tol 1e-3)",
                  oracle_gap, 3 * step, solver_gap)};
}

Verdict criterion6(DescentLog& log) {
  const Pmf p = discretize_gaussian(1.0);
  const auto g = distortion_matrix(p.support(), p.support(), Metric::kQuadratic);
  const auto tc = tc_curve(p, g, log_slope_grid(0.5, 400.0, 60));
  log.add("gaussian", tc.points);
  bool ok = true;
  double worst_excess = -1.0;
  double min_star_gap = 1e9;
  int nonconverged = 0;
  for (const auto& pt : tc.points) nonconverged += pt.converged ? 0 : 1;
  for (int k = 1; k <= 20; ++k) {
    const double d = 0.1 + 1.7 * k / 21.0;
    const double star = id_rate_iid(1.0, d).value();
    const double lc = lc_delta_rate(1.0, d).value();
    const double r = rate_or_nan(tc.curve, d);
    if (std::isnan(r)) {
      ok = false;
      continue;
    }
    ok = ok && star <= r && r <= lc + 0.02 && r < lc;
    worst_excess = std::max(worst_excess, r - lc);
    min_star_gap = std::min(min_star_gap, r - star);
  }
  return {ok, fmt("max(R_TC - R_LC) = %.4g, min(R_TC - R*) = %.4g, unconverged slopes %g",
                  worst_excess, min_star_gap, nonconverged)};
}

Verdict criterion7(DescentLog& log) {
  const auto eigs = jacobi_eigh(SymMatrix(2, {1.0, 0.7, 0.7, 1.0})).eigenvalues;
  const auto slopes = log_slope_grid(0.5, 200.0, 40);
  const auto comp = component_tc_curve(gaussian_components(eigs), slopes);
  for (const auto& c : comp.components) log.add("component", c.points);

  const auto grid = discretize_gaussian_vector(eigs, 6.0, 21);
  const auto joint = tc_curve(grid.pmf, vector_distortion_matrix(grid.points, grid.points), slopes);
  log.add("joint", joint.points);

  bool ok = true;
  double worst = -1e9;
  for (int k = 0; k < 10; ++k) {
    const double d = 0.15 + 1.05 * k / 9.0;
    const double rc = rate_or_nan(comp.curve, d);
    const double rj = rate_or_nan(joint.curve, d);
    if (std::isnan(rc) || std::isnan(rj)) {
      ok = false;
      continue;
    }
    worst = std::max(worst, rc - rj);
    ok = ok && rc <= rj + 1e-3;
  }
  return {ok, fmt("max(R_component - R_joint) over d in [0.15, 1.2] = %.4g (tol 1e-3)", worst)};
}

Verdict criterion8() {
  std::size_t fn = 0;
  std::string detail = "false negatives:";
  std::uint64_t seed = 100;
  for (std::size_t n : {8u, 16u}) {
    for (double d : {0.25, 0.5, 1.0}) {
      const auto est = estimate_pr_maybe(IidGaussian{1.0}, 1.0, n, d, 100000, seed++);
      fn += est.false_negatives;
      detail += fmt(" n=%g,d=%g:%g", static_cast<double>(n), d, static_cast<double>(est.false_negatives));
    }
  }
  return {fn == 0, detail};
}

Verdict criterion9() {
  std::vector<PrMaybeEstimate> est;
  std::string detail = "Pr{maybe}:";
  for (double r : {0.5, 1.0, 2.0}) {
    est.push_back(estimate_pr_maybe(IidGaussian{1.0}, r, 16, 0.5, 100000, 900));
    detail += fmt(" R=%g:%.4f+-%.4f", r, est.back().estimate, est.back().std_error);
  }
  bool ok = true;
  for (std::size_t k = 1; k < est.size(); ++k) {
    const double sep = 3.0 * std::hypot(est[k].std_error, est[k - 1].std_error);
    ok = ok && est[k - 1].estimate - est[k].estimate > sep;
  }
  return {ok, detail};
}

Verdict criterion10(const DescentLog& log) {
  const bool ok = log.lagrangian <= 1e-9;
  std::string detail = fmt("%g solves; max increase of I - s*D_s = %.3g", static_cast<double>(log.solves),
                           log.lagrangian);
  if (!ok) detail += " (" + log.worst_run + ")";
  detail += fmt("; max increase of the alternating objective = %.3g", log.objective);
  return {ok, detail};
}

}  // namespace

int main() {
  DescentLog log;
  struct Item {
    int id;
    const char* name;
    double budget_s;
    std::function<Verdict()> run;
  };
  const std::vector<Item> items{
      {1, "closed-form i.i.d. identification rate", 1, criterion1},
      {2, "multivariate water-filling point", 1, criterion2},
      {3, "spectral rho=0 matches i.i.d.", 5, criterion3},
      {4, "Toeplitz eigenvalue sums converge to the spectral rate", 30, criterion4},
      {5, "binary Hamming solver vs closed form vs brute force", 120, [&] { return criterion5(log); }},
      {6, "curve ordering R* <= R_TC <= R_LC, i.i.d. Gaussian", 300, [&] { return criterion6(log); }},
      {7, "component curve below joint curve, rho=0.7", 600, [&] { return criterion7(log); }},
      {8, "simulator admissibility", 120, criterion8},
      {9, "simulator Pr{maybe} decreases in rate", 300, criterion9},
      {10, "Lagrangian descent in criteria 5-7 solves", 1e9, [&] { return criterion10(log); }},
  };

  int failures = 0;
  for (const auto& item : items) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = item.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > item.budget_s) {
      v.pass = false;
      v.detail += fmt("; runtime %.1fs over budget %.0fs", secs, item.budget_s);
    }
    failures += v.pass ? 0 : 1;
    std::printf("[%s] criterion %d: %s. %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", item.id, item.name,
                v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(items.size()) - failures, items.size());
  return failures == 0 ? 0 : 1;
}
