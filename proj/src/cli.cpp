#include "idq/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <optional>

#include <CLI11.hpp>

#include "idq/curve_file.hpp"
#include "idq/errors.hpp"
#include "idq/idrate.hpp"
#include "idq/linalg.hpp"
#include "idq/simulator.hpp"
#include "idq/sources.hpp"
#include "idq/tcdelta.hpp"

namespace idq::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Params {
  std::string source = "iid-gaussian";
  std::string model = "gauss-markov";
  double variance = 1.0;
  double rho = 0.0;
  std::size_t order = 2;
  std::vector<double> eigenvalues;
  double p = 0.5;

  double dmax = -1.0;
  std::size_t points = 100;
  double tau_min = kDefaultTauMinRatio;
  std::size_t tau_points = kDefaultTauPoints;
  std::size_t spectral_points = kDefaultSpectralPoints;

  std::size_t slopes = 60;
  double slope_min = -1.0;
  double slope_max = -1.0;
  std::size_t grid_points = kDefaultGridPoints;
  double grid_sigmas = kDefaultGridSigmas;
  std::size_t joint_grid_points = 21;
  double joint_grid_sigmas = 6.0;
  double tol = kDefaultTol;
  int max_iter = kDefaultMaxIter;

  std::size_t block_len = 16;
  double rate = 1.0;
  std::vector<double> d_ids{0.25, 0.5, 1.0};
  std::size_t trials = 10000;

  std::uint64_t seed = 1;
};

std::string num(double v) { return format_number(v); }

double rate_value(const Rate& r) {
  return r.is_infinite() ? std::numeric_limits<double>::infinity() : r.value();
}

double curve_value(const Curve& c, double d) {
  const auto r = c.rate_at(d);
  return r ? *r : kNaN;
}

// Evenly spaced d_id values 0..dmax.
std::vector<double> d_grid(double dmax, std::size_t points) {
  if (points < 2) throw Error(ErrorKind::kDomainError, "--points must be >= 2");
  if (!(dmax > 0.0)) throw Error(ErrorKind::kDomainError, "--dmax must be > 0");
  std::vector<double> out(points);
  for (std::size_t k = 0; k < points; ++k)
    out[k] = dmax * static_cast<double>(k) / static_cast<double>(points - 1);
  return out;
}

// Eigenvalues of the Gauss-Markov Toeplitz covariance or the explicit list.
std::vector<double> resolve_eigenvalues(const Params& p, CurveFile& file) {
  if (!p.eigenvalues.empty()) {
    file.set("source", "eigenvalues");
    return p.eigenvalues;
  }
  if (p.source == "iid-gaussian") return std::vector<double>(p.order, p.variance);
  if (p.source != "gauss-markov")
    throw Error(ErrorKind::kUnsupportedModel, "source '" + p.source + "' has no eigenvalues");
  const SourceModel model = GaussMarkov{p.variance, p.rho};
  validate(model);
  std::vector<double> autocov(p.order);
  for (std::size_t k = 0; k < p.order; ++k) autocov[k] = autocovariance(model, k);
  return jacobi_eigh(toeplitz_covariance(autocov, p.order)).eigenvalues;
}

SourceModel scalar_model(const Params& p) {
  if (p.source == "iid-gaussian") return IidGaussian{p.variance};
  if (p.source == "gauss-markov") return GaussMarkov{p.variance, p.rho};
  if (p.source == "bernoulli") return Bernoulli{p.p};
  throw Error(ErrorKind::kUnsupportedModel, "unknown source '" + p.source + "'");
}

std::vector<double> slope_grid(const Params& p, double lo_default, double hi_default,
                               CurveFile& file) {
  const double lo = p.slope_min > 0.0 ? p.slope_min : lo_default;
  const double hi = p.slope_max > 0.0 ? p.slope_max : hi_default;
  file.set("slope_min", num(lo));
  file.set("slope_max", num(hi));
  return log_slope_grid(lo, hi, p.slopes);
}

void note_sweep(const std::vector<TcSweepPoint>& points, CurveFile& file) {
  std::size_t nonconverged = 0;
  std::size_t pruned = 0;
  double lagrangian = 0.0;
  double objective = 0.0;
  for (const auto& pt : points) {
    nonconverged += pt.converged ? 0 : 1;
    pruned += pt.pruned;
    lagrangian = std::max(lagrangian, pt.max_lagrangian_increase);
    objective = std::max(objective, pt.max_objective_increase);
  }
  file.set("nonconverged_slopes", std::to_string(nonconverged));
  file.set("pruned_codewords", std::to_string(pruned));
  file.set("max_lagrangian_increase", num(lagrangian));
  file.set("max_objective_increase", num(objective));
}

TcCurve scalar_tc(const Params& p, CurveFile& file) {
  if (p.source == "bernoulli") {
    const Pmf pmf = bernoulli_pmf(p.p);
    const auto gamma = distortion_matrix(pmf.support(), pmf.support(), Metric::kHamming);
    file.set("metric", "hamming");
    return tc_curve(pmf, gamma, slope_grid(p, 0.05, 20.0, file), p.tol, p.max_iter);
  }
  if (p.source != "iid-gaussian")
    throw Error(ErrorKind::kUnsupportedModel, "tcdelta supports iid-gaussian and bernoulli");
  const Pmf pmf = discretize_gaussian(p.variance, p.grid_sigmas, p.grid_points);
  const auto gamma = distortion_matrix(pmf.support(), pmf.support(), Metric::kQuadratic);
  file.set("metric", "quadratic");
  return tc_curve(pmf, gamma, slope_grid(p, 0.5, 400.0, file), p.tol, p.max_iter);
}

// --- subcommands -----------------------------------------------------------

void cmd_idrate_iid(const Params& p, CurveFile& file) {
  const double dmax = p.dmax > 0.0 ? p.dmax : 1.99 * p.variance;
  file.set("dmax", num(dmax));
  file.columns = {"d_id", "rate"};
  for (double d : d_grid(dmax, p.points))
    file.rows.push_back({d, rate_value(id_rate_iid(p.variance, d))});
}

void cmd_idrate_mv(const Params& p, CurveFile& file) {
  const auto eigs = resolve_eigenvalues(p, file);
  const double peak = *std::max_element(eigs.begin(), eigs.end());
  file.columns = {"d_id", "rate", "tau"};
  for (std::size_t m = 0; m < eigs.size(); ++m) file.columns.push_back("d_" + std::to_string(m + 1));
  for (const auto& wf : water_filling_sweep(eigs, default_tau_grid(peak, p.tau_points, p.tau_min))) {
    std::vector<double> row{wf.point.d_id, rate_value(wf.point.rate), wf.tau};
    row.insert(row.end(), wf.component_d_ids.begin(), wf.component_d_ids.end());
    file.rows.push_back(std::move(row));
  }
}

void cmd_idrate_spectral(const Params& p, CurveFile& file) {
  SourceModel model = GaussMarkov{p.variance, p.rho};
  if (p.model == "iid")
    model = IidGaussian{p.variance};
  else if (p.model != "gauss-markov")
    throw Error(ErrorKind::kUnsupportedModel, "unknown spectral model '" + p.model + "'");
  const SpectralGrid psd = spectral_grid(model, p.spectral_points);
  file.columns = {"d_id", "rate", "tau"};
  for (double tau : default_tau_grid(psd.max_value(), p.tau_points, p.tau_min)) {
    const auto pt = id_point_spectral(psd, WaterLevel(tau));
    file.rows.push_back({pt.d_id, rate_value(pt.rate), tau});
  }
}

void cmd_lcdelta(const Params& p, CurveFile& file) {
  file.columns = {"d_id", "rate"};
  if (p.source == "iid-gaussian" && p.eigenvalues.empty()) {
    const double dmax = p.dmax > 0.0 ? p.dmax : 1.99 * p.variance;
    file.set("dmax", num(dmax));
    for (double d : d_grid(dmax, p.points))
      file.rows.push_back({d, rate_value(lc_delta_rate(p.variance, d))});
    return;
  }
  const auto eigs = resolve_eigenvalues(p, file);
  const double limit = 2.0 * std::accumulate(eigs.begin(), eigs.end(), 0.0) /
                       static_cast<double>(eigs.size());
  const double dmax = p.dmax > 0.0 ? p.dmax : 0.95 * limit;
  file.set("dmax", num(dmax));
  for (double d : d_grid(dmax, p.points))
    file.rows.push_back({d, rate_value(lc_delta_rate_multivariate(eigs, d))});
}

void cmd_tcdelta(const Params& p, CurveFile& file) {
  const TcCurve tc = scalar_tc(p, file);
  note_sweep(tc.points, file);
  file.columns = {"d_id", "rate", "slope_s", "iterations", "converged"};
  for (const auto& pt : tc.points)
    file.rows.push_back({pt.d_id, pt.rate, pt.slope_s, static_cast<double>(pt.iterations),
                         pt.converged ? 1.0 : 0.0});
}

void cmd_tcdelta_components(const Params& p, CurveFile& file) {
  const auto eigs = resolve_eigenvalues(p, file);
  const auto components = gaussian_components(eigs, p.grid_sigmas, p.grid_points);
  const auto slopes = slope_grid(p, 0.5, 400.0, file);
  const auto result = component_tc_curve(components, slopes, p.tol, p.max_iter);
  std::vector<TcSweepPoint> all;
  for (const auto& c : result.components) all.insert(all.end(), c.points.begin(), c.points.end());
  note_sweep(all, file);
  file.columns = {"d_id", "rate", "slope_s"};
  const double mf = static_cast<double>(eigs.size());
  for (std::size_t k = 0; k < slopes.size(); ++k) {
    double d = 0.0;
    double r = 0.0;
    for (const auto& c : result.components) {
      d += c.points[k].d_id;
      r += c.points[k].rate;
    }
    file.rows.push_back({d / mf, r / mf, slopes[k]});
  }
}

void cmd_simulate(const Params& p, CurveFile& file) {
  const SourceModel model = scalar_model(p);
  file.set("scheme", "lc-triangle");
  file.set("sub_block_len", std::to_string(sub_block_length(p.rate, p.block_len)));
  file.columns = {"d_id", "pr_maybe", "stderr"};
  std::size_t false_negatives = 0;
  for (double d : p.d_ids) {
    const auto est = estimate_pr_maybe(model, p.rate, p.block_len, d, p.trials, p.seed);
    false_negatives += est.false_negatives;
    file.rows.push_back({d, est.estimate, est.std_error});
  }
  file.set("false_negatives", std::to_string(false_negatives));
}

void cmd_compare(const Params& p, CurveFile& file) {
  if (p.source == "iid-gaussian" && p.eigenvalues.empty()) {
    const double dmax = p.dmax > 0.0 ? p.dmax : 1.8 * p.variance;
    file.set("dmax", num(dmax));
    const TcCurve tc = scalar_tc(p, file);
    note_sweep(tc.points, file);
    file.columns = {"d_id", "rate_star", "rate_tc", "rate_lc"};
    for (double d : d_grid(dmax, p.points))
      file.rows.push_back({d, rate_value(id_rate_iid(p.variance, d)), curve_value(tc.curve, d),
                           rate_value(lc_delta_rate(p.variance, d))});
    return;
  }
  const auto eigs = resolve_eigenvalues(p, file);
  const double limit = 2.0 * std::accumulate(eigs.begin(), eigs.end(), 0.0) /
                       static_cast<double>(eigs.size());
  const double dmax = p.dmax > 0.0 ? p.dmax : 0.9 * limit;
  file.set("dmax", num(dmax));
  const auto slopes = slope_grid(p, 0.5, 400.0, file);
  const auto comp =
      component_tc_curve(gaussian_components(eigs, p.grid_sigmas, p.grid_points), slopes, p.tol,
                         p.max_iter);

  // The joint solver lives on a product grid; skip it when that grid is large.
  std::optional<TcCurve> joint;
  const double joint_size = std::pow(static_cast<double>(p.joint_grid_points),
                                     static_cast<double>(eigs.size()));
  if (joint_size <= 1024.0) {
    const auto grid = discretize_gaussian_vector(eigs, p.joint_grid_sigmas, p.joint_grid_points);
    const auto gamma = vector_distortion_matrix(grid.points, grid.points);
    joint = tc_curve(grid.pmf, gamma, slopes, p.tol, p.max_iter);
  }
  file.set("joint_tc", joint ? "computed" : "skipped");

  file.columns = {"d_id", "rate_star", "rate_tc", "rate_tc_components", "rate_lc"};
  for (double d : d_grid(dmax, p.points))
    file.rows.push_back({d, rate_value(id_rate_multivariate_at(eigs, d)),
                         joint ? curve_value(joint->curve, d) : kNaN,
                         curve_value(comp.curve, d),
                         rate_value(lc_delta_rate_multivariate(eigs, d))});
}

// --- plumbing ---------------------------------------------------------------

struct Command {
  std::string name;
  std::string help;
  std::function<void(const Params&, CurveFile&)> body;
  std::function<void(CLI::App&, Params&)> options;
};

void add_source_options(CLI::App& app, Params& p) {
  app.add_option("--source", p.source, "iid-gaussian | gauss-markov | bernoulli");
  app.add_option("--variance", p.variance, "Source variance");
  app.add_option("--rho", p.rho, "Gauss-Markov correlation coefficient");
}

void add_order_options(CLI::App& app, Params& p) {
  app.add_option("-M,--order", p.order, "Vector order for memory sources")->check(CLI::PositiveNumber);
  app.add_option("--eigenvalues", p.eigenvalues, "Explicit covariance eigenvalues")->delimiter(',');
}

void add_solver_options(CLI::App& app, Params& p) {
  app.add_option("--slopes", p.slopes, "Number of log-spaced slopes")->check(CLI::PositiveNumber);
  app.add_option("--slope-min", p.slope_min, "Smallest positive slope (source default if unset)");
  app.add_option("--slope-max", p.slope_max, "Largest slope (source default if unset)");
  app.add_option("--grid-points", p.grid_points, "Discretization points per component");
  app.add_option("--grid-sigmas", p.grid_sigmas, "Grid half-width in standard deviations");
  app.add_option("--tol", p.tol, "Convergence tolerance on rate and d_s");
  app.add_option("--max-iter", p.max_iter, "Iteration cap per slope")->check(CLI::PositiveNumber);
}

void add_d_options(CLI::App& app, Params& p) {
  app.add_option("--dmax", p.dmax, "Largest d_id on the output grid");
  app.add_option("--points", p.points, "Number of d_id values")->check(CLI::Range(2, 1000000));
}

void add_tau_options(CLI::App& app, Params& p) {
  app.add_option("--tau-min", p.tau_min, "Smallest water level relative to the peak")
      ->check(CLI::Range(1e-300, 1.0));
  app.add_option("--tau-points", p.tau_points, "Number of water levels")->check(CLI::PositiveNumber);
}

std::vector<Command> commands() {
  return {
      {"idrate-iid", "Identification rate of an i.i.d. Gaussian source", cmd_idrate_iid,
       [](CLI::App& a, Params& p) {
         a.add_option("--variance", p.variance, "Source variance");
         add_d_options(a, p);
       }},
      {"idrate-mv", "Reverse water-filling for a Gaussian vector", cmd_idrate_mv,
       [](CLI::App& a, Params& p) {
         p.source = "gauss-markov";
         add_source_options(a, p);
         add_order_options(a, p);
         add_tau_options(a, p);
       }},
      {"idrate-spectral", "Identification rate of a Gaussian process from its PSD",
       cmd_idrate_spectral,
       [](CLI::App& a, Params& p) {
         a.add_option("--model", p.model, "iid | gauss-markov");
         a.add_option("--variance", p.variance, "Process variance");
         a.add_option("--rho", p.rho, "Gauss-Markov correlation coefficient");
         a.add_option("--spectral-points", p.spectral_points, "PSD grid size")
             ->check(CLI::Range(2, 1 << 24));
         add_tau_options(a, p);
       }},
      {"lcdelta", "LC-triangle rate (classical rate-distortion code + triangle rule)", cmd_lcdelta,
       [](CLI::App& a, Params& p) {
         add_source_options(a, p);
         add_order_options(a, p);
         add_d_options(a, p);
       }},
      {"tcdelta", "Iterative TC-triangle approximation", cmd_tcdelta,
       [](CLI::App& a, Params& p) {
         a.add_option("--source", p.source, "iid-gaussian | bernoulli");
         a.add_option("--variance", p.variance, "Source variance");
         a.add_option("--p", p.p, "Bernoulli parameter");
         add_solver_options(a, p);
       }},
      {"tcdelta-components", "Component TC-triangle curve in the KLT domain",
       cmd_tcdelta_components,
       [](CLI::App& a, Params& p) {
         p.source = "gauss-markov";
         p.rho = 0.7;
         add_source_options(a, p);
         add_order_options(a, p);
         add_solver_options(a, p);
       }},
      {"simulate", "Monte-Carlo Pr{maybe} of the triangle-rule quantizer scheme", cmd_simulate,
       [](CLI::App& a, Params& p) {
         add_source_options(a, p);
         a.add_option("--p", p.p, "Bernoulli parameter");
         a.add_option("--block-len", p.block_len, "Block length n")->check(CLI::PositiveNumber);
         a.add_option("--rate", p.rate, "Signature rate in bits per sample");
         a.add_option("--d-ids", p.d_ids, "Similarity thresholds")->delimiter(',');
         a.add_option("--trials", p.trials, "Pairs per threshold")->check(CLI::Range(1000, 100000000));
       }},
      {"compare", "R*, TC-triangle and LC-triangle on a common d_id grid", cmd_compare,
       [](CLI::App& a, Params& p) {
         p.points = 20;
         add_source_options(a, p);
         add_order_options(a, p);
         add_d_options(a, p);
         add_solver_options(a, p);
         a.add_option("--joint-grid-points", p.joint_grid_points, "Joint grid points per axis");
         a.add_option("--joint-grid-sigmas", p.joint_grid_sigmas, "Joint grid half-width");
       }},
  };
}

std::string option_value(const CLI::Option& opt) {
  if (opt.count() == 0) return opt.get_default_str();
  std::string joined;
  for (const auto& r : opt.results()) joined += (joined.empty() ? "" : ",") + r;
  return joined;
}

int fail(std::ostream& err, const std::string& what, int code) {
  err << "idq: " << what << '\n';
  return code;
}

}  // namespace

int exit_code(ErrorKind kind) { return is_numerical(kind) ? kExitNumerical : kExitUsage; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Identification rates and similarity-query signatures for Gaussian sources", "idq"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  const auto table = commands();
  std::vector<Params> params(table.size());
  std::string out_path;
  std::string format = "csv";
  std::vector<CLI::App*> subs;
  for (std::size_t k = 0; k < table.size(); ++k) {
    const Command& c = table[k];
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    c.options(*sub, params[k]);
    sub->add_option("--seed", params[k].seed, "Seed recorded in the header and used by simulations");
    sub->add_option("--out", out_path, "Output file (default: standard output)");
    sub->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    subs.push_back(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "idq: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  for (std::size_t k = 0; k < table.size(); ++k) {
    if (!subs[k]->parsed()) continue;
    CurveFile file;
    file.set("command", table[k].name);
    file.set("version", kVersion);
    file.set("rate_unit", "bits");
    file.set("log_base", "2");
    for (const CLI::Option* opt : subs[k]->get_options()) {
      if (opt->get_lnames().empty()) continue;
      const std::string& name = opt->get_lnames().front();
      if (name == "help" || name == "out") continue;
      file.set(name, option_value(*opt));
    }
    try {
      table[k].body(params[k], file);
    } catch (const Error& e) {
      return fail(err, e.what(), exit_code(e.kind()));
    } catch (const std::exception& e) {
      return fail(err, e.what(), kExitUsage);
    }
    file.sort_rows();
    const std::string text = format == "json" ? file.to_json() : file.to_csv();
    if (out_path.empty()) {
      out << text;
    } else {
      std::ofstream f(out_path, std::ios::binary);
      if (!f) return fail(err, "cannot open " + out_path, kExitUsage);
      f << text;
      if (!f) return fail(err, "write failed: " + out_path, kExitUsage);
    }
    return kExitOk;
  }
  return fail(err, "no subcommand", kExitUsage);
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace idq::cli
