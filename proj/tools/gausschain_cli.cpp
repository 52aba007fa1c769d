#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <gausschain/chaining.hpp>
#include <gausschain/covariance.hpp>
#include <gausschain/errors.hpp>
#include <gausschain/experiment.hpp>
#include <gausschain/hermite.hpp>
#include <gausschain/normal.hpp>

namespace {

using gausschain::BoundOptions;
using gausschain::ChainingConstants;
using gausschain::CovarianceKind;
using gausschain::CovarianceMatrix;
using gausschain::CovarianceSpec;
using gausschain::DeltaMode;
using gausschain::ExperimentConfig;
using gausschain::ExperimentResult;
using gausschain::NumericalError;
using gausschain::QuadratureRule;
using gausschain::QuantileNet;
using gausschain::ResourceError;
using ordered_json = nlohmann::ordered_json;

// Exit codes shared by every subcommand.
constexpr int kPass = 0;
constexpr int kCheckFailure = 1;
constexpr int kUsageError = 2;
constexpr int kResourceRefusal = 3;

std::string fmt(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::invalid_argument("cannot open " + path.string() + " for writing");
  }
  out << content;
  if (!out) {
    throw std::invalid_argument("failed while writing " + path.string());
  }
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw std::invalid_argument("cannot create output directory " + dir + ": " +
                                ec.message());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::invalid_argument("cannot read " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

const char* kind_slug(CovarianceKind kind) {
  switch (kind) {
    case CovarianceKind::iid: return "iid";
    case CovarianceKind::ar1: return "ar1";
    case CovarianceKind::equicorrelated: return "equicorrelated";
    case CovarianceKind::power_decay: return "power_decay";
    case CovarianceKind::explicit_matrix: return "explicit";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// hermite-check

struct CheckFamily {
  std::string name;
  std::size_t count = 0;
  double worst = 0.0;
  std::string worst_at;
  ordered_json worst_at_json;
  bool pass = false;
};

int cmd_hermite_check(unsigned max_degree, double tolerance,
                      const std::string& out_dir, int verbosity) {
  ensure_directory(out_dir);
  std::vector<CheckFamily> families;

  const QuadratureRule rule =
      gausschain::default_rule_for(2 * std::size_t(max_degree) + 1);

  {
    CheckFamily family;
    family.name = "orthonormality";
    for (double s : {0.5, 1.0, 3.0}) {
      for (unsigned k = 0; k <= max_degree; ++k) {
        for (unsigned l = 0; l <= max_degree; ++l) {
          const double ip = gausschain::inner_product_gamma(k, l, s, rule);
          const double target = (k == l) ? 1.0 : 0.0;
          const double residual = std::fabs(ip - target);
          ++family.count;
          if (residual >= family.worst) {
            family.worst = residual;
            std::ostringstream at;
            at << "(k = " << k << ", l = " << l << ", s = " << s << ")";
            family.worst_at = at.str();
            family.worst_at_json = {{"k", k}, {"l", l}, {"s", s}};
          }
        }
      }
    }
    family.pass = family.worst < tolerance;
    families.push_back(std::move(family));
  }

  {
    CheckFamily family;
    family.name = "cross_moment";
    const unsigned top = max_degree < 5 ? max_degree : 5;
    for (double rho : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
      for (unsigned k = 0; k <= top; ++k) {
        for (unsigned l = 0; l <= top; ++l) {
          const double got = gausschain::cross_moment_quadrature(k, l, rho, rule);
          const double want = gausschain::cross_moment(k, l, rho);
          const double residual = std::fabs(got - want);
          ++family.count;
          if (residual >= family.worst) {
            family.worst = residual;
            std::ostringstream at;
            at << "(k = " << k << ", l = " << l << ", rho = " << rho << ")";
            family.worst_at = at.str();
            family.worst_at_json = {{"k", k}, {"l", l}, {"rho", rho}};
          }
        }
      }
    }
    family.pass = family.worst < tolerance;
    families.push_back(std::move(family));
  }

  if (max_degree >= 1) {
    CheckFamily family;
    family.name = "generating_function";
    // The series is summed to degree 60 regardless of max_degree: the
    // identity being checked is exp(lambda t - lambda^2/2) = sum, and 60
    // terms push the truncation error below double resolution on this grid.
    const unsigned terms = 60;
    for (double lambda : {-1.5, -0.5, 0.25, 1.0, 2.0}) {
      for (double t : {-3.0, -1.0, 0.0, 0.5, 2.5}) {
        const double direct = std::exp(lambda * t - 0.5 * lambda * lambda);
        const double series =
            gausschain::generating_function_partial(lambda, t, terms);
        const double residual = std::fabs(direct - series);
        ++family.count;
        if (residual >= family.worst) {
          family.worst = residual;
          std::ostringstream at;
          at << "(lambda = " << lambda << ", t = " << t << ")";
          family.worst_at = at.str();
          family.worst_at_json = {{"lambda", lambda}, {"t", t}};
        }
      }
    }
    family.pass = family.worst < tolerance;
    families.push_back(std::move(family));
  }

  bool all_pass = true;
  ordered_json report;
  report["max_degree"] = max_degree;
  report["tolerance"] = tolerance;
  report["checks"] = ordered_json::array();
  for (const CheckFamily& family : families) {
    all_pass = all_pass && family.pass;
    ordered_json node;
    node["name"] = family.name;
    node["count"] = family.count;
    node["worst_residual"] = family.worst;
    node["worst_at"] = family.worst_at_json;
    node["pass"] = family.pass;
    report["checks"].push_back(std::move(node));
    std::cout << family.name << ": worst residual " << fmt(family.worst)
              << " at " << family.worst_at << " over " << family.count
              << " checks [" << (family.pass ? "pass" : "FAIL") << "]\n";
  }
  report["pass"] = all_pass;

  const std::filesystem::path report_path =
      std::filesystem::path(out_dir) / "hermite_check.json";
  write_file(report_path, report.dump(2) + "\n");
  if (verbosity > 0) {
    std::cerr << "report written to " << report_path.string() << "\n";
  }
  std::cout << "hermite-check: " << (all_pass ? "PASS" : "FAIL")
            << " (tolerance " << fmt(tolerance) << ")\n";
  return all_pass ? kPass : kCheckFailure;
}

// ---------------------------------------------------------------------------
// bound

struct BoundArgs {
  std::string model = "iid";
  double parameter = 0.0;
  double scale = 1.0;
  std::string matrix;
  std::size_t n = 0;
  int depth = 6;
  std::string weights = "default";
  std::vector<double> lambdas;
  double p = 6.0;
  std::string delta_mode = "signed";
  double delta_override = -1.0;
  bool delta_overridden = false;
};

CovarianceSpec spec_from_args(const BoundArgs& args) {
  if (args.model == "iid") return gausschain::iid_spec(args.n, args.scale);
  if (args.model == "ar1") return gausschain::ar1_spec(args.n, args.parameter, args.scale);
  if (args.model == "equicorrelated") {
    return gausschain::equicorrelated_spec(args.n, args.parameter, args.scale);
  }
  if (args.model == "power_decay") {
    return gausschain::power_decay_spec(args.n, args.parameter, args.scale);
  }
  if (args.model == "explicit") {
    if (args.matrix.empty()) {
      throw std::invalid_argument("--model explicit requires --matrix <csv>");
    }
    return gausschain::explicit_spec(args.matrix);
  }
  throw std::invalid_argument("unknown model '" + args.model +
                              "'; expected iid, ar1, equicorrelated, power_decay "
                              "or explicit");
}

// Resolution matched to a fixed net depth: the delta whose resolution_depth
// is exactly `depth`. Depth 1 corresponds to the open endpoint at 1/2.
double depth_matched_resolution(int depth) {
  if (depth <= 1) return std::nextafter(0.5, 0.0);
  return std::ldexp(1.0, -depth);
}

int cmd_bound(const BoundArgs& args) {
  const CovarianceSpec spec = spec_from_args(args);
  const CovarianceMatrix cov = gausschain::build_covariance(spec);
  const DeltaMode mode = args.delta_mode == "absolute" ? DeltaMode::absolute_sum
                                                       : DeltaMode::signed_sum;
  if (args.delta_mode != "signed" && args.delta_mode != "absolute") {
    throw std::invalid_argument("--delta-mode must be 'signed' or 'absolute'");
  }

  double delta = 0.0;
  if (args.delta_overridden) {
    if (!(args.delta_override >= 0.0) || !std::isfinite(args.delta_override)) {
      throw std::invalid_argument("--delta-n must be a finite value >= 0");
    }
    delta = args.delta_override;
  } else {
    delta = gausschain::delta_for_bounds(cov, mode);
  }

  const QuantileNet net = gausschain::make_quantile_net(args.depth, cov.s());
  std::vector<double> weights;
  std::string weight_note;
  if (args.weights == "optimized") {
    const gausschain::WeightOptimization opt = gausschain::optimize_weights(net);
    weights = opt.weights;
    std::ostringstream note;
    note << "optimized (objective " << fmt(opt.objective) << ", "
         << (opt.converged ? "converged" : "iteration cap hit") << " after "
         << opt.iterations << " sweeps)";
    weight_note = note.str();
  } else if (args.weights == "default") {
    weights = gausschain::default_weights(args.depth);
    weight_note = "default dyadic";
  } else {
    throw std::invalid_argument("--weights must be 'default' or 'optimized'");
  }
  const ChainingConstants constants = gausschain::chaining_constants(net, weights);

  std::cout << "model = " << spec.label() << ", n = " << cov.n()
            << ", s = " << fmt(cov.s()) << "\n";
  std::cout << "delta_n(" << args.delta_mode << ") = " << fmt(delta)
            << (args.delta_overridden ? " (override)" : "") << "\n";
  std::cout << "net depth = " << net.depth << ", weights = " << weight_note << "\n";
  std::cout << "level  size  accuracy                weight                pairs\n";
  for (int k = 0; k <= net.depth; ++k) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-6d %-5lld %-23.17g %-21.17g %lld\n", k,
                  (long long)net.level_sizes[std::size_t(k)],
                  net.level_accuracies[std::size_t(k)], weights[std::size_t(k)],
                  (long long)net.level_pair_counts[std::size_t(k)]);
    std::cout << line;
  }
  std::cout << "C1 = " << fmt(constants.c1) << "\n";
  std::cout << "C2 = " << fmt(constants.c2) << "\n";

  for (double lambda : args.lambdas) {
    const double tail = gausschain::tail_bound(constants, delta, double(cov.n()), lambda);
    std::cout << "tail(lambda = " << fmt(lambda) << ") = " << fmt(tail) << "\n";
  }

  const double size = gausschain::size_bound(constants, delta, double(cov.n()));
  std::cout << "size_bound = " << fmt(size) << "\n";

  const double matched = depth_matched_resolution(args.depth);
  const gausschain::RefinedBound refined =
      gausschain::refined_size_bound(delta, double(cov.n()), matched, weights);
  std::cout << "refined_size_bound(delta = " << fmt(matched)
            << ") = " << fmt(refined.value) << " [net depth " << refined.depth
            << ", additive " << fmt(refined.additive) << "]\n";

  const double ratio = std::sqrt(delta) / double(cov.n());
  if (ratio > 0.0 && ratio < 1.0) {
    const gausschain::OptimizedRate rate = gausschain::optimized_rate(
        delta, double(cov.n()), args.p, args.weights == "optimized");
    std::cout << "rate(p = " << fmt(args.p) << "): x_star = " << fmt(rate.x_star)
              << ", delta_star = " << fmt(rate.delta_star)
              << ", refined = " << fmt(rate.refined_value)
              << ", exponent = " << fmt(rate.exponent)
              << ", envelope = " << fmt(rate.envelope_value) << "\n";
  } else {
    std::cout << "rate(p = " << fmt(args.p)
              << "): not applicable (sqrt(delta_n)/n = " << fmt(ratio)
              << " is outside (0, 1))\n";
  }
  return kPass;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 bool seed_set, std::uint64_t seed, int workers, int verbosity) {
  const std::string config_text = read_file(config_path);
  ExperimentConfig config = gausschain::parse_experiment_config(config_text);
  if (seed_set) config.master_seed = seed;
  if (workers > 0) config.workers = workers;
  gausschain::validate_config(config);

  ensure_directory(out_dir);
  if (verbosity > 0) {
    std::cerr << "config: " << config.models.size() << " models, "
              << config.n_grid.size() << " sizes, " << config.replicates
              << " replicates, seed " << config.master_seed << ", "
              << config.workers << " workers\n";
  }

  const ExperimentResult result = gausschain::run_experiment(config);
  if (verbosity > 0) {
    std::cerr << "experiment finished with " << result.cells.size() << " cells\n";
  }

  // Everything is rendered before the first byte is written, so a failure in
  // any stage leaves no partial artifacts behind.
  const std::string csv = gausschain::result_to_csv(result);
  const std::string json = gausschain::result_to_json(result);
  const std::string summary = gausschain::summary_json(result);
  std::vector<std::pair<std::string, std::string>> plots;
  for (std::size_t mi = 0; mi < config.models.size(); ++mi) {
    std::ostringstream name;
    name << "plot_" << mi << "_" << kind_slug(config.models[mi].kind) << ".dat";
    plots.emplace_back(name.str(), gausschain::plot_data(result, mi));
  }

  const std::filesystem::path base(out_dir);
  write_file(base / "results.csv", csv);
  write_file(base / "results.json", json);
  write_file(base / "summary.json", summary);
  for (const auto& [name, content] : plots) {
    write_file(base / name, content);
  }

  std::cout << "wrote " << (base / "results.csv").string() << "\n";
  std::cout << "wrote " << (base / "results.json").string() << "\n";
  std::cout << "wrote " << (base / "summary.json").string() << "\n";
  for (const auto& [name, content] : plots) {
    std::cout << "wrote " << (base / name).string() << "\n";
  }
  for (const gausschain::ModelRateFits& fits : gausschain::fit_rates(result)) {
    std::cout << fits.model << ": mc slope = " << fmt(fits.mc.slope)
              << " (r^2 = " << fmt(fits.mc.r_squared)
              << "), envelope slope = " << fmt(fits.envelope.slope) << "\n";
  }
  return kPass;
}

// ---------------------------------------------------------------------------
// rate-fit

int cmd_rate_fit(const std::string& results_path, const std::string& out_dir) {
  const std::string text = read_file(results_path);
  ordered_json root;
  try {
    root = ordered_json::parse(text);
  } catch (const ordered_json::parse_error&) {
    throw std::invalid_argument(results_path + ": not valid JSON");
  }
  if (!root.contains("cells") || !root["cells"].is_array()) {
    throw std::invalid_argument(results_path + ": missing 'cells' array");
  }

  struct Series {
    std::string model;
    std::vector<double> n;
    std::vector<double> mean;
    std::vector<double> envelope;
  };
  std::map<std::int64_t, Series> by_model;
  for (const auto& cell : root["cells"]) {
    if (!cell.contains("model_index") || !cell.contains("n") ||
        !cell.contains("mean_sup")) {
      throw std::invalid_argument(results_path + ": cell missing required fields");
    }
    const std::int64_t index = cell["model_index"].get<std::int64_t>();
    Series& series = by_model[index];
    if (cell.contains("model")) series.model = cell["model"].get<std::string>();
    const double n = cell["n"].get<double>();
    const double mean = cell["mean_sup"].get<double>();
    if (!(n > 0.0) || !(mean > 0.0) || !cell.contains("envelope_bound")) continue;
    const double envelope = cell["envelope_bound"].get<double>();
    if (!(envelope > 0.0)) continue;
    series.n.push_back(n);
    series.mean.push_back(mean);
    series.envelope.push_back(envelope);
  }

  ordered_json out;
  out["source"] = results_path;
  out["models"] = ordered_json::array();
  for (const auto& [index, series] : by_model) {
    ordered_json node;
    node["model_index"] = index;
    node["model"] = series.model;
    if (series.n.size() < 4) {
      node["skipped"] = "fewer than 4 usable points";
      std::cout << series.model << ": skipped (" << series.n.size()
                << " usable points, need 4)\n";
      out["models"].push_back(std::move(node));
      continue;
    }
    const gausschain::RateFit mc = gausschain::fit_loglog(series.n, series.mean);
    const gausschain::RateFit envelope =
        gausschain::fit_loglog(series.n, series.envelope);
    node["mc_fit"] = {{"slope", mc.slope},
                      {"intercept", mc.intercept},
                      {"r_squared", mc.r_squared},
                      {"points", mc.points}};
    node["envelope_fit"] = {{"slope", envelope.slope},
                            {"intercept", envelope.intercept},
                            {"r_squared", envelope.r_squared},
                            {"points", envelope.points}};
    std::cout << series.model << ": mc slope = " << fmt(mc.slope)
              << " (r^2 = " << fmt(mc.r_squared)
              << "), envelope slope = " << fmt(envelope.slope) << "\n";
    out["models"].push_back(std::move(node));
  }

  ensure_directory(out_dir);
  const std::filesystem::path path =
      std::filesystem::path(out_dir) / "rate_fits.json";
  write_file(path, out.dump(2) + "\n");
  std::cout << "wrote " << path.string() << "\n";
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "gausschain: empirical process bounds for dependent Gaussian sequences.\n"
      "Exit codes: 0 all checks passed / artifacts written, 1 check failure,\n"
      "2 usage or config error, 3 resource refusal."};
  app.require_subcommand(1);

  unsigned max_degree = 20;
  double tolerance = 1e-8;
  std::string hc_out = ".";
  int hc_verbosity = 0;
  CLI::App* hermite = app.add_subcommand(
      "hermite-check",
      "Run the orthonormality, cross-moment and generating-function identity "
      "suite and write a JSON report");
  hermite->add_option("--max-degree", max_degree,
                      "Highest polynomial degree exercised (cap 200)")
      ->capture_default_str()
      ->check(CLI::Range(0u, gausschain::kMaxHermiteDegree));
  hermite->add_option("--tolerance", tolerance,
                      "Residual threshold every identity must beat (strict)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  hermite->add_option("--out", hc_out, "Directory for hermite_check.json")
      ->capture_default_str();
  hermite->add_flag("-v,--verbose", hc_verbosity, "Progress detail on stderr");

  BoundArgs bound_args;
  CLI::App* bound = app.add_subcommand(
      "bound",
      "Print the correlation mass, net summary, chaining constants, tail and "
      "size bounds for one model");
  bound->add_option("--model", bound_args.model,
                    "iid, ar1, equicorrelated, power_decay or explicit")
      ->capture_default_str();
  bound->add_option("--param", bound_args.parameter,
                    "Correlation rho (ar1/equicorrelated) or decay alpha "
                    "(power_decay)")
      ->capture_default_str();
  bound->add_option("--scale", bound_args.scale, "Marginal standard deviation s")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  bound->add_option("--matrix", bound_args.matrix,
                    "CSV covariance file (explicit model only)");
  bound->add_option("--n", bound_args.n, "Sequence length")
      ->required()
      ->check(CLI::PositiveNumber);
  bound->add_option("--depth", bound_args.depth, "Quantile net depth m")
      ->capture_default_str()
      ->check(CLI::Range(1, gausschain::kMaxNetDepth));
  bound->add_option("--weights", bound_args.weights,
                    "Chain weights: 'default' (dyadic) or 'optimized'")
      ->capture_default_str();
  bound->add_option("--lambda", bound_args.lambdas,
                    "Tail thresholds (repeatable)")
      ->expected(-1);
  bound->add_option("--p", bound_args.p,
                    "Polynomial order for the optimized rate (>= 1)")
      ->capture_default_str()
      ->check(CLI::Range(1.0, 1e6));
  bound->add_option("--delta-mode", bound_args.delta_mode,
                    "Correlation mass: 'signed' or 'absolute'")
      ->capture_default_str();
  bound
      ->add_option("--delta-n", bound_args.delta_override,
                   "Override the correlation mass (diagnostics; bypasses the "
                   "model's own value)")
      ->check(CLI::NonNegativeNumber);

  std::string sim_config;
  std::string sim_out;
  std::uint64_t sim_seed = 0;
  int sim_workers = 0;
  int sim_verbosity = 0;
  CLI::App* simulate = app.add_subcommand(
      "simulate",
      "Run the experiment described by a JSON config and write "
      "results.csv/results.json/summary.json plus per-model plot data");
  simulate->add_option("--config", sim_config, "Experiment config JSON file")
      ->required();
  simulate->add_option("--out", sim_out, "Output directory")->required();
  simulate->add_option("--seed", sim_seed,
                       "Master seed override (defaults to the config value)");
  simulate
      ->add_option("--workers", sim_workers,
                   "Worker-thread override; results are byte-identical for any "
                   "value")
      ->check(CLI::Range(1, 256));
  simulate->add_flag("-v,--verbose", sim_verbosity, "Progress detail on stderr");

  std::string fit_results;
  std::string fit_out = ".";
  CLI::App* rate_fit = app.add_subcommand(
      "rate-fit",
      "Fit log-log convergence slopes from an existing results.json");
  rate_fit->add_option("--results", fit_results, "results.json from simulate")
      ->required();
  rate_fit->add_option("--out", fit_out, "Directory for rate_fits.json")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (hermite->parsed()) {
      return cmd_hermite_check(max_degree, tolerance, hc_out, hc_verbosity);
    }
    if (bound->parsed()) {
      bound_args.delta_overridden = bound->count("--delta-n") > 0;
      return cmd_bound(bound_args);
    }
    if (simulate->parsed()) {
      return cmd_simulate(sim_config, sim_out, simulate->count("--seed") > 0,
                          sim_seed, sim_workers, sim_verbosity);
    }
    if (rate_fit->parsed()) {
      return cmd_rate_fit(fit_results, fit_out);
    }
  } catch (const ResourceError& e) {
    std::cerr << "resource refusal: " << e.what() << "\n";
    return kResourceRefusal;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kCheckFailure;
  }
  return kUsageError;
}
