#include "gausschain/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <thread>
#include <utility>

#include <json.hpp>

#include "gausschain/empirical.hpp"
#include "gausschain/errors.hpp"
#include "gausschain/rng.hpp"
#include "gausschain/sampling.hpp"

namespace gausschain {

namespace {

using nlohmann::ordered_json;

constexpr std::size_t kMaxDenseExperimentSize = 8192;

std::string fmt(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

struct MeanSpread {
  double mean = 0.0;
  double std_error = 0.0;
};

// Mean with its standard error from the sample standard deviation.
MeanSpread reduce(const std::vector<double>& values) {
  const double n = double(values.size());
  MeanSpread out;
  for (double v : values) out.mean += v;
  out.mean /= n;
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return out;
}

// Runs one job per replicate into its own slot: the reduction order is the
// replicate order, so results do not depend on the worker count.
void parallel_replicates(std::size_t replicates, int workers,
                         const std::function<void(std::size_t)>& job) {
  const int used = std::max(1, std::min<int>(workers, int(replicates)));
  if (used == 1) {
    for (std::size_t r = 0; r < replicates; ++r) job(r);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t slots = std::size_t(used);
  std::vector<std::exception_ptr> errors(slots);
  for (int w = 0; w < used; ++w) {
    const std::size_t begin = replicates * std::size_t(w) / std::size_t(used);
    const std::size_t end = replicates * std::size_t(w + 1) / std::size_t(used);
    pool.emplace_back([&, begin, end, w] {
      try {
        for (std::size_t r = begin; r < end; ++r) job(r);
      } catch (...) {
        errors[std::size_t(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
}

double fixed_policy_resolution(int depth) {
  return (depth == 1) ? std::nextafter(0.5, 0.0) : std::ldexp(1.0, -depth);
}

ContractionReport contraction_from_samples(
    const CovarianceMatrix& cov, DeltaMode mode, double l2_distance,
    double exact_mean, const std::function<double(double)>& difference,
    std::size_t replicates, std::uint64_t seed) {
  if (replicates < 2) {
    throw std::invalid_argument("verify_contraction: need at least 2 replicates");
  }
  const double n = double(cov.n());
  const double delta = delta_for_bounds(cov, mode);

  std::vector<double> squares(replicates);
  for (std::size_t r = 0; r < replicates; ++r) {
    RandomStream stream = RandomStream::keyed(seed, 0, 0, r);
    const std::vector<double> path = sample_path(cov, stream);
    double sum = 0.0;
    for (double x : path) sum += difference(x);
    const double centered = sum / n - exact_mean;
    squares[r] = centered * centered;
  }

  const MeanSpread stats = reduce(squares);
  ContractionReport report;
  report.mc_mean = stats.mean;
  report.mc_std_error = stats.std_error;
  report.l2_distance = l2_distance;
  report.bound = delta / (n * n) * l2_distance * l2_distance;
  report.ratio = (report.bound > 0.0) ? report.mc_mean / report.bound
                                      : (report.mc_mean == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  report.pass = report.mc_mean <= report.bound + 3.0 * report.mc_std_error;
  report.replicates = replicates;
  return report;
}

const ordered_json& field(const ordered_json& node, const std::string& path,
                          const char* key) {
  const auto it = node.find(key);
  if (it == node.end()) {
    throw std::invalid_argument(path + key + ": required field is missing");
  }
  return *it;
}

void reject_unknown_keys(const ordered_json& node, const std::string& path,
                         std::initializer_list<const char*> known) {
  for (const auto& item : node.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) {
          return item.key() == k;
        })) {
      throw std::invalid_argument(path + item.key() + ": unrecognized field");
    }
  }
}

double positive_real(const ordered_json& node, const std::string& where) {
  if (!node.is_number()) {
    throw std::invalid_argument(where + ": expected a number");
  }
  const double v = node.get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(where + ": must be positive and finite");
  }
  return v;
}

std::int64_t integer_field(const ordered_json& node, const std::string& where) {
  if (!node.is_number_integer() && !node.is_number_unsigned()) {
    throw std::invalid_argument(where + ": expected an integer");
  }
  return node.get<std::int64_t>();
}

const char* kind_name(CovarianceKind kind) {
  switch (kind) {
    case CovarianceKind::iid: return "iid";
    case CovarianceKind::ar1: return "ar1";
    case CovarianceKind::equicorrelated: return "equicorrelated";
    case CovarianceKind::power_decay: return "power_decay";
    case CovarianceKind::explicit_matrix: return "explicit";
  }
  return "unknown";
}

}  // namespace

void validate_config(const ExperimentConfig& config) {
  if (config.models.empty()) {
    throw std::invalid_argument("models: at least one covariance model is required");
  }
  for (std::size_t i = 0; i < config.models.size(); ++i) {
    const std::string where = "models[" + std::to_string(i) + "]";
    const CovarianceSpec& spec = config.models[i];
    if (spec.kind == CovarianceKind::explicit_matrix) {
      throw std::invalid_argument(
          where + ".kind: explicit matrices have a fixed size and cannot follow an n grid");
    }
    if (!(spec.s > 0.0) || !std::isfinite(spec.s)) {
      throw std::invalid_argument(where + ".scale: must be positive and finite");
    }
    if (spec.kind == CovarianceKind::ar1 && !(std::fabs(spec.parameter) < 1.0)) {
      throw std::invalid_argument(where + ".parameter: correlation must satisfy |rho| < 1");
    }
    if (spec.kind == CovarianceKind::equicorrelated &&
        (!(spec.parameter >= 0.0) || !(spec.parameter < 1.0))) {
      throw std::invalid_argument(where + ".parameter: correlation must lie in [0, 1)");
    }
    if (spec.kind == CovarianceKind::power_decay && !(spec.parameter > 0.0)) {
      throw std::invalid_argument(where + ".parameter: decay exponent must be positive");
    }
  }
  if (config.n_grid.empty()) {
    throw std::invalid_argument("n_grid: at least one sample size is required");
  }
  for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
    const std::string where = "n_grid[" + std::to_string(i) + "]";
    if (config.n_grid[i] < 1) {
      throw std::invalid_argument(where + ": sample sizes must be positive");
    }
    if (i > 0 && config.n_grid[i] <= config.n_grid[i - 1]) {
      throw std::invalid_argument(where + ": sample sizes must be strictly increasing");
    }
  }
  if (config.replicates < 2) {
    throw std::invalid_argument("replicates: at least 2 replicates are required");
  }
  for (std::size_t i = 0; i < config.lambda_grid.size(); ++i) {
    const std::string where = "lambda_grid[" + std::to_string(i) + "]";
    const double lambda = config.lambda_grid[i];
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw std::invalid_argument(where + ": thresholds must be positive and finite");
    }
    if (i > 0 && lambda <= config.lambda_grid[i - 1]) {
      throw std::invalid_argument(where + ": thresholds must be strictly increasing");
    }
  }
  if (config.bounds.depth_policy == DepthPolicy::fixed &&
      (config.bounds.fixed_depth < 1 || config.bounds.fixed_depth > kMaxNetDepth)) {
    throw std::invalid_argument("bounds.fixed_depth: must lie in [1, 30]");
  }
  if (!(config.bounds.rate_order >= 1.0) || !std::isfinite(config.bounds.rate_order)) {
    throw std::invalid_argument("bounds.p: rate order must be at least 1");
  }
  if (config.workers < 1 || config.workers > 256) {
    throw std::invalid_argument("workers: must lie in [1, 256]");
  }
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  ordered_json root;
  try {
    root = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& error) {
    throw std::invalid_argument(std::string("config: not valid JSON: ") + error.what());
  }
  if (!root.is_object()) {
    throw std::invalid_argument("config: top level must be a JSON object");
  }
  reject_unknown_keys(root, "", {"models", "scale", "n_grid", "replicates",
                                 "master_seed", "lambda_grid", "bounds", "workers"});

  ExperimentConfig config;
  const double scale =
      root.contains("scale") ? positive_real(root["scale"], "scale") : 1.0;

  const ordered_json& models = field(root, "", "models");
  if (!models.is_array() || models.empty()) {
    throw std::invalid_argument("models: expected a non-empty array");
  }
  for (std::size_t i = 0; i < models.size(); ++i) {
    const std::string where = "models[" + std::to_string(i) + "]";
    const ordered_json& entry = models[i];
    if (!entry.is_object()) {
      throw std::invalid_argument(where + ": expected an object with a kind");
    }
    reject_unknown_keys(entry, where + ".", {"kind", "parameter"});
    const ordered_json& kind = field(entry, where + ".", "kind");
    if (!kind.is_string()) {
      throw std::invalid_argument(where + ".kind: expected a string");
    }
    const std::string name = kind.get<std::string>();
    CovarianceSpec spec;
    spec.s = scale;
    if (name == "iid") {
      spec.kind = CovarianceKind::iid;
      if (entry.contains("parameter")) {
        throw std::invalid_argument(where + ".parameter: iid takes no parameter");
      }
    } else if (name == "ar1" || name == "equicorrelated" || name == "power_decay") {
      spec.kind = (name == "ar1") ? CovarianceKind::ar1
                  : (name == "equicorrelated") ? CovarianceKind::equicorrelated
                                               : CovarianceKind::power_decay;
      const ordered_json& parameter = field(entry, where + ".", "parameter");
      if (!parameter.is_number()) {
        throw std::invalid_argument(where + ".parameter: expected a number");
      }
      spec.parameter = parameter.get<double>();
    } else {
      throw std::invalid_argument(where + ".kind: unknown covariance kind '" + name +
                                  "' (expected iid, ar1, equicorrelated, or power_decay)");
    }
    config.models.push_back(std::move(spec));
  }

  const ordered_json& n_grid = field(root, "", "n_grid");
  if (!n_grid.is_array() || n_grid.empty()) {
    throw std::invalid_argument("n_grid: expected a non-empty array");
  }
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    const std::string where = "n_grid[" + std::to_string(i) + "]";
    const std::int64_t n = integer_field(n_grid[i], where);
    if (n < 1) throw std::invalid_argument(where + ": sample sizes must be positive");
    config.n_grid.push_back(std::size_t(n));
  }

  if (root.contains("replicates")) {
    const std::int64_t r = integer_field(root["replicates"], "replicates");
    if (r < 2) throw std::invalid_argument("replicates: at least 2 replicates are required");
    config.replicates = std::size_t(r);
  }
  if (root.contains("master_seed")) {
    const ordered_json& seed = root["master_seed"];
    if (!seed.is_number_integer() && !seed.is_number_unsigned()) {
      throw std::invalid_argument("master_seed: expected an integer");
    }
    if (seed.is_number_integer() && seed.get<std::int64_t>() < 0) {
      throw std::invalid_argument("master_seed: must be non-negative");
    }
    config.master_seed = seed.get<std::uint64_t>();
  }
  if (root.contains("lambda_grid")) {
    const ordered_json& lambdas = root["lambda_grid"];
    if (!lambdas.is_array()) {
      throw std::invalid_argument("lambda_grid: expected an array");
    }
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      config.lambda_grid.push_back(positive_real(
          lambdas[i], "lambda_grid[" + std::to_string(i) + "]"));
    }
  }
  if (root.contains("bounds")) {
    const ordered_json& bounds = root["bounds"];
    if (!bounds.is_object()) {
      throw std::invalid_argument("bounds: expected an object");
    }
    reject_unknown_keys(bounds, "bounds.",
                        {"depth_policy", "fixed_depth", "weights", "p", "delta_mode"});
    if (bounds.contains("depth_policy")) {
      const std::string policy = bounds["depth_policy"].is_string()
                                     ? bounds["depth_policy"].get<std::string>()
                                     : "";
      if (policy == "auto") {
        config.bounds.depth_policy = DepthPolicy::automatic;
      } else if (policy == "fixed") {
        config.bounds.depth_policy = DepthPolicy::fixed;
      } else {
        throw std::invalid_argument("bounds.depth_policy: expected \"auto\" or \"fixed\"");
      }
    }
    if (bounds.contains("fixed_depth")) {
      const std::int64_t depth = integer_field(bounds["fixed_depth"], "bounds.fixed_depth");
      if (depth < 1 || depth > kMaxNetDepth) {
        throw std::invalid_argument("bounds.fixed_depth: must lie in [1, 30]");
      }
      config.bounds.fixed_depth = int(depth);
    }
    if (bounds.contains("weights")) {
      const std::string policy = bounds["weights"].is_string()
                                     ? bounds["weights"].get<std::string>()
                                     : "";
      if (policy == "default") {
        config.bounds.weight_policy = WeightPolicy::dyadic;
      } else if (policy == "optimized") {
        config.bounds.weight_policy = WeightPolicy::optimized;
      } else {
        throw std::invalid_argument("bounds.weights: expected \"default\" or \"optimized\"");
      }
    }
    if (bounds.contains("p")) {
      config.bounds.rate_order = positive_real(bounds["p"], "bounds.p");
    }
    if (bounds.contains("delta_mode")) {
      const std::string mode = bounds["delta_mode"].is_string()
                                   ? bounds["delta_mode"].get<std::string>()
                                   : "";
      if (mode == "signed") {
        config.bounds.delta_mode = DeltaMode::signed_sum;
      } else if (mode == "absolute") {
        config.bounds.delta_mode = DeltaMode::absolute_sum;
      } else {
        throw std::invalid_argument("bounds.delta_mode: expected \"signed\" or \"absolute\"");
      }
    }
  }
  if (root.contains("workers")) {
    const std::int64_t workers = integer_field(root["workers"], "workers");
    if (workers < 1 || workers > 256) {
      throw std::invalid_argument("workers: must lie in [1, 256]");
    }
    config.workers = int(workers);
  }

  validate_config(config);
  return config;
}

std::string config_to_json(const ExperimentConfig& config) {
  ordered_json root;
  root["models"] = ordered_json::array();
  for (const CovarianceSpec& spec : config.models) {
    ordered_json entry;
    entry["kind"] = kind_name(spec.kind);
    if (spec.kind != CovarianceKind::iid) entry["parameter"] = spec.parameter;
    root["models"].push_back(std::move(entry));
  }
  root["scale"] = config.models.empty() ? 1.0 : config.models.front().s;
  root["n_grid"] = config.n_grid;
  root["replicates"] = config.replicates;
  root["master_seed"] = config.master_seed;
  root["lambda_grid"] = config.lambda_grid;
  root["bounds"]["depth_policy"] =
      config.bounds.depth_policy == DepthPolicy::automatic ? "auto" : "fixed";
  root["bounds"]["fixed_depth"] = config.bounds.fixed_depth;
  root["bounds"]["weights"] =
      config.bounds.weight_policy == WeightPolicy::dyadic ? "default" : "optimized";
  root["bounds"]["p"] = config.bounds.rate_order;
  root["bounds"]["delta_mode"] =
      config.bounds.delta_mode == DeltaMode::signed_sum ? "signed" : "absolute";
  root["workers"] = config.workers;
  return root.dump(2);
}

double delta_for_bounds(const CovarianceMatrix& cov, DeltaMode mode) {
  if (mode == DeltaMode::signed_sum && !cov.nonnegative_correlation) {
    throw std::invalid_argument(
        "signed correlation mass requires non-negative correlations; "
        "use the absolute delta mode for this model");
  }
  return correlation_mass(cov, mode);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  ExperimentResult result;
  result.config = config;

  for (std::size_t mi = 0; mi < config.models.size(); ++mi) {
    for (std::size_t ni = 0; ni < config.n_grid.size(); ++ni) {
      const std::size_t n = config.n_grid[ni];
      CovarianceSpec spec = config.models[mi];
      spec.n = n;
      if (spec.kind != CovarianceKind::iid && n > kMaxDenseExperimentSize) {
        throw ResourceError(spec.label() + " at n = " + std::to_string(n) +
                            ": dense experiments are capped at n = 8192; "
                            "reduce n or switch the model to iid");
      }

      const auto start = std::chrono::steady_clock::now();
      const CovarianceMatrix cov = build_covariance(spec);

      CellResult cell;
      cell.model_index = mi;
      cell.model = spec.label();
      cell.n = n;
      cell.delta_mass = delta_for_bounds(cov, config.bounds.delta_mode);

      std::vector<double> sups(config.replicates);
      parallel_replicates(config.replicates, config.workers, [&](std::size_t r) {
        RandomStream stream = RandomStream::keyed(config.master_seed, mi, ni, r);
        const std::vector<double> path = sample_path(cov, stream);
        sups[r] = sup_deviation(path, cov.s());
      });
      const MeanSpread stats = reduce(sups);
      cell.mean_sup = stats.mean;
      cell.std_error = stats.std_error;

      // Bound block: one net per cell, depth either fixed or matched to the
      // optimized resolution. The rate envelope needs sqrt(delta)/n < 1; at
      // or above that there is no decay regime and the envelope is omitted.
      const double ratio = std::sqrt(cell.delta_mass) / double(n);
      cell.envelope_value = std::numeric_limits<double>::quiet_NaN();
      cell.envelope_exponent = std::numeric_limits<double>::quiet_NaN();
      double delta_used = fixed_policy_resolution(1);
      if (ratio > 0.0 && ratio < 1.0) {
        const OptimizedRate rate =
            optimized_rate(cell.delta_mass, double(n), config.bounds.rate_order);
        cell.envelope_value = rate.envelope_value;
        cell.envelope_exponent = rate.exponent;
        delta_used = rate.delta_star;
      }
      if (config.bounds.depth_policy == DepthPolicy::fixed) {
        delta_used = fixed_policy_resolution(config.bounds.fixed_depth);
      }
      cell.delta_star = delta_used;

      const int depth = resolution_depth(delta_used);
      const std::vector<double> weights =
          config.bounds.weight_policy == WeightPolicy::optimized
              ? optimize_weights(make_quantile_net(depth, cov.s())).weights
              : default_weights(depth);
      const RefinedBound refined =
          refined_size_bound(cell.delta_mass, double(n), delta_used, weights);
      cell.refined_bound_value = refined.value;
      cell.net_depth = refined.depth;
      cell.c1 = refined.constants.c1;
      cell.c2 = refined.constants.c2;
      cell.size_bound_value = size_bound(refined.constants, cell.delta_mass, double(n));

      for (double lambda : config.lambda_grid) {
        TailPoint point;
        point.lambda = lambda;
        std::size_t hits = 0;
        for (double sup : sups) hits += (sup >= lambda) ? 1 : 0;
        point.empirical = double(hits) / double(config.replicates);
        point.std_error = std::sqrt(point.empirical * (1.0 - point.empirical) /
                                    double(config.replicates));
        point.bound = tail_bound(refined.constants, cell.delta_mass, double(n), lambda);
        cell.tails.push_back(point);
      }

      cell.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

ExperimentResult estimate_size(ExperimentConfig config) {
  config.lambda_grid.clear();
  return run_experiment(config);
}

ExperimentResult empirical_tail(const ExperimentConfig& config) {
  if (config.lambda_grid.empty()) {
    throw std::invalid_argument("lambda_grid: tail estimation needs at least one threshold");
  }
  return run_experiment(config);
}

ContractionReport verify_contraction(const CovarianceMatrix& cov,
                                     const HermiteCoefficients& f,
                                     const HermiteCoefficients& g,
                                     std::size_t replicates, std::uint64_t seed,
                                     DeltaMode mode) {
  if (f.scale != g.scale || f.scale != cov.s()) {
    throw std::invalid_argument(
        "verify_contraction: series scales must match the model scale");
  }
  HermiteCoefficients diff;
  diff.scale = f.scale;
  diff.values.resize(std::max(f.values.size(), g.values.size()), 0.0);
  for (std::size_t k = 0; k < diff.values.size(); ++k) {
    const double fk = (k < f.values.size()) ? f.values[k] : 0.0;
    const double gk = (k < g.values.size()) ? g.values[k] : 0.0;
    diff.values[k] = fk - gk;
  }
  const double mean = diff.values.empty() ? 0.0 : diff.values[0];
  return contraction_from_samples(
      cov, mode, std::sqrt(diff.squared_norm()), mean,
      [&diff](double t) { return hermite_series_value(diff, t); }, replicates,
      seed);
}

ContractionReport verify_contraction(const CovarianceMatrix& cov,
                                     const StepFunction& f, const StepFunction& g,
                                     std::size_t replicates, std::uint64_t seed,
                                     DeltaMode mode) {
  if (f.scale != cov.s() || g.scale != cov.s()) {
    throw std::invalid_argument(
        "verify_contraction: step scales must match the model scale");
  }
  const double distance = step_l2_distance(f, g);
  const double mean = step_mean_gamma(f) - step_mean_gamma(g);
  return contraction_from_samples(
      cov, mode, distance, mean,
      [&f, &g](double t) { return step_value(f, t) - step_value(g, t); },
      replicates, seed);
}

ContractionReport verify_contraction_projected(
    const CovarianceMatrix& cov, const std::function<double(double)>& f,
    const std::function<double(double)>& g, int max_degree,
    double residual_tolerance, std::size_t replicates, std::uint64_t seed,
    DeltaMode mode) {
  if (max_degree < 0 || unsigned(max_degree) > kMaxHermiteDegree) {
    throw std::invalid_argument("verify_contraction: projection degree out of range");
  }
  if (!(residual_tolerance >= 0.0)) {
    throw std::invalid_argument("verify_contraction: residual tolerance must be >= 0");
  }
  const QuadratureRule rule = default_rule_for(std::size_t(max_degree) + 1);
  const double s = cov.s();

  const auto project_checked = [&](const std::function<double(double)>& h,
                                   const char* name) {
    double energy = 0.0;
    for (std::size_t i = 0; i < rule.order(); ++i) {
      const double value = h(s * rule.nodes[i]);
      energy += rule.weights[i] * value * value;
    }
    HermiteCoefficients coeffs = project(h, unsigned(max_degree), s, rule);
    const double residual = energy - coeffs.squared_norm();
    if (residual > residual_tolerance * std::max(1.0, energy)) {
      throw NumericalError(
          std::string("verify_contraction: projection residual for ") + name +
          " is " + fmt(residual) + ", above tolerance; the truncated series "
          "does not represent the function");
    }
    return coeffs;
  };

  const HermiteCoefficients cf = project_checked(f, "f");
  const HermiteCoefficients cg = project_checked(g, "g");
  return verify_contraction(cov, cf, cg, replicates, seed, mode);
}

RateFit fit_loglog(const std::vector<double>& n_values,
                   const std::vector<double>& y_values) {
  if (n_values.size() != y_values.size()) {
    throw std::invalid_argument("rate fit: mismatched point counts");
  }
  if (n_values.size() < 4) {
    throw std::invalid_argument("rate fit: need at least 4 points");
  }
  std::vector<double> xs(n_values.size());
  std::vector<double> ys(n_values.size());
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (!(n_values[i] > 0.0) || !(y_values[i] > 0.0) ||
        !std::isfinite(n_values[i]) || !std::isfinite(y_values[i])) {
      throw std::invalid_argument("rate fit: points must be positive and finite");
    }
    xs[i] = std::log(n_values[i]);
    ys[i] = std::log(y_values[i]);
  }
  const double count = double(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= count;
  my /= count;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) {
    throw std::invalid_argument("rate fit: degenerate grid with a single n value");
  }
  RateFit fit;
  fit.points = xs.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy == 0.0) {
    fit.r_squared = 1.0;
  } else {
    double residual = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double predicted = fit.intercept + fit.slope * xs[i];
      residual += (ys[i] - predicted) * (ys[i] - predicted);
    }
    fit.r_squared = 1.0 - residual / syy;
  }
  return fit;
}

std::vector<ModelRateFits> fit_rates(const ExperimentResult& result) {
  std::vector<ModelRateFits> fits;
  for (std::size_t mi = 0; mi < result.config.models.size(); ++mi) {
    std::vector<double> ns;
    std::vector<double> means;
    std::vector<double> envelopes;
    std::string label;
    for (const CellResult& cell : result.cells) {
      if (cell.model_index != mi) continue;
      label = cell.model;
      if (cell.mean_sup > 0.0 && std::isfinite(cell.envelope_value) &&
          cell.envelope_value > 0.0) {
        ns.push_back(double(cell.n));
        means.push_back(cell.mean_sup);
        envelopes.push_back(cell.envelope_value);
      }
    }
    if (ns.size() < 4) continue;
    ModelRateFits entry;
    entry.model_index = mi;
    entry.model = label;
    entry.mc = fit_loglog(ns, means);
    entry.envelope = fit_loglog(ns, envelopes);
    fits.push_back(std::move(entry));
  }
  return fits;
}

std::string result_to_csv(const ExperimentResult& result) {
  std::string out =
      "model,n,delta_n,mean_sup,stderr,lambda,emp_tail,tail_bound,size_bound,"
      "refined_bound,seed\n";
  const std::string seed = std::to_string(result.config.master_seed);
  for (const CellResult& cell : result.cells) {
    const std::string prefix = cell.model + "," + std::to_string(cell.n) + "," +
                               fmt(cell.delta_mass) + "," + fmt(cell.mean_sup) +
                               "," + fmt(cell.std_error) + ",";
    const std::string suffix = "," + fmt(cell.size_bound_value) + "," +
                               fmt(cell.refined_bound_value) + "," + seed + "\n";
    if (cell.tails.empty()) {
      out += prefix + ",," + suffix;
      continue;
    }
    for (const TailPoint& point : cell.tails) {
      out += prefix + fmt(point.lambda) + "," + fmt(point.empirical) + "," +
             fmt(point.bound) + suffix;
    }
  }
  return out;
}

std::string result_to_json(const ExperimentResult& result) {
  ordered_json root;
  root["config"] = ordered_json::parse(config_to_json(result.config));
  root["cells"] = ordered_json::array();
  for (const CellResult& cell : result.cells) {
    ordered_json node;
    node["model"] = cell.model;
    node["model_index"] = cell.model_index;
    node["n"] = cell.n;
    node["delta_n"] = cell.delta_mass;
    node["mean_sup"] = cell.mean_sup;
    node["stderr"] = cell.std_error;
    node["size_bound"] = cell.size_bound_value;
    node["refined_bound"] = cell.refined_bound_value;
    node["delta_star"] = cell.delta_star;
    node["net_depth"] = cell.net_depth;
    node["c1"] = cell.c1;
    node["c2"] = cell.c2;
    if (std::isfinite(cell.envelope_value)) {
      node["envelope_bound"] = cell.envelope_value;
      node["envelope_exponent"] = cell.envelope_exponent;
    }
    node["tails"] = ordered_json::array();
    for (const TailPoint& point : cell.tails) {
      ordered_json tail;
      tail["lambda"] = point.lambda;
      tail["empirical"] = point.empirical;
      tail["stderr"] = point.std_error;
      tail["bound"] = point.bound;
      node["tails"].push_back(std::move(tail));
    }
    node["wall_ms"] = cell.wall_ms;
    root["cells"].push_back(std::move(node));
  }
  return root.dump(2);
}

std::string plot_data(const ExperimentResult& result, std::size_t model_index) {
  if (model_index >= result.config.models.size()) {
    throw std::invalid_argument("plot_data: model index out of range");
  }
  std::string out = "# log_n log_mean_sup log_envelope_bound\n";
  for (const CellResult& cell : result.cells) {
    if (cell.model_index != model_index) continue;
    if (!(cell.mean_sup > 0.0) || !std::isfinite(cell.envelope_value) ||
        !(cell.envelope_value > 0.0)) {
      continue;
    }
    out += fmt(std::log(double(cell.n))) + " " + fmt(std::log(cell.mean_sup)) +
           " " + fmt(std::log(cell.envelope_value)) + "\n";
  }
  return out;
}

std::string summary_json(const ExperimentResult& result) {
  ordered_json root;
  double total_ms = 0.0;
  for (const CellResult& cell : result.cells) total_ms += cell.wall_ms;
  root["models"] = ordered_json::array();
  for (const ModelRateFits& fits : fit_rates(result)) {
    ordered_json node;
    node["model"] = fits.model;
    node["mc_fit"] = {{"slope", fits.mc.slope},
                      {"intercept", fits.mc.intercept},
                      {"r_squared", fits.mc.r_squared},
                      {"points", fits.mc.points}};
    node["envelope_fit"] = {{"slope", fits.envelope.slope},
                            {"intercept", fits.envelope.intercept},
                            {"r_squared", fits.envelope.r_squared},
                            {"points", fits.envelope.points}};
    root["models"].push_back(std::move(node));
  }
  root["total_wall_ms"] = total_ms;
  return root.dump(2);
}

}  // namespace gausschain
