#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gausschain/chaining.hpp"
#include "gausschain/covariance.hpp"
#include "gausschain/hermite.hpp"
#include "gausschain/step_function.hpp"

namespace gausschain {

enum class DepthPolicy { automatic, fixed };
enum class WeightPolicy { dyadic, optimized };

struct BoundOptions {
  DepthPolicy depth_policy = DepthPolicy::automatic;
  int fixed_depth = 6;
  WeightPolicy weight_policy = WeightPolicy::dyadic;
  double rate_order = 6.0;
  DeltaMode delta_mode = DeltaMode::signed_sum;
};

struct ExperimentConfig {
  std::vector<CovarianceSpec> models;  // n fields ignored; n comes from n_grid
  std::vector<std::size_t> n_grid;     // strictly increasing
  std::size_t replicates = 500;
  std::uint64_t master_seed = 1;
  std::vector<double> lambda_grid;
  BoundOptions bounds;
  int workers = 1;
};

void validate_config(const ExperimentConfig& config);

// Parses the JSON experiment description; validation failures name the
// offending field by path before any sampling starts.
ExperimentConfig parse_experiment_config(const std::string& json_text);
std::string config_to_json(const ExperimentConfig& config);

struct TailPoint {
  double lambda = 0.0;
  double empirical = 0.0;  // fraction of replicates with sup >= lambda
  double std_error = 0.0;  // binomial
  double bound = 0.0;
};

struct CellResult {
  std::size_t model_index = 0;
  std::string model;
  std::size_t n = 0;
  double delta_mass = 0.0;
  double mean_sup = 0.0;
  double std_error = 0.0;  // sample sd across replicates / sqrt(R)
  std::vector<TailPoint> tails;
  double size_bound_value = 0.0;
  double refined_bound_value = 0.0;
  double delta_star = 0.0;
  int net_depth = 0;
  double c1 = 0.0;
  double c2 = 0.0;
  double envelope_value = 0.0;
  double envelope_exponent = 0.0;
  double wall_ms = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<CellResult> cells;  // ordered by (model index, n index)
};

// Shared engine: per (model, n) draws replicates on keyed substreams, reduces
// them in replicate order, and attaches every bound. Deterministic for a
// given master seed under any worker count.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Size-only and tail-focused views of the same engine.
ExperimentResult estimate_size(ExperimentConfig config);
ExperimentResult empirical_tail(const ExperimentConfig& config);

// Delta for bound evaluation. Signed mode is refused for models carrying
// negative correlations; absolute mode is always valid.
double delta_for_bounds(const CovarianceMatrix& cov, DeltaMode mode);

struct ContractionReport {
  double mc_mean = 0.0;       // Monte Carlo estimate of E (P_n f - P_n g)^2
  double mc_std_error = 0.0;
  double bound = 0.0;         // (Delta / n^2) |f - g|^2
  double ratio = 0.0;         // mc_mean / bound, 0 when both vanish
  double l2_distance = 0.0;
  bool pass = false;          // mc_mean <= bound + 3 std errors
  std::size_t replicates = 0;
};

ContractionReport verify_contraction(const CovarianceMatrix& cov,
                                     const HermiteCoefficients& f,
                                     const HermiteCoefficients& g,
                                     std::size_t replicates,
                                     std::uint64_t seed,
                                     DeltaMode mode = DeltaMode::signed_sum);

ContractionReport verify_contraction(const CovarianceMatrix& cov,
                                     const StepFunction& f, const StepFunction& g,
                                     std::size_t replicates, std::uint64_t seed,
                                     DeltaMode mode = DeltaMode::signed_sum);

// General-function route: both sides are projected onto Hermite series first.
// Refused when the projection residual exceeds the tolerance, since then the
// comparison would be about the truncation rather than f and g.
ContractionReport verify_contraction_projected(
    const CovarianceMatrix& cov, const std::function<double(double)>& f,
    const std::function<double(double)>& g, int max_degree,
    double residual_tolerance, std::size_t replicates, std::uint64_t seed,
    DeltaMode mode = DeltaMode::signed_sum);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

// Least squares of log(y) against log(n); needs >= 4 positive points.
RateFit fit_loglog(const std::vector<double>& n_values,
                   const std::vector<double>& y_values);

struct ModelRateFits {
  std::size_t model_index = 0;
  std::string model;
  RateFit mc;        // fitted to the Monte Carlo mean size
  RateFit envelope;  // fitted to the rate envelope curve
};

std::vector<ModelRateFits> fit_rates(const ExperimentResult& result);

// Serialization. The CSV and plot files are byte-stable for a fixed config
// and seed; the JSON mirror additionally carries wall-clock timings.
std::string result_to_csv(const ExperimentResult& result);
std::string result_to_json(const ExperimentResult& result);
std::string plot_data(const ExperimentResult& result, std::size_t model_index);
std::string summary_json(const ExperimentResult& result);

}  // namespace gausschain
