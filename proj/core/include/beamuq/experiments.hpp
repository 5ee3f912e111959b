#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "beamuq/adaptive.hpp"
#include "beamuq/elasticity.hpp"
#include "beamuq/postprocess.hpp"
#include "beamuq/sparse_grid.hpp"

namespace beamuq {

//! max_i |(s_i - f_i) / f_i| over paired surrogate and forward-model values.
double max_norm_relative_error(std::span<const double> surrogate_values,
                               std::span<const double> fom_values);

//! Least-squares slope of log(error) against log(cost).
double fit_loglog_slope(std::span<const double> costs, std::span<const double> errors);

struct ConvergenceRecord {
  std::string method;  // smolyak | adaptive | mc
  std::size_t cost = 0;
  std::string metric;  // l2-field | abs-mean | max-norm
  double error = 0.0;
};

//! Shared experiment knobs; paper constants are the defaults.
struct ExperimentConfig {
  // geometry and load
  double length = 1.0;        // m
  double height = 1.0;        // m
  double e0_mpa = 1.0e4;      // MPa
  double tx_kn_per_m = 1.0e3; // kN/m
  double ty_kn_per_m = 0.0;

  IgaDiscretization iga;

  std::vector<int> levels = {1, 2, 3, 4};
  int reference_level = 5;

  std::size_t validation_samples = 500;
  std::uint64_t validation_seed = 2025;
  std::vector<std::uint64_t> mc_seeds = {101, 102, 103};

  std::size_t surrogate_pdf_samples = 10000;
  std::uint64_t pdf_seed = 777;
  int pdf_level = 3;
  int pdf_grid_size = 256;
  int scatter_samples = 150;

  // two-knot specifics
  double gamma = 0.4;
  double gamma1 = 0.4;
  double gamma2 = 0.4;
  double anchor_x = 1.0;
  double anchor_y = 0.5;
  std::size_t adaptive_budget = 1200;
  double profit_tolerance = 0.0;

  int threads = 1;
};

ExperimentConfig default_one_knot_config();
ExperimentConfig default_two_knot_config();

//! Applies the fields present in a JSON document on top of a config.
ExperimentConfig config_from_json(const nlohmann::json& doc, ExperimentConfig base);
nlohmann::json config_to_json(const ExperimentConfig& config);

struct SobolRecord {
  int level = 0;  // 0 tags the adaptive surrogate
  SobolIndices indices;
};

struct OneKnotResult {
  std::vector<int> levels;
  std::vector<std::size_t> costs;           // reduced cardinality per level
  std::vector<double> field_errors;         // L2(D) error of E[u_x] vs reference
  std::vector<double> corner_errors;        // relative error of E[corner QoI]
  std::vector<double> max_norm_errors;      // validation max-norm per level
  std::vector<ConvergenceRecord> records;   // everything written to convergence.csv
  std::vector<SobolRecord> sobol;
  double reference_corner_mean = 0.0;
  double mean_field_slope = 0.0;
  double corner_mean_slope = 0.0;
  double max_norm_slope = 0.0;
  std::vector<double> fom_validation_values;
  std::vector<double> surrogate_pdf_values;  // sampled at pdf_level
  std::size_t total_fom_evaluations = 0;
};

//! Runs the one-knot study: reference surrogate, per-level convergence,
//! Monte Carlo baselines at matched costs, Sobol indices, pdf and scatter
//! data. Writes convergence.csv, sobol.csv, pdf_*.csv, scatter.csv,
//! surrogate_reference.json and manifest.json into out_dir.
OneKnotResult run_one_knot(const ExperimentConfig& config,
                           const std::filesystem::path& out_dir);

struct TwoKnotResult {
  std::vector<int> levels;
  std::vector<std::size_t> smolyak_costs;
  std::vector<double> smolyak_mean_errors;
  std::vector<double> smolyak_max_norm_errors;
  std::vector<std::size_t> adaptive_costs;   // cumulative evaluations per step
  std::vector<double> adaptive_mean_errors;
  double adaptive_final_max_norm = 0.0;
  std::vector<ConvergenceRecord> records;
  SobolIndices sobol;
  double reference_mean = 0.0;
  std::size_t reference_evaluations = 0;
  std::vector<double> fom_validation_values;
  std::vector<double> surrogate_pdf_values;
  std::size_t total_fom_evaluations = 0;
};

//! Runs the two-knot study: adaptive reference, Smolyak levels, matched-cost
//! comparison, Sobol indices and pdf data. Writes convergence.csv,
//! sobol.csv, pdf_*.csv, history.csv and manifest.json into out_dir.
TwoKnotResult run_two_knot(const ExperimentConfig& config,
                           const std::filesystem::path& out_dir);

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;  // measured quantity, check-specific
};

//! Fast self-contained property checks of the sparse-grid machinery,
//! written to rule_checks.csv in out_dir. Returns one record per check.
std::vector<CheckResult> run_rule_checks(const std::filesystem::path& out_dir,
                                         int threads = 1);

}  // namespace beamuq
