#include "beamuq/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "beamuq/monte_carlo.hpp"
#include "beamuq/version.hpp"
#include "parallel_util.hpp"

namespace beamuq {

double max_norm_relative_error(std::span<const double> surrogate_values,
                               std::span<const double> fom_values) {
  if (surrogate_values.size() != fom_values.size()) {
    throw std::invalid_argument("max_norm_relative_error: length mismatch");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < fom_values.size(); ++i) {
    if (fom_values[i] == 0.0) {
      throw std::invalid_argument("max_norm_relative_error: zero reference value");
    }
    worst = std::max(worst, std::abs((surrogate_values[i] - fom_values[i]) / fom_values[i]));
  }
  return worst;
}

double fit_loglog_slope(std::span<const double> costs, std::span<const double> errors) {
  if (costs.size() != errors.size() || costs.size() < 2) {
    throw std::invalid_argument("fit_loglog_slope: need at least two (cost, error) pairs");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(costs.size());
  for (std::size_t i = 0; i < costs.size(); ++i) {
    const double x = std::log(costs[i]);
    const double y = std::log(std::max(errors[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ExperimentConfig default_one_knot_config() {
  ExperimentConfig config;
  config.length = 1.0;
  config.height = 1.0;
  config.iga = IgaDiscretization{4, 4, 32, 12};
  config.levels = {1, 2, 3, 4};
  config.reference_level = 5;
  config.validation_samples = 500;
  config.pdf_level = 3;
  return config;
}

ExperimentConfig default_two_knot_config() {
  ExperimentConfig config;
  config.length = 10.0;
  config.height = 1.0;
  config.iga = IgaDiscretization{4, 4, 36, 14};
  config.levels = {1, 2, 3};
  config.reference_level = 3;  // Smolyak levels only; the reference is adaptive
  config.validation_samples = 600;
  config.surrogate_pdf_samples = 5000;
  config.adaptive_budget = 1200;
  return config;
}

namespace {

template <typename T>
void maybe_read(const nlohmann::json& doc, const char* key, T& value) {
  if (doc.contains(key)) value = doc.at(key).get<T>();
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& doc, ExperimentConfig base) {
  maybe_read(doc, "length", base.length);
  maybe_read(doc, "height", base.height);
  maybe_read(doc, "e0_mpa", base.e0_mpa);
  maybe_read(doc, "tx_kn_per_m", base.tx_kn_per_m);
  maybe_read(doc, "ty_kn_per_m", base.ty_kn_per_m);
  if (doc.contains("iga")) {
    const auto& iga = doc.at("iga");
    maybe_read(iga, "degree_x", base.iga.degree_x);
    maybe_read(iga, "degree_y", base.iga.degree_y);
    maybe_read(iga, "basis_x", base.iga.basis_x);
    maybe_read(iga, "basis_y", base.iga.basis_y);
  }
  maybe_read(doc, "levels", base.levels);
  maybe_read(doc, "reference_level", base.reference_level);
  maybe_read(doc, "validation_samples", base.validation_samples);
  maybe_read(doc, "validation_seed", base.validation_seed);
  maybe_read(doc, "mc_seeds", base.mc_seeds);
  maybe_read(doc, "surrogate_pdf_samples", base.surrogate_pdf_samples);
  maybe_read(doc, "pdf_seed", base.pdf_seed);
  maybe_read(doc, "pdf_level", base.pdf_level);
  maybe_read(doc, "pdf_grid_size", base.pdf_grid_size);
  maybe_read(doc, "scatter_samples", base.scatter_samples);
  maybe_read(doc, "gamma", base.gamma);
  maybe_read(doc, "gamma1", base.gamma1);
  maybe_read(doc, "gamma2", base.gamma2);
  maybe_read(doc, "anchor_x", base.anchor_x);
  maybe_read(doc, "anchor_y", base.anchor_y);
  maybe_read(doc, "adaptive_budget", base.adaptive_budget);
  maybe_read(doc, "profit_tolerance", base.profit_tolerance);
  maybe_read(doc, "threads", base.threads);
  return base;
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
  nlohmann::json doc;
  doc["length"] = config.length;
  doc["height"] = config.height;
  doc["e0_mpa"] = config.e0_mpa;
  doc["tx_kn_per_m"] = config.tx_kn_per_m;
  doc["ty_kn_per_m"] = config.ty_kn_per_m;
  doc["iga"] = {{"degree_x", config.iga.degree_x},
                {"degree_y", config.iga.degree_y},
                {"basis_x", config.iga.basis_x},
                {"basis_y", config.iga.basis_y}};
  doc["levels"] = config.levels;
  doc["reference_level"] = config.reference_level;
  doc["validation_samples"] = config.validation_samples;
  doc["validation_seed"] = config.validation_seed;
  doc["mc_seeds"] = config.mc_seeds;
  doc["surrogate_pdf_samples"] = config.surrogate_pdf_samples;
  doc["pdf_seed"] = config.pdf_seed;
  doc["pdf_level"] = config.pdf_level;
  doc["pdf_grid_size"] = config.pdf_grid_size;
  doc["scatter_samples"] = config.scatter_samples;
  doc["gamma"] = config.gamma;
  doc["gamma1"] = config.gamma1;
  doc["gamma2"] = config.gamma2;
  doc["anchor_x"] = config.anchor_x;
  doc["anchor_y"] = config.anchor_y;
  doc["adaptive_budget"] = config.adaptive_budget;
  doc["profit_tolerance"] = config.profit_tolerance;
  doc["threads"] = config.threads;
  return doc;
}

namespace {

std::string fmt(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

void write_convergence_csv(const std::filesystem::path& path,
                           const std::vector<ConvergenceRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "method,cost,metric,error\n";
  for (const auto& r : records) {
    out << r.method << "," << r.cost << "," << r.metric << "," << fmt(r.error) << "\n";
  }
}

void write_sobol_csv(const std::filesystem::path& path,
                     const std::vector<SobolRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "level,parameter,principal,total\n";
  for (const auto& r : records) {
    for (std::size_t n = 0; n < r.indices.principal.size(); ++n) {
      out << r.level << "," << (n + 1) << "," << fmt(r.indices.principal[n]) << ","
          << fmt(r.indices.total[n]) << "\n";
    }
  }
}

std::vector<double> pdf_grid(std::span<const double> a, std::span<const double> b, int count) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : a) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (double v : b) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double pad = 0.1 * (hi - lo);
  lo -= pad;
  hi += pad;
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
  }
  return grid;
}

int resolved_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

ParameterSpace one_knot_space() {
  return ParameterSpace({{0.5, 1.5}, {0.25, 0.75}, {0.1, 0.2}});
}

ParameterSpace two_knot_space() {
  return ParameterSpace(
      {{0.5, 1.5}, {0.3, 1.0}, {0.3, 1.0}, {0.03, 0.1}, {0.03, 0.1}, {1.0, 8.0}, {-0.5, 0.5}});
}

struct LevelSurrogates {
  std::vector<int> levels;             // ascending, including the reference last
  std::vector<Surrogate> surrogates;   // aligned with levels
  std::vector<std::size_t> costs;      // reduced cardinality per level
  std::size_t evaluations = 0;
};

// Evaluates nested Smolyak surrogates level by level, recycling every value
// from the previous level.
LevelSurrogates evaluate_levels(const FomFunction& fom, const ParameterSpace& space,
                                const std::vector<FamilyPtr>& families,
                                std::vector<int> levels, int threads) {
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  LevelSurrogates out;
  out.levels = levels;
  const Surrogate* previous = nullptr;
  for (int level : levels) {
    SparseGrid grid = build_sparse_grid(space, families, level_to_knots_doubling,
                                        MultiIndexSet::smolyak(space.dim(), level));
    ReducedSparseGrid reduced = reduce(grid);
    EvaluationReport report;
    out.surrogates.push_back(evaluate_on_grid(fom, std::move(grid), std::move(reduced),
                                              previous, threads, &report));
    out.costs.push_back(out.surrogates.back().reduced.size());
    out.evaluations += report.new_evaluations;
    previous = &out.surrogates.back();
  }
  return out;
}

}  // namespace

OneKnotResult run_one_knot(const ExperimentConfig& config,
                           const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const int threads = resolved_threads(config.threads);

  if (config.levels.empty()) throw std::invalid_argument("run_one_knot: empty level list");
  for (int w : config.levels) {
    if (w > config.reference_level) {
      throw std::invalid_argument("run_one_knot: level exceeds the reference level");
    }
  }

  const ParameterSpace space = one_knot_space();
  const auto families = clenshaw_curtis_families(space);
  const double e0 = config.e0_mpa * 1e6;
  const MaterialField material = one_knot_material(e0, config.gamma);
  const TractionProblem problem{BeamGeometry{config.length, config.height},
                                config.tx_kn_per_m * 1e3, config.ty_kn_per_m * 1e3};

  const std::size_t nxny = static_cast<std::size_t>(config.iga.basis_x) * config.iga.basis_y;
  // Bottom-right corner coefficient: open knot vectors make the corner value
  // equal to the last-x / first-y control coefficient.
  const std::size_t corner_component =
      static_cast<std::size_t>(config.iga.basis_x - 1) * config.iga.basis_y;

  // Field QoI: the horizontal-displacement control coefficients.
  const FomFunction field_fom = [&](const ParameterPoint& p) {
    const DisplacementField field = solve_traction_problem(problem, material, p, config.iga);
    return field.coeff_x();
  };
  auto corner_from_coeffs = [&](std::span<const double> coeffs) {
    return coeffs[corner_component];
  };

  std::vector<int> all_levels = config.levels;
  all_levels.push_back(config.reference_level);
  LevelSurrogates built = evaluate_levels(field_fom, space, families, all_levels, threads);

  OneKnotResult result;
  result.total_fom_evaluations = built.evaluations;

  const Surrogate& reference = built.surrogates.back();
  const Surrogate reference_corner = extract_component(reference, corner_component);
  const std::vector<double> reference_mean_field = quadrature(reference);
  result.reference_corner_mean = reference_mean_field[corner_component];

  OpenKnotVector kvx(config.iga.degree_x, config.iga.basis_x, 0.0, config.length);
  OpenKnotVector kvy(config.iga.degree_y, config.iga.basis_y, 0.0, config.height);
  const std::vector<double> zero_uy(nxny, 0.0);
  const DisplacementField reference_mean(kvx, kvy, reference_mean_field, zero_uy);

  // Validation set for the surrogate max-norm error and the pdf reference.
  const auto validation_points = sample_uniform(space, config.validation_samples,
                                                config.validation_seed);
  std::vector<double> fom_validation(validation_points.size());
  {
    std::vector<std::vector<double>> rows(validation_points.size());
    detail::parallel_for(validation_points.size(), threads, [&](std::size_t i) {
      rows[i] = field_fom(validation_points[i]);
    });
    for (std::size_t i = 0; i < rows.size(); ++i) {
      fom_validation[i] = corner_from_coeffs(rows[i]);
    }
    result.total_fom_evaluations += validation_points.size();
  }
  result.fom_validation_values = fom_validation;

  // Per-level convergence records and Sobol indices.
  std::vector<Surrogate> corner_surrogates;
  std::vector<std::vector<double>> level_validation_values;
  for (std::size_t li = 0; li + 1 < built.surrogates.size(); ++li) {
    const int level = built.levels[li];
    const Surrogate& surrogate = built.surrogates[li];
    const std::size_t cost = built.costs[li];

    const std::vector<double> mean_field = quadrature(surrogate);
    const DisplacementField mean(kvx, kvy, mean_field, zero_uy);
    const double field_error = l2_relative_field_error(mean, reference_mean);

    const double corner_mean = mean_field[corner_component];
    const double corner_error = std::abs(corner_mean - result.reference_corner_mean) /
                                std::abs(result.reference_corner_mean);

    Surrogate corner = extract_component(surrogate, corner_component);
    InterpolateOptions iopts;
    iopts.threads = threads;
    const ValueTable at_validation = interpolate(corner, validation_points, iopts);
    std::vector<double> surrogate_values(validation_points.size());
    for (std::size_t i = 0; i < surrogate_values.size(); ++i) {
      surrogate_values[i] = at_validation.row(i)[0];
    }
    const double max_norm = max_norm_relative_error(surrogate_values, fom_validation);

    result.levels.push_back(level);
    result.costs.push_back(cost);
    result.field_errors.push_back(field_error);
    result.corner_errors.push_back(corner_error);
    result.max_norm_errors.push_back(max_norm);
    result.records.push_back({"smolyak", cost, "l2-field", field_error});
    result.records.push_back({"smolyak", cost, "abs-mean", corner_error});
    result.records.push_back({"smolyak", cost, "max-norm", max_norm});

    result.sobol.push_back({level, sobol_indices(to_legendre(corner))});
    corner_surrogates.push_back(std::move(corner));
    level_validation_values.push_back(std::move(surrogate_values));
  }

  {
    std::vector<double> costs(result.costs.begin(), result.costs.end());
    result.mean_field_slope = fit_loglog_slope(costs, result.field_errors);
    result.corner_mean_slope = fit_loglog_slope(costs, result.corner_errors);
    result.max_norm_slope = fit_loglog_slope(costs, result.max_norm_errors);
  }

  // Monte Carlo baselines at matched costs, one prefix stream per seed.
  const std::size_t max_cost = result.costs.back();
  for (std::uint64_t seed : config.mc_seeds) {
    const auto points = sample_uniform(space, max_cost, seed);
    std::vector<std::vector<double>> rows(points.size());
    detail::parallel_for(points.size(), threads,
                         [&](std::size_t i) { rows[i] = field_fom(points[i]); });
    result.total_fom_evaluations += points.size();

    std::vector<double> running(nxny, 0.0);
    std::size_t consumed = 0;
    for (std::size_t li = 0; li < result.costs.size(); ++li) {
      const std::size_t cost = result.costs[li];
      for (; consumed < cost; ++consumed) {
        for (std::size_t c = 0; c < nxny; ++c) running[c] += rows[consumed][c];
      }
      std::vector<double> mc_mean(nxny);
      for (std::size_t c = 0; c < nxny; ++c) {
        mc_mean[c] = running[c] / static_cast<double>(cost);
      }
      const DisplacementField mean(kvx, kvy, mc_mean, zero_uy);
      const double field_error = l2_relative_field_error(mean, reference_mean);
      const double corner_error =
          std::abs(mc_mean[corner_component] - result.reference_corner_mean) /
          std::abs(result.reference_corner_mean);
      result.records.push_back({"mc", cost, "l2-field", field_error});
      result.records.push_back({"mc", cost, "abs-mean", corner_error});
    }
  }

  // pdf data: kernel density of the validation FOM values and of surrogate
  // samples per level, all on one shared evaluation grid.
  const auto pdf_points = sample_uniform(space, config.surrogate_pdf_samples, config.pdf_seed);
  std::vector<std::vector<double>> pdf_values_per_level(corner_surrogates.size());
  for (std::size_t li = 0; li < corner_surrogates.size(); ++li) {
    InterpolateOptions iopts;
    iopts.threads = threads;
    const ValueTable table = interpolate(corner_surrogates[li], pdf_points, iopts);
    auto& values = pdf_values_per_level[li];
    values.resize(pdf_points.size());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = table.row(i)[0];
    if (result.levels[li] == config.pdf_level) result.surrogate_pdf_values = values;
  }
  if (result.surrogate_pdf_values.empty() && !pdf_values_per_level.empty()) {
    result.surrogate_pdf_values = pdf_values_per_level.back();
  }

  const std::vector<double> grid =
      pdf_grid(fom_validation, result.surrogate_pdf_values, config.pdf_grid_size);
  write_pdf_csv(out_dir / "pdf_fom.csv", grid,
                kde_pdf(fom_validation, KdeSupport::positive, grid));
  for (std::size_t li = 0; li < pdf_values_per_level.size(); ++li) {
    std::ostringstream name;
    name << "pdf_surrogate_w" << result.levels[li] << ".csv";
    write_pdf_csv(out_dir / name.str(), grid,
                  kde_pdf(pdf_values_per_level[li], KdeSupport::positive, grid));
  }

  // Scatter data: reference (FOM) vs surrogate values at the first samples.
  {
    std::ofstream out(out_dir / "scatter.csv");
    if (!out) throw std::runtime_error("cannot open scatter.csv");
    out << "level,sample,fom,surrogate\n";
    const std::size_t count =
        std::min<std::size_t>(static_cast<std::size_t>(config.scatter_samples),
                              validation_points.size());
    for (std::size_t li = 0; li < level_validation_values.size(); ++li) {
      for (std::size_t i = 0; i < count; ++i) {
        out << result.levels[li] << "," << i << "," << fmt(fom_validation[i]) << ","
            << fmt(level_validation_values[li][i]) << "\n";
      }
    }
  }

  write_convergence_csv(out_dir / "convergence.csv", result.records);
  write_sobol_csv(out_dir / "sobol.csv", result.sobol);
  save_surrogate(reference_corner, out_dir / "surrogate_reference.json");

  nlohmann::json manifest;
  manifest["experiment"] = "one-knot";
  manifest["version"] = kVersion;
  manifest["config"] = config_to_json(config);
  manifest["costs"] = result.costs;
  manifest["reference_corner_mean"] = result.reference_corner_mean;
  manifest["mean_field_slope"] = result.mean_field_slope;
  manifest["corner_mean_slope"] = result.corner_mean_slope;
  manifest["max_norm_slope"] = result.max_norm_slope;
  manifest["total_fom_evaluations"] = result.total_fom_evaluations;
  std::ofstream mout(out_dir / "manifest.json");
  mout << manifest.dump(2) << "\n";

  return result;
}

TwoKnotResult run_two_knot(const ExperimentConfig& config,
                           const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const int threads = resolved_threads(config.threads);
  if (config.levels.empty()) throw std::invalid_argument("run_two_knot: empty level list");

  const ParameterSpace space = two_knot_space();
  const auto families = clenshaw_curtis_families(space);
  const double e0 = config.e0_mpa * 1e6;
  const MaterialField material =
      two_knot_material(e0, config.gamma1, config.gamma2, config.anchor_x, config.anchor_y);
  const TractionProblem problem{BeamGeometry{config.length, config.height},
                                config.tx_kn_per_m * 1e3, config.ty_kn_per_m * 1e3};

  const auto corner_fom = [&](const ParameterPoint& p) {
    const DisplacementField field = solve_traction_problem(problem, material, p, config.iga);
    return qoi_corner(field, problem.geometry);
  };

  TwoKnotResult result;

  // A-posteriori adaptive reference.
  AdaptiveOptions aopts;
  aopts.budget = config.adaptive_budget;
  aopts.profit_tolerance = config.profit_tolerance;
  aopts.threads = threads;
  AdaptiveResult adaptive = adapt(corner_fom, space, families, level_to_knots_doubling, aopts);
  result.reference_mean = quadrature_scalar(adaptive.surrogate);
  result.reference_evaluations = adaptive.state.evaluations_used;
  result.total_fom_evaluations += adaptive.state.evaluations_used;

  for (const auto& entry : adaptive.state.history) {
    const double error = std::abs(entry.expected_value - result.reference_mean) /
                         std::abs(result.reference_mean);
    result.adaptive_costs.push_back(entry.evaluations_used);
    result.adaptive_mean_errors.push_back(error);
    result.records.push_back({"adaptive", entry.evaluations_used, "abs-mean", error});
  }

  // Smolyak comparison levels, nested evaluation.
  LevelSurrogates built = evaluate_levels(scalar_fom(corner_fom), space, families,
                                          config.levels, threads);
  result.total_fom_evaluations += built.evaluations;

  // Validation values for the max-norm metric.
  const auto validation_points = sample_uniform(space, config.validation_samples,
                                                config.validation_seed);
  std::vector<double> fom_validation(validation_points.size());
  detail::parallel_for(validation_points.size(), threads, [&](std::size_t i) {
    fom_validation[i] = corner_fom(validation_points[i]);
  });
  result.total_fom_evaluations += validation_points.size();
  result.fom_validation_values = fom_validation;

  InterpolateOptions iopts;
  iopts.threads = threads;
  for (std::size_t li = 0; li < built.surrogates.size(); ++li) {
    const Surrogate& surrogate = built.surrogates[li];
    const std::size_t cost = built.costs[li];
    const double mean = quadrature_scalar(surrogate);
    const double mean_error =
        std::abs(mean - result.reference_mean) / std::abs(result.reference_mean);

    const ValueTable table = interpolate(surrogate, validation_points, iopts);
    std::vector<double> values(validation_points.size());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = table.row(i)[0];
    const double max_norm = max_norm_relative_error(values, fom_validation);

    result.levels.push_back(built.levels[li]);
    result.smolyak_costs.push_back(cost);
    result.smolyak_mean_errors.push_back(mean_error);
    result.smolyak_max_norm_errors.push_back(max_norm);
    result.records.push_back({"smolyak", cost, "abs-mean", mean_error});
    result.records.push_back({"smolyak", cost, "max-norm", max_norm});
  }

  {
    const ValueTable table = interpolate(adaptive.surrogate, validation_points, iopts);
    std::vector<double> values(validation_points.size());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = table.row(i)[0];
    result.adaptive_final_max_norm = max_norm_relative_error(values, fom_validation);
    result.records.push_back({"adaptive", result.reference_evaluations, "max-norm",
                              result.adaptive_final_max_norm});
  }

  result.sobol = sobol_indices(to_legendre(adaptive.surrogate));

  // pdf data from the adaptive surrogate against the FOM sample.
  const auto pdf_points = sample_uniform(space, config.surrogate_pdf_samples, config.pdf_seed);
  {
    const ValueTable table = interpolate(adaptive.surrogate, pdf_points, iopts);
    result.surrogate_pdf_values.resize(pdf_points.size());
    for (std::size_t i = 0; i < pdf_points.size(); ++i) {
      result.surrogate_pdf_values[i] = table.row(i)[0];
    }
  }
  const std::vector<double> grid =
      pdf_grid(fom_validation, result.surrogate_pdf_values, config.pdf_grid_size);
  write_pdf_csv(out_dir / "pdf_fom.csv", grid,
                kde_pdf(fom_validation, KdeSupport::positive, grid));
  write_pdf_csv(out_dir / "pdf_adaptive.csv", grid,
                kde_pdf(result.surrogate_pdf_values, KdeSupport::positive, grid));

  write_convergence_csv(out_dir / "convergence.csv", result.records);
  write_sobol_csv(out_dir / "sobol.csv", {SobolRecord{0, result.sobol}});
  export_history_csv(adaptive.state, out_dir / "history.csv");
  save_surrogate(adaptive.surrogate, out_dir / "surrogate_reference.json");

  nlohmann::json manifest;
  manifest["experiment"] = "two-knot";
  manifest["version"] = kVersion;
  manifest["config"] = config_to_json(config);
  manifest["smolyak_costs"] = result.smolyak_costs;
  manifest["reference_mean"] = result.reference_mean;
  manifest["reference_evaluations"] = result.reference_evaluations;
  manifest["total_fom_evaluations"] = result.total_fom_evaluations;
  std::ofstream mout(out_dir / "manifest.json");
  mout << manifest.dump(2) << "\n";

  return result;
}

namespace {

double uniform_moment(int degree, double a, double b) {
  return (std::pow(b, degree + 1) - std::pow(a, degree + 1)) / ((degree + 1) * (b - a));
}

// Telescoping expansion of the combination technique: expand every
// tensor-difference product and accumulate signs per surviving index.
std::map<MultiIndex, int> telescoping_coefficients(const MultiIndexSet& set) {
  std::map<MultiIndex, int> out;
  const int dim = set.dim();
  for (const auto& idx : set) {
    for (unsigned mask = 0; mask < (1u << dim); ++mask) {
      MultiIndex j = idx;
      int bits = 0;
      bool valid = true;
      for (int k = 0; k < dim; ++k) {
        if (mask & (1u << k)) {
          j[static_cast<std::size_t>(k)] -= 1;
          ++bits;
          if (j[static_cast<std::size_t>(k)] < 1) {
            valid = false;
            break;
          }
        }
      }
      if (!valid) continue;
      out[j] += (bits % 2 == 0) ? 1 : -1;
    }
  }
  for (auto it = out.begin(); it != out.end();) {
    it = (it->second == 0) ? out.erase(it) : std::next(it);
  }
  return out;
}

// Direct product-form Lagrange interpolation of one tensor term.
double direct_tensor_interpolant(const SparseGridTerm& term, const ReducedSparseGrid& reduced,
                                 const std::vector<std::uint32_t>& slots,
                                 const ValueTable& values, const ParameterPoint& p) {
  double acc = 0.0;
  for (std::size_t r = 0; r < term.grid.point_count(); ++r) {
    const auto key = term.grid.point_key(r);
    double basis = 1.0;
    for (std::size_t n = 0; n < key.size(); ++n) {
      const auto& nodes = term.grid.rules()[n].nodes;
      const int j = key[n];
      for (int k = 0; k < static_cast<int>(nodes.size()); ++k) {
        if (k == j) continue;
        basis *= (p[n] - nodes[static_cast<std::size_t>(k)]) /
                 (nodes[static_cast<std::size_t>(j)] - nodes[static_cast<std::size_t>(k)]);
      }
    }
    acc += basis * values.row(slots[r])[0];
  }
  (void)reduced;
  return acc;
}

}  // namespace

std::vector<CheckResult> run_rule_checks(const std::filesystem::path& out_dir, int threads) {
  std::filesystem::create_directories(out_dir);
  std::vector<CheckResult> checks;

  {  // Probabilistic weights sum to one.
    double worst = 0.0;
    for (int k = 1; k <= 7; ++k) {
      const auto w = clenshaw_curtis_weights(level_to_knots_doubling(k), 0.3, 1.7);
      const double sum = std::accumulate(w.begin(), w.end(), 0.0);
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    checks.push_back({"cc-weight-sum", worst < 1e-13, worst});
  }

  {  // Quadrature exactness for degree < K against analytic moments.
    double worst = 0.0;
    const double a = 0.3, b = 1.7;
    for (int k = 1; k <= 6; ++k) {
      const int count = level_to_knots_doubling(k);
      const auto nodes = clenshaw_curtis_nodes(count, a, b);
      const auto weights = clenshaw_curtis_weights(count, a, b);
      for (int d = 0; d < count; ++d) {
        double acc = 0.0;
        for (int j = 0; j < count; ++j) {
          acc += weights[static_cast<std::size_t>(j)] *
                 std::pow(nodes[static_cast<std::size_t>(j)], d);
        }
        const double exact = uniform_moment(d, a, b);
        worst = std::max(worst, std::abs(acc - exact) / std::max(1.0, std::abs(exact)));
      }
    }
    checks.push_back({"cc-exactness", worst < 1e-12, worst});
  }

  {  // Nested levels reproduce coarse nodes bit for bit.
    double worst = 0.0;
    for (int k = 1; k <= 6; ++k) {
      const auto coarse = clenshaw_curtis_nodes(level_to_knots_doubling(k), 0.25, 0.75);
      const auto fine = clenshaw_curtis_nodes(level_to_knots_doubling(k + 1), 0.25, 0.75);
      for (double c : coarse) {
        bool found = false;
        for (double f : fine) {
          if (f == c) {
            found = true;
            break;
          }
        }
        if (!found) worst = 1.0;
      }
    }
    checks.push_back({"cc-nestedness", worst == 0.0, worst});
  }

  {  // Combination coefficients match the telescoping expansion.
    int mismatches = 0;
    double coefficient_sum_dev = 0.0;
    for (int dim = 1; dim <= 3; ++dim) {
      for (int w = 0; w <= 4; ++w) {
        const auto set = MultiIndexSet::smolyak(dim, w);
        const auto direct = combination_coefficients(set);
        const auto oracle = telescoping_coefficients(set);
        if (direct != oracle) ++mismatches;
        int sum = 0;
        for (const auto& [idx, c] : direct) sum += c;
        coefficient_sum_dev = std::max(coefficient_sum_dev, std::abs(sum - 1.0));
      }
    }
    checks.push_back({"combination-oracle", mismatches == 0,
                      static_cast<double>(mismatches)});
    checks.push_back({"coefficient-sum", coefficient_sum_dev == 0.0, coefficient_sum_dev});
  }

  {  // Reduced cardinalities of the 2D family.
    const std::vector<std::size_t> expected = {1, 5, 13, 29, 65, 145};
    ParameterSpace space({{-1.0, 1.0}, {-1.0, 1.0}});
    const auto families = clenshaw_curtis_families(space);
    bool ok = true;
    for (int w = 0; w <= 5; ++w) {
      const SparseGrid grid = build_sparse_grid(space, families, level_to_knots_doubling,
                                                MultiIndexSet::smolyak(2, w));
      if (reduce(grid).size() != expected[static_cast<std::size_t>(w)]) ok = false;
    }
    checks.push_back({"n2-cardinalities", ok, ok ? 0.0 : 1.0});
  }

  {  // Sparse quadrature integrates low-degree monomials exactly.
    ParameterSpace space({{0.5, 1.5}, {0.25, 0.75}, {0.1, 0.2}});
    const auto families = clenshaw_curtis_families(space);
    double worst = 0.0;
    for (int w = 0; w <= 4; ++w) {
      SparseGrid grid = build_sparse_grid(space, families, level_to_knots_doubling,
                                          MultiIndexSet::smolyak(3, w));
      ReducedSparseGrid reduced = reduce(grid);
      for (int d1 = 0; d1 <= w; ++d1) {
        for (int d2 = 0; d1 + d2 <= w; ++d2) {
          for (int d3 = 0; d1 + d2 + d3 <= w; ++d3) {
            double acc = 0.0;
            for (std::size_t q = 0; q < reduced.size(); ++q) {
              const auto& p = reduced.points[q];
              acc += reduced.weights[q] * std::pow(p[0], d1) * std::pow(p[1], d2) *
                     std::pow(p[2], d3);
            }
            const double exact = uniform_moment(d1, 0.5, 1.5) *
                                 uniform_moment(d2, 0.25, 0.75) *
                                 uniform_moment(d3, 0.1, 0.2);
            worst = std::max(worst, std::abs(acc - exact) / std::abs(exact));
          }
        }
      }
    }
    checks.push_back({"quadrature-exactness", worst < 1e-10, worst});
  }

  {  // Reduced weights stay normalized.
    double worst = 0.0;
    for (int dim = 1; dim <= 4; ++dim) {
      std::vector<Interval> ranges(static_cast<std::size_t>(dim), Interval{0.0, 2.0});
      ParameterSpace space(ranges);
      const auto families = clenshaw_curtis_families(space);
      for (int w = 0; w <= 5; ++w) {
        SparseGrid grid = build_sparse_grid(space, families, level_to_knots_doubling,
                                            MultiIndexSet::smolyak(dim, w));
        ReducedSparseGrid reduced = reduce(grid);
        const double sum =
            std::accumulate(reduced.weights.begin(), reduced.weights.end(), 0.0);
        worst = std::max(worst, std::abs(sum - 1.0));
      }
    }
    checks.push_back({"reduced-weight-sum", worst < 1e-12, worst});
  }

  {  // Interpolation: nodal reproduction and brute-force agreement.
    ParameterSpace space({{0.0, 1.0}, {-1.0, 2.0}});
    const auto families = clenshaw_curtis_families(space);
    const auto f = scalar_fom([](const ParameterPoint& p) {
      return std::sin(2.0 * p[0]) * std::exp(0.3 * p[1]) + p[0] * p[1];
    });
    SparseGrid grid = build_sparse_grid(space, families, level_to_knots_doubling,
                                        MultiIndexSet::smolyak(2, 3));
    ReducedSparseGrid reduced = reduce(grid);
    Surrogate surrogate = evaluate_on_grid(f, std::move(grid), std::move(reduced), nullptr,
                                           threads);

    double scale = 0.0;
    for (std::size_t q = 0; q < surrogate.reduced.size(); ++q) {
      scale = std::max(scale, std::abs(surrogate.values.row(q)[0]));
    }
    double worst_nodal = 0.0;
    const ValueTable at_nodes = interpolate(surrogate, surrogate.reduced.points);
    for (std::size_t q = 0; q < surrogate.reduced.size(); ++q) {
      const double stored = surrogate.values.row(q)[0];
      worst_nodal = std::max(worst_nodal, std::abs(at_nodes.row(q)[0] - stored) / scale);
    }
    checks.push_back({"interpolation-nodal", worst_nodal < 1e-10, worst_nodal});

    const auto queries = sample_uniform(space, 100, 424242);
    const ValueTable fast = interpolate(surrogate, queries);
    double worst_direct = 0.0;
    for (std::size_t i = 0; i < queries.size(); ++i) {
      double oracle = 0.0;
      for (std::size_t t = 0; t < surrogate.grid.terms().size(); ++t) {
        const auto& term = surrogate.grid.terms()[t];
        oracle += term.coefficient *
                  direct_tensor_interpolant(term, surrogate.reduced,
                                            surrogate.reduced.back_map[t], surrogate.values,
                                            queries[i]);
      }
      worst_direct = std::max(worst_direct, std::abs(fast.row(i)[0] - oracle));
    }
    checks.push_back({"interpolation-direct", worst_direct < 1e-12, worst_direct});
  }

  {  // Monte Carlo convergence rate near -1/2.
    ParameterSpace space({{0.0, 1.0}});
    const auto f = [](const ParameterPoint& p) { return p[0] * p[0]; };
    const std::vector<std::size_t> sizes = {100, 1000, 10000, 100000};
    double slope_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      std::vector<double> costs, errors;
      for (std::size_t m : sizes) {
        const McEstimate estimate = mc_expectation(f, space, m, seed, threads);
        costs.push_back(static_cast<double>(m));
        errors.push_back(std::abs(estimate.mean - 1.0 / 3.0));
      }
      slope_sum += fit_loglog_slope(costs, errors);
    }
    const double slope = slope_sum / 20.0;
    checks.push_back({"mc-rate", slope > -0.65 && slope < -0.35, slope});
  }

  {  // Gaussian KDE normalization.
    std::mt19937_64 eng(7);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> samples(10000);
    for (auto& s : samples) s = normal(eng);
    std::vector<double> grid(801);
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = -8.0 + 16.0 * i / 800.0;
    const auto density = kde_pdf(samples, KdeSupport::unbounded, grid);
    double integral = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      integral += 0.5 * (density[i] + density[i - 1]) * (grid[i] - grid[i - 1]);
    }
    checks.push_back({"kde-normalization", std::abs(integral - 1.0) < 0.02, integral});
  }

  std::ofstream out(out_dir / "rule_checks.csv");
  if (!out) throw std::runtime_error("cannot open rule_checks.csv");
  out << "check,status,value\n";
  for (const auto& check : checks) {
    out << check.name << "," << (check.passed ? "pass" : "fail") << "," << fmt(check.value)
        << "\n";
  }
  return checks;
}

}  // namespace beamuq
