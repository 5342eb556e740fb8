#pragma once

#include "otcp/calibration.hpp"
#include "otcp/sphere_grid.hpp"
#include "otcp/synth.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace otcp {

struct SyntheticSource {
  SynthKind kind = SynthKind::gaussian;
  Eigen::Index n = 2000;
  Eigen::Index d = 2;
  SynthParams params;
};

struct OtcpSettings {
  double epsilon = 0.1;
  Eigen::Index m = 4096;
  DirectionMode grid_mode = DirectionMode::low_discrepancy;
  double tol = 1e-6;
  int max_iter = 2000;
  /// Fit the map on the calibration residuals themselves (single-split variant).
  bool fit_on_calib = false;
};

struct McpSettings {
  Eigen::Index k = 20;
  double alpha_lower = 0.05;
  double alpha_upper = 0.95;
};

struct BenchConfig {
  std::optional<std::filesystem::path> csv_path;
  Eigen::Index csv_target_dim = 2;
  SyntheticSource synthetic;
  std::vector<ScoreKind> methods{ScoreKind::merge_l2, ScoreKind::merge_mahalanobis,
                                 ScoreKind::mcp_max, ScoreKind::otcp};
  double alpha = 0.1;
  std::array<double, 4> split_fractions{0.4, 0.2, 0.2, 0.2};
  std::vector<Seed> seeds{0};
  RegressorParams regressor;
  OtcpSettings otcp;
  McpSettings mcp;
  std::optional<double> mahalanobis_ridge;
  int mc_samples = 2000;
  /// Test points used for region size; 0 disables size estimation.
  int size_points = 200;
  double box_inflation = 1.5;
  std::filesystem::path output_dir = "bench_out";

  void validate() const;
};

BenchConfig bench_config_from_json_text(const std::string& text);
BenchConfig load_bench_config(const std::filesystem::path& path);

struct BenchRow {
  std::string method;
  Seed seed = 0;
  double epsilon = 0.0;  // otcp only, else 0
  Eigen::Index m = 0;    // otcp only, else 0
  std::string status = "ok";
  double coverage = 0.0;
  double size = 0.0;  // NaN when not estimated
  double threshold = 0.0;
  Eigen::Index n_cal = 0;
  Eigen::Index n_test = 0;
  bool converged = true;
  double fit_ms = 0.0;
  double calibrate_ms = 0.0;
  double predict_ms = 0.0;

  bool ok() const noexcept { return status == "ok"; }
};

struct BenchAggregate {
  std::string method;
  int n_ok = 0;
  int n_failed = 0;
  double coverage_mean = 0.0;
  double coverage_se = 0.0;
  double size_mean = 0.0;
  double size_se = 0.0;
  double size_median = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<BenchAggregate> aggregates;

  bool partial_failure() const;
};

/// Mean and sample-std / sqrt(count) of the values.
std::pair<double, double> mean_and_se(const std::vector<double>& values);
double median(std::vector<double> values);

std::vector<BenchAggregate> aggregate_rows(const std::vector<BenchRow>& rows);

BenchReport run_benchmark(const BenchConfig& cfg);

std::vector<double> default_sweep_epsilons();
std::vector<Eigen::Index> default_sweep_targets();

struct SweepCell {
  double epsilon = 0.0;
  Eigen::Index m = 0;
  BenchReport report;
};

/// otcp-only runs over the cross product of epsilons and grid sizes.
std::vector<SweepCell> sweep(const BenchConfig& cfg, const std::vector<double>& epsilons,
                             const std::vector<Eigen::Index>& targets);

void write_report_csv(const BenchReport& report, const std::filesystem::path& path,
                      bool include_timing = true);
void write_report_json(const BenchReport& report, const BenchConfig& cfg,
                       const std::filesystem::path& path);
/// Long format: epsilon, m, seed, coverage, size, timings.
void write_sweep_csv(const std::vector<SweepCell>& cells, const std::filesystem::path& path,
                     bool include_timing = true);

struct ContourExport {
  std::vector<std::filesystem::path> files;
  /// Pairs of (x index, alpha) whose region was not inside the next lower alpha's.
  std::vector<std::pair<std::size_t, double>> nesting_warnings;
};

/// One CSV polygon per (x, alpha), named region_x<i>_a<alpha>.csv.
ContourExport export_contours(const CalibratedPredictor& pred, const Matrix& xs,
                              const std::vector<double>& alphas,
                              const std::filesystem::path& out_dir,
                              int n_angles = 256);

}  // namespace otcp

namespace otcp {

/// A score function fitted for one (method, seed) cell, ready to calibrate.
struct FittedMethod {
  ScoreFunction score;
  CalibrateOptions calibrate_options;
  bool converged = true;
};

/// Fits the method-specific state (covariance, quantiles, map) on the splits.
FittedMethod fit_method(const BenchConfig& cfg, ScoreKind kind, const Splits& splits,
                        const Regressor& reg, Seed seed);

/// The dataset a benchmark cell starts from: the CSV, or synthetic data drawn for this seed.
Dataset bench_dataset(const BenchConfig& cfg, Seed seed);

}  // namespace otcp
