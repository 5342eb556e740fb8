// otcp: command-line front end for synthetic data, model fitting, contours and benchmarks.

#include "otcp/bench.hpp"
#include "otcp/errors.hpp"
#include "otcp/region.hpp"
#include "otcp/serialization.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

namespace {

using namespace otcp;

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw ConfigError("not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

struct SynthArgs {
  std::string kind = "gaussian";
  Eigen::Index n = 1000;
  Eigen::Index d = 2;
  int p = 1;
  Seed seed = 0;
  std::string out;
};

struct FitArgs {
  std::string config;
  std::string data;
  Eigen::Index target_dim = 2;
  std::string method = "otcp";
  double alpha = 0.1;
  Seed seed = 0;
  std::optional<double> epsilon;
  std::optional<Eigen::Index> m;
  bool fit_on_calib = false;
  std::string out = "model.json";
};

struct ContourArgs {
  std::string model;
  std::vector<std::string> xs;
  std::string alphas;
  int angles = kDefaultContourAngles;
  std::string out = "contours";
  bool json = false;
};

struct BenchArgs {
  std::string config;
  std::string out;
  bool no_timing = false;
  std::string eps;
  std::string targets;
};

void ensure_parent(const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
}

int run_synth(const SynthArgs& a) {
  SynthParams params;
  params.p = a.p;
  const Dataset ds = synth_dataset(parse_synth_kind(a.kind), a.n, a.d, params, a.seed);
  ensure_parent(a.out);
  write_dataset_csv(ds, a.out);
  std::cout << "wrote " << ds.size() << " rows to " << a.out << '\n';
  return 0;
}

int run_fit(const FitArgs& a) {
  BenchConfig cfg = a.config.empty() ? BenchConfig{} : load_bench_config(a.config);
  if (!a.data.empty()) {
    cfg.csv_path = a.data;
    cfg.csv_target_dim = a.target_dim;
  }
  cfg.alpha = a.alpha;
  if (a.epsilon) cfg.otcp.epsilon = *a.epsilon;
  if (a.m) cfg.otcp.m = *a.m;
  if (a.fit_on_calib) cfg.otcp.fit_on_calib = true;
  cfg.validate();

  const Dataset data = bench_dataset(cfg, a.seed);
  const Splits splits = split_dataset(data, SplitSpec{cfg.split_fractions, a.seed});
  const Regressor reg = fit_regressor(splits.train, cfg.regressor);
  const FittedMethod fm = fit_method(cfg, parse_score_kind(a.method), splits, reg, a.seed);
  if (!fm.converged) std::cerr << "warning: Sinkhorn stopped before reaching the tolerance\n";
  const CalibratedPredictor pred = calibrate(fm.score, splits.calib, cfg.alpha, fm.calibrate_options);
  ensure_parent(a.out);
  save_predictor(pred, a.out);
  std::cout << "method=" << a.method << " n_cal=" << pred.n_cal() << " threshold=" << pred.threshold()
            << " -> " << a.out << '\n';
  return 0;
}

int run_contour(const ContourArgs& a) {
  const CalibratedPredictor pred = load_predictor(a.model);
  const Eigen::Index p = pred.score().feature_dim();
  Matrix xs(static_cast<Eigen::Index>(a.xs.size()), p);
  for (std::size_t i = 0; i < a.xs.size(); ++i) {
    const auto v = parse_list(a.xs[i]);
    if (static_cast<Eigen::Index>(v.size()) != p) {
      throw DimensionError("--x needs " + std::to_string(p) + " comma-separated values");
    }
    for (Eigen::Index k = 0; k < p; ++k) xs(static_cast<Eigen::Index>(i), k) = v[k];
  }
  const auto alphas = a.alphas.empty() ? std::vector<double>{pred.alpha()} : parse_list(a.alphas);
  const ContourExport ex = export_contours(pred, xs, alphas, a.out, a.angles);
  if (a.json) {
    for (const auto& f : ex.files) {
      auto j = f;
      write_region_json(read_region_csv(f), j.replace_extension(".json"));
    }
  }
  for (const auto& f : ex.files) std::cout << f.string() << '\n';
  for (const auto& [i, alpha] : ex.nesting_warnings) {
    std::cerr << "warning: region for x#" << i << " at alpha=" << alpha << " is not nested\n";
  }
  return 0;
}

int finish_report(const BenchReport& report) {
  for (const auto& agg : report.aggregates) {
    std::cout << agg.method << ": coverage " << agg.coverage_mean << " +/- " << agg.coverage_se << ", size "
              << agg.size_mean << " +/- " << agg.size_se << " (" << agg.n_ok << " ok, " << agg.n_failed
              << " failed)\n";
  }
  for (const auto& r : report.rows) {
    if (!r.ok()) std::cerr << r.method << " seed " << r.seed << ": " << r.status << '\n';
  }
  return report.partial_failure() ? 2 : 0;
}

int run_bench(const BenchArgs& a) {
  BenchConfig cfg = load_bench_config(a.config);
  if (!a.out.empty()) cfg.output_dir = a.out;
  const BenchReport report = run_benchmark(cfg);
  write_report_csv(report, cfg.output_dir / "report.csv", !a.no_timing);
  write_report_json(report, cfg, cfg.output_dir / "summary.json");
  std::cout << "report: " << (cfg.output_dir / "report.csv").string() << '\n';
  return finish_report(report);
}

int run_sweep(const BenchArgs& a) {
  BenchConfig cfg = load_bench_config(a.config);
  if (!a.out.empty()) cfg.output_dir = a.out;
  const auto eps = a.eps.empty() ? default_sweep_epsilons() : parse_list(a.eps);
  std::vector<Eigen::Index> targets;
  if (a.targets.empty()) {
    targets = default_sweep_targets();
  } else {
    for (double t : parse_list(a.targets)) targets.push_back(static_cast<Eigen::Index>(t));
  }
  const auto cells = sweep(cfg, eps, targets);
  write_sweep_csv(cells, cfg.output_dir / "sweep.csv", !a.no_timing);
  std::cout << "sweep: " << (cfg.output_dir / "sweep.csv").string() << '\n';
  bool partial = false;
  for (const auto& c : cells) {
    const auto& agg = c.report.aggregates.front();
    std::cout << "eps=" << c.epsilon << " m=" << c.m << ": coverage " << agg.coverage_mean << ", size "
              << agg.size_mean << '\n';
    partial = partial || c.report.partial_failure();
  }
  return partial ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multivariate conformal prediction with entropic OT ranks"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Write a synthetic dataset as CSV");
  s->add_option("--kind", synth.kind, "gaussian | banana | mixture")->capture_default_str();
  s->add_option("--n", synth.n, "Number of rows")->capture_default_str();
  s->add_option("--d", synth.d, "Response dimension")->capture_default_str();
  s->add_option("--p", synth.p, "Feature dimension")->capture_default_str();
  s->add_option("--seed", synth.seed)->capture_default_str();
  s->add_option("--out", synth.out)->required();

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "Fit and calibrate one method, save the predictor as JSON");
  f->add_option("--config", fit.config, "Bench config supplying dataset and method settings");
  f->add_option("--data", fit.data, "CSV dataset (overrides the config dataset)");
  f->add_option("--target-dim", fit.target_dim, "Number of trailing response columns")->capture_default_str();
  f->add_option("--method", fit.method)->capture_default_str();
  f->add_option("--alpha", fit.alpha)->capture_default_str();
  f->add_option("--seed", fit.seed, "Split seed")->capture_default_str();
  f->add_option("--epsilon", fit.epsilon);
  f->add_option("--m", fit.m, "Target grid size");
  f->add_flag("--fit-on-calib", fit.fit_on_calib, "Fit the map on the calibration residuals");
  f->add_option("--out", fit.out)->capture_default_str();

  ContourArgs contour;
  auto* c = app.add_subcommand("contour", "Export 2D region polygons");
  c->add_option("--model", contour.model)->required();
  c->add_option("--x", contour.xs, "Query input, comma separated; repeatable")->required();
  c->add_option("--alphas", contour.alphas, "Comma-separated levels (default: the model's)");
  c->add_option("--angles", contour.angles)->capture_default_str();
  c->add_option("--out", contour.out, "Output directory")->capture_default_str();
  c->add_flag("--json", contour.json, "Also write GeoJSON-style polygons");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Benchmarks");
  b->require_subcommand(1);
  auto* br = b->add_subcommand("run", "Run every configured method over every seed");
  br->add_option("--config", bench.config)->required();
  br->add_option("--out", bench.out, "Output directory (overrides the config)");
  br->add_flag("--no-timing", bench.no_timing, "Omit timing columns from the CSV");
  auto* bs = b->add_subcommand("sweep", "otcp over an epsilon x grid-size table");
  bs->add_option("--config", bench.config)->required();
  bs->add_option("--eps", bench.eps, "Comma-separated epsilons");
  bs->add_option("--targets", bench.targets, "Comma-separated grid sizes");
  bs->add_option("--out", bench.out, "Output directory (overrides the config)");
  bs->add_flag("--no-timing", bench.no_timing, "Omit timing columns from the CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*s) return run_synth(synth);
    if (*f) return run_fit(fit);
    if (*c) return run_contour(contour);
    if (*br) return run_bench(bench);
    if (*bs) return run_sweep(bench);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
