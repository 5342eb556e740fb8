#include "otcp/bench.hpp"

#include "otcp/errors.hpp"
#include "otcp/metrics.hpp"
#include "otcp/region.hpp"
#include "otcp/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace otcp {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kDataStream = 0xDA7A;
constexpr std::uint64_t kGridStream = 0x6A1D;
constexpr std::uint64_t kSizeStream = 0x512E;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!ok.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

Matrix matrix_from_json(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.empty()) return {};
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw ConfigError("ragged matrix in config");
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
  }
  return m;
}

template <class T>
void read_opt(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string alpha_tag(double a) {
  std::ostringstream os;
  os << a;
  return os.str();
}

}  // namespace

void BenchConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(otcp.epsilon > 0.0)) throw ConfigError("otcp.epsilon must be positive");
  if (otcp.m < 2) throw ConfigError("otcp.m must be at least 2");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (methods.empty()) throw ConfigError("at least one method is required");
  if (mc_samples < 1) throw ConfigError("mc_samples must be at least 1");
  if (size_points < 0) throw ConfigError("size_points must be >= 0");
  if (!(box_inflation > 0.0)) throw ConfigError("box_inflation must be positive");
  if (!csv_path && (synthetic.n < 4 || synthetic.d < 1)) throw ConfigError("synthetic n >= 4, d >= 1");
}

BenchConfig bench_config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  BenchConfig cfg;
  try {
    reject_unknown(j, {"dataset", "methods", "alpha", "split", "seeds", "regressor", "otcp", "mcp",
                       "mahalanobis", "mc_samples", "size_points", "box_inflation", "output_dir"},
                   "config");
    if (j.contains("dataset")) {
      const auto& ds = j.at("dataset");
      reject_unknown(ds, {"csv", "target_dim", "synthetic"}, "dataset");
      if (ds.contains("csv")) {
        cfg.csv_path = ds.at("csv").get<std::string>();
        read_opt(ds, "target_dim", cfg.csv_target_dim);
      }
      if (ds.contains("synthetic")) {
        const auto& s = ds.at("synthetic");
        reject_unknown(s, {"kind", "n", "d", "p", "covariance", "means", "weights", "curvature",
                           "banana_noise"},
                       "dataset.synthetic");
        if (s.contains("kind")) cfg.synthetic.kind = parse_synth_kind(s.at("kind").get<std::string>());
        read_opt(s, "n", cfg.synthetic.n);
        read_opt(s, "d", cfg.synthetic.d);
        read_opt(s, "p", cfg.synthetic.params.p);
        if (s.contains("covariance")) cfg.synthetic.params.covariance = matrix_from_json(s.at("covariance"));
        if (s.contains("means")) cfg.synthetic.params.means = matrix_from_json(s.at("means"));
        read_opt(s, "weights", cfg.synthetic.params.weights);
        read_opt(s, "curvature", cfg.synthetic.params.curvature);
        read_opt(s, "banana_noise", cfg.synthetic.params.banana_noise);
      }
    }
    if (j.contains("methods")) {
      cfg.methods.clear();
      for (const auto& m : j.at("methods")) cfg.methods.push_back(parse_score_kind(m.get<std::string>()));
    }
    read_opt(j, "alpha", cfg.alpha);
    if (j.contains("split")) {
      const auto& sp = j.at("split");
      reject_unknown(sp, {"fractions"}, "split");
      const auto f = sp.at("fractions").get<std::vector<double>>();
      if (f.size() != 4) throw ConfigError("split.fractions needs 4 entries");
      std::copy(f.begin(), f.end(), cfg.split_fractions.begin());
    }
    if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<Seed>>();
    if (j.contains("regressor")) {
      const auto& r = j.at("regressor");
      reject_unknown(r, {"kind", "k", "lambda"}, "regressor");
      if (r.contains("kind")) cfg.regressor.kind = parse_regressor_kind(r.at("kind").get<std::string>());
      read_opt(r, "k", cfg.regressor.k);
      read_opt(r, "lambda", cfg.regressor.lambda);
    }
    if (j.contains("otcp")) {
      const auto& o = j.at("otcp");
      reject_unknown(o, {"epsilon", "m", "grid_mode", "tol", "max_iter", "fit_on_calib"}, "otcp");
      read_opt(o, "epsilon", cfg.otcp.epsilon);
      read_opt(o, "m", cfg.otcp.m);
      if (o.contains("grid_mode")) cfg.otcp.grid_mode = parse_direction_mode(o.at("grid_mode").get<std::string>());
      read_opt(o, "tol", cfg.otcp.tol);
      read_opt(o, "max_iter", cfg.otcp.max_iter);
      read_opt(o, "fit_on_calib", cfg.otcp.fit_on_calib);
    }
    if (j.contains("mcp")) {
      const auto& m = j.at("mcp");
      reject_unknown(m, {"k", "alpha_lower", "alpha_upper"}, "mcp");
      read_opt(m, "k", cfg.mcp.k);
      read_opt(m, "alpha_lower", cfg.mcp.alpha_lower);
      read_opt(m, "alpha_upper", cfg.mcp.alpha_upper);
    }
    if (j.contains("mahalanobis")) {
      const auto& m = j.at("mahalanobis");
      reject_unknown(m, {"ridge"}, "mahalanobis");
      if (m.contains("ridge")) cfg.mahalanobis_ridge = m.at("ridge").get<double>();
    }
    read_opt(j, "mc_samples", cfg.mc_samples);
    read_opt(j, "size_points", cfg.size_points);
    read_opt(j, "box_inflation", cfg.box_inflation);
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

BenchConfig load_bench_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound(path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  BenchConfig cfg = bench_config_from_json_text(ss.str());
  if (cfg.csv_path && cfg.csv_path->is_relative()) cfg.csv_path = path.parent_path() / *cfg.csv_path;
  return cfg;
}

bool BenchReport::partial_failure() const {
  return std::any_of(rows.begin(), rows.end(), [](const BenchRow& r) { return !r.ok(); });
}

std::pair<double, double> mean_and_se(const std::vector<double>& v) {
  if (v.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return {mean, sd / std::sqrt(static_cast<double>(v.size()))};
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

std::vector<BenchAggregate> aggregate_rows(const std::vector<BenchRow>& rows) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const BenchRow*>> by_method;
  for (const auto& r : rows) {
    if (!by_method.count(r.method)) order.push_back(r.method);
    by_method[r.method].push_back(&r);
  }
  std::vector<BenchAggregate> out;
  for (const auto& name : order) {
    BenchAggregate a;
    a.method = name;
    std::vector<double> cov, size;
    for (const BenchRow* r : by_method[name]) {
      if (!r->ok()) {
        ++a.n_failed;
        continue;
      }
      ++a.n_ok;
      cov.push_back(r->coverage);
      if (!std::isnan(r->size)) size.push_back(r->size);
    }
    std::tie(a.coverage_mean, a.coverage_se) = mean_and_se(cov);
    std::tie(a.size_mean, a.size_se) = mean_and_se(size);
    a.size_median = median(size);
    out.push_back(a);
  }
  return out;
}

Dataset bench_dataset(const BenchConfig& cfg, Seed seed) {
  if (cfg.csv_path) return load_dataset_csv(*cfg.csv_path, cfg.csv_target_dim);
  return synth_dataset(cfg.synthetic.kind, cfg.synthetic.n, cfg.synthetic.d, cfg.synthetic.params,
                       derive_seed(seed, {kDataStream}));
}

FittedMethod fit_method(const BenchConfig& cfg, ScoreKind kind, const Splits& splits,
                        const Regressor& reg, Seed seed) {
  FittedMethod fm;
  switch (kind) {
    case ScoreKind::abs_univariate:
      fm.score = ScoreFunction::abs_univariate(reg);
      break;
    case ScoreKind::merge_l2:
      fm.score = ScoreFunction::merge_l2(reg);
      break;
    case ScoreKind::merge_mahalanobis: {
      const ScoreMatrix res = residuals(splits.ot_fit.size() > 0 ? splits.ot_fit : splits.train, reg);
      const double ridge = cfg.mahalanobis_ridge.value_or(default_covariance_ridge(res));
      fm.score = ScoreFunction::merge_mahalanobis(reg, estimate_covariance(res, ridge));
      break;
    }
    case ScoreKind::mcp_max:
      fm.score = ScoreFunction::mcp_max(
          reg, fit_quantile_predictor(splits.train, cfg.mcp.k, cfg.mcp.alpha_lower, cfg.mcp.alpha_upper));
      break;
    case ScoreKind::otcp: {
      const Dataset& fit_on = cfg.otcp.fit_on_calib ? splits.calib : splits.ot_fit;
      if (fit_on.size() == 0) throw SplitError("otcp needs a nonempty map-fitting split");
      const ScoreMatrix res = residuals(fit_on, reg);
      auto grid = std::make_shared<const SphericalGrid>(
          build_spherical_grid(cfg.otcp.m, static_cast<int>(reg.target_dim()), std::nullopt,
                               cfg.otcp.grid_mode, derive_seed(seed, {kGridStream})));
      SinkhornOptions opts;
      opts.tol = cfg.otcp.tol;
      opts.max_iter = cfg.otcp.max_iter;
      auto map = std::make_shared<const EntropicMap>(
          EntropicMap::fit(res.scores, grid, cfg.otcp.epsilon, opts, fit_on.provenance));
      fm.converged = map->potentials().converged;
      fm.score = ScoreFunction::otcp(reg, map);
      fm.calibrate_options.allow_provenance_overlap = cfg.otcp.fit_on_calib;
      break;
    }
  }
  return fm;
}

BenchReport run_benchmark(const BenchConfig& cfg) {
  cfg.validate();
  BenchReport report;
  std::optional<Dataset> shared_csv;
  if (cfg.csv_path) shared_csv = load_dataset_csv(*cfg.csv_path, cfg.csv_target_dim);

  for (Seed seed : cfg.seeds) {
    const Dataset data = shared_csv ? *shared_csv : bench_dataset(cfg, seed);
    const Splits splits = split_dataset(data, SplitSpec{cfg.split_fractions, seed});

    auto t0 = Clock::now();
    std::optional<Regressor> reg;
    std::string reg_error;
    try {
      reg = fit_regressor(splits.train, cfg.regressor);
    } catch (const std::exception& e) {
      reg_error = e.what();
    }
    const double reg_ms = ms_since(t0);

    for (ScoreKind kind : cfg.methods) {
      BenchRow row;
      row.method = to_string(kind);
      row.seed = seed;
      if (kind == ScoreKind::otcp) {
        row.epsilon = cfg.otcp.epsilon;
        row.m = cfg.otcp.m;
      }
      row.n_cal = splits.calib.size();
      row.n_test = splits.test.size();
      row.size = std::numeric_limits<double>::quiet_NaN();
      try {
        if (!reg) throw Error("regressor: " + reg_error);
        t0 = Clock::now();
        FittedMethod fm = fit_method(cfg, kind, splits, *reg, seed);
        row.fit_ms = reg_ms + ms_since(t0);
        row.converged = fm.converged;

        t0 = Clock::now();
        const CalibratedPredictor pred = calibrate(fm.score, splits.calib, cfg.alpha, fm.calibrate_options);
        row.calibrate_ms = ms_since(t0);
        row.threshold = pred.threshold();

        t0 = Clock::now();
        row.coverage = marginal_coverage(pred, splits.test);
        const Eigen::Index n_size = std::min<Eigen::Index>(cfg.size_points, splits.test.size());
        if (n_size > 0) {
          double total = 0.0;
          for (Eigen::Index i = 0; i < n_size; ++i) {
            const Vector x = splits.test.features.row(i).transpose();
            const Box box = default_size_box(pred, x, cfg.box_inflation);
            total += region_size_mc(pred, x, box, cfg.mc_samples,
                                    derive_seed(seed, {kSizeStream, static_cast<std::uint64_t>(kind),
                                                       static_cast<std::uint64_t>(i)}));
          }
          row.size = total / static_cast<double>(n_size);
        }
        row.predict_ms = ms_since(t0);
      } catch (const std::exception& e) {
        row.status = std::string("error: ") + e.what();
      }
      report.rows.push_back(std::move(row));
    }
  }
  report.aggregates = aggregate_rows(report.rows);
  return report;
}

std::vector<double> default_sweep_epsilons() { return {0.001, 0.01, 0.1, 1.0}; }
std::vector<Eigen::Index> default_sweep_targets() { return {4096, 8192, 16384, 32768}; }

std::vector<SweepCell> sweep(const BenchConfig& cfg, const std::vector<double>& epsilons,
                             const std::vector<Eigen::Index>& targets) {
  if (epsilons.empty() || targets.empty()) throw ConfigError("sweep lists must be nonempty");
  std::vector<SweepCell> cells;
  for (double eps : epsilons) {
    for (Eigen::Index m : targets) {
      BenchConfig c = cfg;
      c.methods = {ScoreKind::otcp};
      c.otcp.epsilon = eps;
      c.otcp.m = m;
      cells.push_back({eps, m, run_benchmark(c)});
    }
  }
  return cells;
}

namespace {

void write_row(std::ostream& out, const BenchRow& r, bool timing) {
  out << r.method << ',' << r.seed << ',' << fmt(r.epsilon) << ',' << r.m << ',';
  std::string status = r.status;
  std::replace(status.begin(), status.end(), '"', '\'');
  out << '"' << status << "\"," << fmt(r.coverage) << ',' << fmt(r.size) << ',' << fmt(r.threshold)
      << ',' << r.n_cal << ',' << r.n_test << ',' << (r.converged ? 1 : 0);
  if (timing) out << ',' << fmt(r.fit_ms) << ',' << fmt(r.calibrate_ms) << ',' << fmt(r.predict_ms);
  out << '\n';
}

const char* kRowHeader = "method,seed,epsilon,m,status,coverage,size,threshold,n_cal,n_test,converged";
const char* kTimingHeader = ",fit_ms,calibrate_ms,predict_ms";

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

json nan_safe(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

void write_report_csv(const BenchReport& report, const std::filesystem::path& path, bool timing) {
  auto out = open_out(path);
  out << kRowHeader << (timing ? kTimingHeader : "") << '\n';
  for (const auto& r : report.rows) write_row(out, r, timing);
}

void write_report_json(const BenchReport& report, const BenchConfig& cfg,
                       const std::filesystem::path& path) {
  json aggs = json::array();
  for (const auto& a : report.aggregates) {
    aggs.push_back({{"method", a.method},
                    {"n_ok", a.n_ok},
                    {"n_failed", a.n_failed},
                    {"coverage_mean", nan_safe(a.coverage_mean)},
                    {"coverage_se", nan_safe(a.coverage_se)},
                    {"size_mean", nan_safe(a.size_mean)},
                    {"size_se", nan_safe(a.size_se)},
                    {"size_median", nan_safe(a.size_median)}});
  }
  json failures = json::array();
  for (const auto& r : report.rows) {
    if (!r.ok()) failures.push_back({{"method", r.method}, {"seed", r.seed}, {"status", r.status}});
  }
  json doc = {{"alpha", cfg.alpha},
              {"seeds", cfg.seeds},
              {"partial_failure", report.partial_failure()},
              {"aggregates", aggs},
              {"failures", failures}};
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

void write_sweep_csv(const std::vector<SweepCell>& cells, const std::filesystem::path& path, bool timing) {
  auto out = open_out(path);
  out << kRowHeader << (timing ? kTimingHeader : "") << '\n';
  for (const auto& c : cells) {
    for (const auto& r : c.report.rows) write_row(out, r, timing);
  }
}

ContourExport export_contours(const CalibratedPredictor& pred, const Matrix& xs,
                              const std::vector<double>& alphas, const std::filesystem::path& out_dir,
                              int n_angles) {
  if (pred.score().target_dim() != 2) throw DimensionError("contour export needs a 2D response");
  std::vector<double> sorted = alphas;
  std::sort(sorted.begin(), sorted.end());
  std::filesystem::create_directories(out_dir);
  ContourExport result;
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    const Vector x = xs.row(i).transpose();
    std::optional<Region2D> outer;
    for (double a : sorted) {
      const Region2D region = prediction_region_2d(pred.with_alpha(a), x, n_angles);
      const auto file = out_dir / ("region_x" + std::to_string(i) + "_a" + alpha_tag(a) + ".csv");
      write_region_csv(region, file);
      result.files.push_back(file);
      if (outer && region.threshold < outer->threshold) {
        for (Eigen::Index k = 0; k + 1 < region.contour.rows(); ++k) {
          if (!point_in_polygon(outer->contour, region.contour.row(k).transpose())) {
            result.nesting_warnings.emplace_back(static_cast<std::size_t>(i), a);
            break;
          }
        }
      }
      outer = region;
    }
  }
  return result;
}

}  // namespace otcp
