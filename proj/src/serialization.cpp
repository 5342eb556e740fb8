#include "otcp/serialization.hpp"

#include "otcp/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace otcp {
namespace {

using json = nlohmann::json;

json to_json(const Matrix& m) {
  return {{"rows", m.rows()},
          {"cols", m.cols()},
          {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

Matrix matrix_of(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw ParseError(0, 0, "matrix size mismatch");
  Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_of(const json& j) {
  const auto data = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(data.data(), static_cast<Eigen::Index>(data.size()));
}

json regressor_json(const Regressor& r) {
  json j = {{"kind", to_string(r.kind())}, {"fitted_on", r.fitted_on()}};
  if (r.kind() == RegressorKind::knn_mean) {
    j["k"] = r.params().k;
    j["features"] = to_json(r.train_features());
    j["targets"] = to_json(r.train_targets());
  } else {
    j["lambda"] = r.params().lambda;
    j["coefficients"] = to_json(r.coefficients());
    j["intercept"] = to_json(r.intercept());
  }
  return j;
}

Regressor regressor_of(const json& j) {
  const auto fitted_on = j.at("fitted_on").get<std::string>();
  if (parse_regressor_kind(j.at("kind").get<std::string>()) == RegressorKind::knn_mean) {
    return Regressor::from_knn_state(matrix_of(j.at("features")), matrix_of(j.at("targets")),
                                     j.at("k").get<Eigen::Index>(), fitted_on);
  }
  return Regressor::from_ridge_state(matrix_of(j.at("coefficients")), vector_of(j.at("intercept")),
                                     j.at("lambda").get<double>(), fitted_on);
}

json map_json(const EntropicMap& map) {
  const SphericalGrid& grid = map.grid();
  const DualPotentials& pot = map.potentials();
  return {{"fitted_on", map.fitted_on()},
          {"epsilon", map.epsilon()},
          {"standardization",
           {{"mean", to_json(map.standardization().mean)}, {"scale", to_json(map.standardization().scale)}}},
          {"grid",
           {{"n_radii", grid.factors.n_radii},
            {"n_directions", grid.factors.n_directions},
            {"n_origin", grid.factors.n_origin},
            {"mode", to_string(grid.mode)},
            {"seed", grid.seed},
            {"directions", to_json(grid.directions)}}},
          {"source", to_json(map.source())},
          {"f", to_json(pot.f)},
          {"g", to_json(pot.g)},
          {"iterations", pot.iterations},
          {"marginal_error", pot.marginal_error},
          {"converged", pot.converged}};
}

std::shared_ptr<const EntropicMap> map_of(const json& j) {
  const auto& gj = j.at("grid");
  GridFactorization factors;
  factors.n_radii = gj.at("n_radii").get<Eigen::Index>();
  factors.n_directions = gj.at("n_directions").get<Eigen::Index>();
  factors.n_origin = gj.at("n_origin").get<Eigen::Index>();
  auto grid = std::make_shared<const SphericalGrid>(
      grid_from_directions(matrix_of(gj.at("directions")), factors,
                           parse_direction_mode(gj.at("mode").get<std::string>()), gj.at("seed").get<Seed>()));

  auto prob = std::make_shared<OtProblem>();
  prob->source = matrix_of(j.at("source"));
  prob->target = grid->points;
  prob->epsilon = j.at("epsilon").get<double>();
  prob->validate();
  DualPotentials pot = make_potentials(prob, vector_of(j.at("f")), vector_of(j.at("g")));
  pot.iterations = j.at("iterations").get<int>();
  pot.marginal_error = j.at("marginal_error").get<double>();
  pot.converged = j.at("converged").get<bool>();

  Standardization st{vector_of(j.at("standardization").at("mean")),
                     vector_of(j.at("standardization").at("scale"))};
  return std::make_shared<const EntropicMap>(std::move(st), std::move(grid), std::move(pot),
                                             j.at("fitted_on").get<std::string>());
}

json score_json(const ScoreFunction& fn) {
  json j = {{"kind", to_string(fn.kind())}, {"regressor", regressor_json(fn.regressor())}};
  switch (fn.kind()) {
    case ScoreKind::merge_mahalanobis: {
      const CovarianceFactor& c = fn.covariance();
      j["covariance"] = {{"inv_sqrt", to_json(c.inv_sqrt)},
                         {"sqrt", to_json(c.sqrt)},
                         {"ridge", c.ridge},
                         {"fitted_on", c.fitted_on}};
      break;
    }
    case ScoreKind::mcp_max: {
      const QuantilePredictor& q = fn.quantiles();
      j["quantiles"] = {{"k", q.k()},
                        {"alpha_lower", q.alpha_lower()},
                        {"alpha_upper", q.alpha_upper()},
                        {"fitted_on", q.fitted_on()},
                        {"features", to_json(q.train_features())},
                        {"targets", to_json(q.train_targets())}};
      break;
    }
    case ScoreKind::otcp:
      j["map"] = map_json(fn.map());
      break;
    default:
      break;
  }
  return j;
}

ScoreFunction score_of(const json& j) {
  Regressor reg = regressor_of(j.at("regressor"));
  switch (parse_score_kind(j.at("kind").get<std::string>())) {
    case ScoreKind::abs_univariate:
      return ScoreFunction::abs_univariate(std::move(reg));
    case ScoreKind::merge_l2:
      return ScoreFunction::merge_l2(std::move(reg));
    case ScoreKind::merge_mahalanobis: {
      const auto& c = j.at("covariance");
      CovarianceFactor f{matrix_of(c.at("inv_sqrt")), matrix_of(c.at("sqrt")), c.at("ridge").get<double>(),
                         c.at("fitted_on").get<std::string>()};
      return ScoreFunction::merge_mahalanobis(std::move(reg), std::move(f));
    }
    case ScoreKind::mcp_max: {
      const auto& q = j.at("quantiles");
      QuantilePredictor qp(matrix_of(q.at("features")), matrix_of(q.at("targets")),
                           q.at("k").get<Eigen::Index>(), q.at("alpha_lower").get<double>(),
                           q.at("alpha_upper").get<double>(), q.at("fitted_on").get<std::string>());
      return ScoreFunction::mcp_max(std::move(reg), std::move(qp));
    }
    case ScoreKind::otcp:
      return ScoreFunction::otcp(std::move(reg), map_of(j.at("map")));
  }
  throw MethodError("unknown score kind");
}

}  // namespace

std::string predictor_to_json(const CalibratedPredictor& pred) {
  json j = {{"format", "otcp-predictor"},
            {"version", kPredictorFormatVersion},
            {"alpha", pred.alpha()},
            {"cal_scores", pred.cal_scores()},
            {"residual_halfwidth", to_json(pred.residual_halfwidth())},
            {"score", score_json(pred.score())}};
  if (pred.pit_interval()) {
    j["pit_interval"] = {pred.pit_interval()->lower, pred.pit_interval()->upper};
  }
  return j.dump();
}

CalibratedPredictor predictor_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(0, 0, e.what());
  }
  try {
    if (j.value("format", "") != "otcp-predictor") throw ParseError(0, 0, "not a predictor document");
    const int version = j.at("version").get<int>();
    if (version != kPredictorFormatVersion) {
      throw ParseError(0, 0, "unsupported predictor version " + std::to_string(version));
    }
    std::optional<PitInterval> pit;
    if (j.contains("pit_interval")) {
      const auto ab = j.at("pit_interval").get<std::vector<double>>();
      if (ab.size() != 2) throw ParseError(0, 0, "pit_interval needs two endpoints");
      pit = PitInterval{ab[0], ab[1]};
    }
    return CalibratedPredictor(score_of(j.at("score")), j.at("alpha").get<double>(),
                               j.at("cal_scores").get<std::vector<double>>(),
                               vector_of(j.at("residual_halfwidth")), pit);
  } catch (const json::exception& e) {
    throw ParseError(0, 0, std::string("malformed predictor: ") + e.what());
  }
}

void save_predictor(const CalibratedPredictor& pred, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << predictor_to_json(pred) << '\n';
}

CalibratedPredictor load_predictor(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound(path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return predictor_from_json(ss.str());
}

}  // namespace otcp
