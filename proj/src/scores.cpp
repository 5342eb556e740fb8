#include "otcp/scores.hpp"

#include "otcp/errors.hpp"

#include <cmath>

namespace otcp {

ScoreKind parse_score_kind(const std::string& name) {
  if (name == "abs_univariate") return ScoreKind::abs_univariate;
  if (name == "merge_l2") return ScoreKind::merge_l2;
  if (name == "merge_mahalanobis" || name == "mahalanobis") return ScoreKind::merge_mahalanobis;
  if (name == "mcp_max") return ScoreKind::mcp_max;
  if (name == "otcp") return ScoreKind::otcp;
  throw ParamError("unknown score kind '" + name + "'");
}

const char* to_string(ScoreKind kind) noexcept {
  switch (kind) {
    case ScoreKind::abs_univariate: return "abs_univariate";
    case ScoreKind::merge_l2: return "merge_l2";
    case ScoreKind::merge_mahalanobis: return "merge_mahalanobis";
    case ScoreKind::mcp_max: return "mcp_max";
    case ScoreKind::otcp: return "otcp";
  }
  return "?";
}

std::string origin_dataset(const ScoreMatrix& scores) {
  return scores.origin.substr(0, scores.origin.find('|'));
}

double default_covariance_ridge(const ScoreMatrix& residuals) {
  const Matrix& r = residuals.scores;
  if (r.rows() < 2) return 0.0;
  const Matrix centred = r.rowwise() - r.colwise().mean();
  const double trace = centred.squaredNorm() / static_cast<double>(r.rows() - 1);
  return 1e-6 * trace / static_cast<double>(r.cols());
}

CovarianceFactor estimate_covariance(const ScoreMatrix& residuals, double ridge) {
  const Matrix& r = residuals.scores;
  if (r.rows() < 1 || r.cols() < 1) throw DimensionError("covariance of an empty residual matrix");
  if (!(ridge >= 0.0)) throw ParamError("ridge must be >= 0");
  const Eigen::Index d = r.cols();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  if (r.rows() > 1) {
    const Matrix centred = r.rowwise() - r.colwise().mean();
    cov = centred.transpose() * centred / static_cast<double>(r.rows() - 1);
  }
  cov += ridge * Eigen::MatrixXd::Identity(d, d);
  cov = 0.5 * (cov + cov.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw SingularError("eigendecomposition failed");
  const Eigen::VectorXd vals = eig.eigenvalues();
  if (vals.minCoeff() <= 1e-12) {
    throw SingularError("residual covariance is singular (smallest eigenvalue " +
                        std::to_string(vals.minCoeff()) + ")");
  }
  const Eigen::MatrixXd& v = eig.eigenvectors();
  CovarianceFactor out;
  Eigen::MatrixXd inv_sqrt = v * vals.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
  Eigen::MatrixXd sqrt = v * vals.cwiseSqrt().asDiagonal() * v.transpose();
  out.inv_sqrt = 0.5 * (inv_sqrt + inv_sqrt.transpose());
  out.sqrt = 0.5 * (sqrt + sqrt.transpose());
  out.ridge = ridge;
  out.fitted_on = origin_dataset(residuals);
  return out;
}

ScoreFunction::ScoreFunction(ScoreKind kind, Regressor reg)
    : kind_(kind), regressor_(std::make_shared<const Regressor>(std::move(reg))) {
  if (!regressor_->fitted()) throw NotFitted("score function needs a fitted regressor");
}

ScoreFunction ScoreFunction::abs_univariate(Regressor reg) {
  if (reg.target_dim() != 1) throw DimensionError("abs_univariate needs a 1-dimensional target");
  return ScoreFunction(ScoreKind::abs_univariate, std::move(reg));
}

ScoreFunction ScoreFunction::merge_l2(Regressor reg) {
  return ScoreFunction(ScoreKind::merge_l2, std::move(reg));
}

ScoreFunction ScoreFunction::merge_mahalanobis(Regressor reg, CovarianceFactor factor) {
  if (factor.inv_sqrt.rows() != reg.target_dim() || factor.inv_sqrt.cols() != reg.target_dim()) {
    throw DimensionError("whitening factor does not match the target dimension");
  }
  ScoreFunction fn(ScoreKind::merge_mahalanobis, std::move(reg));
  fn.covariance_ = std::make_shared<const CovarianceFactor>(std::move(factor));
  return fn;
}

ScoreFunction ScoreFunction::mcp_max(Regressor reg, QuantilePredictor quantiles) {
  if (!quantiles.fitted()) throw NotFitted("mcp_max needs a fitted quantile predictor");
  if (quantiles.target_dim() != reg.target_dim() || quantiles.feature_dim() != reg.feature_dim()) {
    throw DimensionError("quantile predictor does not match the regressor");
  }
  ScoreFunction fn(ScoreKind::mcp_max, std::move(reg));
  fn.quantiles_ = std::make_shared<const QuantilePredictor>(std::move(quantiles));
  return fn;
}

ScoreFunction ScoreFunction::otcp(Regressor reg, std::shared_ptr<const EntropicMap> map) {
  if (!map || !map->fitted()) throw NotFitted("otcp needs a fitted entropic map");
  if (map->dim() != reg.target_dim()) throw DimensionError("map dimension does not match targets");
  ScoreFunction fn(ScoreKind::otcp, std::move(reg));
  fn.map_ = std::move(map);
  return fn;
}

const Regressor& ScoreFunction::regressor() const {
  if (!regressor_) throw NotFitted("score function is not fitted");
  return *regressor_;
}

const CovarianceFactor& ScoreFunction::covariance() const {
  if (!covariance_) throw MethodError("score has no covariance factor");
  return *covariance_;
}

const QuantilePredictor& ScoreFunction::quantiles() const {
  if (!quantiles_) throw MethodError("score has no quantile predictor");
  return *quantiles_;
}

const EntropicMap& ScoreFunction::map() const {
  if (!map_) throw MethodError("score has no entropic map");
  return *map_;
}

std::vector<std::string> ScoreFunction::fitted_on() const {
  std::vector<std::string> tags;
  if (regressor_) tags.push_back(regressor_->fitted_on());
  if (covariance_) tags.push_back(covariance_->fitted_on);
  if (quantiles_) tags.push_back(quantiles_->fitted_on());
  if (map_) tags.push_back(map_->fitted_on());
  return tags;
}

ScoreFunction::AtInput ScoreFunction::at(const Eigen::Ref<const Vector>& x) const {
  if (!fitted()) throw NotFitted("score function is not fitted");
  AtInput local;
  local.kind_ = kind_;
  local.covariance_ = covariance_;
  local.map_ = map_;
  local.center_ = regressor_->predict(x);
  if (kind_ == ScoreKind::mcp_max) local.bounds_ = quantiles_->predict_bounds(x);
  return local;
}

double ScoreFunction::AtInput::operator()(const Eigen::Ref<const Vector>& y) const {
  if (y.size() != center_.size()) throw DimensionError("response dimension does not match");
  switch (kind_) {
    case ScoreKind::abs_univariate: return std::abs(y(0) - center_(0));
    case ScoreKind::merge_l2: return (y - center_).norm();
    case ScoreKind::merge_mahalanobis: return (covariance_->inv_sqrt * (y - center_)).norm();
    case ScoreKind::mcp_max: {
      const auto& b = *bounds_;
      return (b.lower - y).cwiseMax(y - b.upper).maxCoeff();
    }
    case ScoreKind::otcp: return map_->rank(y - center_);
  }
  return 0.0;
}

Vector ScoreFunction::AtInput::batch(const Matrix& ys) const {
  if (ys.cols() != center_.size()) throw DimensionError("response dimension does not match");
  if (kind_ == ScoreKind::otcp) {
    const Matrix res = ys.rowwise() - center_.transpose();
    return map_->rank_batch(res);
  }
  Vector out(ys.rows());
  for (Eigen::Index i = 0; i < ys.rows(); ++i) out(i) = (*this)(ys.row(i).transpose());
  return out;
}

Vector ScoreFunction::evaluate(const Dataset& ds) const {
  if (!fitted()) throw NotFitted("score function is not fitted");
  if (ds.feature_dim() != feature_dim() || ds.target_dim() != target_dim()) {
    throw DimensionError("dataset shape does not match the score function");
  }
  Vector out(ds.size());
  if (kind_ == ScoreKind::otcp) {
    const Matrix res = ds.targets - regressor_->predict_batch(ds.features);
    return map_->rank_batch(res);
  }
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    out(i) = at(ds.features.row(i).transpose())(ds.targets.row(i).transpose());
  }
  return out;
}

}  // namespace otcp
