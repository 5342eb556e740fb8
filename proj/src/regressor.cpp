#include "otcp/regressor.hpp"

#include "otcp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace otcp {

std::vector<Eigen::Index> nearest_indices(const Matrix& points, const Eigen::Ref<const Vector>& x,
                                          Eigen::Index k) {
  const Eigen::Index n = points.rows();
  if (k < 1 || k > n) throw ParamError("k must lie in [1, n_train]");
  if (x.size() != points.cols()) throw DimensionError("query dimension does not match features");
  std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    dist[static_cast<std::size_t>(i)] = {(points.row(i).transpose() - x).squaredNorm(), i};
  }
  const auto kth = dist.begin() + k;
  std::partial_sort(dist.begin(), kth, dist.end());
  std::vector<Eigen::Index> out;
  out.reserve(static_cast<std::size_t>(k));
  for (auto it = dist.begin(); it != kth; ++it) out.push_back(it->second);
  return out;
}

RegressorKind parse_regressor_kind(const std::string& name) {
  if (name == "knn_mean") return RegressorKind::knn_mean;
  if (name == "ridge_linear") return RegressorKind::ridge_linear;
  throw ParamError("unknown regressor kind '" + name + "'");
}

const char* to_string(RegressorKind kind) noexcept {
  return kind == RegressorKind::knn_mean ? "knn_mean" : "ridge_linear";
}

Vector Regressor::predict(const Eigen::Ref<const Vector>& x) const {
  if (!fitted()) throw NotFitted("regressor is not fitted");
  if (x.size() != feature_dim_) throw DimensionError("query dimension does not match features");
  if (kind_ == RegressorKind::knn_mean) {
    const auto idx = nearest_indices(*train_x_, x, params_.k);
    Vector acc = Vector::Zero(target_dim_);
    for (auto i : idx) acc += train_y_->row(i).transpose();
    return acc / static_cast<double>(idx.size());
  }
  return coef_.transpose() * x + intercept_;
}

Matrix Regressor::predict_batch(const Matrix& xs) const {
  Matrix out(xs.rows(), target_dim_);
  for (Eigen::Index i = 0; i < xs.rows(); ++i) out.row(i) = predict(xs.row(i).transpose()).transpose();
  return out;
}

Regressor Regressor::from_knn_state(Matrix features, Matrix targets, Eigen::Index k,
                                    std::string fitted_on) {
  if (features.rows() != targets.rows() || features.rows() < 1) {
    throw DimensionError("knn state has inconsistent shapes");
  }
  if (k < 1 || k > features.rows()) throw ParamError("k must lie in [1, n_train]");
  Regressor r;
  r.kind_ = RegressorKind::knn_mean;
  r.params_.kind = RegressorKind::knn_mean;
  r.params_.k = k;
  r.feature_dim_ = features.cols();
  r.target_dim_ = targets.cols();
  r.fitted_on_ = std::move(fitted_on);
  r.train_x_ = std::make_shared<const Matrix>(std::move(features));
  r.train_y_ = std::make_shared<const Matrix>(std::move(targets));
  return r;
}

Regressor Regressor::from_ridge_state(Matrix coef, Vector intercept, double lambda,
                                      std::string fitted_on) {
  if (coef.cols() != intercept.size()) throw DimensionError("ridge state has inconsistent shapes");
  Regressor r;
  r.kind_ = RegressorKind::ridge_linear;
  r.params_.kind = RegressorKind::ridge_linear;
  r.params_.lambda = lambda;
  r.feature_dim_ = coef.rows();
  r.target_dim_ = coef.cols();
  r.fitted_on_ = std::move(fitted_on);
  r.coef_ = std::move(coef);
  r.intercept_ = std::move(intercept);
  return r;
}

Regressor fit_regressor(const Dataset& train, const RegressorParams& params) {
  train.validate();
  if (params.kind == RegressorKind::knn_mean) {
    if (params.k > train.size()) {
      throw ParamError("k=" + std::to_string(params.k) + " exceeds n_train=" +
                       std::to_string(train.size()));
    }
    return Regressor::from_knn_state(train.features, train.targets, params.k, train.provenance);
  }
  if (!(params.lambda >= 0.0)) throw ParamError("ridge lambda must be >= 0");
  // Unpenalized intercept: centre, then least squares on [Xc; sqrt(lambda) I].
  const Eigen::Index n = train.size();
  const Eigen::Index p = train.feature_dim();
  const Eigen::RowVectorXd x_mean = train.features.colwise().mean();
  const Eigen::RowVectorXd y_mean = train.targets.colwise().mean();
  Eigen::MatrixXd a(n + p, p);
  a.topRows(n) = train.features.rowwise() - x_mean;
  a.bottomRows(p) = std::sqrt(params.lambda) * Eigen::MatrixXd::Identity(p, p);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n + p, train.target_dim());
  b.topRows(n) = train.targets.rowwise() - y_mean;
  const Eigen::MatrixXd coef = a.colPivHouseholderQr().solve(b);
  const Vector intercept = y_mean.transpose() - coef.transpose() * x_mean.transpose();
  return Regressor::from_ridge_state(coef, intercept, params.lambda, train.provenance);
}

double interpolated_quantile(const std::vector<double>& sorted, double level) {
  if (sorted.empty()) throw ParamError("quantile of an empty sample");
  const double h = static_cast<double>(sorted.size() - 1) * level;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

QuantilePredictor::QuantilePredictor(Matrix features, Matrix targets, Eigen::Index k,
                                     double alpha_lower, double alpha_upper,
                                     std::string fitted_on)
    : k_(k), alpha_lower_(alpha_lower), alpha_upper_(alpha_upper), fitted_on_(std::move(fitted_on)) {
  if (!(alpha_lower >= 0.0 && alpha_lower < alpha_upper && alpha_upper <= 1.0)) {
    throw ParamError("quantile levels must satisfy 0 <= alpha_l < alpha_u <= 1");
  }
  if (features.rows() != targets.rows() || features.rows() < 1) {
    throw DimensionError("quantile predictor state has inconsistent shapes");
  }
  if (k < 1 || k > features.rows()) {
    throw ParamError("k=" + std::to_string(k) + " must lie in [1, n_train=" +
                     std::to_string(features.rows()) + "]");
  }
  train_x_ = std::make_shared<const Matrix>(std::move(features));
  train_y_ = std::make_shared<const Matrix>(std::move(targets));
}

QuantilePredictor::Bounds QuantilePredictor::predict_bounds(const Eigen::Ref<const Vector>& x) const {
  if (!fitted()) throw NotFitted("quantile predictor is not fitted");
  const auto idx = nearest_indices(*train_x_, x, k_);
  const Eigen::Index d = train_y_->cols();
  Bounds b{Vector(d), Vector(d)};
  std::vector<double> column(idx.size());
  for (Eigen::Index j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < idx.size(); ++i) column[i] = (*train_y_)(idx[i], j);
    std::sort(column.begin(), column.end());
    b.lower(j) = interpolated_quantile(column, alpha_lower_);
    b.upper(j) = interpolated_quantile(column, alpha_upper_);
  }
  return b;
}

QuantilePredictor fit_quantile_predictor(const Dataset& train, Eigen::Index k, double alpha_lower,
                                         double alpha_upper) {
  train.validate();
  return QuantilePredictor(train.features, train.targets, k, alpha_lower, alpha_upper,
                           train.provenance);
}

ScoreMatrix residuals(const Dataset& ds, const Regressor& reg) {
  if (!reg.fitted()) throw NotFitted("regressor is not fitted");
  if (ds.feature_dim() != reg.feature_dim() || ds.target_dim() != reg.target_dim()) {
    throw DimensionError("dataset shape does not match the regressor");
  }
  ScoreMatrix out;
  out.scores = ds.targets - reg.predict_batch(ds.features);
  out.origin = ds.provenance + "|" + to_string(reg.kind());
  return out;
}

}  // namespace otcp
