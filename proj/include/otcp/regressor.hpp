#pragma once

#include "otcp/dataset.hpp"

#include <memory>
#include <string>
#include <vector>

namespace otcp {

/// Indices of the k nearest rows of `points` to `x` (squared Euclidean,
/// compared exactly, ties to the lower index), closest first.
std::vector<Eigen::Index> nearest_indices(const Matrix& points, const Eigen::Ref<const Vector>& x,
                                          Eigen::Index k);

enum class RegressorKind { knn_mean, ridge_linear };

RegressorKind parse_regressor_kind(const std::string& name);
const char* to_string(RegressorKind kind) noexcept;

struct RegressorParams {
  RegressorKind kind = RegressorKind::ridge_linear;
  Eigen::Index k = 10;   // knn_mean
  double lambda = 0.0;   // ridge_linear
};

/// Point predictor y_hat(x). Immutable once fitted; copies share state.
class Regressor {
 public:
  Regressor() = default;

  RegressorKind kind() const noexcept { return kind_; }
  const RegressorParams& params() const noexcept { return params_; }
  bool fitted() const noexcept { return feature_dim_ > 0; }
  Eigen::Index feature_dim() const noexcept { return feature_dim_; }
  Eigen::Index target_dim() const noexcept { return target_dim_; }
  /// Provenance tag of the training data.
  const std::string& fitted_on() const noexcept { return fitted_on_; }

  Vector predict(const Eigen::Ref<const Vector>& x) const;
  Matrix predict_batch(const Matrix& xs) const;

  // knn state
  const Matrix& train_features() const { return *train_x_; }
  const Matrix& train_targets() const { return *train_y_; }
  // ridge state
  const Matrix& coefficients() const noexcept { return coef_; }
  const Vector& intercept() const noexcept { return intercept_; }

  static Regressor from_knn_state(Matrix features, Matrix targets, Eigen::Index k,
                                  std::string fitted_on);
  static Regressor from_ridge_state(Matrix coef, Vector intercept, double lambda,
                                    std::string fitted_on);

  friend Regressor fit_regressor(const Dataset& train, const RegressorParams& params);

 private:
  RegressorKind kind_ = RegressorKind::knn_mean;
  RegressorParams params_;
  Eigen::Index feature_dim_ = 0;
  Eigen::Index target_dim_ = 0;
  std::string fitted_on_;
  std::shared_ptr<const Matrix> train_x_;
  std::shared_ptr<const Matrix> train_y_;
  Matrix coef_;  // p x d
  Vector intercept_;
};

Regressor fit_regressor(const Dataset& train, const RegressorParams& params);

/// Per-dimension lower/upper conditional quantiles from the k nearest neighbours.
class QuantilePredictor {
 public:
  QuantilePredictor() = default;
  QuantilePredictor(Matrix features, Matrix targets, Eigen::Index k, double alpha_lower,
                    double alpha_upper, std::string fitted_on);

  struct Bounds {
    Vector lower;
    Vector upper;
  };

  Bounds predict_bounds(const Eigen::Ref<const Vector>& x) const;

  bool fitted() const noexcept { return static_cast<bool>(train_x_); }
  Eigen::Index k() const noexcept { return k_; }
  double alpha_lower() const noexcept { return alpha_lower_; }
  double alpha_upper() const noexcept { return alpha_upper_; }
  Eigen::Index feature_dim() const noexcept { return train_x_ ? train_x_->cols() : 0; }
  Eigen::Index target_dim() const noexcept { return train_y_ ? train_y_->cols() : 0; }
  const std::string& fitted_on() const noexcept { return fitted_on_; }
  const Matrix& train_features() const { return *train_x_; }
  const Matrix& train_targets() const { return *train_y_; }

 private:
  std::shared_ptr<const Matrix> train_x_;
  std::shared_ptr<const Matrix> train_y_;
  Eigen::Index k_ = 0;
  double alpha_lower_ = 0.0;
  double alpha_upper_ = 1.0;
  std::string fitted_on_;
};

QuantilePredictor fit_quantile_predictor(const Dataset& train, Eigen::Index k, double alpha_lower,
                                         double alpha_upper);

/// Linear interpolation between order statistics (type 7). `sorted` must be ascending.
double interpolated_quantile(const std::vector<double>& sorted, double level);

/// Signed residuals y_i - y_hat(x_i), one row per sample.
struct ScoreMatrix {
  Matrix scores;
  std::string origin;
};

ScoreMatrix residuals(const Dataset& ds, const Regressor& reg);

}  // namespace otcp
