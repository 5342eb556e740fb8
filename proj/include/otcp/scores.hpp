#pragma once

#include "otcp/entropic_map.hpp"
#include "otcp/regressor.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace otcp {

enum class ScoreKind { abs_univariate, merge_l2, merge_mahalanobis, mcp_max, otcp };

ScoreKind parse_score_kind(const std::string& name);
const char* to_string(ScoreKind kind) noexcept;

/// Whitening factor Sigma^{-1/2} of a residual covariance (plus Sigma^{1/2} for drawing ellipses).
struct CovarianceFactor {
  Matrix inv_sqrt;
  Matrix sqrt;
  double ridge = 0.0;
  std::string fitted_on;
};

/// 1e-6 * trace(Sigma) / d, the ridge used when none is configured.
double default_covariance_ridge(const ScoreMatrix& residuals);

/// Sample covariance + ridge * I, inverted through a symmetric eigendecomposition.
CovarianceFactor estimate_covariance(const ScoreMatrix& residuals, double ridge);

/// Dataset part of a ScoreMatrix origin tag ("<dataset>|<model>").
std::string origin_dataset(const ScoreMatrix& scores);

/// A scalar conformity score S(x, y). Every kind carries the point regressor,
/// which also fixes the centre y_hat(x) used for regions and volume boxes.
class ScoreFunction {
 public:
  ScoreFunction() = default;

  static ScoreFunction abs_univariate(Regressor reg);
  static ScoreFunction merge_l2(Regressor reg);
  static ScoreFunction merge_mahalanobis(Regressor reg, CovarianceFactor factor);
  static ScoreFunction mcp_max(Regressor reg, QuantilePredictor quantiles);
  static ScoreFunction otcp(Regressor reg, std::shared_ptr<const EntropicMap> map);

  ScoreKind kind() const noexcept { return kind_; }
  bool fitted() const noexcept { return regressor_ != nullptr; }
  Eigen::Index feature_dim() const noexcept { return regressor_ ? regressor_->feature_dim() : 0; }
  Eigen::Index target_dim() const noexcept { return regressor_ ? regressor_->target_dim() : 0; }

  const Regressor& regressor() const;
  const CovarianceFactor& covariance() const;
  const QuantilePredictor& quantiles() const;
  const EntropicMap& map() const;
  std::shared_ptr<const EntropicMap> map_ptr() const noexcept { return map_; }

  /// Provenance tags of every dataset used to fit this score.
  std::vector<std::string> fitted_on() const;

  /// Score evaluation at a fixed input x, with y_hat(x) and quantile bounds cached.
  class AtInput {
   public:
    const Vector& center() const noexcept { return center_; }
    double operator()(const Eigen::Ref<const Vector>& y) const;
    /// One score per row of `ys`.
    Vector batch(const Matrix& ys) const;
    const std::optional<QuantilePredictor::Bounds>& bounds() const noexcept { return bounds_; }

   private:
    friend class ScoreFunction;
    ScoreKind kind_ = ScoreKind::merge_l2;
    std::shared_ptr<const CovarianceFactor> covariance_;
    std::shared_ptr<const EntropicMap> map_;
    Vector center_;
    std::optional<QuantilePredictor::Bounds> bounds_;
  };

  AtInput at(const Eigen::Ref<const Vector>& x) const;
  double operator()(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) const {
    return at(x)(y);
  }
  /// Scores of every (x_i, y_i) pair of a dataset.
  Vector evaluate(const Dataset& ds) const;

 private:
  ScoreFunction(ScoreKind kind, Regressor reg);

  ScoreKind kind_ = ScoreKind::merge_l2;
  std::shared_ptr<const Regressor> regressor_;
  std::shared_ptr<const CovarianceFactor> covariance_;
  std::shared_ptr<const QuantilePredictor> quantiles_;
  std::shared_ptr<const EntropicMap> map_;
};

inline double eval_score(const ScoreFunction& fn, const Eigen::Ref<const Vector>& x,
                         const Eigen::Ref<const Vector>& y) {
  return fn(x, y);
}

}  // namespace otcp
