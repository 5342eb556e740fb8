#include "otcp/calibration.hpp"

#include "otcp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace otcp {
namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParamError("alpha must lie in (0, 1)");
}

}  // namespace

Eigen::Index conformal_rank(Eigen::Index n, double alpha) {
  check_alpha(alpha);
  // The small guard keeps e.g. (1 - 0.2) * 5 = 4.000000000000001 at rank 4.
  return static_cast<Eigen::Index>(std::ceil((1.0 - alpha) * static_cast<double>(n + 1) - 1e-9));
}

double conformal_threshold(std::span<const double> cal_scores, double alpha) {
  if (cal_scores.empty()) throw ParamError("conformal_threshold needs at least one score");
  const auto n = static_cast<Eigen::Index>(cal_scores.size());
  const Eigen::Index k = conformal_rank(n, alpha);
  if (k > n) return std::numeric_limits<double>::infinity();
  std::vector<double> sorted(cal_scores.begin(), cal_scores.end());
  const auto kth = sorted.begin() + (std::max<Eigen::Index>(k, 1) - 1);
  std::nth_element(sorted.begin(), kth, sorted.end());
  return *kth;
}

double pit_value(std::span<const double> cal_scores, double test_score) {
  if (cal_scores.empty()) throw ParamError("pit_value needs at least one score");
  const auto below = std::count_if(cal_scores.begin(), cal_scores.end(),
                                   [&](double s) { return s <= test_score; });
  return static_cast<double>(below) / static_cast<double>(cal_scores.size());
}

double pit_interval_mass(Eigen::Index n, double a, double b) {
  if (n < 1) throw ParamError("pit_interval_mass needs n >= 1");
  const double dn = static_cast<double>(n);
  const double hi = std::floor(std::min(b, 1.0) * dn + 1e-9);
  const double lo = std::ceil(std::max(a, 0.0) * dn - 1e-9);
  return std::max(0.0, hi - lo + 1.0) / (dn + 1.0);
}

CalibratedPredictor::CalibratedPredictor(ScoreFunction score, double alpha,
                                         std::vector<double> cal_scores, Vector residual_halfwidth,
                                         std::optional<PitInterval> pit_interval)
    : score_(std::move(score)),
      alpha_(alpha),
      cal_scores_(std::move(cal_scores)),
      residual_halfwidth_(std::move(residual_halfwidth)),
      pit_interval_(pit_interval) {
  check_alpha(alpha);
  if (pit_interval_ && !(pit_interval_->lower <= pit_interval_->upper)) {
    throw ParamError("PIT interval must satisfy a <= b");
  }
  threshold_ = conformal_threshold(cal_scores_, alpha_);
}

bool CalibratedPredictor::accepts(double s) const {
  if (pit_interval_) {
    const double u = pit_value(cal_scores_, s);
    return u >= pit_interval_->lower && u <= pit_interval_->upper;
  }
  return s <= threshold_;
}

bool CalibratedPredictor::contains(const Eigen::Ref<const Vector>& x,
                                   const Eigen::Ref<const Vector>& y) const {
  if (!pit_interval_ && std::isinf(threshold_)) {
    if (y.size() != score_.target_dim()) throw DimensionError("response dimension does not match");
    return true;
  }
  return accepts(score_(x, y));
}

CalibratedPredictor CalibratedPredictor::with_alpha(double alpha) const {
  return CalibratedPredictor(score_, alpha, cal_scores_, residual_halfwidth_, pit_interval_);
}

CalibratedPredictor calibrate(const ScoreFunction& fn, const Dataset& calib, double alpha,
                              const CalibrateOptions& opts) {
  check_alpha(alpha);
  calib.validate();
  if (!opts.allow_provenance_overlap && !calib.provenance.empty()) {
    for (const auto& tag : fn.fitted_on()) {
      if (tag == calib.provenance) {
        throw ProvenanceError("score was fitted on the calibration data '" + tag +
                              "'; pass allow_provenance_overlap to override");
      }
    }
  }
  const Vector scores = fn.evaluate(calib);
  const Matrix res = calib.targets - fn.regressor().predict_batch(calib.features);
  Vector halfwidth = res.cwiseAbs().colwise().maxCoeff().transpose();
  return CalibratedPredictor(fn, alpha, std::vector<double>(scores.data(), scores.data() + scores.size()),
                             std::move(halfwidth), opts.pit_interval);
}

}  // namespace otcp
