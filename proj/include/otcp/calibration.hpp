#pragma once

#include "otcp/scores.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace otcp {

/// k-th smallest calibration score with k = ceil((1 - alpha)(n + 1)), or +inf when k > n.
double conformal_threshold(std::span<const double> cal_scores, double alpha);

/// Order-statistic index k = ceil((1 - alpha)(n + 1)) (1-based, may exceed n).
Eigen::Index conformal_rank(Eigen::Index n, double alpha);

/// Empirical CDF of the calibration scores at `test_score`, on the grid {0, 1/n, ..., 1}.
double pit_value(std::span<const double> cal_scores, double test_score);

/// P(F_n(Z) in [a, b]) for n exchangeable calibration scores: (floor(nb) - ceil(na) + 1) / (n + 1).
double pit_interval_mass(Eigen::Index n, double a, double b);

/// Endpoints (a, b) of the rule F_n(S) in [a, b].
struct PitInterval {
  double lower = 0.0;
  double upper = 1.0;
};

struct CalibrateOptions {
  /// Permit calibrating on data that was used to fit the score.
  bool allow_provenance_overlap = false;
  /// Use the rule F_n(S(x, y)) in [a, b] instead of the order-statistic threshold.
  std::optional<PitInterval> pit_interval;
};

/// A fitted score plus its calibrated threshold. Immutable.
class CalibratedPredictor {
 public:
  CalibratedPredictor() = default;
  CalibratedPredictor(ScoreFunction score, double alpha, std::vector<double> cal_scores,
                      Vector residual_halfwidth, std::optional<PitInterval> pit_interval = {});

  const ScoreFunction& score() const noexcept { return score_; }
  double threshold() const noexcept { return threshold_; }
  double alpha() const noexcept { return alpha_; }
  Eigen::Index n_cal() const noexcept { return static_cast<Eigen::Index>(cal_scores_.size()); }
  const std::vector<double>& cal_scores() const noexcept { return cal_scores_; }
  /// Per-dimension max |y - y_hat(x)| over the calibration set.
  const Vector& residual_halfwidth() const noexcept { return residual_halfwidth_; }
  const std::optional<PitInterval>& pit_interval() const noexcept { return pit_interval_; }

  bool contains(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) const;
  /// Membership decision for an already evaluated score.
  bool accepts(double score_value) const;

  /// Same calibration scores, threshold recomputed at another level.
  CalibratedPredictor with_alpha(double alpha) const;

 private:
  ScoreFunction score_;
  double alpha_ = 0.1;
  double threshold_ = 0.0;
  std::vector<double> cal_scores_;
  Vector residual_halfwidth_;
  std::optional<PitInterval> pit_interval_;
};

CalibratedPredictor calibrate(const ScoreFunction& fn, const Dataset& calib, double alpha,
                              const CalibrateOptions& opts = {});

}  // namespace otcp
