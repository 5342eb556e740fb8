#pragma once

#include "otcp/calibration.hpp"

namespace otcp {

/// Fraction of test pairs inside the predicted region.
double marginal_coverage(const CalibratedPredictor& pred, const Dataset& test);

/// Axis-aligned box in response space.
struct Box {
  Vector lower;
  Vector upper;
  double volume() const;
};

inline constexpr double kDefaultBoxInflation = 1.5;

/// Box centred at y_hat(x) with half-widths inflation * (max calibration |residual| per dimension).
Box default_size_box(const CalibratedPredictor& pred, const Eigen::Ref<const Vector>& x,
                     double inflation = kDefaultBoxInflation);

/// (hits / n_mc) * volume(box), y drawn uniformly in the box.
double region_size_mc(const CalibratedPredictor& pred, const Eigen::Ref<const Vector>& x,
                      const Box& box, int n_mc, Seed seed);

}  // namespace otcp
