#pragma once

#include "otcp/dataset.hpp"

#include <optional>
#include <string>
#include <vector>

namespace otcp {

enum class SynthKind { gaussian, banana, mixture };

SynthKind parse_synth_kind(const std::string& name);
const char* to_string(SynthKind kind) noexcept;

struct SynthParams {
  int p = 1;  // feature dimension; features are uniform on [0,1]^p
  /// Noise covariance (gaussian, and shared by every mixture component).
  /// Empty means identity.
  Matrix covariance;
  /// Mixture component means (K x d) and weights (K). Empty means one component at 0.
  Matrix means;
  std::vector<double> weights;
  /// Banana: y1 = mu1 + a, y2 = mu2 + curvature * (a^2 - 1) + noise * b.
  double curvature = 1.0;
  double banana_noise = 0.25;
};

/// Deterministic mean function mu_k(x) = (k + 1) * mean(x) shared by every kind.
Vector synth_mean(const Eigen::Ref<const Vector>& x, Eigen::Index d);

Dataset synth_dataset(SynthKind kind, Eigen::Index n, Eigen::Index d, const SynthParams& params,
                      Seed seed);

}  // namespace otcp
