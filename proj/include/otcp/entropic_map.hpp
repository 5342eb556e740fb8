#pragma once

#include "otcp/sinkhorn.hpp"
#include "otcp/sphere_grid.hpp"

#include <filesystem>
#include <memory>
#include <string>

namespace otcp {

/// Out-of-sample entropic transport between a score cloud and a spherical
/// grid. Queries are standardized with the fit-time statistics before the
/// Gibbs weights are formed; the forward image lives in the unit ball.
class EntropicMap {
 public:
  EntropicMap() = default;
  EntropicMap(Standardization standardization, std::shared_ptr<const SphericalGrid> grid,
              DualPotentials potentials, std::string fitted_on);

  /// Standardizes `scores`, solves Sinkhorn against `grid` and keeps the potentials.
  static EntropicMap fit(const Matrix& scores, std::shared_ptr<const SphericalGrid> grid,
                         double epsilon, const SinkhornOptions& opts = {},
                         std::string fitted_on = {});

  bool fitted() const noexcept { return static_cast<bool>(grid_); }
  Eigen::Index dim() const noexcept { return grid_ ? grid_->dim : 0; }
  double epsilon() const noexcept { return potentials_.epsilon; }
  const DualPotentials& potentials() const noexcept { return potentials_; }
  const SphericalGrid& grid() const { return *grid_; }
  std::shared_ptr<const SphericalGrid> grid_ptr() const noexcept { return grid_; }
  const Standardization& standardization() const noexcept { return standardization_; }
  /// Standardized source points used in the solve.
  const Matrix& source() const { return potentials_.problem->source; }
  const std::string& fitted_on() const noexcept { return fitted_on_; }

  /// p_j(z): softmin over (|z_std - u_j|^2 - g_j) / eps.
  Vector gibbs_weights(const Eigen::Ref<const Vector>& z) const;
  /// sum_j p_j(z) u_j.
  Vector forward(const Eigen::Ref<const Vector>& z) const;
  /// forward() applied to every row.
  Matrix forward_batch(const Matrix& zs) const;
  /// |forward(z)|, clamped to [0, 1].
  double rank(const Eigen::Ref<const Vector>& z) const;
  Vector rank_batch(const Matrix& zs) const;

  /// q_i(u): softmin over (|z_i - u|^2 - f_i) / eps.
  Vector inverse_weights(const Eigen::Ref<const Vector>& u) const;
  /// sum_i q_i(u) z_i mapped back to original score coordinates.
  Vector inverse(const Eigen::Ref<const Vector>& u) const;

  /// Half of f_eps(z) = lse_eps(|z_std - u_j|^2 - g_j), i.e. the potential
  /// for the cost |.|^2 / 2, so that forward(z) = z_std - grad(potential).
  double potential(const Eigen::Ref<const Vector>& z_standardized) const;

 private:
  void check_fitted() const;
  // Rows of `zs` are standardized queries; returns the weighted grid images.
  Matrix forward_standardized(const Matrix& zs) const;

  Standardization standardization_;
  std::shared_ptr<const SphericalGrid> grid_;
  DualPotentials potentials_;
  std::string fitted_on_;
  Matrix grid_t_;       // dim x m
  Vector grid_shift_;   // (g_j - |u_j|^2) / eps
  Vector source_shift_; // (f_i - |z_i|^2) / eps
};

/// ot_rank(z) = |forward(z)|.
inline double ot_rank(const EntropicMap& map, const Eigen::Ref<const Vector>& z) {
  return map.rank(z);
}

}  // namespace otcp
