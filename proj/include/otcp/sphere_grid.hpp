#pragma once

#include "otcp/types.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace otcp {

/// Radical-inverse (Halton) points for indices skip .. skip+count-1, one
/// column per prime base. Entries lie in the open interval (0, 1) for skip >= 1.
Matrix halton_sequence(Eigen::Index count, int dim, std::uint64_t skip);

/// Standard normal quantile. Throws DomainError outside (0, 1).
double inverse_normal_cdf(double p);

enum class DirectionMode { low_discrepancy, iid };

DirectionMode parse_direction_mode(const std::string& name);
const char* to_string(DirectionMode mode) noexcept;

inline constexpr std::uint64_t kDefaultHaltonSkip = 64;

/// n_S unit vectors on S^{dim-1}. Low-discrepancy mode pushes a Halton block
/// through the inverse normal CDF and normalizes; iid mode normalizes Gaussian draws.
Matrix sphere_directions(Eigen::Index n_directions, int dim, DirectionMode mode, Seed seed);

struct GridFactorization {
  Eigen::Index n_radii = 0;
  Eigen::Index n_directions = 0;
  Eigen::Index n_origin = 0;

  Eigen::Index total() const noexcept { return n_radii * n_directions + n_origin; }
};

/// n_R = floor(sqrt(m)), n_S = floor((m-1)/n_R), n_o = m - n_R n_S.
GridFactorization default_factorization(Eigen::Index m);

/// Discrete spherical-uniform measure: n_o origin copies followed by the
/// shells j/n_R (j = 1..n_R), each holding the same n_S directions.
struct SphericalGrid {
  int dim = 0;
  GridFactorization factors;
  DirectionMode mode = DirectionMode::low_discrepancy;
  Seed seed = 0;
  Matrix directions;  // n_S x dim
  Matrix points;      // m x dim

  Eigen::Index size() const noexcept { return points.rows(); }
  double radius(Eigen::Index shell) const noexcept {
    return static_cast<double>(shell) / static_cast<double>(factors.n_radii);
  }
};

SphericalGrid build_spherical_grid(Eigen::Index m, int dim,
                                   std::optional<GridFactorization> factorization,
                                   DirectionMode mode, Seed seed);

/// Rebuilds the points of a grid from explicit directions (used when loading artifacts).
SphericalGrid grid_from_directions(Matrix directions, GridFactorization factors, DirectionMode mode,
                                   Seed seed);

struct GridRadius {
  Eigen::Index shell = 0;  // j_alpha
  double radius = 0.0;     // j_alpha / n_R
};

/// Smallest shell whose cumulative mass n_o/m + j n_S/m reaches 1 - alpha.
GridRadius grid_radius_index(Eigen::Index n_total, const GridFactorization& factors, double alpha);

void write_grid_csv(const SphericalGrid& grid, const std::filesystem::path& path);

}  // namespace otcp
