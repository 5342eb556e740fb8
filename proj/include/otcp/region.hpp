#pragma once

#include "otcp/calibration.hpp"

#include <filesystem>
#include <string>

namespace otcp {

/// Closed polygon outlining a 2D prediction region.
struct Region2D {
  Vector x;              // query input
  Vector center;         // y_hat(x)
  double alpha = 0.1;
  double threshold = 0.0;
  Matrix contour;        // k x 2, first row repeated as last
  std::string method;
  bool self_intersecting = false;

  Eigen::Index vertex_count() const noexcept { return contour.rows() > 0 ? contour.rows() - 1 : 0; }
};

inline constexpr int kDefaultContourAngles = 256;

/// OT pullback of the rank shell of radius threshold. Only for otcp predictors.
Region2D region_contour_2d(const CalibratedPredictor& pred, const Eigen::Ref<const Vector>& x,
                           int n_angles = kDefaultContourAngles);

/// Circle, ellipse or box for the l2, mahalanobis and mcp scores.
Region2D baseline_contour_2d(const CalibratedPredictor& pred, const Eigen::Ref<const Vector>& x,
                             int n_angles = kDefaultContourAngles);

/// Picks region_contour_2d or baseline_contour_2d by score kind.
Region2D prediction_region_2d(const CalibratedPredictor& pred, const Eigen::Ref<const Vector>& x,
                              int n_angles = kDefaultContourAngles);

/// Absolute shoelace area of a polygon (closing row optional).
double polygon_area(const Matrix& polygon);
/// Even-odd rule; points on the boundary may go either way.
bool point_in_polygon(const Matrix& polygon, const Eigen::Ref<const Vector>& point);
/// True if two non-adjacent edges of the closed polyline cross.
bool polyline_self_intersects(const Matrix& closed);

void write_region_csv(const Region2D& region, const std::filesystem::path& path);
Region2D read_region_csv(const std::filesystem::path& path);
void write_region_json(const Region2D& region, const std::filesystem::path& path);
Region2D read_region_json(const std::filesystem::path& path);

}  // namespace otcp
