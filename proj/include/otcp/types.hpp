#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

namespace otcp {

// Point sets are stored one point per row; row-major keeps a point contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using Seed = std::uint64_t;

}  // namespace otcp
