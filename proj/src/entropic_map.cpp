#include "otcp/entropic_map.hpp"

#include <algorithm>
#include <cmath>

namespace otcp {
namespace {

using RowArray = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// In-place row-wise softmax of logits.
void softmax_rows(RowArray& logits) {
  const Eigen::ArrayXd mx = logits.rowwise().maxCoeff();
  logits.colwise() -= mx;
  logits = logits.exp();
  const Eigen::ArrayXd sums = logits.rowwise().sum();
  logits.colwise() /= sums;
}

}  // namespace

EntropicMap::EntropicMap(Standardization standardization, std::shared_ptr<const SphericalGrid> grid,
                         DualPotentials potentials, std::string fitted_on)
    : standardization_(std::move(standardization)),
      grid_(std::move(grid)),
      potentials_(std::move(potentials)),
      fitted_on_(std::move(fitted_on)) {
  if (!grid_ || !potentials_.problem) throw ParamError("entropic map needs a grid and potentials");
  const OtProblem& prob = *potentials_.problem;
  if (prob.target.rows() != grid_->points.rows() || prob.target.cols() != grid_->dim) {
    throw DimensionError("potentials were not solved against this grid");
  }
  if (standardization_.mean.size() != grid_->dim) {
    throw DimensionError("standardization dimension does not match the grid");
  }
  const double eps = potentials_.epsilon;
  grid_t_ = grid_->points.transpose();
  grid_shift_ = (potentials_.g - Vector(grid_->points.rowwise().squaredNorm())) / eps;
  source_shift_ = (potentials_.f - Vector(prob.source.rowwise().squaredNorm())) / eps;
}

EntropicMap EntropicMap::fit(const Matrix& scores, std::shared_ptr<const SphericalGrid> grid,
                             double epsilon, const SinkhornOptions& opts, std::string fitted_on) {
  if (!grid) throw ParamError("entropic map needs a grid");
  if (scores.cols() != grid->dim) throw DimensionError("score and grid dimensions differ");
  Standardization st = Standardization::fit(scores);
  auto prob = std::make_shared<OtProblem>();
  prob->source = st.apply_rows(scores);
  prob->target = grid->points;
  prob->epsilon = epsilon;
  DualPotentials pot = sinkhorn_solve(std::shared_ptr<const OtProblem>(prob), opts);
  return EntropicMap(std::move(st), std::move(grid), std::move(pot), std::move(fitted_on));
}

void EntropicMap::check_fitted() const {
  if (!fitted()) throw NotFitted("entropic map is not fitted");
}

Vector EntropicMap::gibbs_weights(const Eigen::Ref<const Vector>& z) const {
  check_fitted();
  const Vector zs = standardization_.apply(z);
  RowArray logits = (grid_->points * zs).transpose().array() * (2.0 / epsilon());
  logits.row(0) += grid_shift_.transpose().array();
  softmax_rows(logits);
  return logits.row(0).transpose().matrix();
}

Matrix EntropicMap::forward_standardized(const Matrix& zs) const {
  const Eigen::Index dim = grid_->dim;
  const double scale = 2.0 / epsilon();
  Matrix out(zs.rows(), dim);
  Eigen::ArrayXd row(grid_->points.rows());
  for (Eigen::Index i = 0; i < zs.rows(); ++i) {
    row = grid_shift_.array();
    for (Eigen::Index k = 0; k < dim; ++k) row += (scale * zs(i, k)) * grid_t_.row(k).transpose().array();
    row = (row - row.maxCoeff()).exp();
    const double total = row.sum();
    for (Eigen::Index k = 0; k < dim; ++k) {
      out(i, k) = (row * grid_t_.row(k).transpose().array()).sum() / total;
    }
    // A convex combination of points in the unit ball; only rounding can push it out.
    const double nrm = out.row(i).norm();
    if (nrm > 1.0) out.row(i) /= nrm;
  }
  return out;
}

Vector EntropicMap::forward(const Eigen::Ref<const Vector>& z) const {
  check_fitted();
  Matrix zs = standardization_.apply(z).transpose();
  return forward_standardized(zs).row(0).transpose();
}

Matrix EntropicMap::forward_batch(const Matrix& zs) const {
  check_fitted();
  const Matrix std_zs = standardization_.apply_rows(zs);
  constexpr Eigen::Index kChunk = 256;
  Matrix out(zs.rows(), zs.cols());
  for (Eigen::Index start = 0; start < zs.rows(); start += kChunk) {
    const Eigen::Index rows = std::min(kChunk, zs.rows() - start);
    out.middleRows(start, rows) = forward_standardized(std_zs.middleRows(start, rows));
  }
  return out;
}

double EntropicMap::rank(const Eigen::Ref<const Vector>& z) const {
  return std::min(1.0, forward(z).norm());
}

Vector EntropicMap::rank_batch(const Matrix& zs) const {
  const Matrix images = forward_batch(zs);
  return images.rowwise().norm().cwiseMin(1.0);
}

Vector EntropicMap::inverse_weights(const Eigen::Ref<const Vector>& u) const {
  check_fitted();
  if (u.size() != grid_->dim) throw DimensionError("inverse: dimension mismatch");
  RowArray logits = (source() * u).transpose().array() * (2.0 / epsilon());
  logits.row(0) += source_shift_.transpose().array();
  softmax_rows(logits);
  return logits.row(0).transpose().matrix();
}

Vector EntropicMap::inverse(const Eigen::Ref<const Vector>& u) const {
  const Vector q = inverse_weights(u);
  return standardization_.invert(source().transpose() * q);
}

double EntropicMap::potential(const Eigen::Ref<const Vector>& zs) const {
  check_fitted();
  if (zs.size() != grid_->dim) throw DimensionError("potential: dimension mismatch");
  const double eps = epsilon();
  const Eigen::ArrayXd logits = (grid_->points * zs).array() * (2.0 / eps) + grid_shift_.array();
  const double mx = logits.maxCoeff();
  const double lse = mx + std::log((logits - mx).exp().sum()) -
                     std::log(static_cast<double>(logits.size()));
  return 0.5 * (zs.squaredNorm() - eps * lse);
}

}  // namespace otcp
