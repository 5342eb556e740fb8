#pragma once

#include "otcp/errors.hpp"
#include "otcp/types.hpp"

#include <filesystem>
#include <memory>
#include <span>
#include <vector>

namespace otcp {

double squared_cost(const Eigen::Ref<const Vector>& z, const Eigen::Ref<const Vector>& u);

/// Soft-minimum -eps * log(mean(exp(-v / eps))), max-shift stabilized.
double lse_eps(std::span<const double> values, double eps);

/// Per-dimension z-score transform fitted on a point cloud.
struct Standardization {
  Vector mean;
  Vector scale;

  static Standardization fit(const Matrix& points);
  static Standardization identity(Eigen::Index dim);
  Vector apply(const Eigen::Ref<const Vector>& z) const;
  Matrix apply_rows(const Matrix& points) const;
  Vector invert(const Eigen::Ref<const Vector>& z) const;
};

/// Entropic OT between uniform empirical measures on `source` (n x d) and `target` (m x d).
struct OtProblem {
  Matrix source;
  Matrix target;
  double epsilon = 0.1;

  void validate() const;
};

struct SinkhornOptions {
  double tol = 1e-6;
  int max_iter = 2000;
  /// Throw NotConverged instead of returning a flagged result.
  bool strict = false;
  /// Record the dual objective after every half-update.
  bool trace_objective = false;
};

struct DualPotentials {
  Vector f;  // n
  Vector g;  // m
  double epsilon = 0.0;
  std::shared_ptr<const OtProblem> problem;
  int iterations = 0;
  double marginal_error = 0.0;
  bool converged = false;
  std::vector<double> objective_trace;
};

class NotConverged : public Error {
 public:
  explicit NotConverged(DualPotentials best)
      : Error("Sinkhorn did not converge: marginal error " +
              std::to_string(best.marginal_error) + " after " +
              std::to_string(best.iterations) + " iterations"),
        best_(std::move(best)) {}
  const DualPotentials& potentials() const noexcept { return best_; }

 private:
  DualPotentials best_;
};

/// f_i = lse_eps over j of (|z_i - u_j|^2 - g_j).
Vector update_source_potential(const OtProblem& prob, const Vector& g);
/// g_j = lse_eps over i of (|z_i - u_j|^2 - f_i).
Vector update_target_potential(const OtProblem& prob, const Vector& f);

DualPotentials sinkhorn_solve(std::shared_ptr<const OtProblem> prob, const SinkhornOptions& opts = {});
DualPotentials sinkhorn_solve(OtProblem prob, const SinkhornOptions& opts = {});

/// Potentials wrapped for evaluation (diagnostics, tests).
DualPotentials make_potentials(std::shared_ptr<const OtProblem> prob, Vector f, Vector g);

struct Marginals {
  Vector rows;  // sum_j P_ij
  Vector cols;  // sum_i P_ij
};

/// Marginals of P_ij = exp((f_i + g_j - c_ij) / eps) / (n m).
Marginals coupling_marginals(const DualPotentials& pot);
double coupling_marginal_error(const DualPotentials& pot);

/// mean(f) + mean(g) - eps * sum_ij P_ij.
double dual_objective(const DualPotentials& pot);

/// Dense coupling matrix; intended for small problems only.
Matrix coupling_matrix(const DualPotentials& pot);

void write_potentials_json(const DualPotentials& pot, const std::filesystem::path& path);

}  // namespace otcp
