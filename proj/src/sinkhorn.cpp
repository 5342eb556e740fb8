#include "otcp/sinkhorn.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace otcp {
namespace {

// out_i = -eps * log( (1/|B|) sum_j exp((pot_j - |a_i - b_j|^2) / eps) ).
// The squared distance is expanded as |a|^2 + |b|^2 - 2 a.b and the cross
// term accumulated one coordinate at a time over a contiguous row of logits.
Vector soft_transform(const Matrix& a, const Matrix& b, const Vector& pot, double eps) {
  const Eigen::Index na = a.rows();
  const Eigen::Index nb = b.rows();
  const Eigen::Index dim = a.cols();
  const Matrix bt = b.transpose();
  const Eigen::ArrayXd shift = (pot - Vector(b.rowwise().squaredNorm())).array() / eps;
  const double log_nb = std::log(static_cast<double>(nb));

  Vector out(na);
  Eigen::ArrayXd row(nb);
  for (Eigen::Index i = 0; i < na; ++i) {
    row = shift;
    for (Eigen::Index k = 0; k < dim; ++k) row += (2.0 * a(i, k) / eps) * bt.row(k).transpose().array();
    const double mx = row.maxCoeff();
    const double sum = (row - mx).exp().sum();
    out(i) = a.row(i).squaredNorm() - eps * (mx + std::log(sum) - log_nb);
  }
  return out;
}

}  // namespace

double squared_cost(const Eigen::Ref<const Vector>& z, const Eigen::Ref<const Vector>& u) {
  if (z.size() != u.size()) throw DimensionError("squared_cost: dimension mismatch");
  return (z - u).squaredNorm();
}

double lse_eps(std::span<const double> values, double eps) {
  if (values.empty()) throw ParamError("lse_eps of an empty vector");
  if (!(eps > 0.0)) throw ParamError("lse_eps requires eps > 0");
  if (values.size() == 1) return values[0];
  const double lo = *std::min_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += std::exp(-(v - lo) / eps);
  return lo - eps * std::log(sum / static_cast<double>(values.size()));
}

Standardization Standardization::fit(const Matrix& points) {
  if (points.rows() < 1) throw DimensionError("cannot standardize an empty point set");
  Standardization s;
  s.mean = points.colwise().mean().transpose();
  s.scale = Vector::Ones(points.cols());
  if (points.rows() > 1) {
    const Matrix centred = points.rowwise() - s.mean.transpose();
    const double denom = static_cast<double>(points.rows() - 1);
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      const double sd = std::sqrt(centred.col(j).squaredNorm() / denom);
      if (sd > 0.0 && std::isfinite(sd)) s.scale(j) = sd;
    }
  }
  return s;
}

Standardization Standardization::identity(Eigen::Index dim) {
  return {Vector::Zero(dim), Vector::Ones(dim)};
}

Vector Standardization::apply(const Eigen::Ref<const Vector>& z) const {
  if (z.size() != mean.size()) throw DimensionError("standardization: dimension mismatch");
  return (z - mean).cwiseQuotient(scale);
}

Matrix Standardization::apply_rows(const Matrix& points) const {
  if (points.cols() != mean.size()) throw DimensionError("standardization: dimension mismatch");
  Matrix out = points.rowwise() - mean.transpose();
  out.array().rowwise() /= scale.transpose().array();
  return out;
}

Vector Standardization::invert(const Eigen::Ref<const Vector>& z) const {
  if (z.size() != mean.size()) throw DimensionError("standardization: dimension mismatch");
  return z.cwiseProduct(scale) + mean;
}

void OtProblem::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ParamError("epsilon must be positive");
  if (source.rows() < 1 || target.rows() < 1) throw DimensionError("OT problem has an empty side");
  if (source.cols() != target.cols()) throw DimensionError("source and target dimensions differ");
  if (!source.allFinite() || !target.allFinite()) throw ParamError("OT problem has non-finite points");
}

Vector update_source_potential(const OtProblem& prob, const Vector& g) {
  if (g.size() != prob.target.rows()) throw DimensionError("g has the wrong length");
  return soft_transform(prob.source, prob.target, g, prob.epsilon);
}

Vector update_target_potential(const OtProblem& prob, const Vector& f) {
  if (f.size() != prob.source.rows()) throw DimensionError("f has the wrong length");
  return soft_transform(prob.target, prob.source, f, prob.epsilon);
}

DualPotentials make_potentials(std::shared_ptr<const OtProblem> prob, Vector f, Vector g) {
  if (f.size() != prob->source.rows() || g.size() != prob->target.rows()) {
    throw DimensionError("potential lengths do not match the problem");
  }
  DualPotentials pot;
  pot.f = std::move(f);
  pot.g = std::move(g);
  pot.epsilon = prob->epsilon;
  pot.problem = std::move(prob);
  return pot;
}

Marginals coupling_marginals(const DualPotentials& pot) {
  const OtProblem& prob = *pot.problem;
  const double eps = prob.epsilon;
  const double n = static_cast<double>(prob.source.rows());
  const double m = static_cast<double>(prob.target.rows());
  // Row i sums to exp((f_i - T(g)_i) / eps) / n, and symmetrically for columns.
  const Vector tf = update_source_potential(prob, pot.g);
  const Vector tg = update_target_potential(prob, pot.f);
  Marginals out;
  out.rows = ((pot.f - tf).array() / eps).exp() / n;
  out.cols = ((pot.g - tg).array() / eps).exp() / m;
  return out;
}

double coupling_marginal_error(const DualPotentials& pot) {
  const Marginals mg = coupling_marginals(pot);
  const double n = static_cast<double>(mg.rows.size());
  const double m = static_cast<double>(mg.cols.size());
  const double row_err = (mg.rows.array() - 1.0 / n).abs().maxCoeff();
  const double col_err = (mg.cols.array() - 1.0 / m).abs().maxCoeff();
  return std::max(row_err, col_err);
}

double dual_objective(const DualPotentials& pot) {
  const OtProblem& prob = *pot.problem;
  const Vector tf = update_source_potential(prob, pot.g);
  const double mass = ((pot.f - tf).array() / prob.epsilon).exp().mean();
  return pot.f.mean() + pot.g.mean() - prob.epsilon * mass;
}

Matrix coupling_matrix(const DualPotentials& pot) {
  const OtProblem& prob = *pot.problem;
  const Eigen::Index n = prob.source.rows();
  const Eigen::Index m = prob.target.rows();
  Matrix p(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double c = (prob.source.row(i) - prob.target.row(j)).squaredNorm();
      p(i, j) = std::exp((pot.f(i) + pot.g(j) - c) / prob.epsilon) / static_cast<double>(n * m);
    }
  }
  return p;
}

DualPotentials sinkhorn_solve(OtProblem prob, const SinkhornOptions& opts) {
  return sinkhorn_solve(std::make_shared<const OtProblem>(std::move(prob)), opts);
}

DualPotentials sinkhorn_solve(std::shared_ptr<const OtProblem> prob, const SinkhornOptions& opts) {
  prob->validate();
  if (!(opts.tol > 0.0)) throw ParamError("Sinkhorn tolerance must be positive");
  if (opts.max_iter < 1) throw ParamError("Sinkhorn max_iter must be >= 1");

  const double eps = prob->epsilon;
  const double inv_m = 1.0 / static_cast<double>(prob->target.rows());
  DualPotentials pot = make_potentials(prob, Vector::Zero(prob->source.rows()),
                                       Vector::Zero(prob->target.rows()));
  if (opts.trace_objective) pot.objective_trace.push_back(dual_objective(pot));

  double col_err = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opts.max_iter; ++it) {
    pot.f = update_source_potential(*prob, pot.g);
    pot.iterations = it;
    if (opts.trace_objective) pot.objective_trace.push_back(dual_objective(pot));

    // Rows are now exact; the column sums of the current coupling fall out
    // of the next g-update as exp((g_j - g'_j) / eps) / m.
    Vector g_next = update_target_potential(*prob, pot.f);
    col_err = inv_m * (((pot.g - g_next).array() / eps).exp() - 1.0).abs().maxCoeff();
    if (col_err <= opts.tol) {
      pot.converged = true;
      break;
    }
    pot.g = std::move(g_next);
    if (opts.trace_objective) pot.objective_trace.push_back(dual_objective(pot));
  }

  pot.marginal_error = pot.converged ? col_err : coupling_marginal_error(pot);
  if (!pot.f.allFinite() || !pot.g.allFinite()) {
    throw NotConverged(pot);
  }
  const double c = pot.g.mean();
  pot.g.array() -= c;
  pot.f.array() += c;

  if (!pot.converged && opts.strict) throw NotConverged(pot);
  return pot;
}

void write_potentials_json(const DualPotentials& pot, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = "otcp-potentials";
  j["version"] = 1;
  j["epsilon"] = pot.epsilon;
  j["iterations"] = pot.iterations;
  j["marginal_error"] = pot.marginal_error;
  j["converged"] = pot.converged;
  j["f"] = std::vector<double>(pot.f.data(), pot.f.data() + pot.f.size());
  j["g"] = std::vector<double>(pot.g.data(), pot.g.data() + pot.g.size());
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << j.dump() << '\n';
}

}  // namespace otcp
