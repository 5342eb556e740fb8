#include "otcp/synth.hpp"

#include "otcp/errors.hpp"
#include "otcp/rng.hpp"

#include <cmath>
#include <numeric>

namespace otcp {
namespace {

Matrix noise_cholesky(const SynthParams& params, Eigen::Index d) {
  if (params.covariance.size() == 0) return Matrix::Identity(d, d);
  const Matrix& cov = params.covariance;
  if (cov.rows() != d || cov.cols() != d) {
    throw ParamError("covariance must be " + std::to_string(d) + "x" + std::to_string(d));
  }
  if (!cov.isApprox(cov.transpose(), 1e-12)) throw ParamError("covariance is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw ParamError("covariance is not positive definite");
  const Eigen::MatrixXd l = llt.matrixL();
  if ((l.diagonal().array() <= 0.0).any()) throw ParamError("covariance is not positive definite");
  return l;
}

}  // namespace

SynthKind parse_synth_kind(const std::string& name) {
  if (name == "gaussian") return SynthKind::gaussian;
  if (name == "banana") return SynthKind::banana;
  if (name == "mixture") return SynthKind::mixture;
  throw ParamError("unknown synthetic kind '" + name + "'");
}

const char* to_string(SynthKind kind) noexcept {
  switch (kind) {
    case SynthKind::gaussian: return "gaussian";
    case SynthKind::banana: return "banana";
    case SynthKind::mixture: return "mixture";
  }
  return "?";
}

Vector synth_mean(const Eigen::Ref<const Vector>& x, Eigen::Index d) {
  const double m = x.mean();
  Vector out(d);
  for (Eigen::Index k = 0; k < d; ++k) out(k) = static_cast<double>(k + 1) * m;
  return out;
}

Dataset synth_dataset(SynthKind kind, Eigen::Index n, Eigen::Index d, const SynthParams& params,
                      Seed seed) {
  if (n < 1) throw ParamError("synthetic n must be >= 1");
  if (params.p < 1) throw ParamError("synthetic p must be >= 1");
  if (kind == SynthKind::banana && d != 2) throw ParamError("banana data is 2-dimensional");
  if (d < 1) throw ParamError("synthetic d must be >= 1");

  // Independent streams so that, e.g., a one-component mixture reproduces the gaussian draw.
  Rng feature_rng(derive_seed(seed, {1}));
  Rng noise_rng(derive_seed(seed, {2}));
  Rng component_rng(derive_seed(seed, {3}));
  std::normal_distribution<double> normal(0.0, 1.0);

  Dataset ds;
  ds.features.resize(n, params.p);
  ds.targets.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < params.p; ++j) ds.features(i, j) = uniform01(feature_rng);
  }

  Matrix chol;
  Matrix means;
  std::vector<double> cumulative;
  if (kind != SynthKind::banana) chol = noise_cholesky(params, d);
  if (kind == SynthKind::mixture) {
    means = params.means.size() == 0 ? Matrix::Zero(1, d) : params.means;
    if (means.cols() != d) throw ParamError("mixture means must have d columns");
    std::vector<double> w = params.weights;
    if (w.empty()) w.assign(static_cast<std::size_t>(means.rows()), 1.0);
    if (static_cast<Eigen::Index>(w.size()) != means.rows()) {
      throw ParamError("mixture weights and means disagree in count");
    }
    double total = 0.0;
    for (double v : w) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw ParamError("mixture weights must be >= 0");
      total += v;
    }
    if (!(total > 0.0)) throw ParamError("mixture weights sum to zero");
    cumulative.resize(w.size());
    std::partial_sum(w.begin(), w.end(), cumulative.begin());
    for (double& c : cumulative) c /= total;
  }

  Vector eps(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector x = ds.features.row(i).transpose();
    Vector y = synth_mean(x, d);
    switch (kind) {
      case SynthKind::gaussian:
      case SynthKind::mixture: {
        for (Eigen::Index k = 0; k < d; ++k) eps(k) = normal(noise_rng);
        y += chol * eps;
        if (kind == SynthKind::mixture) {
          Eigen::Index comp = 0;
          if (means.rows() > 1) {
            const double u = uniform01(component_rng);
            while (comp + 1 < means.rows() && u >= cumulative[static_cast<std::size_t>(comp)]) ++comp;
          }
          y += means.row(comp).transpose();
        }
        break;
      }
      case SynthKind::banana: {
        const double a = normal(noise_rng);
        const double b = normal(noise_rng);
        y(0) += a;
        y(1) += params.curvature * (a * a - 1.0) + params.banana_noise * b;
        break;
      }
    }
    ds.targets.row(i) = y.transpose();
  }

  for (Eigen::Index j = 0; j < params.p; ++j) ds.feature_names.push_back("x" + std::to_string(j));
  for (Eigen::Index k = 0; k < d; ++k) ds.target_names.push_back("y" + std::to_string(k));
  ds.provenance = std::string("synth:") + to_string(kind) + ":" + std::to_string(seed);
  return ds;
}

}  // namespace otcp
