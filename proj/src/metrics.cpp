#include "otcp/metrics.hpp"

#include "otcp/errors.hpp"
#include "otcp/rng.hpp"

#include <cmath>

namespace otcp {

double marginal_coverage(const CalibratedPredictor& pred, const Dataset& test) {
  test.validate();
  if (test.size() == 0) throw ParamError("marginal_coverage needs a nonempty test set");
  if (!pred.pit_interval() && std::isinf(pred.threshold())) return 1.0;
  const Vector scores = pred.score().evaluate(test);
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) hits += pred.accepts(scores(i)) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(scores.size());
}

double Box::volume() const {
  return (upper - lower).prod();
}

Box default_size_box(const CalibratedPredictor& pred, const Eigen::Ref<const Vector>& x,
                     double inflation) {
  if (!(inflation > 0.0)) throw ParamError("box inflation must be positive");
  const Vector c = pred.score().regressor().predict(x);
  const Vector half = inflation * pred.residual_halfwidth();
  return Box{c - half, c + half};
}

double region_size_mc(const CalibratedPredictor& pred, const Eigen::Ref<const Vector>& x,
                      const Box& box, int n_mc, Seed seed) {
  if (n_mc < 1) throw ParamError("n_mc must be at least 1");
  const Eigen::Index d = pred.score().target_dim();
  if (box.lower.size() != d || box.upper.size() != d) throw DimensionError("box dimension mismatch");
  const Vector side = box.upper - box.lower;
  if (!side.allFinite() || (side.array() <= 0.0).any()) {
    throw ParamError("size box needs finite, positive side lengths");
  }
  if (!pred.pit_interval() && std::isinf(pred.threshold())) return box.volume();

  Rng rng(seed);
  Matrix ys(n_mc, d);
  for (int i = 0; i < n_mc; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) ys(i, k) = box.lower(k) + side(k) * uniform01(rng);
  }
  const Vector scores = pred.score().at(x).batch(ys);
  long hits = 0;
  for (int i = 0; i < n_mc; ++i) hits += pred.accepts(scores(i)) ? 1 : 0;
  return static_cast<double>(hits) / n_mc * box.volume();
}

}  // namespace otcp
