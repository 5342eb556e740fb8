#include "oracles.hpp"

#include "otcp/calibration.hpp"
#include "otcp/region.hpp"
#include "otcp/rng.hpp"
#include "otcp/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>

using namespace otcp;

namespace {

std::shared_ptr<const SphericalGrid> grid(Eigen::Index m, int dim) {
  return std::make_shared<const SphericalGrid>(
      build_spherical_grid(m, dim, std::nullopt, DirectionMode::low_discrepancy, 0));
}

Dataset gaussian(Eigen::Index n, Seed seed, Matrix cov = Matrix::Identity(2, 2)) {
  SynthParams p;
  p.covariance = std::move(cov);
  return synth_dataset(SynthKind::gaussian, n, cov.rows() ? cov.rows() : 2, p, seed);
}

Regressor knn(const Dataset& train, Eigen::Index k = 10) {
  return fit_regressor(train, RegressorParams{RegressorKind::knn_mean, k, 0.0});
}

std::shared_ptr<const EntropicMap> map_on(const Dataset& fit, const Regressor& reg, Eigen::Index m, double eps) {
  return std::make_shared<const EntropicMap>(
      EntropicMap::fit(residuals(fit, reg).scores, grid(m, static_cast<int>(reg.target_dim())), eps, {},
                       fit.provenance));
}

CovarianceFactor identity_factor(Eigen::Index d, double c = 1.0) {
  CovarianceFactor f;
  f.inv_sqrt = Matrix::Identity(d, d) / std::sqrt(c);
  f.sqrt = Matrix::Identity(d, d) * std::sqrt(c);
  f.fitted_on = "fixed";
  return f;
}

/// Data whose targets are an exact affine function of x, so ridge fits it perfectly.
Dataset exact_linear(Eigen::Index n, Seed seed) {
  Rng rng(seed);
  Dataset ds;
  ds.features.resize(n, 1);
  ds.targets.resize(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = uniform01(rng);
    ds.features(i, 0) = x;
    ds.targets.row(i) << 2 * x + 1, -x;
  }
  ds.provenance = "exact:" + std::to_string(seed);
  return ds;
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("score kinds parse") {
  CHECK(parse_score_kind("merge_l2") == ScoreKind::merge_l2);
  CHECK(parse_score_kind("mahalanobis") == ScoreKind::merge_mahalanobis);
  CHECK(parse_score_kind("merge_mahalanobis") == ScoreKind::merge_mahalanobis);
  CHECK(parse_score_kind("otcp") == ScoreKind::otcp);
  CHECK_THROWS_AS(parse_score_kind("hdr"), ParamError);
}

TEST_CASE("identity covariance makes mahalanobis equal to l2") {
  const Dataset train = gaussian(200, 1);
  const Regressor reg = knn(train);
  const auto l2 = ScoreFunction::merge_l2(reg);
  const auto mah = ScoreFunction::merge_mahalanobis(reg, identity_factor(2));
  Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    const Vector x = Vector::Constant(1, uniform01(rng));
    const Vector y = vec2(4 * uniform01(rng) - 2, 4 * uniform01(rng) - 2);
    CHECK(mah(x, y) == l2(x, y));
    CHECK(l2(x, y) == doctest::Approx((y - reg.predict(x)).norm()).epsilon(1e-15));
  }
}

TEST_CASE("mcp score by hand") {
  Dataset train;
  train.features = Matrix::Constant(2, 1, 0.5);
  train.targets.resize(2, 2);
  train.targets << 0, 0, 1, 2;
  train.provenance = "mcp";
  const auto q = fit_quantile_predictor(train, 2, 0.0, 1.0);
  const auto fn = ScoreFunction::mcp_max(knn(train, 2), q);
  // l = (0, 0), u = (1, 2), y = (2, 1): max(max(-2, 1), max(-1, -1)) = 1
  CHECK(fn(Vector::Constant(1, 0.5), vec2(2, 1)) == 1.0);
  CHECK(fn(Vector::Constant(1, 0.5), vec2(0.5, 1)) == -0.5);
}

TEST_CASE("otcp score is the rank of the residual") {
  const Dataset train = gaussian(300, 3), fit = gaussian(300, 4), cal = gaussian(50, 5);
  const Regressor reg = knn(train);
  const auto map = map_on(fit, reg, 512, 0.1);
  const auto fn = ScoreFunction::otcp(reg, map);
  const Vector s = fn.evaluate(cal);
  const ScoreMatrix r = residuals(cal, reg);
  for (Eigen::Index i = 0; i < cal.size(); ++i) {
    CHECK(s(i) == doctest::Approx(ot_rank(*map, r.scores.row(i).transpose())).epsilon(1e-14));
    CHECK(s(i) >= 0.0);
    CHECK(s(i) <= 1.0);
  }
}

TEST_CASE("abs univariate score and errors") {
  SynthParams p;
  const Dataset ds = synth_dataset(SynthKind::gaussian, 100, 1, p, 6);
  const Regressor reg = knn(ds);
  const auto fn = ScoreFunction::abs_univariate(reg);
  const Vector x = Vector::Constant(1, 0.3);
  CHECK(fn(x, Vector::Constant(1, 5.0)) == doctest::Approx(std::abs(5.0 - reg.predict(x)(0))));
  CHECK_THROWS_AS(ScoreFunction::abs_univariate(knn(gaussian(50, 7))), DimensionError);
  CHECK_THROWS_AS(fn(x, Vector::Zero(2)), DimensionError);
  CHECK_THROWS_AS(fn(Vector::Zero(3), Vector::Zero(1)), DimensionError);
  ScoreFunction blank;
  CHECK_THROWS_AS(blank(x, Vector::Zero(1)), NotFitted);
  CHECK_THROWS_AS(fn.map(), MethodError);
}

TEST_CASE("covariance estimation") {
  Rng rng(8);
  std::normal_distribution<double> nd;
  ScoreMatrix iso;
  iso.scores.resize(10000, 2);
  for (Eigen::Index i = 0; i < 10000; ++i) iso.scores.row(i) << nd(rng), nd(rng);
  iso.origin = "iso|knn";
  const auto f = estimate_covariance(iso, 0.0);
  CHECK((f.inv_sqrt - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.05);
  CHECK((f.inv_sqrt - f.inv_sqrt.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((f.sqrt * f.inv_sqrt - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(f.fitted_on == "iso");

  ScoreMatrix aniso = iso;
  aniso.scores.col(0) *= 2.0;
  aniso.scores.col(1) *= 0.5;
  const auto g = estimate_covariance(aniso, 0.0);
  const Matrix white = aniso.scores * g.inv_sqrt.transpose();
  for (int k = 0; k < 2; ++k) {
    const double sd = std::sqrt((white.col(k).array() - white.col(k).mean()).square().sum() / 9999.0);
    CHECK(std::abs(sd - 1.0) < 0.05);
  }

  ScoreMatrix zero;
  zero.scores = Matrix::Zero(20, 2);
  CHECK((estimate_covariance(zero, 1.0).inv_sqrt - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_THROWS_AS(estimate_covariance(zero, 0.0), SingularError);
  CHECK_THROWS_AS(estimate_covariance(zero, -1.0), ParamError);
  CHECK(default_covariance_ridge(aniso) == doctest::Approx(1e-6 * (4.0 + 0.25) / 2.0).epsilon(0.05));
}

TEST_CASE("conformal threshold: worked examples") {
  const std::vector<double> s{1, 2, 3, 4};
  CHECK(conformal_threshold(s, 0.2) == 4.0);
  CHECK(conformal_threshold(std::vector<double>{7.5}, 0.9) == 7.5);
  CHECK(std::isinf(conformal_threshold(s, 0.19)));
  std::vector<double> nineteen(19);
  for (int i = 0; i < 19; ++i) nineteen[i] = (i * 7) % 19;
  CHECK(conformal_rank(19, 0.05) == 19);
  CHECK(conformal_threshold(nineteen, 0.05) == 18.0);
  CHECK_THROWS_AS(conformal_threshold(s, 0.0), ParamError);
  CHECK_THROWS_AS(conformal_threshold(s, 1.0), ParamError);
  CHECK_THROWS_AS(conformal_threshold(std::vector<double>{}, 0.1), ParamError);
}

TEST_CASE("conformal threshold agrees with a sorted order statistic") {
  Rng rng(9);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + uniform_index(rng, 60);
    std::vector<double> s(n);
    for (auto& v : s) v = std::floor(10 * uniform01(rng));  // ties on purpose
    const double alpha = 0.01 + 0.98 * uniform01(rng);
    const auto k = static_cast<std::size_t>(std::ceil((1.0 - alpha) * static_cast<double>(n + 1) - 1e-9));
    std::vector<double> sorted = s;
    std::sort(sorted.begin(), sorted.end());
    const double expected = k > n ? std::numeric_limits<double>::infinity() : sorted[k - 1];
    CHECK(conformal_threshold(s, alpha) == expected);
  }
}

TEST_CASE("calibrate: perfect regressor gives a zero threshold") {
  const Dataset train = exact_linear(30, 1), cal = exact_linear(40, 2);
  const Regressor reg = fit_regressor(train, RegressorParams{RegressorKind::ridge_linear, 1, 0.0});
  const auto pred = calibrate(ScoreFunction::merge_l2(reg), cal, 0.1);
  CHECK(pred.threshold() < 1e-10);
  const Vector x = Vector::Constant(1, 0.25);
  CHECK(pred.contains(x, reg.predict(x)));
  CHECK_FALSE(pred.contains(x, reg.predict(x) + vec2(1e-3, 0)));
}

TEST_CASE("calibrate: provenance guard") {
  const Dataset train = gaussian(200, 10), cal = gaussian(100, 11);
  const Regressor reg = knn(train);
  CHECK_THROWS_AS(calibrate(ScoreFunction::merge_l2(reg), train, 0.1), ProvenanceError);
  CalibrateOptions opts;
  opts.allow_provenance_overlap = true;
  CHECK_NOTHROW(calibrate(ScoreFunction::merge_l2(reg), train, 0.1, opts));

  const auto map = map_on(cal, reg, 256, 0.1);
  CHECK_THROWS_AS(calibrate(ScoreFunction::otcp(reg, map), cal, 0.1), ProvenanceError);
  const auto pred = calibrate(ScoreFunction::otcp(reg, map), cal, 0.1, opts);
  CHECK(pred.threshold() >= 0.0);
  CHECK(pred.threshold() <= 1.0);
}

TEST_CASE("calibrate: n_cal = 19 at alpha = 0.05 uses the maximum") {
  const Dataset train = gaussian(100, 12), cal = gaussian(19, 13);
  const auto fn = ScoreFunction::merge_l2(knn(train));
  const auto pred = calibrate(fn, cal, 0.05);
  CHECK(pred.n_cal() == 19);
  CHECK(pred.threshold() == fn.evaluate(cal).maxCoeff());
}

TEST_CASE("contains: infinite threshold, ball membership, inclusive interval") {
  const Dataset train = gaussian(100, 14), cal = gaussian(5, 15);
  const auto fn = ScoreFunction::merge_l2(knn(train));
  const auto wide = calibrate(fn, cal, 0.1);  // k = 6 > 5
  CHECK(std::isinf(wide.threshold()));
  CHECK(wide.contains(Vector::Constant(1, 0.5), vec2(1e9, -1e9)));
  CHECK_THROWS_AS(wide.contains(Vector::Constant(1, 0.5), Vector::Zero(3)), DimensionError);

  const auto ball = calibrate(fn, gaussian(200, 16), 0.1);
  Rng rng(17);
  for (int t = 0; t < 500; ++t) {
    const Vector x = Vector::Constant(1, uniform01(rng));
    const Vector y = vec2(6 * uniform01(rng) - 3, 6 * uniform01(rng) - 3);
    CHECK(ball.contains(x, y) == ((y - fn.regressor().predict(x)).norm() <= ball.threshold()));
  }

  SynthParams p;
  const Dataset tr1 = synth_dataset(SynthKind::gaussian, 100, 1, p, 18);
  const Dataset cal1 = synth_dataset(SynthKind::gaussian, 50, 1, p, 19);
  const auto interval = calibrate(ScoreFunction::abs_univariate(knn(tr1)), cal1, 0.1);
  const Vector x = Vector::Constant(1, 0.4);
  const double c = interval.score().regressor().predict(x)(0), r = interval.threshold();
  CHECK(interval.contains(x, Vector::Constant(1, c + r)));
  CHECK(interval.contains(x, Vector::Constant(1, c - r)));
  CHECK_FALSE(interval.contains(x, Vector::Constant(1, c + r + 1e-9)));
}

TEST_CASE("pit values: extremes and definition") {
  const std::vector<double> s{0.3, 0.1, 0.2, 0.2};
  CHECK(pit_value(s, 0.0) == 0.0);
  CHECK(pit_value(s, 5.0) == 1.0);
  CHECK(pit_value(s, 0.2) == 0.75);
  CHECK(pit_interval_mass(9, 0.0, 1.0) == 1.0);
  CHECK(pit_interval_mass(9, 0.0, 0.9) == doctest::Approx(9.0 / 10.0));
  CHECK(pit_interval_mass(9, 0.1, 0.9) == doctest::Approx(8.0 / 10.0));
}

TEST_CASE("pit values follow the discrete uniform law on {0, 1/n, ..., 1}") {
  const int n = 9, trials = 10000;
  std::vector<int> counts(n + 1, 0);
  Rng rng(20);
  std::normal_distribution<double> nd;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> cal(n);
    for (auto& v : cal) v = nd(rng);
    const double u = pit_value(cal, nd(rng));
    counts[static_cast<std::size_t>(std::lround(u * n))]++;
  }
  const double p = 1.0 / (n + 1), e = trials * p, sd = std::sqrt(trials * p * (1 - p));
  double chi2 = 0.0;
  for (int c : counts) {
    CHECK(std::abs(c - e) <= 3 * sd);
    chi2 += (c - e) * (c - e) / e;
  }
  const double pval = oracle::chi_square_sf(chi2, n);
  MESSAGE("chi-square " << chi2 << ", p = " << pval);
  CHECK(pval > 0.001);
}

TEST_CASE("two-sided pit rule matches its coverage formula") {
  const int n = 19, trials = 20000;
  const PitInterval rule{0.1, 0.9};
  Rng rng(21);
  std::normal_distribution<double> nd;
  int hits = 0;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> cal(n);
    for (auto& v : cal) v = nd(rng);
    const double u = pit_value(cal, nd(rng));
    hits += (u >= rule.lower && u <= rule.upper) ? 1 : 0;
  }
  const double expected = pit_interval_mass(n, rule.lower, rule.upper);
  CHECK(std::abs(hits / double(trials) - expected) <= 3 * std::sqrt(expected * (1 - expected) / trials));

  SynthParams p;
  const Dataset tr = synth_dataset(SynthKind::gaussian, 100, 1, p, 22);
  const Dataset cal = synth_dataset(SynthKind::gaussian, 19, 1, p, 23);
  CalibrateOptions opts;
  opts.pit_interval = rule;
  const auto pred = calibrate(ScoreFunction::abs_univariate(knn(tr)), cal, 0.1, opts);
  const Vector x = Vector::Constant(1, 0.5);
  const Vector yhat = pred.score().regressor().predict(x);
  CHECK_FALSE(pred.contains(x, yhat));  // score 0 has F_n = 0 < 0.1
}

TEST_CASE("thresholds and regions shrink as alpha grows") {
  const Dataset train = gaussian(300, 24), fit = gaussian(300, 25), cal = gaussian(300, 26);
  const Regressor reg = knn(train);
  const auto map = map_on(fit, reg, 1024, 0.1);
  for (const auto& fn : {ScoreFunction::merge_l2(reg), ScoreFunction::otcp(reg, map)}) {
    const auto base = calibrate(fn, cal, 0.05);
    double prev = base.threshold();
    for (double a : {0.1, 0.2, 0.3, 0.5, 0.8}) {
      const auto next = base.with_alpha(a);
      CHECK(next.threshold() <= prev);
      prev = next.threshold();
    }
    const auto tight = base.with_alpha(0.5);
    Rng rng(27);
    for (int t = 0; t < 300; ++t) {
      const Vector x = Vector::Constant(1, uniform01(rng));
      const Vector y = vec2(6 * uniform01(rng) - 3, 6 * uniform01(rng) - 3);
      if (tight.contains(x, y)) CHECK(base.contains(x, y));
    }
  }
}

TEST_CASE("scaled identity covariance gives the same decisions as l2") {
  const Dataset train = gaussian(200, 28), cal = gaussian(150, 29), test = gaussian(500, 30);
  const Regressor reg = knn(train);
  const auto l2 = calibrate(ScoreFunction::merge_l2(reg), cal, 0.1);
  const auto mah = calibrate(ScoreFunction::merge_mahalanobis(reg, identity_factor(2, 3.7)), cal, 0.1);
  for (Eigen::Index i = 0; i < test.size(); ++i) {
    const Vector x = test.features.row(i).transpose(), y = test.targets.row(i).transpose();
    CHECK(l2.contains(x, y) == mah.contains(x, y));
  }
}

TEST_CASE("otcp ranks track mahalanobis scores on correlated Gaussian residuals") {
  Matrix cov(2, 2);
  cov << 1.0, 0.7, 0.7, 1.0;
  const Dataset train = gaussian(1000, 31, cov), fit = gaussian(2000, 32, cov), probe = gaussian(2000, 33, cov);
  const Regressor reg = knn(train, 30);
  const ScoreMatrix fit_res = residuals(fit, reg);
  const auto mah = ScoreFunction::merge_mahalanobis(reg, estimate_covariance(fit_res, default_covariance_ridge(fit_res)));
  const auto ot = ScoreFunction::otcp(reg, map_on(fit, reg, 4096, 0.1));
  const Vector a = ot.evaluate(probe), b = mah.evaluate(probe);
  const double rho = oracle::spearman({a.data(), a.data() + a.size()}, {b.data(), b.data() + b.size()});
  MESSAGE("Spearman(otcp, mahalanobis) = " << rho);
  CHECK(rho >= 0.95);
}

TEST_CASE("coverage over 200 exchangeable splits, every score kind") {
  const int reps = 200;
  const double alpha = 0.1, sigma = std::sqrt(0.9 * 0.1 / reps);
  std::map<ScoreKind, int> covered;
  for (int r = 0; r < reps; ++r) {
    const Seed base = 1000 + static_cast<Seed>(r) * 10;
    const Dataset train = gaussian(100, base), fit = gaussian(100, base + 1);
    const Dataset cal = gaussian(99, base + 2), test = gaussian(1, base + 3);
    const Regressor reg = knn(train);
    const ScoreMatrix fit_res = residuals(fit, reg);
    const std::vector<ScoreFunction> fns{
        ScoreFunction::merge_l2(reg),
        ScoreFunction::merge_mahalanobis(reg, estimate_covariance(fit_res, default_covariance_ridge(fit_res))),
        ScoreFunction::mcp_max(reg, fit_quantile_predictor(train, 20, 0.05, 0.95)),
        ScoreFunction::otcp(reg, map_on(fit, reg, 256, 0.1))};
    for (const auto& fn : fns) {
      const auto pred = calibrate(fn, cal, alpha);
      covered[fn.kind()] += pred.contains(test.features.row(0).transpose(), test.targets.row(0).transpose()) ? 1 : 0;
    }
  }
  for (const auto& [kind, hits] : covered) {
    const double rate = hits / double(reps);
    MESSAGE(std::string(to_string(kind)) << " coverage " << rate);
    CHECK(rate >= 0.9 - 3 * sigma);
    CHECK(rate <= 0.9 + 1.0 / 100 + 3 * sigma);
  }
}

TEST_CASE("polygon helpers") {
  Matrix sq(4, 2);
  sq << 0, 0, 2, 0, 2, 1, 0, 1;
  CHECK(polygon_area(sq) == 2.0);
  CHECK(point_in_polygon(sq, vec2(1, 0.5)));
  CHECK_FALSE(point_in_polygon(sq, vec2(2.5, 0.5)));
  Matrix closed(5, 2);
  closed << sq, sq.row(0);
  CHECK(polygon_area(closed) == 2.0);
  CHECK_FALSE(polyline_self_intersects(closed));
  Matrix bow(5, 2);
  bow << 0, 0, 2, 1, 2, 0, 0, 1, 0, 0;
  CHECK(polyline_self_intersects(bow));
}

TEST_CASE("baseline contours are exact shapes") {
  const Dataset train = gaussian(200, 40), cal = gaussian(200, 41);
  const Regressor reg = knn(train);
  const Vector x = Vector::Constant(1, 0.3), c = reg.predict(x);

  const auto l2 = calibrate(ScoreFunction::merge_l2(reg), cal, 0.1);
  const Region2D circle = prediction_region_2d(l2, x, 64);
  CHECK(circle.method == "merge_l2");
  CHECK(circle.contour.row(0) == circle.contour.row(circle.contour.rows() - 1));
  CHECK(circle.vertex_count() == 64);
  for (Eigen::Index i = 0; i < circle.contour.rows(); ++i) {
    CHECK(std::abs((circle.contour.row(i).transpose() - c).norm() - l2.threshold()) <= 1e-9);
  }
  CHECK(polygon_area(circle.contour) ==
        doctest::Approx(0.5 * 64 * std::sin(2 * std::numbers::pi / 64) * l2.threshold() * l2.threshold()));

  Matrix cov(2, 2);
  cov << 4.0, 0.0, 0.0, 0.25;
  const auto mah_fn = ScoreFunction::merge_mahalanobis(reg, estimate_covariance(ScoreMatrix{
                                                                 residuals(gaussian(3000, 42, cov), reg).scores, "x|y"},
                                                             0.0));
  const auto mah = calibrate(mah_fn, cal, 0.1);
  const Region2D ell = prediction_region_2d(mah, x, 128);
  for (Eigen::Index i = 0; i < ell.contour.rows(); ++i) {
    CHECK(mah_fn(x, ell.contour.row(i).transpose()) == doctest::Approx(mah.threshold()).epsilon(1e-9));
  }

  const auto q = fit_quantile_predictor(train, 20, 0.05, 0.95);
  const auto box = calibrate(ScoreFunction::mcp_max(reg, q), cal, 0.1);
  const Region2D rect = prediction_region_2d(box, x, 32);
  const auto b = q.predict_bounds(x);
  const Eigen::RowVectorXd lo = rect.contour.colwise().minCoeff(), hi = rect.contour.colwise().maxCoeff();
  for (int k = 0; k < 2; ++k) {
    CHECK(lo(k) == doctest::Approx(b.lower(k) - box.threshold()).epsilon(1e-12));
    CHECK(hi(k) == doctest::Approx(b.upper(k) + box.threshold()).epsilon(1e-12));
  }
  CHECK(polygon_area(rect.contour) == doctest::Approx((hi - lo).prod()).epsilon(1e-12));
  CHECK(rect.vertex_count() >= 8);

  CHECK_THROWS_AS(region_contour_2d(l2, x, 64), MethodError);
  CHECK_THROWS_AS(prediction_region_2d(l2, x, 4), ParamError);
  const auto inf = calibrate(ScoreFunction::merge_l2(reg), gaussian(5, 43), 0.1);
  CHECK_THROWS_AS(prediction_region_2d(inf, x, 64), MethodError);
}

TEST_CASE("otcp contour on isotropic residuals is nearly circular") {
  const Dataset train = gaussian(1000, 50), fit = gaussian(2000, 51), cal = gaussian(500, 52);
  const Regressor reg = knn(train, 30);
  const auto pred = calibrate(ScoreFunction::otcp(reg, map_on(fit, reg, 4096, 0.1)), cal, 0.1);
  const Vector x = Vector::Constant(1, 0.5);
  const Region2D region = region_contour_2d(pred, x, 128);
  CHECK(region.method == "otcp");
  CHECK(region.vertex_count() == 128);
  CHECK(region.contour.allFinite());
  CHECK(region.contour.row(0) == region.contour.row(128));
  const Vector c = region.contour.topRows(128).colwise().mean().transpose();
  const Vector radii = (region.contour.topRows(128).rowwise() - c.transpose()).rowwise().norm();
  MESSAGE("radius ratio " << radii.maxCoeff() / radii.minCoeff());
  CHECK(radii.maxCoeff() / radii.minCoeff() <= 1.3);
  CHECK_FALSE(region.self_intersecting);
}
