#include "oracles.hpp"

#include "otcp/errors.hpp"
#include "otcp/sphere_grid.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

using namespace otcp;

TEST_CASE("halton: base-2 column by hand") {
  const Matrix h = halton_sequence(4, 1, 1);
  CHECK(h(0, 0) == 0.5);
  CHECK(h(1, 0) == 0.25);
  CHECK(h(2, 0) == 0.75);
  CHECK(h(3, 0) == 0.125);
}

TEST_CASE("halton: agrees with a direct radical inverse for every base") {
  const int dim = 64;
  const Matrix h = halton_sequence(50, dim, 64);
  const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79,
                        83, 89, 97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167,
                        173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229, 233, 239, 241, 251, 257,
                        263, 269, 271, 277, 281, 283, 293, 307, 311};
  for (Eigen::Index i = 0; i < 50; ++i) {
    for (int k = 0; k < dim; ++k) {
      CHECK(h(i, k) == doctest::Approx(oracle::radical_inverse(64 + i, primes[k])).epsilon(1e-14));
    }
  }
}

TEST_CASE("halton: determinism, open range, parameter checks") {
  CHECK(halton_sequence(100, 5, 64) == halton_sequence(100, 5, 64));
  const Matrix big = halton_sequence(10000, 6, 1);
  CHECK((big.array() > 0.0).all());
  CHECK((big.array() < 1.0).all());
  CHECK_THROWS_AS(halton_sequence(10, 65, 1), ParamError);
  CHECK_THROWS_AS(halton_sequence(10, 2, 0), ParamError);
}

TEST_CASE("inverse normal cdf: reference values and accuracy") {
  CHECK(inverse_normal_cdf(0.5) == 0.0);
  CHECK(inverse_normal_cdf(0.975) == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK_THROWS_AS(inverse_normal_cdf(0.0), DomainError);
  CHECK_THROWS_AS(inverse_normal_cdf(1.0), DomainError);
  CHECK_THROWS_AS(inverse_normal_cdf(std::nan("")), DomainError);

  double worst = 0.0;
  for (int e = -10; e <= -1; ++e) {
    for (double mant : {1.0, 2.5, 5.0, 7.5}) {
      const double p = mant * std::pow(10.0, e);
      worst = std::max(worst, std::abs(inverse_normal_cdf(p) - oracle::normal_quantile(p)));
      worst = std::max(worst, std::abs(inverse_normal_cdf(1.0 - p) - oracle::normal_quantile(1.0 - p)));
    }
  }
  for (int k = 1; k < 1000; ++k) {
    const double p = k / 1000.0;
    worst = std::max(worst, std::abs(inverse_normal_cdf(p) - oracle::normal_quantile(p)));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("inverse normal cdf: odd symmetry") {
  for (int k = 1; k < 1000; ++k) {
    const double p = k / 1000.0;
    CHECK(std::abs(inverse_normal_cdf(p) + inverse_normal_cdf(1.0 - p)) <= 1e-12);
  }
}

TEST_CASE("directions: unit norm, 1D signs, low-discrepancy balance") {
  const Matrix d5 = sphere_directions(10000, 5, DirectionMode::low_discrepancy, 0);
  CHECK((d5.rowwise().norm().array() - 1.0).abs().maxCoeff() <= 1e-12);
  const Matrix d5i = sphere_directions(10000, 5, DirectionMode::iid, 3);
  CHECK((d5i.rowwise().norm().array() - 1.0).abs().maxCoeff() <= 1e-12);

  const Matrix d1 = sphere_directions(17, 1, DirectionMode::low_discrepancy, 0);
  for (Eigen::Index i = 0; i < d1.rows(); ++i) CHECK(std::abs(d1(i, 0)) == 1.0);
  const Matrix d1i = sphere_directions(17, 1, DirectionMode::iid, 9);
  for (Eigen::Index i = 0; i < d1i.rows(); ++i) CHECK(std::abs(d1i(i, 0)) == 1.0);

  const Matrix d2 = sphere_directions(10000, 2, DirectionMode::low_discrepancy, 0);
  CHECK(d2.colwise().mean().norm() <= 0.02);

  CHECK(sphere_directions(50, 3, DirectionMode::iid, 4) == sphere_directions(50, 3, DirectionMode::iid, 4));
  CHECK(sphere_directions(50, 3, DirectionMode::iid, 4) != sphere_directions(50, 3, DirectionMode::iid, 5));
}

TEST_CASE("default factorization") {
  const auto f = default_factorization(100);
  CHECK(f.n_radii == 10);
  CHECK(f.n_directions == 9);
  CHECK(f.n_origin == 10);
  for (Eigen::Index m = 2; m < 5000; m += 37) {
    const auto g = default_factorization(m);
    CHECK(g.total() == m);
    CHECK(g.n_origin >= 1);
  }
}

TEST_CASE("build grid: explicit factorization, minimal grid, errors") {
  const auto g = build_spherical_grid(100, 2, GridFactorization{9, 11, 1}, DirectionMode::low_discrepancy, 0);
  CHECK(g.size() == 100);
  CHECK(g.radius(1) == doctest::Approx(1.0 / 9.0));
  CHECK(g.radius(9) == 1.0);

  const auto tiny = build_spherical_grid(2, 3, std::nullopt, DirectionMode::low_discrepancy, 0);
  CHECK(tiny.factors.n_radii == 1);
  CHECK(tiny.factors.n_directions == 1);
  CHECK(tiny.factors.n_origin == 1);
  CHECK(tiny.points.row(0).norm() == 0.0);
  CHECK(tiny.points.row(1).norm() == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(build_spherical_grid(100, 2, GridFactorization{9, 11, 2}, DirectionMode::iid, 0),
                  FactorizationError);
  CHECK_THROWS_AS(build_spherical_grid(1, 2, std::nullopt, DirectionMode::iid, 0), ParamError);
}

TEST_CASE("grid structure: norms multiset and radius-major layout") {
  for (Eigen::Index m : {50, 257, 1024}) {
    for (int dim : {1, 2, 3, 6}) {
      const auto g = build_spherical_grid(m, dim, std::nullopt, DirectionMode::low_discrepancy, 1);
      const auto& f = g.factors;
      CHECK(g.points.rows() == m);
      CHECK((g.points.rowwise().norm().array() <= 1.0).all());
      std::map<long, long> counts;
      for (Eigen::Index i = 0; i < m; ++i) {
        const double r = g.points.row(i).norm() * static_cast<double>(f.n_radii);
        CHECK(std::abs(r - std::round(r)) < 1e-9);
        counts[std::lround(r)]++;
      }
      CHECK(counts[0] == f.n_origin);
      for (long j = 1; j <= f.n_radii; ++j) CHECK(counts[j] == f.n_directions);
      // origin copies first, then shell j holds directions scaled by j / n_R
      for (Eigen::Index i = 0; i < f.n_origin; ++i) CHECK(g.points.row(i).norm() == 0.0);
      const Eigen::Index j = f.n_radii / 2 + 1;
      const Eigen::Index base = f.n_origin + (j - 1) * f.n_directions;
      CHECK((g.points.middleRows(base, f.n_directions) - g.radius(j) * g.directions).cwiseAbs().maxCoeff() < 1e-15);
    }
  }
}

TEST_CASE("grid mean is near the origin") {
  for (Eigen::Index m : {1024, 4096}) {
    for (int dim = 2; dim <= 6; ++dim) {
      const auto ld = build_spherical_grid(m, dim, std::nullopt, DirectionMode::low_discrepancy, 0);
      CHECK(ld.points.colwise().mean().norm() <= 3.0 / std::sqrt(static_cast<double>(m)));

      // iid directions are shared by every shell, so the grid mean is
      // (sum_j j/n_R) / m times the direction sum; its rms is
      // sqrt(n_S) (n_R + 1) / (2 m), which exceeds 3/sqrt(m) here.
      const auto& f = ld.factors;
      const double rms = std::sqrt(static_cast<double>(f.n_directions)) * static_cast<double>(f.n_radii + 1) /
                         (2.0 * static_cast<double>(m));
      int over = 0;
      for (Seed s = 0; s < 20; ++s) {
        const auto iid = build_spherical_grid(m, dim, std::nullopt, DirectionMode::iid, s);
        if (iid.points.colwise().mean().norm() > 3.0 * rms) ++over;
      }
      CHECK(over <= 1);
    }
  }
}

TEST_CASE("grid radius index: worked examples") {
  const GridFactorization f{9, 11, 1};
  const auto a = grid_radius_index(100, f, 0.1);
  CHECK(a.shell == 9);
  CHECK(a.radius == 1.0);
  const auto b = grid_radius_index(100, f, 0.5);
  CHECK(b.shell == 5);
  CHECK(b.radius == doctest::Approx(5.0 / 9.0));
  const auto c = grid_radius_index(100, f, 0.995);
  CHECK(c.shell == 0);
  CHECK(c.radius == 0.0);
  CHECK_THROWS_AS(grid_radius_index(101, f, 0.1), ParamError);
  CHECK_THROWS_AS(grid_radius_index(100, f, 1.0), ParamError);
}

TEST_CASE("grid radius index matches an exhaustive search") {
  long mismatches = 0;
  for (long nr = 1; nr <= 20; ++nr)
    for (long ns = 1; ns <= 20; ++ns)
      for (long no = 0; no <= 5; ++no)
        for (int a = 1; a <= 99; ++a) {
          const double alpha = a / 100.0;
          const GridFactorization f{nr, ns, no};
          const auto got = grid_radius_index(f.total(), f, alpha);
          if (got.shell != oracle::minimal_shell(nr, ns, no, alpha)) ++mismatches;
        }
  CHECK(mismatches == 0);
}

TEST_CASE("grid csv export") {
  const auto g = build_spherical_grid(30, 2, std::nullopt, DirectionMode::low_discrepancy, 0);
  const auto p = std::filesystem::temp_directory_path() / "otcp_grid.csv";
  write_grid_csv(g, p);
  std::ifstream in(p);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#' && line.find_first_of("0123456789") == 0) ++rows;
    if (!line.empty() && line[0] == '-') ++rows;
  }
  CHECK(rows == 30);
}
