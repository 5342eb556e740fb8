#include "otcp/sphere_grid.hpp"

#include "otcp/errors.hpp"
#include "otcp/rng.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>

namespace otcp {
namespace {

constexpr std::array<std::uint32_t, 64> kPrimes = {
    2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,  47,  53,
    59,  61,  67,  71,  73,  79,  83,  89,  97,  101, 103, 107, 109, 113, 127, 131,
    137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223,
    227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311};

double radical_inverse(std::uint64_t index, std::uint32_t base) {
  const double inv = 1.0 / static_cast<double>(base);
  double scale = inv;
  double value = 0.0;
  while (index > 0) {
    value += static_cast<double>(index % base) * scale;
    index /= base;
    scale *= inv;
  }
  return value;
}

// Acklam's rational approximation for the lower region and central region.
double acklam(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Lower-half quantile (p <= 0.5) refined by one Halley step on Phi(x) = p.
double lower_quantile(double p) {
  double x = acklam(p);
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

Eigen::Index isqrt(Eigen::Index m) {
  auto r = static_cast<Eigen::Index>(std::sqrt(static_cast<double>(m)));
  while (r * r > m) --r;
  while ((r + 1) * (r + 1) <= m) ++r;
  return r;
}

void normalize_row(Eigen::Ref<Eigen::RowVectorXd> row) {
  row /= row.norm();
  // Rounding can leave the norm one ulp above 1; the grid must stay in the closed ball.
  if (row.norm() > 1.0) row /= std::nextafter(row.norm(), 2.0);
}

}  // namespace

Matrix halton_sequence(Eigen::Index count, int dim, std::uint64_t skip) {
  if (dim < 1 || dim > static_cast<int>(kPrimes.size())) {
    throw ParamError("Halton dimension must lie in [1, 64], got " + std::to_string(dim));
  }
  if (count < 1) throw ParamError("Halton count must be >= 1");
  if (skip < 1) throw ParamError("Halton skip must be >= 1 (index 0 maps to 0)");
  Matrix out(count, dim);
  for (Eigen::Index i = 0; i < count; ++i) {
    for (int j = 0; j < dim; ++j) {
      out(i, j) = radical_inverse(skip + static_cast<std::uint64_t>(i), kPrimes[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("inverse_normal_cdf requires 0 < p < 1");
  if (p == 0.5) return 0.0;
  // 1 - p is exact for p >= 0.5, so the upper half reuses the lower tail.
  return p < 0.5 ? lower_quantile(p) : -lower_quantile(1.0 - p);
}

DirectionMode parse_direction_mode(const std::string& name) {
  if (name == "low_discrepancy") return DirectionMode::low_discrepancy;
  if (name == "iid") return DirectionMode::iid;
  throw ParamError("unknown grid mode '" + name + "'");
}

const char* to_string(DirectionMode mode) noexcept {
  return mode == DirectionMode::low_discrepancy ? "low_discrepancy" : "iid";
}

Matrix sphere_directions(Eigen::Index n_directions, int dim, DirectionMode mode, Seed seed) {
  if (n_directions < 1) throw ParamError("need at least one direction");
  if (dim < 1) throw ParamError("dimension must be >= 1");
  Matrix out(n_directions, dim);
  Eigen::Index filled = 0;
  if (mode == DirectionMode::low_discrepancy) {
    std::uint64_t next = kDefaultHaltonSkip;
    while (filled < n_directions) {
      const Eigen::Index want = n_directions - filled;
      const Matrix block = halton_sequence(want, dim, next);
      next += static_cast<std::uint64_t>(want);
      for (Eigen::Index i = 0; i < want; ++i) {
        Eigen::RowVectorXd v(dim);
        for (int j = 0; j < dim; ++j) v(j) = inverse_normal_cdf(block(i, j));
        if (v.norm() < 1e-12) continue;
        normalize_row(v);
        out.row(filled++) = v;
      }
    }
  } else {
    Rng rng(derive_seed(seed, {0xD1EC7}));
    std::normal_distribution<double> normal(0.0, 1.0);
    while (filled < n_directions) {
      Eigen::RowVectorXd v(dim);
      for (int j = 0; j < dim; ++j) v(j) = normal(rng);
      if (v.norm() < 1e-12) continue;
      normalize_row(v);
      out.row(filled++) = v;
    }
  }
  return out;
}

GridFactorization default_factorization(Eigen::Index m) {
  if (m < 2) throw ParamError("grid size m must be >= 2");
  GridFactorization f;
  f.n_radii = isqrt(m);
  f.n_directions = (m - 1) / f.n_radii;
  f.n_origin = m - f.n_radii * f.n_directions;
  return f;
}

SphericalGrid grid_from_directions(Matrix directions, GridFactorization factors, DirectionMode mode,
                                   Seed seed) {
  if (directions.rows() != factors.n_directions) {
    throw FactorizationError("direction count does not match n_S");
  }
  SphericalGrid g;
  g.dim = static_cast<int>(directions.cols());
  g.factors = factors;
  g.mode = mode;
  g.seed = seed;
  g.directions = std::move(directions);
  g.points = Matrix::Zero(factors.total(), g.dim);
  Eigen::Index row = factors.n_origin;
  for (Eigen::Index j = 1; j <= factors.n_radii; ++j) {
    const double r = g.radius(j);
    for (Eigen::Index s = 0; s < factors.n_directions; ++s) g.points.row(row++) = r * g.directions.row(s);
  }
  return g;
}

SphericalGrid build_spherical_grid(Eigen::Index m, int dim,
                                   std::optional<GridFactorization> factorization,
                                   DirectionMode mode, Seed seed) {
  if (m < 2) throw ParamError("grid size m must be >= 2");
  if (dim < 1) throw ParamError("dimension must be >= 1");
  GridFactorization f = factorization ? *factorization : default_factorization(m);
  if (f.n_radii < 1 || f.n_directions < 1 || f.n_origin < 0 || f.total() != m) {
    throw FactorizationError("inconsistent factorization: n_R=" + std::to_string(f.n_radii) +
                             ", n_S=" + std::to_string(f.n_directions) + ", n_o=" +
                             std::to_string(f.n_origin) + " for m=" + std::to_string(m));
  }
  return grid_from_directions(sphere_directions(f.n_directions, dim, mode, seed), f, mode, seed);
}

GridRadius grid_radius_index(Eigen::Index n_total, const GridFactorization& f, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParamError("alpha must lie in (0, 1)");
  if (f.n_radii < 1 || f.n_directions < 1 || f.n_origin < 0 || f.total() != n_total) {
    throw ParamError("grid counts are inconsistent with n_total");
  }
  const double target = static_cast<double>(n_total) * (1.0 - alpha);
  // Point counts are compared with a tolerance so that decimal alphas that
  // land exactly on a shell boundary are not pushed up one shell by rounding.
  constexpr double tol = 1e-9;
  auto reaches = [&](Eigen::Index j) {
    return static_cast<double>(f.n_origin + j * f.n_directions) >= target - tol;
  };
  auto j = static_cast<Eigen::Index>(
      std::ceil((target - static_cast<double>(f.n_origin)) / static_cast<double>(f.n_directions) - tol));
  j = std::clamp<Eigen::Index>(j, 0, f.n_radii);
  while (j > 0 && reaches(j - 1)) --j;
  while (j < f.n_radii && !reaches(j)) ++j;
  return {j, static_cast<double>(j) / static_cast<double>(f.n_radii)};
}

void write_grid_csv(const SphericalGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << "# n_R=" << grid.factors.n_radii << " n_S=" << grid.factors.n_directions
      << " n_o=" << grid.factors.n_origin << " mode=" << to_string(grid.mode) << '\n';
  for (int j = 0; j < grid.dim; ++j) out << (j ? "," : "") << "u" << j;
  out << '\n' << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < grid.points.rows(); ++i) {
    for (int j = 0; j < grid.dim; ++j) out << (j ? "," : "") << grid.points(i, j);
    out << '\n';
  }
}

}  // namespace otcp
