#include "otcp/region.hpp"

#include "otcp/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace otcp {
namespace {

using json = nlohmann::json;

void check_request(const CalibratedPredictor& pred, const Eigen::Ref<const Vector>& x, int n_angles) {
  if (pred.score().target_dim() != 2) throw DimensionError("contours need a 2D response");
  if (x.size() != pred.score().feature_dim()) throw DimensionError("query input has wrong dimension");
  if (n_angles < 8) throw ParamError("contours need at least 8 vertices");
  if (!std::isfinite(pred.threshold())) throw MethodError("threshold is infinite; the region is unbounded");
  if (pred.pit_interval() && pred.pit_interval()->lower > 0.0) {
    throw MethodError("two-sided PIT regions are not a single level set");
  }
}

Matrix unit_circle(int n) {
  Matrix c(n, 2);
  for (int k = 0; k < n; ++k) {
    const double t = 2.0 * std::numbers::pi * k / n;
    c(k, 0) = std::cos(t);
    c(k, 1) = std::sin(t);
  }
  return c;
}

Matrix close_ring(const Matrix& pts) {
  Matrix out(pts.rows() + 1, 2);
  out.topRows(pts.rows()) = pts;
  out.row(pts.rows()) = pts.row(0);
  return out;
}

Region2D make_region(const CalibratedPredictor& pred, const Eigen::Ref<const Vector>& x,
                     const Vector& center) {
  Region2D r;
  r.x = x;
  r.center = center;
  r.alpha = pred.alpha();
  r.threshold = pred.threshold();
  r.method = to_string(pred.score().kind());
  return r;
}

bool segments_cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c,
                    const Eigen::Vector2d& d) {
  auto orient = [](const Eigen::Vector2d& p, const Eigen::Vector2d& q, const Eigen::Vector2d& r) {
    const double v = (q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x());
    return (v > 0) - (v < 0);
  };
  const int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
  return o1 * o2 < 0 && o3 * o4 < 0;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string join(const Vector& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(v(i));
  return s;
}

Vector split_vector(const std::string& s) {
  std::istringstream is(s);
  std::vector<double> vals;
  double v;
  while (is >> v) vals.push_back(v);
  return Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace

Region2D region_contour_2d(const CalibratedPredictor& pred, const Eigen::Ref<const Vector>& x,
                           int n_angles) {
  if (pred.score().kind() != ScoreKind::otcp) {
    throw MethodError("region_contour_2d needs an otcp predictor; use baseline_contour_2d");
  }
  check_request(pred, x, n_angles);
  const EntropicMap& map = pred.score().map();
  const Vector center = pred.score().regressor().predict(x);
  const double r = std::min(pred.threshold(), 1.0);

  const Matrix circle = unit_circle(n_angles);
  Matrix pulled(n_angles, 2);
  for (int k = 0; k < n_angles; ++k) {
    const Vector u = r * circle.row(k).transpose();
    pulled.row(k) = (map.inverse(u) + center).transpose();
  }

  Region2D region = make_region(pred, x, center);
  region.self_intersecting = polyline_self_intersects(close_ring(pulled));

  const Eigen::RowVector2d centroid = pulled.colwise().mean();
  std::vector<int> order(n_angles);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> angle(n_angles);
  for (int k = 0; k < n_angles; ++k) {
    angle[k] = std::atan2(pulled(k, 1) - centroid(1), pulled(k, 0) - centroid(0));
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return angle[a] < angle[b]; });
  Matrix sorted(n_angles, 2);
  for (int k = 0; k < n_angles; ++k) sorted.row(k) = pulled.row(order[k]);
  region.contour = close_ring(sorted);
  return region;
}

Region2D baseline_contour_2d(const CalibratedPredictor& pred, const Eigen::Ref<const Vector>& x,
                             int n_angles) {
  check_request(pred, x, n_angles);
  const ScoreFunction& fn = pred.score();
  const auto at = fn.at(x);
  Region2D region = make_region(pred, x, at.center());
  const double r = pred.threshold();
  const Eigen::RowVector2d c = at.center().transpose();

  switch (fn.kind()) {
    case ScoreKind::merge_l2: {
      Matrix pts = r * unit_circle(n_angles);
      pts.rowwise() += c;
      region.contour = close_ring(pts);
      break;
    }
    case ScoreKind::merge_mahalanobis: {
      Matrix pts = r * unit_circle(n_angles) * fn.covariance().sqrt.transpose();
      pts.rowwise() += c;
      region.contour = close_ring(pts);
      break;
    }
    case ScoreKind::mcp_max: {
      const auto& b = *at.bounds();
      const Eigen::Vector2d lo = b.lower.array() - r;
      const Eigen::Vector2d hi = b.upper.array() + r;
      const Eigen::Vector2d corners[4] = {{lo(0), lo(1)}, {hi(0), lo(1)}, {hi(0), hi(1)}, {lo(0), hi(1)}};
      const int per_edge = (n_angles + 3) / 4;
      Matrix pts(4 * per_edge, 2);
      for (int e = 0; e < 4; ++e) {
        const Eigen::Vector2d& p = corners[e];
        const Eigen::Vector2d& q = corners[(e + 1) % 4];
        for (int s = 0; s < per_edge; ++s) {
          const double t = static_cast<double>(s) / per_edge;
          pts.row(e * per_edge + s) = ((1.0 - t) * p + t * q).transpose();
        }
      }
      region.contour = close_ring(pts);
      break;
    }
    case ScoreKind::otcp:
      throw MethodError("otcp regions come from region_contour_2d");
    case ScoreKind::abs_univariate:
      throw MethodError("abs_univariate scores are one-dimensional");
  }
  return region;
}

Region2D prediction_region_2d(const CalibratedPredictor& pred, const Eigen::Ref<const Vector>& x,
                              int n_angles) {
  if (pred.score().kind() == ScoreKind::otcp) return region_contour_2d(pred, x, n_angles);
  return baseline_contour_2d(pred, x, n_angles);
}

double polygon_area(const Matrix& p) {
  const Eigen::Index n = p.rows();
  double twice = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j = (i + 1) % n;
    twice += p(i, 0) * p(j, 1) - p(j, 0) * p(i, 1);
  }
  return std::abs(twice) / 2.0;
}

bool point_in_polygon(const Matrix& p, const Eigen::Ref<const Vector>& q) {
  bool inside = false;
  const Eigen::Index n = p.rows();
  for (Eigen::Index i = 0, j = n - 1; i < n; j = i++) {
    const bool straddles = (p(i, 1) > q(1)) != (p(j, 1) > q(1));
    if (straddles) {
      const double xc = p(j, 0) + (q(1) - p(j, 1)) * (p(i, 0) - p(j, 0)) / (p(i, 1) - p(j, 1));
      if (q(0) < xc) inside = !inside;
    }
  }
  return inside;
}

bool polyline_self_intersects(const Matrix& closed) {
  const Eigen::Index edges = closed.rows() - 1;
  for (Eigen::Index i = 0; i < edges; ++i) {
    const Eigen::Vector2d a = closed.row(i).transpose(), b = closed.row(i + 1).transpose();
    for (Eigen::Index j = i + 2; j < edges; ++j) {
      if (i == 0 && j == edges - 1) continue;
      const Eigen::Vector2d c = closed.row(j).transpose(), d = closed.row(j + 1).transpose();
      if (segments_cross(a, b, c, d)) return true;
    }
  }
  return false;
}

void write_region_csv(const Region2D& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "# method=" << r.method << "\n# alpha=" << fmt(r.alpha) << "\n# threshold=" << fmt(r.threshold)
      << "\n# self_intersecting=" << (r.self_intersecting ? 1 : 0) << "\n# x=" << join(r.x)
      << "\n# center=" << join(r.center) << "\ny1,y2\n";
  for (Eigen::Index i = 0; i < r.contour.rows(); ++i) {
    out << fmt(r.contour(i, 0)) << ',' << fmt(r.contour(i, 1)) << '\n';
  }
}

Region2D read_region_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound(path.string());
  Region2D r;
  std::vector<double> xs, ys;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2), val = line.substr(eq + 1);
      if (key == "method") r.method = val;
      else if (key == "alpha") r.alpha = std::stod(val);
      else if (key == "threshold") r.threshold = std::stod(val);
      else if (key == "self_intersecting") r.self_intersecting = val == "1";
      else if (key == "x") r.x = split_vector(val);
      else if (key == "center") r.center = split_vector(val);
      continue;
    }
    if (line.empty() || line == "y1,y2") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(row, 0, "expected two columns");
    try {
      xs.push_back(std::stod(line.substr(0, comma)));
      ys.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::logic_error&) {
      throw ParseError(row, 0, "non-numeric vertex");
    }
    ++row;
  }
  r.contour.resize(static_cast<Eigen::Index>(xs.size()), 2);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    r.contour(static_cast<Eigen::Index>(i), 0) = xs[i];
    r.contour(static_cast<Eigen::Index>(i), 1) = ys[i];
  }
  return r;
}

void write_region_json(const Region2D& r, const std::filesystem::path& path) {
  json ring = json::array();
  for (Eigen::Index i = 0; i < r.contour.rows(); ++i) ring.push_back({r.contour(i, 0), r.contour(i, 1)});
  json doc = {
      {"type", "Feature"},
      {"geometry", {{"type", "Polygon"}, {"coordinates", json::array({ring})}}},
      {"properties",
       {{"method", r.method},
        {"alpha", r.alpha},
        {"threshold", r.threshold},
        {"self_intersecting", r.self_intersecting},
        {"x", std::vector<double>(r.x.data(), r.x.data() + r.x.size())},
        {"center", std::vector<double>(r.center.data(), r.center.data() + r.center.size())}}}};
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

Region2D read_region_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound(path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(0, 0, e.what());
  }
  Region2D r;
  const auto& props = doc.at("properties");
  r.method = props.at("method").get<std::string>();
  r.alpha = props.at("alpha").get<double>();
  r.threshold = props.at("threshold").get<double>();
  r.self_intersecting = props.at("self_intersecting").get<bool>();
  const auto xv = props.at("x").get<std::vector<double>>();
  const auto cv = props.at("center").get<std::vector<double>>();
  r.x = Eigen::Map<const Vector>(xv.data(), static_cast<Eigen::Index>(xv.size()));
  r.center = Eigen::Map<const Vector>(cv.data(), static_cast<Eigen::Index>(cv.size()));
  const auto& ring = doc.at("geometry").at("coordinates").at(0);
  r.contour.resize(static_cast<Eigen::Index>(ring.size()), 2);
  for (std::size_t i = 0; i < ring.size(); ++i) {
    r.contour(static_cast<Eigen::Index>(i), 0) = ring[i].at(0).get<double>();
    r.contour(static_cast<Eigen::Index>(i), 1) = ring[i].at(1).get<double>();
  }
  return r;
}

}  // namespace otcp
