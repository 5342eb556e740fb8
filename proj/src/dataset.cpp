#include "otcp/dataset.hpp"

#include "otcp/errors.hpp"
#include "otcp/rng.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

namespace otcp {
namespace {

// Splits one CSV record (RFC-4180 quoting, no embedded newlines).
std::vector<std::string> split_record(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, std::size_t row, std::size_t col) {
  const std::string s = trim(raw);
  if (s.empty()) throw ParseError(row, col, "empty cell");
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(row, col, "not a number: '" + s + "'");
  }
  if (!std::isfinite(v)) throw ParseError(row, col, "non-finite value '" + s + "'");
  return v;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

void Dataset::validate() const {
  if (features.rows() < 1) throw DimensionError("dataset has no rows");
  if (features.cols() < 1) throw DimensionError("dataset has no feature columns");
  if (targets.cols() < 1) throw DimensionError("dataset has no target columns");
  if (features.rows() != targets.rows()) {
    throw DimensionError("feature and target row counts differ");
  }
  if (!features.allFinite() || !targets.allFinite()) {
    throw ParamError("dataset contains non-finite entries");
  }
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows, const std::string& tag) const {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.targets.resize(static_cast<Eigen::Index>(rows.size()), targets.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = rows[i];
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(r);
    out.targets.row(static_cast<Eigen::Index>(i)) = targets.row(r);
  }
  out.feature_names = feature_names;
  out.target_names = target_names;
  out.provenance = tag;
  return out;
}

Dataset load_dataset_csv(const std::filesystem::path& path, int d_out) {
  if (d_out < 1) throw ParamError("d_out must be positive");
  std::ifstream in(path);
  if (!in) throw FileNotFound(path.string());

  std::string line;
  if (!std::getline(in, line)) throw DimensionError("empty CSV: " + path.string());
  if (!line.empty() && static_cast<unsigned char>(line[0]) == 0xEF) {
    line.erase(0, 3);  // UTF-8 BOM
  }
  std::vector<std::string> header = split_record(line);
  for (auto& h : header) h = trim(h);
  const std::size_t ncols = header.size();
  if (ncols <= static_cast<std::size_t>(d_out)) {
    throw DimensionError("CSV has " + std::to_string(ncols) + " columns, need more than d_out=" +
                         std::to_string(d_out));
  }

  std::vector<double> values;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_record(line);
    if (cells.size() != ncols) {
      throw ParseError(row, std::min(cells.size(), ncols),
                       "expected " + std::to_string(ncols) + " cells, found " +
                           std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < ncols; ++c) values.push_back(parse_cell(cells[c], row, c));
    ++row;
  }
  if (row == 0) throw DimensionError("CSV has no data rows: " + path.string());

  const auto n = static_cast<Eigen::Index>(row);
  const auto p = static_cast<Eigen::Index>(ncols) - d_out;
  Eigen::Map<const Matrix> all(values.data(), n, static_cast<Eigen::Index>(ncols));
  Dataset ds;
  ds.features = all.leftCols(p);
  ds.targets = all.rightCols(d_out);
  ds.feature_names.assign(header.begin(), header.begin() + p);
  ds.target_names.assign(header.begin() + p, header.end());
  ds.provenance = "csv:" + path.filename().string();
  ds.validate();
  return ds;
}

void write_dataset_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path.string());
  const auto p = ds.feature_dim();
  const auto d = ds.target_dim();
  auto name = [](const std::vector<std::string>& names, Eigen::Index i, const char* prefix) {
    return static_cast<std::size_t>(i) < names.size() ? names[static_cast<std::size_t>(i)]
                                                      : prefix + std::to_string(i);
  };
  for (Eigen::Index j = 0; j < p; ++j) {
    out << (j ? "," : "") << quote_if_needed(name(ds.feature_names, j, "x"));
  }
  for (Eigen::Index j = 0; j < d; ++j) out << "," << quote_if_needed(name(ds.target_names, j, "y"));
  out << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    for (Eigen::Index j = 0; j < p; ++j) out << (j ? "," : "") << ds.features(i, j);
    for (Eigen::Index j = 0; j < d; ++j) out << ',' << ds.targets(i, j);
    out << '\n';
  }
}

const char* to_string(SplitPart part) noexcept {
  switch (part) {
    case SplitPart::train: return "train";
    case SplitPart::ot_fit: return "ot_fit";
    case SplitPart::calib: return "calib";
    case SplitPart::test: return "test";
  }
  return "?";
}

std::array<Eigen::Index, 4> split_sizes(Eigen::Index n, const SplitSpec& spec) {
  double total = 0.0;
  for (double f : spec.fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw SplitError("split fractions must lie in [0, 1]");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw SplitError("split fractions must sum to 1");

  std::array<Eigen::Index, 4> sizes{};
  Eigen::Index assigned = 0;
  for (std::size_t k = 1; k < 4; ++k) {
    // The 1e-9 guard keeps products like 0.29 * 100 from flooring to 28.
    sizes[k] = static_cast<Eigen::Index>(std::floor(spec.fractions[k] * static_cast<double>(n) + 1e-9));
    assigned += sizes[k];
  }
  sizes[0] = n - assigned;
  return sizes;
}

SplitIndices split_indices(Eigen::Index n, const SplitSpec& spec) {
  if (n < 4) throw SplitError("need at least 4 rows to split, got " + std::to_string(n));
  const auto sizes = split_sizes(n, spec);
  for (SplitPart p : {SplitPart::train, SplitPart::calib, SplitPart::test}) {
    if (sizes[static_cast<std::size_t>(p)] < 1) {
      throw SplitError(std::string("split part '") + to_string(p) + "' would be empty");
    }
  }

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  Rng rng(derive_seed(spec.seed, {0x5EED5EED}));
  for (std::size_t i = perm.size() - 1; i > 0; --i) {
    const auto j = uniform_index(rng, i + 1);
    std::swap(perm[i], perm[j]);
  }

  SplitIndices out;
  auto it = perm.begin();
  for (std::size_t k = 0; k < 4; ++k) {
    out.parts[k].assign(it, it + sizes[k]);
    it += sizes[k];
  }
  return out;
}

Splits split_dataset(const Dataset& ds, const SplitSpec& spec) {
  ds.validate();
  Splits s;
  s.indices = split_indices(ds.size(), spec);
  const std::string base = ds.provenance + "#seed" + std::to_string(spec.seed) + "/";
  s.train = ds.subset(s.indices[SplitPart::train], base + "train");
  s.ot_fit = ds.subset(s.indices[SplitPart::ot_fit], base + "ot_fit");
  s.calib = ds.subset(s.indices[SplitPart::calib], base + "calib");
  s.test = ds.subset(s.indices[SplitPart::test], base + "test");
  return s;
}

}  // namespace otcp
