#pragma once

#include "otcp/types.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace otcp {

/// Paired features/targets. `provenance` names where the rows came from
/// (e.g. "synth:gaussian:7/calib") and is used to detect calibration leaks.
struct Dataset {
  Matrix features;  // n x p
  Matrix targets;   // n x d
  std::vector<std::string> feature_names;
  std::vector<std::string> target_names;
  std::string provenance;

  Eigen::Index size() const noexcept { return features.rows(); }
  Eigen::Index feature_dim() const noexcept { return features.cols(); }
  Eigen::Index target_dim() const noexcept { return targets.cols(); }

  /// Throws DimensionError/ParamError if shapes or entries violate the invariants.
  void validate() const;

  Dataset subset(const std::vector<Eigen::Index>& rows, const std::string& tag) const;
};

/// Reads a CSV with a header row; the trailing `d_out` columns are targets.
Dataset load_dataset_csv(const std::filesystem::path& path, int d_out);

void write_dataset_csv(const Dataset& ds, const std::filesystem::path& path);

/// Fractions for (train, ot_fit, calib, test).
struct SplitSpec {
  std::array<double, 4> fractions{0.4, 0.2, 0.2, 0.2};
  Seed seed = 0;
};

enum class SplitPart { train = 0, ot_fit = 1, calib = 2, test = 3 };

const char* to_string(SplitPart part) noexcept;

struct SplitIndices {
  std::array<std::vector<Eigen::Index>, 4> parts;
  const std::vector<Eigen::Index>& operator[](SplitPart p) const {
    return parts[static_cast<std::size_t>(p)];
  }
};

struct Splits {
  Dataset train;
  Dataset ot_fit;
  Dataset calib;
  Dataset test;
  SplitIndices indices;
};

/// Sizes floor(f_i * n) for the last three parts; the remainder goes to train.
std::array<Eigen::Index, 4> split_sizes(Eigen::Index n, const SplitSpec& spec);

SplitIndices split_indices(Eigen::Index n, const SplitSpec& spec);

Splits split_dataset(const Dataset& ds, const SplitSpec& spec);

}  // namespace otcp
