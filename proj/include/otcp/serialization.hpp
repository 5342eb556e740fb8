#pragma once

#include "otcp/calibration.hpp"

#include <filesystem>
#include <string>

namespace otcp {

inline constexpr int kPredictorFormatVersion = 1;

/// Versioned JSON document holding the regressor, the score state (covariance,
/// quantile model or entropic map, inline) and the calibration scores.
std::string predictor_to_json(const CalibratedPredictor& pred);
CalibratedPredictor predictor_from_json(const std::string& text);

void save_predictor(const CalibratedPredictor& pred, const std::filesystem::path& path);
CalibratedPredictor load_predictor(const std::filesystem::path& path);

}  // namespace otcp
