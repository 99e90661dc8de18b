#pragma once

#include <string>
#include <vector>

#include "wtlstm/market_data.hpp"
#include "wtlstm/model.hpp"

namespace wtlstm {

inline constexpr const char* kModelFormat = "wtlstm-model";
inline constexpr int kModelFormatVersion = 1;

/// Everything needed to reproduce predictions for one ticker without
/// retraining: config echo, filter taps, fitted scaler and parameter values.
struct ModelArtifact {
  std::string ticker;
  ModelConfig config;
  FilterBank bank;
  FeatureScaler scaler;
  ModelParameters params;
  std::vector<double> loss_curve;
};

/// Versioned JSON text. Doubles are written in shortest round-trip form, so
/// loading reproduces every parameter bit for bit.
std::string serialize_model(const ModelArtifact& artifact);
ModelArtifact deserialize_model(const std::string& text, const std::string& source = "<model>");

void save_model(const ModelArtifact& artifact, const std::string& path);
ModelArtifact load_model(const std::string& path);

}  // namespace wtlstm
