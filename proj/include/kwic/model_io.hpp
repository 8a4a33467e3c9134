#pragma once

#include <string>

#include "kwic/baselines.hpp"
#include "kwic/neural.hpp"

namespace kwic {

// Versioned binary model files: magic, format version, kind tag, config,
// vocabulary fingerprint, then parameter tensors as row-major little-endian
// IEEE-754 doubles. Round-trips are bit-exact.
void save_cnn_model(const CnnModel<double>& model, const std::string& path);
CnnModel<double> load_cnn_model(const std::string& path);

void save_linear_model(const LinearModel& model, const std::string& path);
LinearModel load_linear_model(const std::string& path);

}  // namespace kwic
