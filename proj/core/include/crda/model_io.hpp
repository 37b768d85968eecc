#pragma once

#include "crda/classifier.hpp"

#include <filesystem>
#include <string>

namespace crda {

inline constexpr const char* kModelFormat = "crda-model/1";

/// JSON document holding p, G, the support rows of B and of the class
/// means, diag_term, log_priors, hyper-parameters and names. Reals are
/// written with round-trip precision.
std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const std::string& text);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

} // namespace crda
