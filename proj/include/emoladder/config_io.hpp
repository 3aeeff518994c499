#pragma once

#include <string>

#include "emoladder/experiment.hpp"
#include "emoladder/model.hpp"

namespace emoladder {

// JSON renderings of the configuration and result types (the run-config file
// format and the per-run summary artifact).

std::string model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const std::string& text);

std::string run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const std::string& text);
RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& config, const std::string& path);

std::string run_summary_to_json(const RunSummary& summary);
RunSummary run_summary_from_json(const std::string& text);
RunSummary load_run_summary(const std::string& path);
void save_run_summary(const RunSummary& summary, const std::string& path);

} // namespace emoladder
