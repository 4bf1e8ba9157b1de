#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace fictdet {

// Named string parameters of one stage invocation. The CLI fills these from
// flags; the pipeline from a config section.
using StageParams = std::map<std::string, std::string>;

struct StageResult {
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

// Canonical stage names in pipeline dependency order:
//   clean chunk rewrite tokenize split lengths train eval features-stats
//   features-select ablate entropy annotate-join explain letters
const std::vector<std::string>& stage_names();
bool is_stage(const std::string& name);

// Parameters naming files a stage reads, and files or directories it writes,
// resolved against `params`. Used for dependency checks and digests.
std::vector<std::string> stage_input_paths(const std::string& stage, const StageParams& params);
std::vector<std::string> stage_output_paths(const std::string& stage, const StageParams& params);

// Runs one stage. Existing outputs are an error unless params["force"] is
// "1" or "true".
StageResult run_stage(const std::string& stage, const StageParams& params);

}  // namespace fictdet
