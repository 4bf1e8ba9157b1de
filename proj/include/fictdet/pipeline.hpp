#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fictdet/stages.hpp"

namespace fictdet {

// Pipeline configuration.
//
//   # comment
//   seed = 7                      global keys are defaults for every stage
//   stages = split, train:nb      optional; defaults to every section
//   manifest = run.manifest.json  optional; defaults to <config>.manifest.json
//
//   [split]
//   in = data/all.jsonl
//   out = data/split
//
//   [train:nb]                    "<stage>:<label>" runs the same stage twice
//   algo = nb
//   split = data/split
//   out = models/nb.model
//
// Sections run in stage dependency order whatever their order in the file;
// two sections of the same stage keep file order. Relative paths resolve
// against the current directory.
struct PipelineSection {
  std::string name;   // section header, e.g. "train:nb"
  std::string stage;  // stage part, e.g. "train"
  StageParams params;
  std::size_t line = 0;
};

struct PipelineConfig {
  StageParams globals;
  std::vector<PipelineSection> sections;  // execution order
  std::string manifest_path;
};

PipelineConfig parse_pipeline_config(std::string_view text, const std::string& origin = "<memory>");
PipelineConfig load_pipeline_config(const std::string& path);

// Throws naming the first stage input that neither exists nor is produced by
// an earlier section.
void check_dependencies(const PipelineConfig& config);

struct PipelineOptions {
  bool force = false;
};

// Runs every section in order, halting on the first failure. The manifest is
// written in either case; on failure the stage error is rethrown after it.
nlohmann::ordered_json run_pipeline(const PipelineConfig& config, const PipelineOptions& options = {});

// SHA-256 of a file, or of a directory as the sorted "relative-path digest"
// listing of its regular files.
std::string path_digest(const std::string& path);

}  // namespace fictdet
