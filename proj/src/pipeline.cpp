#include "fictdet/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include "fictdet/error.hpp"
#include "fictdet/util.hpp"

namespace fictdet {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::size_t stage_rank(const std::string& stage) {
  const auto& names = stage_names();
  return static_cast<std::size_t>(std::find(names.begin(), names.end(), stage) - names.begin());
}

std::string section_stage(const std::string& name) { return name.substr(0, name.find(':')); }

ordered_json digests(const std::vector<std::string>& paths) {
  ordered_json out = ordered_json::array();
  for (const auto& p : paths) {
    ordered_json entry;
    entry["path"] = p;
    entry["sha256"] = file_exists(p) ? ordered_json(path_digest(p)) : ordered_json(nullptr);
    out.push_back(entry);
  }
  return out;
}

}  // namespace

std::string path_digest(const std::string& path) {
  if (!fs::is_directory(path)) return sha256_file(path);
  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(path))
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), path).generic_string());
  std::sort(files.begin(), files.end());
  std::string listing;
  for (const auto& f : files) listing += f + " " + sha256_file((fs::path(path) / f).string()) + "\n";
  return sha256_hex(listing);
}

PipelineConfig parse_pipeline_config(std::string_view text, const std::string& origin) {
  PipelineConfig config;
  std::vector<PipelineSection> sections;
  PipelineSection* current = nullptr;
  std::set<std::string> seen;
  std::size_t stages_line = 0;

  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    const std::string line = trim(raw);
    const auto where = [&] { return origin + ":" + std::to_string(line_no) + ": "; };
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(ErrorCode::Parse, where() + "unterminated section header");
      PipelineSection section;
      section.name = trim(std::string_view(line).substr(1, line.size() - 2));
      section.stage = section_stage(section.name);
      section.line = line_no;
      if (!is_stage(section.stage)) fail(ErrorCode::Parse, where() + "unknown stage '" + section.stage + "'");
      if (!seen.insert(section.name).second) fail(ErrorCode::Parse, where() + "duplicate section [" + section.name + "]");
      sections.push_back(std::move(section));
      current = &sections.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCode::Parse, where() + "expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) fail(ErrorCode::Parse, where() + "empty key");
    StageParams& target = current ? current->params : config.globals;
    if (target.count(key)) fail(ErrorCode::Parse, where() + "duplicate key '" + key + "'");
    target[key] = value;
    if (!current && key == "stages") stages_line = line_no;
  }

  std::vector<PipelineSection> selected;
  if (const auto it = config.globals.find("stages"); it != config.globals.end()) {
    for (const auto& part : split(it->second, ',')) {
      const std::string name = trim(part);
      if (name.empty()) continue;
      const auto s = std::find_if(sections.begin(), sections.end(), [&](const auto& x) { return x.name == name; });
      if (s == sections.end())
        fail(ErrorCode::Parse, origin + ":" + std::to_string(stages_line) + ": stage '" + name + "' has no [" + name + "] section");
      if (std::none_of(selected.begin(), selected.end(), [&](const auto& x) { return x.name == name; })) selected.push_back(*s);
    }
    config.globals.erase("stages");
  } else {
    selected = sections;
  }
  std::stable_sort(selected.begin(), selected.end(),
                   [](const auto& a, const auto& b) { return stage_rank(a.stage) < stage_rank(b.stage); });

  if (const auto it = config.globals.find("manifest"); it != config.globals.end()) {
    config.manifest_path = it->second;
    config.globals.erase(it);
  } else if (origin != "<memory>") {
    config.manifest_path = origin + ".manifest.json";
  }
  for (auto& s : selected)
    for (const auto& [k, v] : config.globals) s.params.emplace(k, v);
  config.sections = std::move(selected);
  return config;
}

PipelineConfig load_pipeline_config(const std::string& path) { return parse_pipeline_config(read_file(path), path); }

void check_dependencies(const PipelineConfig& config) {
  std::set<std::string> produced;
  for (const auto& s : config.sections) {
    for (const auto& in : stage_input_paths(s.stage, s.params)) {
      const std::string norm = fs::path(in).lexically_normal().string();
      if (!produced.count(norm) && !file_exists(in))
        fail(ErrorCode::MissingInput, "stage [" + s.name + "]: input '" + in +
                                          "' does not exist and no earlier stage produces it");
    }
    for (const auto& out : stage_output_paths(s.stage, s.params)) produced.insert(fs::path(out).lexically_normal().string());
  }
}

ordered_json run_pipeline(const PipelineConfig& config, const PipelineOptions& options) {
  check_dependencies(config);
  ordered_json manifest;
  manifest["tool"] = "fictdet";
  manifest["version"] = std::string(version());
  manifest["started"] = utc_timestamp();
  manifest["status"] = "running";
  manifest["stages"] = ordered_json::array();

  const auto write_manifest = [&] {
    if (!config.manifest_path.empty()) write_file(config.manifest_path, manifest.dump(2) + "\n");
  };

  for (const auto& section : config.sections) {
    StageParams params = section.params;
    if (options.force) params["force"] = "1";
    ordered_json entry;
    entry["name"] = section.name;
    entry["stage"] = section.stage;
    entry["seed"] = params.count("seed") ? ordered_json(params.at("seed")) : ordered_json(nullptr);
    entry["deterministic"] = section.stage != "rewrite";
    ordered_json p = ordered_json::object();
    for (const auto& [k, v] : params) p[k] = v;
    entry["params"] = p;
    entry["started"] = utc_timestamp();
    ErrorCode code = ErrorCode::Internal;
    std::string error;
    try {
      StageResult result = run_stage(section.stage, params);
      entry["finished"] = utc_timestamp();
      entry["status"] = "ok";
      entry["inputs"] = digests(result.inputs);
      entry["outputs"] = digests(result.outputs);
      entry["summary"] = result.summary;
      manifest["stages"].push_back(entry);
      continue;
    } catch (const Error& e) {
      code = e.code();
      error = e.what();
    } catch (const std::exception& e) {
      error = e.what();
    }
    entry["finished"] = utc_timestamp();
    entry["status"] = "failed";
    entry["error"] = error;
    manifest["stages"].push_back(entry);
    manifest["status"] = "failed";
    manifest["finished"] = utc_timestamp();
    write_manifest();
    fail(code, "stage [" + section.name + "] failed: " + error);
  }
  manifest["status"] = "ok";
  manifest["finished"] = utc_timestamp();
  write_manifest();
  return manifest;
}

}  // namespace fictdet
