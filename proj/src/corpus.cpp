#include "fictdet/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "fictdet/error.hpp"
#include "fictdet/tokenizer.hpp"
#include "json.hpp"

namespace fictdet {
namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto pos = text.find('\n', start);
    if (pos == std::string_view::npos) pos = text.size();
    std::string line(text.substr(start, pos - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    if (pos == text.size()) break;
    start = pos + 1;
  }
  return lines;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

const std::regex& gutenberg_start() {
  static const std::regex re(R"(^\s*\*{3}\s*START OF (THE|THIS) PROJECT GUTENBERG.*)",
                             std::regex::icase);
  return re;
}

const std::regex& gutenberg_end() {
  static const std::regex re(
      R"(^\s*(\*{3}\s*END OF (THE|THIS) PROJECT GUTENBERG.*|End of (the )?Project Gutenberg.*))",
      std::regex::icase);
  return re;
}

const std::regex& boilerplate_line() {
  static const std::regex re(
      R"(^\s*(.*Project Gutenberg.*|Produced by .*|Transcriber'?s Note.*|\[Illustration.*)$)",
      std::regex::icase);
  return re;
}

const std::regex& page_number_line() {
  static const std::regex re(R"(^\s*(\[?\s*(Page|Pg\.?|p\.)\s*\d+\s*\]?|\d{1,4})\s*$)",
                             std::regex::icase);
  return re;
}

const std::regex& chapter_heading_line() {
  static const std::regex re(
      R"(^\s*((CHAPTER|BOOK|PART)\b.*|(Chapter|Book|Part)\s+([IVXLCDM]+|\d+|One|Two|Three|Four|Five|Six|Seven|Eight|Nine|Ten|Eleven|Twelve|Thirteen|Fourteen|Fifteen|Sixteen|Seventeen|Eighteen|Nineteen|Twenty|Thirty)\b\.?[^a-z]*|[IVXLCDM]+\.?|THE END\.?)\s*$)");
  return re;
}

// A title line directly under a chapter heading: letters, no lower case.
bool is_heading_title(std::string_view line) {
  bool has_letter = false;
  for (unsigned char c : line) {
    if (std::islower(c)) return false;
    if (std::isupper(c)) has_letter = true;
  }
  return has_letter && count_words(line) <= 12;
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    }
  }
  return out;
}

// The word ending at position `dot`, with leading quotes and brackets removed.
std::string word_before(std::string_view text, std::size_t dot) {
  std::size_t start = text.rfind(' ', dot);
  start = start == std::string_view::npos ? 0 : start + 1;
  std::string word(text.substr(start, dot - start + 1));
  std::size_t skip = 0;
  while (skip < word.size()) {
    const unsigned char c = word[skip];
    if (c == '"' || c == '\'' || c == '(' || c == '[') {
      ++skip;
    } else if (c == 0xE2 && skip + 2 < word.size() && static_cast<unsigned char>(word[skip + 1]) == 0x80 &&
               (static_cast<unsigned char>(word[skip + 2]) == 0x9C ||
                static_cast<unsigned char>(word[skip + 2]) == 0x98)) {
      skip += 3;  // U+201C or U+2018
    } else {
      break;
    }
  }
  return word.substr(skip);
}

std::string json_string(const ordered_json& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string require_string(const nlohmann::json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string()) fail(ErrorCode::Parse, where + ": missing string field '" + key + "'");
  return it->get<std::string>();
}

Sample parse_json_record(std::string_view line, const std::string& where) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, where + ": " + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::Parse, where + ": record is not an object");
  Sample s;
  s.id = require_string(j, "id", where);
  s.text = require_string(j, "text", where);
  s.source = require_string(j, "source", where);
  const auto label = j.find("label");
  if (label == j.end() || !label->is_number_integer()) fail(ErrorCode::Parse, where + ": missing integer field 'label'");
  try {
    s.label = label_from_int(label->get<long long>());
  } catch (const Error& e) {
    fail(ErrorCode::Parse, where + ": " + e.what());
  }
  const auto wc = j.find("word_count");
  s.word_count = (wc != j.end() && wc->is_number_unsigned()) ? wc->get<std::size_t>() : count_words(s.text);
  return s;
}

Sample parse_tokenized_record(std::string_view line, const std::string& where) {
  const auto fields = split(line, '\t');
  if (fields.size() != 4) fail(ErrorCode::Parse, where + ": expected 4 tab-separated fields");
  Sample s;
  s.id = fields[0];
  if (fields[1] != "0" && fields[1] != "1") fail(ErrorCode::Parse, where + ": label must be 0 or 1");
  s.label = fields[1] == "1" ? Label::Generated : Label::Human;
  s.source = fields[2];
  s.text = fields[3];
  s.word_count = count_words(s.text);
  return s;
}

void check_tsv_field(const std::string& value, const std::string& id) {
  if (value.find_first_of("\t\n\r") != std::string::npos)
    fail(ErrorCode::InvalidArgument, "sample '" + id + "': tab or newline in a tokenised-file field");
}

std::string split_manifest_json(const DatasetSplit& split) {
  ordered_json m;
  m["tool"] = "fictdet";
  m["version"] = std::string(version());
  m["seed"] = split.seed;
  m["ratios"] = {split.ratios.train, split.ratios.validation, split.ratios.test};
  m["counts"] = {split.train.size(), split.validation.size(), split.test.size()};
  return m.dump(2) + "\n";
}

}  // namespace

Label label_from_int(long long value) {
  if (value != 0 && value != 1) fail(ErrorCode::InvalidArgument, "label must be 0 or 1, got " + std::to_string(value));
  return value == 0 ? Label::Human : Label::Generated;
}

std::optional<std::string> Sample::paired_id() const {
  if (source.rfind(kRewrittenPrefix, 0) != 0) return std::nullopt;
  return source.substr(kRewrittenPrefix.size());
}

const std::vector<std::string>& boilerplate_patterns() {
  static const std::vector<std::string> patterns = {
      R"(^\s*\*{3}\s*(START|END) OF (THE|THIS) PROJECT GUTENBERG)",
      R"(Project Gutenberg)",
      R"(^\s*(\[?\s*(Page|Pg\.?|p\.)\s*\d+\s*\]?|\d{1,4})\s*$)",
      R"(^\s*CHAPTER\b)",
      R"(^\s*Chapter\s+([IVXLCDM]+|\d+)\b\.?[^a-z]*$)",
      R"(^\s*[IVXLCDM]+\.?\s*$)",
      R"(^\s*$)",
  };
  return patterns;
}

std::string clean_source(std::string_view raw_text, const CleanOptions& options) {
  auto lines = split_lines(raw_text);

  std::size_t begin = 0, end = lines.size();
  if (options.strip_gutenberg_boilerplate) {
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (std::regex_search(lines[i], gutenberg_start())) {
        begin = i + 1;
        break;
      }
    }
    for (std::size_t i = begin; i < lines.size(); ++i) {
      if (std::regex_search(lines[i], gutenberg_end())) {
        end = i;
        break;
      }
    }
  }

  std::string out;
  int lines_since_heading = -1;  // non-blank lines seen since the last heading
  for (std::size_t i = begin; i < end; ++i) {
    const std::string& line = lines[i];
    if (is_blank(line)) continue;
    if (options.strip_gutenberg_boilerplate && std::regex_match(line, boilerplate_line())) continue;
    if (options.strip_page_numbers && std::regex_match(line, page_number_line())) continue;
    if (options.strip_chapter_headings) {
      if (std::regex_match(line, chapter_heading_line())) {
        lines_since_heading = 0;
        continue;
      }
      if (lines_since_heading >= 0 && lines_since_heading < 2 && is_heading_title(line)) {
        ++lines_since_heading;
        continue;
      }
      lines_since_heading = -1;
    }
    if (!out.empty()) out.push_back('\n');
    out += line;
  }
  if (out.empty()) fail(ErrorCode::InvalidArgument, "no narrative content");
  return out;
}

SentenceSplit split_sentences(std::string_view clean_text, const ChunkOptions& options) {
  const std::string text = collapse_whitespace(clean_text);
  SentenceSplit result;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '.') continue;
    if (i + 1 < text.size() && text[i + 1] != ' ') continue;
    const std::string word = word_before(text, i);
    if (std::find(options.abbreviations.begin(), options.abbreviations.end(), word) !=
        options.abbreviations.end())
      continue;
    result.sentences.push_back(text.substr(start, i + 1 - start));
    start = i + 2;
  }
  if (start < text.size()) result.tail = text.substr(start);
  return result;
}

ChunkTargetSampler::ChunkTargetSampler(std::uint64_t seed, int min_words, int max_words)
    : rng_(seed), min_(min_words), max_(max_words) {
  if (min_words < 1 || max_words < min_words)
    fail(ErrorCode::InvalidArgument, "chunk target range must satisfy 1 <= min <= max");
}

int ChunkTargetSampler::next() { return static_cast<int>(rng_.between(min_, max_)); }

ChunkResult chunk_text(std::string_view clean_text, std::uint64_t seed, const ChunkOptions& options) {
  if (trim(clean_text).empty()) fail(ErrorCode::InvalidArgument, "chunk_text: empty input");
  ChunkTargetSampler sampler(seed, options.min_words, options.max_words);
  auto split = split_sentences(clean_text, options);

  std::vector<std::size_t> words;
  words.reserve(split.sentences.size());
  for (const auto& s : split.sentences) words.push_back(count_words(s));

  ChunkResult result;
  result.discarded_tail = std::move(split.tail);
  std::size_t k = 0;
  while (k < split.sentences.size()) {
    const int target = sampler.next();
    std::string excerpt = split.sentences[k];
    std::size_t total = words[k];
    ++k;
    const bool oversize = total > static_cast<std::size_t>(target);
    if (!oversize) {
      while (k < split.sentences.size() && total + words[k] <= static_cast<std::size_t>(target)) {
        excerpt += ' ';
        excerpt += split.sentences[k];
        total += words[k];
        ++k;
      }
    }
    result.excerpts.push_back(std::move(excerpt));
    result.targets.push_back(target);
    result.oversize.push_back(oversize);
    if (oversize) ++result.oversize_count;
  }
  return result;
}

std::vector<Sample> make_samples(const ChunkResult& chunks, const std::string& id_prefix,
                                 const std::string& source) {
  std::vector<Sample> samples;
  samples.reserve(chunks.excerpts.size());
  for (std::size_t i = 0; i < chunks.excerpts.size(); ++i) {
    char index[16];
    std::snprintf(index, sizeof(index), "%05zu", i);
    Sample s;
    s.id = id_prefix + "-" + index;
    s.text = chunks.excerpts[i];
    s.label = Label::Human;
    s.source = source;
    s.word_count = count_words(s.text);
    samples.push_back(std::move(s));
  }
  return samples;
}

std::array<std::size_t, 3> split_counts(std::size_t groups, const SplitRatios& ratios) {
  const double r[3] = {ratios.train, ratios.validation, ratios.test};
  for (double x : r)
    if (!(x >= 0.0) || !std::isfinite(x)) fail(ErrorCode::InvalidArgument, "split ratios must be finite and non-negative");
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) fail(ErrorCode::InvalidArgument, "split ratios must sum to 1");

  std::array<std::size_t, 3> counts{};
  double fraction[3];
  std::size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    const double exact = r[k] * static_cast<double>(groups);
    // Absorb representation error such as 0.7 * 10 = 6.9999999999999991.
    const double floor_value = std::floor(exact + 1e-9);
    counts[k] = static_cast<std::size_t>(floor_value);
    fraction[k] = std::max(0.0, exact - floor_value);
    assigned += counts[k];
  }
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fraction[a] > fraction[b] + 1e-9; });
  for (std::size_t left = groups - std::min(groups, assigned), i = 0; left > 0; --left, ++i)
    ++counts[order[i % 3]];
  return counts;
}

DatasetSplit split_dataset(const std::vector<Sample>& samples, const SplitRatios& ratios,
                           std::uint64_t seed) {
  std::map<std::string, std::vector<const Sample*>> groups;  // class-0 id -> members
  std::set<std::string> ids;
  for (const auto& s : samples) {
    if (!ids.insert(s.id).second) fail(ErrorCode::InvalidArgument, "duplicate sample id '" + s.id + "'");
    if (s.label == Label::Human) groups[s.id].insert(groups[s.id].begin(), &s);
  }
  for (const auto& s : samples) {
    if (s.label != Label::Generated) continue;
    const auto pair = s.paired_id();
    auto it = pair ? groups.find(*pair) : groups.end();
    if (it == groups.end()) fail(ErrorCode::InvalidArgument, "orphan rewrite '" + s.id + "' has no Class-0 pair in the dataset");
    it->second.push_back(&s);
  }
  for (auto& [id, members] : groups)
    std::sort(members.begin() + 1, members.end(), [](const Sample* a, const Sample* b) { return a->id < b->id; });

  std::vector<const std::vector<const Sample*>*> order;
  order.reserve(groups.size());
  for (const auto& [id, members] : groups) order.push_back(&members);
  Rng rng(seed);
  rng.shuffle(order);

  const auto counts = split_counts(order.size(), ratios);
  DatasetSplit split;
  split.seed = seed;
  split.ratios = ratios;
  std::vector<Sample>* targets[3] = {&split.train, &split.validation, &split.test};
  std::size_t g = 0;
  for (int k = 0; k < 3; ++k)
    for (std::size_t c = 0; c < counts[k]; ++c, ++g)
      for (const Sample* s : *order[g]) targets[k]->push_back(*s);
  return split;
}

LengthStats length_stats(const std::vector<Sample>& samples, Label label, const std::string& split_name) {
  LengthStats stats;
  stats.split = split_name;
  stats.label = label;
  double sum = 0.0;
  for (const auto& s : samples) {
    if (s.label != label) continue;
    ++stats.samples;
    sum += static_cast<double>(s.token_count);
  }
  if (stats.samples == 0)
    fail(ErrorCode::InvalidArgument, "length_stats: no Class-" + std::to_string(to_int(label)) + " samples" +
                                         (split_name.empty() ? "" : " in split '" + split_name + "'"));
  stats.mean_tokens = sum / static_cast<double>(stats.samples);
  double ss = 0.0;
  for (const auto& s : samples) {
    if (s.label != label) continue;
    const double d = static_cast<double>(s.token_count) - stats.mean_tokens;
    ss += d * d;
  }
  stats.std_tokens = std::sqrt(ss / static_cast<double>(stats.samples));
  return stats;
}

std::vector<LengthStats> length_stats(const DatasetSplit& split) {
  std::vector<LengthStats> out;
  const std::pair<const char*, const std::vector<Sample>*> parts[] = {
      {"train", &split.train}, {"validation", &split.validation}, {"test", &split.test}};
  for (Label label : {Label::Human, Label::Generated})
    for (const auto& [name, samples] : parts) {
      std::vector<Sample> counted = *samples;
      if (std::all_of(counted.begin(), counted.end(), [](const Sample& s) { return s.token_count == 0; }))
        count_tokens(counted);
      out.push_back(length_stats(counted, label, name));
    }
  return out;
}

void count_tokens(std::vector<Sample>& samples) {
  for (auto& s : samples) s.token_count = tokenize(s.text).tokens.size();
}

std::string serialize_dataset(const std::vector<Sample>& samples) {
  std::string out;
  for (const auto& s : samples) {
    ordered_json j;
    j["id"] = s.id;
    j["text"] = s.text;
    j["label"] = to_int(s.label);
    j["source"] = s.source;
    j["word_count"] = s.word_count;
    out += json_string(j);
    out.push_back('\n');
  }
  return out;
}

std::vector<Sample> parse_dataset(std::string_view contents, const std::string& origin) {
  std::vector<Sample> samples;
  std::size_t line_no = 0;
  for (const auto& raw : split_lines(contents)) {
    ++line_no;
    if (is_blank(raw)) continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    samples.push_back(raw.front() == '{' ? parse_json_record(raw, where) : parse_tokenized_record(raw, where));
  }
  return samples;
}

std::vector<Sample> load_dataset(const std::string& path) { return parse_dataset(read_file(path), path); }

void save_dataset(const std::string& path, const std::vector<Sample>& samples) {
  write_file(path, serialize_dataset(samples));
}

std::string serialize_tokenized(const std::vector<Sample>& samples) {
  std::string out;
  for (const auto& s : samples) {
    check_tsv_field(s.id, s.id);
    check_tsv_field(s.source, s.id);
    out += s.id;
    out += '\t';
    out += std::to_string(to_int(s.label));
    out += '\t';
    out += s.source;
    out += '\t';
    out += tokenize(s.text).joined();
    out += '\n';
  }
  return out;
}

void save_tokenized(const std::string& path, const std::vector<Sample>& samples) {
  write_file(path, serialize_tokenized(samples));
}

void save_split(const std::string& dir, const DatasetSplit& split) {
  save_dataset(dir + "/train.jsonl", split.train);
  save_dataset(dir + "/validation.jsonl", split.validation);
  save_dataset(dir + "/test.jsonl", split.test);
  write_file(dir + "/split.manifest.json", split_manifest_json(split));
}

DatasetSplit load_split(const std::string& dir) {
  DatasetSplit split;
  split.train = load_dataset(dir + "/train.jsonl");
  split.validation = load_dataset(dir + "/validation.jsonl");
  split.test = load_dataset(dir + "/test.jsonl");
  const std::string manifest = dir + "/split.manifest.json";
  if (file_exists(manifest)) {
    try {
      const auto m = nlohmann::json::parse(read_file(manifest));
      split.seed = m.at("seed").get<std::uint64_t>();
      const auto& r = m.at("ratios");
      split.ratios = {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>()};
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::Parse, manifest + ": " + e.what());
    }
  }
  return split;
}

std::string manifest_path(const std::string& dataset_path) { return dataset_path + ".manifest.json"; }

}  // namespace fictdet
