#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fictdet/util.hpp"

namespace fictdet {

enum class Label : int { Human = 0, Generated = 1 };

inline int to_int(Label label) { return static_cast<int>(label); }
Label label_from_int(long long value);

// One labelled excerpt. A Class-1 sample's source is "rewritten:<class-0 id>".
struct Sample {
  std::string id;
  std::string text;
  Label label = Label::Human;
  std::string source;
  std::size_t word_count = 0;
  std::size_t token_count = 0;  // filled after tokenisation; not persisted

  // The Class-0 id referenced by a rewritten sample, if any.
  std::optional<std::string> paired_id() const;
};

inline constexpr std::string_view kRewrittenPrefix = "rewritten:";

struct CleanOptions {
  bool strip_gutenberg_boilerplate = true;
  bool strip_page_numbers = true;
  bool strip_chapter_headings = true;
};

// Removes Project Gutenberg header/footer, page-number lines, chapter headings
// and blank lines. Remaining lines are returned unchanged, joined by '\n'.
// Throws if nothing narrative remains.
std::string clean_source(std::string_view raw_text, const CleanOptions& options = {});

// Boilerplate line patterns applied by clean_source (ECMAScript syntax). Any
// cleaned output matches none of them.
const std::vector<std::string>& boilerplate_patterns();

struct ChunkOptions {
  int min_words = 92;
  int max_words = 125;
  // A "." followed by whitespace or end of text ends a sentence unless the
  // word it terminates is on this list.
  std::vector<std::string> abbreviations = {"Mr.", "Mrs.", "Dr.", "St.", "Ms.", "Messrs."};
};

// Splits cleaned text into sentences. Each sentence is whitespace-collapsed.
// Text after the last full stop is returned in `tail`.
struct SentenceSplit {
  std::vector<std::string> sentences;
  std::string tail;
};
SentenceSplit split_sentences(std::string_view clean_text, const ChunkOptions& options = {});

struct ChunkResult {
  std::vector<std::string> excerpts;
  std::vector<int> targets;         // drawn word target per excerpt
  std::vector<bool> oversize;       // excerpt exceeds its drawn target
  std::size_t oversize_count = 0;
  std::string discarded_tail;
};

// Greedy full-stop chunking. A target length is drawn uniformly from
// [min_words, max_words] per excerpt; the excerpt is the longest sequence of
// whole sentences whose word count does not exceed it. A single sentence
// longer than its target is emitted alone and flagged oversize.
ChunkResult chunk_text(std::string_view clean_text, std::uint64_t seed,
                       const ChunkOptions& options = {});

// The per-excerpt target sampler used by chunk_text.
class ChunkTargetSampler {
 public:
  ChunkTargetSampler(std::uint64_t seed, int min_words, int max_words);
  int next();

 private:
  Rng rng_;
  int min_;
  int max_;
};

// Class-0 samples for one source. Ids are "<prefix>-<index>" with a 5-digit
// zero-padded index.
std::vector<Sample> make_samples(const ChunkResult& chunks, const std::string& id_prefix,
                                 const std::string& source);

struct SplitRatios {
  double train = 0.70;
  double validation = 0.15;
  double test = 0.15;
};

struct DatasetSplit {
  std::vector<Sample> train;
  std::vector<Sample> validation;
  std::vector<Sample> test;
  std::uint64_t seed = 0;
  SplitRatios ratios;
};

// Group counts per split: floor of n * ratio, with the leftover groups handed
// out by largest fractional part, ties resolved train, validation, test.
std::array<std::size_t, 3> split_counts(std::size_t groups, const SplitRatios& ratios);

// Pair-preserving deterministic split. Each Class-0 sample forms a group with
// the rewrites that reference it; groups are ordered by id, shuffled with the
// seed and dealt out per split_counts. Throws on an orphan rewrite.
DatasetSplit split_dataset(const std::vector<Sample>& samples, const SplitRatios& ratios,
                           std::uint64_t seed);

struct LengthStats {
  std::string split;
  Label label = Label::Human;
  std::size_t samples = 0;
  double mean_tokens = 0.0;
  double std_tokens = 0.0;  // population standard deviation
};

LengthStats length_stats(const std::vector<Sample>& samples, Label label,
                         const std::string& split_name = {});
std::vector<LengthStats> length_stats(const DatasetSplit& split);

// Fills token_count using the tokeniser.
void count_tokens(std::vector<Sample>& samples);

// Dataset files.
//
// JSON lines, one sample per line, keys in fixed order:
//   {"id":...,"text":...,"label":0|1,"source":...,"word_count":N}
// A tokenised dataset is tab separated: id, label, source, space-joined tokens.
// load_dataset accepts either; tokenised records come back with text set to
// the joined tokens, which re-tokenises to the same stream.
std::string serialize_dataset(const std::vector<Sample>& samples);
std::vector<Sample> parse_dataset(std::string_view contents, const std::string& origin = "<memory>");
std::vector<Sample> load_dataset(const std::string& path);
void save_dataset(const std::string& path, const std::vector<Sample>& samples);

std::string serialize_tokenized(const std::vector<Sample>& samples);
void save_tokenized(const std::string& path, const std::vector<Sample>& samples);

// Writes <dir>/train.jsonl, validation.jsonl, test.jsonl and split.manifest.json.
void save_split(const std::string& dir, const DatasetSplit& split);
DatasetSplit load_split(const std::string& dir);

// Sidecar manifest path for a dataset file.
std::string manifest_path(const std::string& dataset_path);

}  // namespace fictdet
