#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fictdet/classifiers.hpp"
#include "fictdet/features.hpp"

namespace fictdet {

// ---------------------------------------------------------------------------
// Entropy

// H = -sum p(t) log2 p(t) over the empirical token distribution.
// Throws on empty input.
double shannon_entropy(std::span<const std::string> tokens);

struct EntropyPoint {
  std::size_t tokens = 0;
  double bits = 0.0;
};

struct EntropySeries {
  Label label = Label::Human;
  std::vector<EntropyPoint> points;  // token counts strictly increasing
  double total_bits = 0.0;
};

// Entropy of the prefixes of length step, 2*step, ... and of the full stream
// (the last point, which may be a partial step).
EntropySeries entropy_curve(std::span<const std::string> tokens, std::size_t step = 1000,
                            Label label = Label::Human);

// All tokens of one class, in dataset order (or shuffled sample order).
std::vector<std::string> class_token_stream(const std::vector<Sample>& samples, Label label,
                                            std::optional<std::uint64_t> shuffle_seed = std::nullopt);

struct EntropyGap {
  double gap_bits = 0.0;         // total1 - total0
  double variation_ratio = 1.0;  // 2^gap
};

EntropyGap entropy_gap_report(const EntropySeries& series0, const EntropySeries& series1);
EntropyGap entropy_gap(double total0, double total1);

// Two-column CSV: tokens,bits.
std::string entropy_csv(const EntropySeries& series);

// ---------------------------------------------------------------------------
// Ablation

enum class AblationMode { ByFrequency, ByFrequencyWeightFiltered };

struct AblationResult {
  AblationMode mode = AblationMode::ByFrequency;
  std::vector<std::size_t> removed;  // feature indices in removal order
  std::vector<double> accuracies;    // [0] is the unablated accuracy
  double weight_threshold = 0.0;
  bool truncated = false;            // fewer than n eligible features
};

// Zeroes feature weights one at a time in descending (f0 + f1) order and
// records the test accuracy after each removal. In filtered mode only features
// with |w| >= weight_threshold are removed. The input model is not modified.
AblationResult ablation_curve(const LinearModel& model, const LabeledVectors& test, const FeatureStats& stats,
                              std::size_t n = 100, std::optional<double> weight_threshold = std::nullopt);

// CSV: step,accuracy,token (the token removed at that step; empty at step 0).
std::string ablation_csv(const AblationResult& result, const Vocabulary& vocab);

// ---------------------------------------------------------------------------
// Annotation codes

// E1.1 ... E1.7, E2, E3, E4, E5.
const std::vector<std::string>& annotation_codes();
bool is_annotation_code(const std::string& code);

struct AnnotationEntry {
  std::string token;
  std::set<std::string> codes;
  std::string note;
  std::size_t line = 0;
};

// Tab-separated: token, comma-separated codes, optional note. Blank lines and
// lines starting with '#' are skipped. Unknown codes are an error naming the
// line.
std::vector<AnnotationEntry> parse_annotations(std::string_view contents, const std::string& origin = "<memory>");
std::vector<AnnotationEntry> load_annotations(const std::string& path);

struct AnnotatedFeature {
  std::string token;
  double f0 = 0.0;
  double f1 = 0.0;
  double ratio = 0.0;
  std::optional<double> weight;
  std::set<std::string> codes;
  std::string note;
};

struct AnnotationTable {
  std::vector<AnnotatedFeature> rows;
  std::map<std::string, std::size_t> code_counts;  // a multi-coded token counts once per code
  std::vector<std::string> warnings;
};

AnnotationTable join_annotations(const std::vector<AnnotationEntry>& entries, const SalientSubset& salient,
                                 const FeatureStats& stats, const LinearModel* model = nullptr);

std::string annotation_table_tsv(const AnnotationTable& table);

}  // namespace fictdet
