#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fictdet/corpus.hpp"
#include "fictdet/tokenizer.hpp"

namespace fictdet {

// Training-split unigram vocabulary, ordered lexicographically by byte value.
class Vocabulary {
 public:
  Vocabulary() = default;
  // Tokens need not be sorted or unique; the constructor normalises them.
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  const std::string& token(std::size_t index) const { return tokens_.at(index); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::optional<std::size_t> index(std::string_view token) const;

  // SHA-256 over the newline-joined token list.
  const std::string& hash() const { return hash_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  std::string hash_;
};

Vocabulary build_vocabulary(std::span<const TokenStream> train);

// Sparse bag of words. Entries are sorted by feature index; counts >= 1.
struct CountVector {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;
  std::size_t total_tokens = 0;  // includes out-of-vocabulary tokens
  std::string vocab_hash;        // vocabulary the indices refer to; empty if unknown

  std::uint32_t count(std::uint32_t feature) const;
};

CountVector vectorize(const TokenStream& doc, const Vocabulary& vocab);

// A vectorised labelled dataset.
struct LabeledVectors {
  std::vector<std::string> ids;
  std::vector<CountVector> vectors;
  std::vector<Label> labels;

  std::size_t size() const { return vectors.size(); }
};

LabeledVectors vectorize_samples(const std::vector<Sample>& samples, const Vocabulary& vocab);

struct FeatureStat {
  std::string token;
  double f0 = 0.0;  // occurrences per million Class-0 training tokens
  double f1 = 0.0;
  double f_max = 0.0;
  double ratio = 0.0;  // f_max / (f0 + f1); 0 when the feature never occurs
};

struct FeatureStats {
  std::vector<FeatureStat> features;  // aligned with the vocabulary
  std::uint64_t class_tokens[2] = {0, 0};
  std::string vocab_hash;
};

FeatureStat make_feature_stat(std::string token, double f0, double f1);

// Per-million relative frequencies over the training documents of each class.
// The denominators are the in-vocabulary token totals per class.
FeatureStats class_frequencies(std::span<const TokenStream> docs, std::span<const Label> labels,
                               const Vocabulary& vocab);

struct SalientSubset {
  std::vector<std::size_t> features;  // indices into FeatureStats::features
  double threshold_f = 100.0;
  double threshold_r = 0.75;
};

// Features with f_max >= threshold_f and ratio >= threshold_r (closed).
SalientSubset select_salient(const FeatureStats& stats, double threshold_f = 100.0,
                             double threshold_r = 0.75);

// Tab-separated table: token, f0, f1, f_max, R; sorted by f_max descending,
// ties by token. A leading '#' comment line carries the class totals and
// vocabulary hash.
std::string serialize_stats(const FeatureStats& stats);
FeatureStats parse_stats(std::string_view contents, const std::string& origin = "<memory>");

// Orders feature indices by (f0 + f1) descending, ties broken by token.
std::vector<std::size_t> frequency_order(const FeatureStats& stats);

}  // namespace fictdet
