#include "fictdet/features.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "fictdet/error.hpp"

namespace fictdet {

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  std::sort(tokens_.begin(), tokens_.end());
  tokens_.erase(std::unique(tokens_.begin(), tokens_.end()), tokens_.end());
  index_.reserve(tokens_.size());
  std::string joined;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    index_.emplace(tokens_[i], i);
    joined += tokens_[i];
    joined.push_back('\n');
  }
  hash_ = sha256_hex(joined);
}

std::optional<std::size_t> Vocabulary::index(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary build_vocabulary(std::span<const TokenStream> train) {
  if (train.empty()) fail(ErrorCode::InvalidArgument, "build_vocabulary: empty training set");
  std::set<std::string> distinct;
  for (const auto& doc : train) distinct.insert(doc.tokens.begin(), doc.tokens.end());
  return Vocabulary(std::vector<std::string>(distinct.begin(), distinct.end()));
}

std::uint32_t CountVector::count(std::uint32_t feature) const {
  const auto it = std::lower_bound(entries.begin(), entries.end(), feature,
                                   [](const auto& e, std::uint32_t f) { return e.first < f; });
  return (it != entries.end() && it->first == feature) ? it->second : 0;
}

CountVector vectorize(const TokenStream& doc, const Vocabulary& vocab) {
  std::map<std::uint32_t, std::uint32_t> counts;
  for (const auto& token : doc.tokens)
    if (const auto idx = vocab.index(token)) ++counts[static_cast<std::uint32_t>(*idx)];
  CountVector v;
  v.entries.assign(counts.begin(), counts.end());
  v.total_tokens = doc.tokens.size();
  v.vocab_hash = vocab.hash();
  return v;
}

LabeledVectors vectorize_samples(const std::vector<Sample>& samples, const Vocabulary& vocab) {
  LabeledVectors out;
  out.ids.reserve(samples.size());
  out.vectors.reserve(samples.size());
  out.labels.reserve(samples.size());
  for (const auto& s : samples) {
    out.ids.push_back(s.id);
    out.vectors.push_back(vectorize(tokenize(s.text, s.id), vocab));
    out.labels.push_back(s.label);
  }
  return out;
}

FeatureStat make_feature_stat(std::string token, double f0, double f1) {
  FeatureStat s;
  s.token = std::move(token);
  s.f0 = f0;
  s.f1 = f1;
  s.f_max = std::max(f0, f1);
  const double sum = f0 + f1;
  s.ratio = sum > 0.0 ? s.f_max / sum : 0.0;
  return s;
}

FeatureStats class_frequencies(std::span<const TokenStream> docs, std::span<const Label> labels,
                               const Vocabulary& vocab) {
  if (docs.size() != labels.size()) fail(ErrorCode::InvalidArgument, "class_frequencies: docs/labels size mismatch");
  std::vector<std::uint64_t> counts[2] = {std::vector<std::uint64_t>(vocab.size()),
                                          std::vector<std::uint64_t>(vocab.size())};
  FeatureStats stats;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const int c = to_int(labels[d]);
    for (const auto& token : docs[d].tokens) {
      if (const auto idx = vocab.index(token)) {
        ++counts[c][*idx];
        ++stats.class_tokens[c];
      }
    }
  }
  for (int c = 0; c < 2; ++c)
    if (stats.class_tokens[c] == 0)
      fail(ErrorCode::InvalidArgument, "class_frequencies: Class " + std::to_string(c) + " has no in-vocabulary tokens");

  stats.vocab_hash = vocab.hash();
  stats.features.reserve(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const double f0 = 1e6 * static_cast<double>(counts[0][i]) / static_cast<double>(stats.class_tokens[0]);
    const double f1 = 1e6 * static_cast<double>(counts[1][i]) / static_cast<double>(stats.class_tokens[1]);
    stats.features.push_back(make_feature_stat(vocab.token(i), f0, f1));
  }
  return stats;
}

SalientSubset select_salient(const FeatureStats& stats, double threshold_f, double threshold_r) {
  SalientSubset subset;
  subset.threshold_f = threshold_f;
  subset.threshold_r = threshold_r;
  for (std::size_t i = 0; i < stats.features.size(); ++i) {
    const auto& f = stats.features[i];
    if (f.f_max >= threshold_f && f.ratio >= threshold_r) subset.features.push_back(i);
  }
  return subset;
}

std::string serialize_stats(const FeatureStats& stats) {
  std::vector<std::size_t> order(stats.features.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& fa = stats.features[a];
    const auto& fb = stats.features[b];
    if (fa.f_max != fb.f_max) return fa.f_max > fb.f_max;
    return fa.token < fb.token;
  });
  std::ostringstream out;
  out << "# class0_tokens=" << stats.class_tokens[0] << " class1_tokens=" << stats.class_tokens[1]
      << " vocab_hash=" << stats.vocab_hash << '\n';
  out << "token\tf0\tf1\tf_max\tR\n";
  for (std::size_t i : order) {
    const auto& f = stats.features[i];
    out << f.token << '\t' << format_double(f.f0) << '\t' << format_double(f.f1) << '\t'
        << format_double(f.f_max) << '\t' << format_double(f.ratio) << '\n';
  }
  return out.str();
}

FeatureStats parse_stats(std::string_view contents, const std::string& origin) {
  FeatureStats stats;
  std::size_t line_no = 0;
  for (const auto& line : split(contents, '\n')) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    if (line[0] == '#') {
      std::istringstream header(line.substr(1));
      std::string field;
      while (header >> field) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
        if (key == "class0_tokens") stats.class_tokens[0] = std::strtoull(value.c_str(), nullptr, 10);
        if (key == "class1_tokens") stats.class_tokens[1] = std::strtoull(value.c_str(), nullptr, 10);
        if (key == "vocab_hash") stats.vocab_hash = value;
      }
      continue;
    }
    if (line.rfind("token\t", 0) == 0) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 5) fail(ErrorCode::Parse, where + ": expected 5 tab-separated fields");
    char* end = nullptr;
    const double f0 = std::strtod(fields[1].c_str(), &end);
    if (*end) fail(ErrorCode::Parse, where + ": bad f0");
    const double f1 = std::strtod(fields[2].c_str(), &end);
    if (*end) fail(ErrorCode::Parse, where + ": bad f1");
    stats.features.push_back(make_feature_stat(fields[0], f0, f1));
  }
  std::sort(stats.features.begin(), stats.features.end(),
            [](const FeatureStat& a, const FeatureStat& b) { return a.token < b.token; });
  return stats;
}

std::vector<std::size_t> frequency_order(const FeatureStats& stats) {
  std::vector<std::size_t> order(stats.features.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& fa = stats.features[a];
    const auto& fb = stats.features[b];
    const double sa = fa.f0 + fa.f1, sb = fb.f0 + fb.f1;
    if (sa != sb) return sa > sb;
    return fa.token < fb.token;
  });
  return order;
}

}  // namespace fictdet
