#include "fictdet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "fictdet/error.hpp"

namespace fictdet {
namespace {

// Entropy from a count-of-counts histogram. Summing in ascending count order
// makes the result depend only on the multiset of token counts, so it is
// exactly invariant under permutation of the input.
double entropy_from_histogram(const std::map<std::size_t, std::size_t>& histogram, std::size_t n) {
  const double total = static_cast<double>(n);
  double h = 0.0;
  for (const auto& [count, multiplicity] : histogram) {
    const double p = static_cast<double>(count) / total;
    h -= static_cast<double>(multiplicity) * (p * std::log2(p));
  }
  return h;
}

class EntropyAccumulator {
 public:
  void add(const std::string& token) {
    std::size_t& c = counts_[token];
    if (c > 0 && --histogram_[c] == 0) histogram_.erase(c);
    ++c;
    ++histogram_[c];
    ++n_;
  }

  double bits() const { return entropy_from_histogram(histogram_, n_); }
  std::size_t size() const { return n_; }

 private:
  std::unordered_map<std::string, std::size_t> counts_;
  std::map<std::size_t, std::size_t> histogram_;
  std::size_t n_ = 0;
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

double shannon_entropy(std::span<const std::string> tokens) {
  if (tokens.empty()) fail(ErrorCode::InvalidArgument, "shannon_entropy: empty token list");
  EntropyAccumulator acc;
  for (const auto& t : tokens) acc.add(t);
  return acc.bits();
}

EntropySeries entropy_curve(std::span<const std::string> tokens, std::size_t step, Label label) {
  if (step < 1) fail(ErrorCode::InvalidArgument, "entropy_curve: step must be >= 1");
  if (tokens.empty()) fail(ErrorCode::InvalidArgument, "entropy_curve: empty token list");
  EntropySeries series;
  series.label = label;
  EntropyAccumulator acc;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    acc.add(tokens[i]);
    if (acc.size() % step == 0 || acc.size() == tokens.size()) series.points.push_back({acc.size(), acc.bits()});
  }
  series.total_bits = series.points.back().bits;
  return series;
}

std::vector<std::string> class_token_stream(const std::vector<Sample>& samples, Label label,
                                            std::optional<std::uint64_t> shuffle_seed) {
  std::vector<const Sample*> chosen;
  for (const auto& s : samples)
    if (s.label == label) chosen.push_back(&s);
  if (shuffle_seed) {
    Rng rng(*shuffle_seed);
    rng.shuffle(chosen);
  }
  std::vector<std::string> tokens;
  for (const Sample* s : chosen) {
    auto stream = tokenize(s->text);
    std::move(stream.tokens.begin(), stream.tokens.end(), std::back_inserter(tokens));
  }
  return tokens;
}

EntropyGap entropy_gap(double total0, double total1) {
  EntropyGap g;
  g.gap_bits = total1 - total0;
  g.variation_ratio = std::exp2(g.gap_bits);
  return g;
}

EntropyGap entropy_gap_report(const EntropySeries& series0, const EntropySeries& series1) {
  return entropy_gap(series0.total_bits, series1.total_bits);
}

std::string entropy_csv(const EntropySeries& series) {
  std::string out = "tokens,bits\n";
  for (const auto& p : series.points) out += std::to_string(p.tokens) + "," + format_double(p.bits) + "\n";
  return out;
}

AblationResult ablation_curve(const LinearModel& model, const LabeledVectors& test, const FeatureStats& stats,
                              std::size_t n, std::optional<double> weight_threshold) {
  if (stats.features.size() != model.weights.size() ||
      (!stats.vocab_hash.empty() && stats.vocab_hash != model.vocab_hash()))
    fail(ErrorCode::VocabularyMismatch, "ablation_curve: feature statistics and model use different vocabularies");
  if (test.size() == 0) fail(ErrorCode::InvalidArgument, "ablation_curve: empty test set");

  AblationResult result;
  result.mode = weight_threshold ? AblationMode::ByFrequencyWeightFiltered : AblationMode::ByFrequency;
  result.weight_threshold = weight_threshold.value_or(0.0);

  LinearModel ablated = model;
  result.accuracies.push_back(accuracy(ablated, test));
  for (std::size_t feature : frequency_order(stats)) {
    if (result.removed.size() == n) break;
    if (weight_threshold && !(std::abs(ablated.weights[feature]) >= *weight_threshold)) continue;
    ablated.weights[feature] = 0.0;
    result.removed.push_back(feature);
    result.accuracies.push_back(accuracy(ablated, test));
  }
  result.truncated = result.removed.size() < n;
  return result;
}

std::string ablation_csv(const AblationResult& result, const Vocabulary& vocab) {
  std::string out = "step,accuracy,token\n";
  for (std::size_t i = 0; i < result.accuracies.size(); ++i) {
    out += std::to_string(i) + "," + format_double(result.accuracies[i]) + ",";
    if (i > 0) out += csv_field(vocab.token(result.removed[i - 1]));
    out += "\n";
  }
  return out;
}

const std::vector<std::string>& annotation_codes() {
  static const std::vector<std::string> codes = {"E1.1", "E1.2", "E1.3", "E1.4", "E1.5", "E1.6",
                                                 "E1.7", "E2",   "E3",   "E4",   "E5"};
  return codes;
}

bool is_annotation_code(const std::string& code) {
  const auto& codes = annotation_codes();
  return std::find(codes.begin(), codes.end(), code) != codes.end();
}

std::vector<AnnotationEntry> parse_annotations(std::string_view contents, const std::string& origin) {
  std::vector<AnnotationEntry> entries;
  std::size_t line_no = 0;
  for (auto line : split(contents, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    const auto fields = split(line, '\t');
    if (fields.size() < 2) fail(ErrorCode::Parse, where + ": expected token<TAB>codes[<TAB>note]");
    AnnotationEntry e;
    e.token = fields[0];
    e.line = line_no;
    if (e.token.empty()) fail(ErrorCode::Parse, where + ": empty token");
    for (const auto& raw : split(fields[1], ',')) {
      const std::string code = trim(raw);
      if (code.empty()) continue;
      if (!is_annotation_code(code)) fail(ErrorCode::Parse, where + ": unknown annotation code '" + code + "'");
      e.codes.insert(code);
    }
    if (e.codes.empty()) fail(ErrorCode::Parse, where + ": no annotation codes");
    for (std::size_t k = 2; k < fields.size(); ++k) {
      if (k > 2) e.note += '\t';
      e.note += fields[k];
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<AnnotationEntry> load_annotations(const std::string& path) {
  return parse_annotations(read_file(path), path);
}

AnnotationTable join_annotations(const std::vector<AnnotationEntry>& entries, const SalientSubset& salient,
                                 const FeatureStats& stats, const LinearModel* model) {
  std::unordered_map<std::string, std::size_t> by_token;
  for (std::size_t i = 0; i < stats.features.size(); ++i) by_token.emplace(stats.features[i].token, i);
  const std::set<std::size_t> in_subset(salient.features.begin(), salient.features.end());

  AnnotationTable table;
  for (const auto& code : annotation_codes()) table.code_counts[code] = 0;
  for (const auto& e : entries) {
    const auto it = by_token.find(e.token);
    if (it == by_token.end()) {
      table.warnings.push_back("line " + std::to_string(e.line) + ": token '" + e.token +
                               "' is not in the vocabulary; skipped");
      continue;
    }
    const bool salient_member = in_subset.count(it->second) > 0;
    if (!salient_member)
      table.warnings.push_back("line " + std::to_string(e.line) + ": token '" + e.token +
                               "' is outside the salient subset; not counted");
    const auto& f = stats.features[it->second];
    AnnotatedFeature row;
    row.token = f.token;
    row.f0 = f.f0;
    row.f1 = f.f1;
    row.ratio = f.ratio;
    if (model && model->vocab) {
      if (const auto idx = model->vocab->index(f.token)) row.weight = model->weights[*idx];
    }
    row.codes = e.codes;
    row.note = e.note;
    if (salient_member)
      for (const auto& code : e.codes) ++table.code_counts[code];
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string annotation_table_tsv(const AnnotationTable& table) {
  std::ostringstream out;
  out << "token\tf0\tf1\tR\tweight\tcodes\tnote\n";
  for (const auto& r : table.rows) {
    std::string codes;
    for (const auto& c : r.codes) codes += (codes.empty() ? "" : ",") + c;
    out << r.token << '\t' << format_double(r.f0) << '\t' << format_double(r.f1) << '\t' << format_double(r.ratio)
        << '\t' << (r.weight ? format_double(*r.weight) : std::string()) << '\t' << codes << '\t' << r.note << '\n';
  }
  return out.str();
}

}  // namespace fictdet
