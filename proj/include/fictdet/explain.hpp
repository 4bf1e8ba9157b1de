#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fictdet/analysis.hpp"
#include "fictdet/classifiers.hpp"
#include "fictdet/tokenizer.hpp"

namespace fictdet {

struct TokenExplanation {
  std::string token;
  double weight = 0.0;        // 0 for out-of-vocabulary tokens
  double contribution = 0.0;  // this occurrence's share of the score (= weight)
  bool in_vocabulary = false;
  std::set<std::string> codes;
};

// One document as the linear model sees it, token by token.
//
// total_score is bias plus the per-occurrence contributions accumulated in
// document order, so it equals that sum exactly. It agrees with score() up to
// floating-point reassociation.
struct ExplanationView {
  std::string sample_id;
  std::vector<TokenExplanation> tokens;
  double bias = 0.0;
  double total_score = 0.0;
  Label predicted = Label::Human;
  std::optional<Label> true_label;
};

ExplanationView explain_document(const LinearModel& model, const TokenStream& doc,
                                 std::optional<Label> true_label = std::nullopt);

// Token -> codes, for labelling annotated features in a report.
using AnnotationIndex = std::map<std::string, std::set<std::string>>;
AnnotationIndex index_annotations(const std::vector<AnnotationEntry>& entries);

struct ReportOptions {
  std::string title = "Token contributions";
  // rgb triplets; negative weights lean human-written, positive LLM-generated
  std::string negative_rgb = "245,197,24";
  std::string positive_rgb = "142,68,173";
  bool paired = false;  // lay views out two per row (human, rewrite)
  // Weight magnitude that maps to full saturation. Leave unset to use the
  // 99th-percentile |w| of the model (see saturation_scale).
  std::optional<double> saturation_scale;
};

// Nearest-rank 99th percentile of |w| over all model weights; falls back to
// the largest |w| when that percentile is zero.
double saturation_scale(const LinearModel& model);

// Opacity for a weight: min(1, |w| / scale), 0 when scale is 0.
double saturation(double weight, double scale);

// Self-contained HTML document (inline CSS, no external resources).
std::string render_report(const std::vector<ExplanationView>& views, const AnnotationIndex* annotations,
                          const ReportOptions& options, double scale);

std::string render_report(const std::vector<ExplanationView>& views, const LinearModel& model,
                          const AnnotationIndex* annotations = nullptr, const ReportOptions& options = {});

std::string html_escape(std::string_view text);

}  // namespace fictdet
