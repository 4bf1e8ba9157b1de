#include "fictdet/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "fictdet/error.hpp"

namespace fictdet {
namespace {

std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

const char* class_name(Label label) { return label == Label::Human ? "human-written (0)" : "LLM-generated (1)"; }

constexpr const char* kStyle = R"(body{font-family:Georgia,serif;margin:2em;color:#222;background:#fff}
h1{font-size:1.4em}
.legend span{padding:0 .4em;margin-right:1em}
.row{display:flex;gap:2em;align-items:flex-start;margin-bottom:2em}
.panel{flex:1;border:1px solid #ccc;border-radius:4px;padding:1em}
.panel h2{font-size:1.05em;margin:0 0 .3em 0;font-family:monospace}
.meta{font-size:.85em;color:#555;margin:0 0 .8em 0}
.text{line-height:2.6}
.tok{padding:.1em .15em;border-radius:2px}
.ann{display:inline-flex;flex-direction:column-reverse;align-items:center;vertical-align:bottom;line-height:1.2}
.codes{font-size:.6em;font-family:monospace;color:#444}
)";

}  // namespace

std::string html_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out.push_back(c); break;
    }
  }
  return out;
}

ExplanationView explain_document(const LinearModel& model, const TokenStream& doc, std::optional<Label> true_label) {
  if (!model.vocab) fail(ErrorCode::InvalidArgument, "explain_document: model has no vocabulary");
  if (model.weights.size() != model.vocab->size())
    fail(ErrorCode::VocabularyMismatch, "explain_document: weight vector does not match the vocabulary");
  ExplanationView view;
  view.sample_id = doc.source_id;
  view.bias = model.bias;
  view.true_label = true_label;
  double total = model.bias;
  view.tokens.reserve(doc.tokens.size());
  for (const auto& token : doc.tokens) {
    TokenExplanation t;
    t.token = token;
    if (const auto idx = model.vocab->index(token)) {
      t.in_vocabulary = true;
      t.weight = model.weights[*idx];
    }
    t.contribution = t.weight;
    total += t.contribution;
    view.tokens.push_back(std::move(t));
  }
  view.total_score = total;
  view.predicted = sign_rule(total);
  return view;
}

AnnotationIndex index_annotations(const std::vector<AnnotationEntry>& entries) {
  AnnotationIndex index;
  for (const auto& e : entries) index[e.token].insert(e.codes.begin(), e.codes.end());
  return index;
}

double saturation_scale(const LinearModel& model) {
  if (model.weights.empty()) return 0.0;
  std::vector<double> mags(model.weights.size());
  std::transform(model.weights.begin(), model.weights.end(), mags.begin(), [](double w) { return std::abs(w); });
  std::sort(mags.begin(), mags.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(mags.size())));
  const double p99 = mags[std::max<std::size_t>(rank, 1) - 1];
  return p99 > 0.0 ? p99 : mags.back();
}

double saturation(double weight, double scale) {
  if (!(scale > 0.0)) return 0.0;
  return std::min(1.0, std::abs(weight) / scale);
}

std::string render_report(const std::vector<ExplanationView>& views, const AnnotationIndex* annotations,
                          const ReportOptions& options, double scale) {
  if (views.empty()) fail(ErrorCode::InvalidArgument, "render_report: no documents to render");
  std::ostringstream html;
  html << "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>" << html_escape(options.title)
       << "</title>\n<style>\n" << kStyle << "</style>\n</head>\n<body>\n";
  html << "<h1>" << html_escape(options.title) << "</h1>\n";
  html << "<p class=\"legend\"><span style=\"background-color:rgba(" << options.negative_rgb
       << ",1)\">negative weight: human-written (Class 0)</span><span style=\"background-color:rgba("
       << options.positive_rgb << ",1)\">positive weight: LLM-generated (Class 1)</span>saturation = min(1, |w| / "
       << format_double(scale) << ")</p>\n";

  const std::size_t per_row = options.paired ? 2 : 1;
  for (std::size_t start = 0; start < views.size(); start += per_row) {
    html << "<div class=\"row\">\n";
    for (std::size_t k = start; k < std::min(views.size(), start + per_row); ++k) {
      const auto& view = views[k];
      html << "<div class=\"panel\" data-sample=\"" << html_escape(view.sample_id) << "\" data-total=\""
           << format_double(view.total_score) << "\" data-bias=\"" << format_double(view.bias) << "\">\n";
      html << "<h2>" << html_escape(view.sample_id) << "</h2>\n";
      html << "<p class=\"meta\">score " << fixed(view.total_score, 4) << " (bias " << fixed(view.bias, 4)
           << ") &middot; predicted " << class_name(view.predicted);
      if (view.true_label) html << " &middot; true " << class_name(*view.true_label);
      html << "</p>\n<p class=\"text\">";
      for (std::size_t i = 0; i < view.tokens.size(); ++i) {
        const auto& t = view.tokens[i];
        if (i) html << ' ';
        std::set<std::string> codes = t.codes;
        if (annotations) {
          if (const auto it = annotations->find(t.token); it != annotations->end())
            codes.insert(it->second.begin(), it->second.end());
        }
        if (!codes.empty()) {
          html << "<span class=\"ann\"><span class=\"codes\">";
          bool first = true;
          for (const auto& c : codes) {
            html << (first ? "" : " ") << html_escape(c);
            first = false;
          }
          html << "</span>";
        }
        html << "<span class=\"tok\" data-w=\"" << format_double(t.weight) << "\" data-c=\""
             << format_double(t.contribution) << "\"";
        const double alpha = saturation(t.weight, scale);
        if (alpha > 0.0) {
          html << " style=\"background-color:rgba(" << (t.weight < 0 ? options.negative_rgb : options.positive_rgb)
               << "," << fixed(alpha, 3) << ")\"";
        }
        html << " title=\"w=" << format_double(t.weight) << "\">" << html_escape(t.token) << "</span>";
        if (!codes.empty()) html << "</span>";
      }
      html << "</p>\n</div>\n";
    }
    html << "</div>\n";
  }
  html << "</body>\n</html>\n";
  return html.str();
}

std::string render_report(const std::vector<ExplanationView>& views, const LinearModel& model,
                          const AnnotationIndex* annotations, const ReportOptions& options) {
  const double scale = options.saturation_scale.value_or(saturation_scale(model));
  return render_report(views, annotations, options, scale);
}

}  // namespace fictdet
