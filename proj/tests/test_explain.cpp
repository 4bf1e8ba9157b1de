#include <gtest/gtest.h>

#include <regex>

#include "fictdet/error.hpp"
#include "fictdet/explain.hpp"

using namespace fictdet;
using Tokens = std::vector<std::string>;

namespace {

LinearModel model_of(Tokens tokens, std::vector<double> weights, double bias = 0.0) {
  LinearModel m;
  m.vocab = std::make_shared<const Vocabulary>(std::move(tokens));
  m.weights = std::move(weights);
  m.bias = bias;
  return m;
}

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST(Explain, NegativeWeightLeansHuman) {
  const auto m = model_of({"said", "the"}, {-0.8, 0.0}, 0.1);
  const auto v = explain_document(m, tokenize("the inspector said", "s1"), Label::Human);
  ASSERT_EQ(v.tokens.size(), 3u);
  EXPECT_EQ(v.sample_id, "s1");
  EXPECT_DOUBLE_EQ(v.tokens[2].weight, -0.8);
  EXPECT_TRUE(v.tokens[0].in_vocabulary);
  EXPECT_FALSE(v.tokens[1].in_vocabulary);
  EXPECT_EQ(v.tokens[1].weight, 0.0);
  EXPECT_DOUBLE_EQ(v.total_score, 0.1 - 0.8);
  EXPECT_EQ(v.predicted, Label::Human);
  const std::string html = render_report({v}, m);
  EXPECT_NE(html.find("rgba(245,197,24,1.000)\" title=\"w=-0.8\">said</span>"), std::string::npos);
  // Out-of-vocabulary and zero-weight tokens carry no highlight.
  EXPECT_NE(html.find("data-w=\"0\" data-c=\"0\" title=\"w=0\">inspector</span>"), std::string::npos);
}

TEST(Explain, TotalMatchesScore) {
  const auto m = model_of({"a", "b"}, {0.25, -0.5}, 0.125);
  const auto doc = tokenize("a b a x");
  const auto v = explain_document(m, doc);
  double replay = v.bias;
  for (const auto& t : v.tokens) replay += t.contribution;
  EXPECT_EQ(replay, v.total_score);
  EXPECT_DOUBLE_EQ(v.total_score, score(m, vectorize(doc, *m.vocab)).total);
}

TEST(Saturation, ScaleAndClamp) {
  std::vector<double> w(200);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<double>(i) / 100.0;
  Tokens t;
  for (std::size_t i = 0; i < w.size(); ++i) t.push_back("t" + std::to_string(1000 + i));
  const auto m = model_of(t, w);
  // Nearest rank ceil(0.99 * 200) = 198 -> sorted index 197.
  EXPECT_DOUBLE_EQ(saturation_scale(m), 1.97);
  EXPECT_DOUBLE_EQ(saturation(1.99, 1.97), 1.0);
  EXPECT_DOUBLE_EQ(saturation(-1.97, 1.97), 1.0);
  EXPECT_DOUBLE_EQ(saturation(0.0, 1.97), 0.0);
  EXPECT_DOUBLE_EQ(saturation(1.0, 0.0), 0.0);
  double prev = 0.0;
  for (double x = 0.0; x < 3.0; x += 0.01) {
    const double s = saturation(x, 1.97);
    EXPECT_GE(s, prev);
    EXPECT_EQ(s, saturation(-x, 1.97));
    prev = s;
  }
  EXPECT_DOUBLE_EQ(saturation_scale(model_of({"a", "b"}, {0.0, 0.0})), 0.0);
}

TEST(Saturation, MaxWeightFullySaturated) {
  const auto m = model_of({"a", "b"}, {0.2, -0.4});
  const auto html = render_report({explain_document(m, tokenize("b a"))}, m);
  EXPECT_NE(html.find("rgba(245,197,24,1.000)"), std::string::npos);
  EXPECT_NE(html.find("rgba(142,68,173,0.500)"), std::string::npos);
}

TEST(Report, EveryTokenOnceInOrder) {
  const auto m = model_of({"and", "the"}, {0.1, -0.1});
  const auto doc = tokenize("The cat <sat> & the \"dog\" and the end");
  const auto html = render_report({explain_document(m, doc)}, m);
  std::regex span(R"(<span class="tok"[^>]*>([^<]*)</span>)");
  Tokens seen;
  for (auto it = std::sregex_iterator(html.begin(), html.end(), span); it != std::sregex_iterator(); ++it)
    seen.push_back((*it)[1].str());
  Tokens expected;
  for (const auto& t : doc.tokens) expected.push_back(html_escape(t));
  EXPECT_EQ(seen, expected);
  EXPECT_EQ(html.find("<sat>"), std::string::npos);
}

TEST(Report, PureAndSelfContained) {
  const auto m = model_of({"a", "b"}, {0.3, -0.7}, 0.05);
  const std::vector<ExplanationView> v = {explain_document(m, tokenize("a b a", "x"), Label::Generated)};
  const std::string first = render_report(v, m);
  EXPECT_EQ(render_report(v, m), first);
  EXPECT_EQ(first.rfind("<!DOCTYPE html>", 0), 0u);
  EXPECT_NE(first.find("</html>\n"), std::string::npos);
  EXPECT_EQ(first.find("http://"), std::string::npos);
  EXPECT_EQ(first.find("https://"), std::string::npos);
  EXPECT_EQ(first.find("<script"), std::string::npos);
  EXPECT_THROW(render_report({}, m), Error);
}

TEST(Report, PairedPanels) {
  const auto m = model_of({"a"}, {1.0});
  const std::vector<ExplanationView> v = {explain_document(m, tokenize("a", "h1"), Label::Human),
                                          explain_document(m, tokenize("a a", "h1-gen"), Label::Generated)};
  ReportOptions o;
  o.paired = true;
  const auto html = render_report(v, m, nullptr, o);
  EXPECT_EQ(count_of(html, "<div class=\"row\">"), 1u);
  EXPECT_EQ(count_of(html, "<div class=\"panel\""), 2u);
  EXPECT_LT(html.find("data-sample=\"h1\""), html.find("data-sample=\"h1-gen\""));
  o.paired = false;
  EXPECT_EQ(count_of(render_report(v, m, nullptr, o), "<div class=\"row\">"), 2u);
}

TEST(Report, AnnotationCodesShown) {
  const auto m = model_of({"delved"}, {1.0});
  const AnnotationIndex idx = index_annotations(parse_annotations("delved\tE1.1,E3\n"));
  const auto html = render_report({explain_document(m, tokenize("she delved"))}, m, &idx);
  EXPECT_NE(html.find("<span class=\"codes\">E1.1 E3</span>"), std::string::npos);
}

TEST(HtmlEscape, Specials) {
  EXPECT_EQ(html_escape("<a href=\"x\">'&'</a>"), "&lt;a href=&quot;x&quot;&gt;&#39;&amp;&#39;&lt;/a&gt;");
  EXPECT_EQ(html_escape("plain é"), "plain é");
}
