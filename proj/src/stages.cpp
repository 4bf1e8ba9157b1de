#include "fictdet/stages.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "fictdet/analysis.hpp"
#include "fictdet/classifiers.hpp"
#include "fictdet/corpus.hpp"
#include "fictdet/error.hpp"
#include "fictdet/explain.hpp"
#include "fictdet/features.hpp"
#include "fictdet/rewriter.hpp"
#include "fictdet/tokenizer.hpp"

namespace fictdet {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

class Params {
 public:
  Params(const std::string& stage, const StageParams& p) : stage_(stage), p_(p) {}

  bool has(const std::string& key) const {
    const auto it = p_.find(key);
    return it != p_.end() && !it->second.empty();
  }

  std::string str(const std::string& key) const {
    if (!has(key)) fail(ErrorCode::InvalidArgument, stage_ + ": missing required parameter '" + key + "'");
    return p_.at(key);
  }

  std::string str(const std::string& key, const std::string& fallback) const { return has(key) ? p_.at(key) : fallback; }

  double real(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = p_.at(key);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (*end || !std::isfinite(x)) fail(ErrorCode::InvalidArgument, stage_ + ": parameter '" + key + "' must be a number, got '" + v + "'");
    return x;
  }

  long long integer(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = p_.at(key);
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (*end) fail(ErrorCode::InvalidArgument, stage_ + ": parameter '" + key + "' must be an integer, got '" + v + "'");
    return x;
  }

  std::uint64_t seed(const std::string& key = "seed") const {
    const long long s = integer(key, 0);
    if (s < 0) fail(ErrorCode::InvalidArgument, stage_ + ": seed must be non-negative");
    return static_cast<std::uint64_t>(s);
  }

  bool flag(const std::string& key) const {
    if (!has(key)) return false;
    const std::string& v = p_.at(key);
    return v == "1" || v == "true" || v == "yes" || v == "on";
  }

  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& part : split(str(key), ',')) {
      const std::string t = trim(part);
      if (!t.empty()) out.push_back(t);
    }
    return out;
  }

 private:
  std::string stage_;
  const StageParams& p_;
};

void guard_output(const Params& p, const std::string& path) {
  if (!p.flag("force") && file_exists(path))
    fail(ErrorCode::InvalidArgument, "output '" + path + "' already exists (pass --force to overwrite)");
}

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

std::string slug(const std::string& text) {
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      out.push_back(static_cast<char>(std::tolower(c)));
    } else if (!out.empty() && out.back() != '_') {
      out.push_back('_');
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out.empty() ? "text" : out;
}

// Datasets named by "train"/"validation"/"test"/"data" or derived from a
// split directory.
std::string dataset_path(const Params& p, const std::string& key, const std::string& split_file) {
  if (p.has(key)) return p.str(key);
  if (p.has("split")) return p.str("split") + "/" + split_file + ".jsonl";
  fail(ErrorCode::InvalidArgument, "missing parameter '" + key + "' (or 'split' directory)");
}

std::string eval_set_path(const Params& p) {
  if (p.has("data")) return p.str("data");
  if (p.has("split")) return p.str("split") + "/" + p.str("set", "test") + ".jsonl";
  fail(ErrorCode::InvalidArgument, "missing parameter 'data' (or 'split' directory)");
}

struct TokenizedSet {
  std::vector<TokenStream> streams;
  std::vector<Label> labels;
};

TokenizedSet tokenize_samples(const std::vector<Sample>& samples) {
  TokenizedSet t;
  t.streams.reserve(samples.size());
  for (const auto& s : samples) {
    t.streams.push_back(tokenize(s.text, s.id));
    t.labels.push_back(s.label);
  }
  return t;
}

ordered_json eval_json(const EvalReport& r) {
  ordered_json j;
  j["accuracy"] = r.accuracy;
  j["samples"] = r.total();
  j["confusion"] = {{r.confusion[0][0], r.confusion[0][1]}, {r.confusion[1][0], r.confusion[1][1]}};
  return j;
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  const fs::path p(path);
  const std::string ext = p.extension().string();
  return (p.parent_path() / (p.stem().string() + suffix + (ext.empty() ? ".csv" : ext))).string();
}

std::vector<std::string> entropy_outputs(const Params& p) {
  const std::string cls = p.str("class", "both");
  const std::string out = p.str("out");
  if (cls == "both") return {with_suffix(out, "-class0"), with_suffix(out, "-class1")};
  return {out};
}

// ---------------------------------------------------------------------------

StageResult stage_clean(const Params& p) {
  StageResult r;
  const auto inputs = p.list("in");
  const std::string out = p.str("out");
  ordered_json files = ordered_json::array();
  for (const auto& in : inputs) {
    const std::string target = inputs.size() == 1 ? out : out + "/" + stem(in) + ".txt";
    guard_output(p, target);
    std::string cleaned;
    try {
      cleaned = clean_source(read_file(in));
    } catch (const Error& e) {
      fail(e.code(), in + ": " + e.what());
    }
    write_file(target, cleaned + "\n");
    files.push_back({{"in", in}, {"out", target}, {"lines", std::count(cleaned.begin(), cleaned.end(), '\n') + 1}});
    r.inputs.push_back(in);
    r.outputs.push_back(target);
  }
  r.summary["files"] = files;
  return r;
}

StageResult stage_chunk(const Params& p) {
  StageResult r;
  const auto inputs = p.list("in");
  const std::string out = p.str("out");
  guard_output(p, out);
  ChunkOptions options;
  options.min_words = static_cast<int>(p.integer("min", 92));
  options.max_words = static_cast<int>(p.integer("max", 125));
  if (p.has("abbreviations")) options.abbreviations = p.list("abbreviations");
  const std::uint64_t seed = p.seed();
  if (p.has("source") && inputs.size() != 1) fail(ErrorCode::InvalidArgument, "chunk: 'source' requires a single input");

  std::vector<Sample> all;
  ordered_json files = ordered_json::array();
  std::size_t oversize = 0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const std::string& in = inputs[k];
    const std::string source = p.str("source", stem(in));
    const std::uint64_t file_seed = inputs.size() == 1 ? seed : derive_seed(seed, k);
    const auto chunks = chunk_text(read_file(in), file_seed, options);
    auto samples = make_samples(chunks, slug(source), source);
    oversize += chunks.oversize_count;
    files.push_back({{"in", in}, {"source", source}, {"seed", file_seed}, {"excerpts", samples.size()},
                     {"oversize", chunks.oversize_count}});
    std::move(samples.begin(), samples.end(), std::back_inserter(all));
    r.inputs.push_back(in);
  }
  save_dataset(out, all);
  ordered_json manifest;
  manifest["tool"] = "fictdet";
  manifest["version"] = std::string(version());
  manifest["stage"] = "chunk";
  manifest["seed"] = seed;
  manifest["min_words"] = options.min_words;
  manifest["max_words"] = options.max_words;
  manifest["files"] = files;
  write_file(manifest_path(out), manifest.dump(2) + "\n");
  r.outputs = {out, manifest_path(out)};
  r.summary["samples"] = all.size();
  r.summary["oversize_excerpts"] = oversize;
  r.summary["files"] = files;
  return r;
}

StageResult stage_rewrite(const Params& p) {
  StageResult r;
  const std::string in = p.str("in");
  const std::string out = p.str("out");
  guard_output(p, out);
  RewriteConfig config = parse_rewrite_config(read_file(p.str("config")), p.str("config"));
  if (p.has("seed")) config.seed = p.seed();
  const char* key = std::getenv(config.api_key_env.c_str());
  if (!key || !*key) fail(ErrorCode::InvalidArgument, "rewrite: environment variable " + config.api_key_env + " is not set");

  std::vector<Sample> class0;
  for (auto& s : load_dataset(in))
    if (s.label == Label::Human) class0.push_back(std::move(s));

  HttpChatTransport transport(config, key);
  RewriteOptions options;
  options.checkpoint_path = p.str("checkpoint", out + ".checkpoint.jsonl");
  options.resume = p.flag("resume");
  const auto outcome = rewrite_corpus(class0, config, transport, options);

  std::vector<Sample> combined = class0;
  combined.insert(combined.end(), outcome.rewritten.begin(), outcome.rewritten.end());
  save_dataset(out, combined);
  r.inputs = {in, p.str("config")};
  r.outputs = {out, options.checkpoint_path};
  r.summary["inputs"] = class0.size();
  r.summary["rewritten"] = outcome.rewritten.size();
  r.summary["failed"] = outcome.failed_ids;
  r.summary["resumed"] = outcome.resumed;
  r.summary["requests_issued"] = outcome.requests_issued;
  r.summary["seed"] = config.seed;
  return r;
}

StageResult stage_tokenize(const Params& p) {
  StageResult r;
  const std::string in = p.str("in"), out = p.str("out");
  guard_output(p, out);
  auto samples = load_dataset(in);
  save_tokenized(out, samples);
  count_tokens(samples);
  std::size_t tokens = 0;
  for (const auto& s : samples) tokens += s.token_count;
  r.inputs = {in};
  r.outputs = {out};
  r.summary["samples"] = samples.size();
  r.summary["tokens"] = tokens;
  return r;
}

SplitRatios parse_ratios(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 3) fail(ErrorCode::InvalidArgument, "ratios must be three comma-separated numbers");
  double v[3];
  for (int k = 0; k < 3; ++k) {
    char* end = nullptr;
    const std::string t = trim(parts[k]);
    v[k] = std::strtod(t.c_str(), &end);
    if (t.empty() || *end) fail(ErrorCode::InvalidArgument, "bad ratio '" + parts[k] + "'");
  }
  return {v[0], v[1], v[2]};
}

StageResult stage_split(const Params& p) {
  StageResult r;
  const std::string in = p.str("in"), out = p.str("out");
  for (const char* f : {"/train.jsonl", "/validation.jsonl", "/test.jsonl"}) guard_output(p, out + f);
  const SplitRatios ratios = parse_ratios(p.str("ratios", "0.7,0.15,0.15"));
  const auto split = split_dataset(load_dataset(in), ratios, p.seed());
  save_split(out, split);
  r.inputs = {in};
  r.outputs = {out + "/train.jsonl", out + "/validation.jsonl", out + "/test.jsonl", out + "/split.manifest.json"};
  r.summary["seed"] = split.seed;
  r.summary["train"] = split.train.size();
  r.summary["validation"] = split.validation.size();
  r.summary["test"] = split.test.size();
  return r;
}

StageResult stage_lengths(const Params& p) {
  StageResult r;
  const std::string dir = p.str("split");
  const auto split = load_split(dir);
  const auto stats = length_stats(split);
  ordered_json rows = ordered_json::array();
  std::ostringstream tsv;
  tsv << "split\tclass\tsamples\tmean_tokens\tstd_tokens\n";
  for (const auto& s : stats) {
    rows.push_back({{"split", s.split}, {"class", to_int(s.label)}, {"samples", s.samples},
                    {"mean_tokens", s.mean_tokens}, {"std_tokens", s.std_tokens}});
    tsv << s.split << '\t' << to_int(s.label) << '\t' << s.samples << '\t' << format_double(s.mean_tokens) << '\t'
        << format_double(s.std_tokens) << '\n';
  }
  r.inputs = {dir + "/train.jsonl", dir + "/validation.jsonl", dir + "/test.jsonl"};
  if (p.has("out")) {
    guard_output(p, p.str("out"));
    write_file(p.str("out"), tsv.str());
    r.outputs = {p.str("out")};
  }
  r.summary["lengths"] = rows;
  return r;
}

StageResult stage_train(const Params& p) {
  StageResult r;
  const ModelKind kind = kind_from_name(p.str("algo", "linear"));
  const std::string out = p.str("out");
  guard_output(p, out);
  const std::string train_path = dataset_path(p, "train", "train");
  const auto train_samples = load_dataset(train_path);
  const auto tokenized = tokenize_samples(train_samples);
  auto vocab = std::make_shared<const Vocabulary>(build_vocabulary(tokenized.streams));

  LabeledVectors train;
  train.ids.reserve(train_samples.size());
  for (std::size_t i = 0; i < train_samples.size(); ++i) {
    train.ids.push_back(train_samples[i].id);
    train.vectors.push_back(vectorize(tokenized.streams[i], *vocab));
    train.labels.push_back(train_samples[i].label);
  }
  r.inputs = {train_path};

  Model model;
  if (kind == ModelKind::Linear) {
    const std::string val_path = dataset_path(p, "validation", "validation");
    const auto validation = vectorize_samples(load_dataset(val_path), *vocab);
    r.inputs.push_back(val_path);
    LinearHyper h;
    h.learning_rate = p.real("lr", h.learning_rate);
    h.l2 = p.real("l2", h.l2);
    h.max_epochs = static_cast<int>(p.integer("max_epochs", h.max_epochs));
    h.patience = static_cast<int>(p.integer("patience", h.patience));
    h.seed = p.has("seed") ? p.seed() : h.seed;
    model = train_linear(vocab, train, validation, h);
  } else if (kind == ModelKind::LogisticRegression) {
    LogRegHyper h;
    h.l2 = p.real("l2", h.l2);
    h.max_iters = static_cast<int>(p.integer("max_iters", h.max_iters));
    h.tol = p.real("tol", h.tol);
    h.seed = p.has("seed") ? p.seed() : h.seed;
    model = train_logreg(vocab, train, h);
  } else {
    model = train_nb(vocab, train, p.real("alpha", 1.0));
  }
  save_model(out, model);
  r.outputs = {out};
  r.summary["algo"] = std::string(kind_name(kind));
  r.summary["vocabulary_size"] = vocab->size();
  r.summary["vocab_hash"] = vocab->hash();
  if (const auto* lm = std::get_if<LinearModel>(&model)) {
    r.summary["epochs_run"] = lm->meta.epochs_run;
    if (kind == ModelKind::Linear) {
      r.summary["best_epoch"] = lm->meta.best_epoch;
      r.summary["best_validation_accuracy"] = lm->meta.best_validation_accuracy;
    } else {
      r.summary["converged"] = lm->meta.converged;
      r.summary["final_gradient_norm"] = lm->meta.final_gradient_norm;
    }
    r.summary["train_accuracy"] = lm->meta.train_accuracy;
  }
  return r;
}

StageResult stage_eval(const Params& p) {
  StageResult r;
  const std::string model_path = p.str("model");
  const Model model = load_model(model_path);
  const std::string data_path = eval_set_path(p);
  const auto data = vectorize_samples(load_dataset(data_path), model_vocabulary(model));
  const auto report = evaluate(model, data);
  r.inputs = {model_path, data_path};
  if (p.has("out")) {
    guard_output(p, p.str("out"));
    std::ostringstream tsv;
    tsv << "id\tscore\tpredicted\ttrue\n";
    for (const auto& row : report.rows)
      tsv << row.id << '\t' << format_double(row.score) << '\t' << to_int(row.predicted) << '\t' << to_int(row.truth) << '\n';
    write_file(p.str("out"), tsv.str());
    r.outputs = {p.str("out")};
  }
  r.summary = eval_json(report);
  r.summary["model"] = std::string(kind_name(model_kind(model)));
  return r;
}

FeatureStats compute_stats(const std::vector<Sample>& train_samples) {
  const auto tokenized = tokenize_samples(train_samples);
  const Vocabulary vocab = build_vocabulary(tokenized.streams);
  return class_frequencies(tokenized.streams, tokenized.labels, vocab);
}

StageResult stage_features_stats(const Params& p) {
  StageResult r;
  const std::string out = p.str("out");
  guard_output(p, out);
  const std::string train_path = dataset_path(p, "train", "train");
  const auto stats = compute_stats(load_dataset(train_path));
  write_file(out, serialize_stats(stats));
  r.inputs = {train_path};
  r.outputs = {out};
  r.summary["vocabulary_size"] = stats.features.size();
  r.summary["class_tokens"] = {stats.class_tokens[0], stats.class_tokens[1]};
  return r;
}

StageResult stage_features_select(const Params& p) {
  StageResult r;
  const std::string stats_path = p.str("stats"), out = p.str("out");
  guard_output(p, out);
  const auto stats = parse_stats(read_file(stats_path), stats_path);
  const double tf = p.real("threshold_f", 100.0), tr = p.real("threshold_r", 0.75);
  const auto subset = select_salient(stats, tf, tr);
  FeatureStats selected;
  selected.class_tokens[0] = stats.class_tokens[0];
  selected.class_tokens[1] = stats.class_tokens[1];
  selected.vocab_hash = stats.vocab_hash;
  for (std::size_t i : subset.features) selected.features.push_back(stats.features[i]);
  write_file(out, serialize_stats(selected));
  r.inputs = {stats_path};
  r.outputs = {out};
  r.summary["threshold_f"] = tf;
  r.summary["threshold_r"] = tr;
  r.summary["selected"] = subset.features.size();
  return r;
}

StageResult stage_ablate(const Params& p) {
  StageResult r;
  const std::string model_path = p.str("model"), out = p.str("out");
  guard_output(p, out);
  Model loaded = load_model(model_path);
  const auto* model = std::get_if<LinearModel>(&loaded);
  if (!model) fail(ErrorCode::InvalidArgument, "ablate: requires a linear or logreg model");
  r.inputs = {model_path};

  FeatureStats stats;
  if (p.has("stats")) {
    stats = parse_stats(read_file(p.str("stats")), p.str("stats"));
    r.inputs.push_back(p.str("stats"));
  } else {
    const std::string train_path = dataset_path(p, "train", "train");
    stats = compute_stats(load_dataset(train_path));
    r.inputs.push_back(train_path);
  }
  const std::string test_path = dataset_path(p, "test", "test");
  const auto test = vectorize_samples(load_dataset(test_path), *model->vocab);
  r.inputs.push_back(test_path);

  const std::string mode = p.str("mode", "plain");
  if (mode != "plain" && mode != "filtered") fail(ErrorCode::InvalidArgument, "ablate: mode must be plain or filtered");
  std::optional<double> threshold;
  if (mode == "filtered") threshold = p.real("threshold", 0.1);
  const auto n = p.integer("n", 100);
  if (n < 0) fail(ErrorCode::InvalidArgument, "ablate: n must be >= 0");
  const auto result = ablation_curve(*model, test, stats, static_cast<std::size_t>(n), threshold);
  write_file(out, ablation_csv(result, *model->vocab));
  r.outputs = {out};
  r.summary["mode"] = mode;
  r.summary["removed"] = result.removed.size();
  r.summary["truncated"] = result.truncated;
  r.summary["baseline_accuracy"] = result.accuracies.front();
  r.summary["final_accuracy"] = result.accuracies.back();
  return r;
}

StageResult stage_entropy(const Params& p) {
  StageResult r;
  const auto outputs = entropy_outputs(p);
  for (const auto& o : outputs) guard_output(p, o);
  std::vector<std::string> in_paths;
  if (p.has("in")) {
    in_paths = p.list("in");
  } else if (p.has("split")) {
    for (const char* f : {"train", "validation", "test"}) in_paths.push_back(p.str("split") + "/" + f + ".jsonl");
  } else {
    fail(ErrorCode::InvalidArgument, "entropy: missing parameter 'in' (or 'split' directory)");
  }
  std::vector<Sample> samples;
  for (const auto& path : in_paths) {
    auto part = load_dataset(path);
    std::move(part.begin(), part.end(), std::back_inserter(samples));
  }
  r.inputs = in_paths;
  const std::size_t step = static_cast<std::size_t>(std::max<long long>(1, p.integer("step", 1000)));
  std::optional<std::uint64_t> shuffle;
  if (p.has("shuffle_seed")) shuffle = p.seed("shuffle_seed");

  const std::string cls = p.str("class", "both");
  if (cls != "0" && cls != "1" && cls != "both") fail(ErrorCode::InvalidArgument, "entropy: class must be 0, 1 or both");
  std::vector<Label> labels;
  if (cls == "both") labels = {Label::Human, Label::Generated};
  else labels = {cls == "1" ? Label::Generated : Label::Human};

  std::vector<EntropySeries> series;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const auto tokens = class_token_stream(samples, labels[k], shuffle);
    series.push_back(entropy_curve(tokens, step, labels[k]));
    write_file(outputs[k], entropy_csv(series.back()));
    r.summary["class" + std::to_string(to_int(labels[k])) + "_bits"] = series.back().total_bits;
    r.summary["class" + std::to_string(to_int(labels[k])) + "_tokens"] = tokens.size();
  }
  if (series.size() == 2) {
    const auto gap = entropy_gap_report(series[0], series[1]);
    r.summary["gap_bits"] = gap.gap_bits;
    r.summary["variation_ratio"] = gap.variation_ratio;
  }
  r.outputs = outputs;
  return r;
}

StageResult stage_annotate_join(const Params& p) {
  StageResult r;
  const std::string ann_path = p.str("annotations"), stats_path = p.str("stats"), out = p.str("out");
  guard_output(p, out);
  const auto entries = load_annotations(ann_path);
  const auto stats = parse_stats(read_file(stats_path), stats_path);
  const auto subset = select_salient(stats, p.real("threshold_f", 100.0), p.real("threshold_r", 0.75));
  r.inputs = {ann_path, stats_path};
  std::optional<Model> model;
  if (p.has("model")) {
    model = load_model(p.str("model"));
    r.inputs.push_back(p.str("model"));
  }
  const LinearModel* lm = model ? std::get_if<LinearModel>(&*model) : nullptr;
  const auto table = join_annotations(entries, subset, stats, lm);
  write_file(out, annotation_table_tsv(table));
  r.outputs = {out};
  r.summary["rows"] = table.rows.size();
  r.summary["code_counts"] = table.code_counts;
  r.summary["warnings"] = table.warnings;
  return r;
}

StageResult stage_explain(const Params& p) {
  StageResult r;
  const std::string model_path = p.str("model"), out = p.str("out");
  guard_output(p, out);
  Model loaded = load_model(model_path);
  const auto* model = std::get_if<LinearModel>(&loaded);
  if (!model) fail(ErrorCode::InvalidArgument, "explain: requires a linear or logreg model");
  const std::string data_path = eval_set_path(p);
  const auto samples = load_dataset(data_path);
  if (samples.empty()) fail(ErrorCode::InvalidArgument, "explain: dataset '" + data_path + "' is empty");
  r.inputs = {model_path, data_path};

  const Sample* target = &samples.front();
  if (p.has("sample")) {
    const std::string id = p.str("sample");
    const auto it = std::find_if(samples.begin(), samples.end(), [&](const Sample& s) { return s.id == id; });
    if (it == samples.end()) fail(ErrorCode::InvalidArgument, "explain: sample '" + id + "' not found in " + data_path);
    target = &*it;
  }
  std::vector<const Sample*> shown = {target};
  if (p.flag("pair")) {
    const Sample* partner = nullptr;
    for (const auto& s : samples) {
      if (target->label == Label::Human && s.paired_id() == target->id) partner = &s;
      if (target->label == Label::Generated && s.id == target->paired_id()) partner = &s;
    }
    if (!partner) fail(ErrorCode::InvalidArgument, "explain: no paired sample for '" + target->id + "' in " + data_path);
    shown.push_back(partner);
    if (target->label == Label::Generated) std::swap(shown[0], shown[1]);
  }

  std::vector<ExplanationView> views;
  for (const Sample* s : shown) views.push_back(explain_document(*model, tokenize(s->text, s->id), s->label));

  AnnotationIndex annotations;
  if (p.has("annotations")) {
    annotations = index_annotations(load_annotations(p.str("annotations")));
    r.inputs.push_back(p.str("annotations"));
  }
  ReportOptions options;
  options.paired = shown.size() == 2;
  write_file(out, render_report(views, *model, p.has("annotations") ? &annotations : nullptr, options));
  r.outputs = {out};
  ordered_json docs = ordered_json::array();
  for (const auto& v : views)
    docs.push_back({{"id", v.sample_id}, {"score", v.total_score}, {"predicted", to_int(v.predicted)}});
  r.summary["documents"] = docs;
  return r;
}

StageResult stage_letters(const Params& p) {
  StageResult r;
  const std::string in = p.str("in");
  const auto samples = load_dataset(in);
  r.inputs = {in};
  std::array<std::vector<TokenStream>, 2> by_class;
  for (const auto& s : samples) by_class[to_int(s.label)].push_back(tokenize(s.text, s.id));
  std::array<std::array<double, 26>, 2> dist{};
  bool have[2] = {false, false};
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].empty()) continue;
    dist[c] = letter_distribution(by_class[c]);
    have[c] = true;
  }
  std::ostringstream tsv;
  tsv << "letter\tclass0\tclass1\n";
  double max_diff = 0.0;
  for (int k = 0; k < 26; ++k) {
    tsv << static_cast<char>('a' + k) << '\t' << (have[0] ? format_double(dist[0][k]) : "") << '\t'
        << (have[1] ? format_double(dist[1][k]) : "") << '\n';
    if (have[0] && have[1]) max_diff = std::max(max_diff, std::abs(dist[0][k] - dist[1][k]));
  }
  if (p.has("out")) {
    guard_output(p, p.str("out"));
    write_file(p.str("out"), tsv.str());
    r.outputs = {p.str("out")};
  }
  if (have[0] && have[1]) r.summary["max_abs_difference"] = max_diff;
  return r;
}

}  // namespace

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = {
      "clean", "chunk", "rewrite", "tokenize", "split", "lengths", "train", "eval", "features-stats",
      "features-select", "ablate", "entropy", "annotate-join", "explain", "letters"};
  return names;
}

bool is_stage(const std::string& name) {
  const auto& n = stage_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

std::vector<std::string> stage_input_paths(const std::string& stage, const StageParams& params) {
  const Params p(stage, params);
  std::vector<std::string> out;
  auto add = [&](const std::string& key) {
    if (p.has(key))
      for (const auto& v : p.list(key)) out.push_back(v);
  };
  auto add_split = [&](std::initializer_list<const char*> files) {
    if (!p.has("split")) return;
    for (const char* f : files) out.push_back(p.str("split") + "/" + f + ".jsonl");
  };
  if (stage == "clean" || stage == "chunk" || stage == "tokenize" || stage == "split" || stage == "letters") {
    add("in");
  } else if (stage == "rewrite") {
    add("in");
    add("config");
  } else if (stage == "lengths") {
    add_split({"train", "validation", "test"});
  } else if (stage == "train") {
    add("train");
    if (!p.has("train")) add_split({"train"});
    if (p.str("algo", "linear") == "linear") {
      add("validation");
      if (!p.has("validation")) add_split({"validation"});
    }
  } else if (stage == "eval" || stage == "explain") {
    add("model");
    add("data");
    if (!p.has("data") && p.has("split")) out.push_back(p.str("split") + "/" + p.str("set", "test") + ".jsonl");
    add("annotations");
  } else if (stage == "features-stats") {
    add("train");
    if (!p.has("train")) add_split({"train"});
  } else if (stage == "features-select") {
    add("stats");
  } else if (stage == "ablate") {
    add("model");
    add("stats");
    if (!p.has("stats")) {
      add("train");
      if (!p.has("train")) add_split({"train"});
    }
    add("test");
    if (!p.has("test")) add_split({"test"});
  } else if (stage == "entropy") {
    add("in");
    if (!p.has("in")) add_split({"train", "validation", "test"});
  } else if (stage == "annotate-join") {
    add("annotations");
    add("stats");
    add("model");
  }
  return out;
}

std::vector<std::string> stage_output_paths(const std::string& stage, const StageParams& params) {
  const Params p(stage, params);
  if (!p.has("out")) return {};
  const std::string out = p.str("out");
  if (stage == "split")
    return {out + "/train.jsonl", out + "/validation.jsonl", out + "/test.jsonl", out + "/split.manifest.json"};
  if (stage == "clean" && p.has("in") && p.list("in").size() > 1) {
    std::vector<std::string> files;
    for (const auto& in : p.list("in")) files.push_back(out + "/" + stem(in) + ".txt");
    return files;
  }
  if (stage == "chunk") return {out, manifest_path(out)};
  if (stage == "rewrite") return {out, p.str("checkpoint", out + ".checkpoint.jsonl")};
  if (stage == "entropy") return entropy_outputs(p);
  return {out};
}

StageResult run_stage(const std::string& stage, const StageParams& params) {
  const Params p(stage, params);
  if (stage == "clean") return stage_clean(p);
  if (stage == "chunk") return stage_chunk(p);
  if (stage == "rewrite") return stage_rewrite(p);
  if (stage == "tokenize") return stage_tokenize(p);
  if (stage == "split") return stage_split(p);
  if (stage == "lengths") return stage_lengths(p);
  if (stage == "train") return stage_train(p);
  if (stage == "eval") return stage_eval(p);
  if (stage == "features-stats") return stage_features_stats(p);
  if (stage == "features-select") return stage_features_select(p);
  if (stage == "ablate") return stage_ablate(p);
  if (stage == "entropy") return stage_entropy(p);
  if (stage == "annotate-join") return stage_annotate_join(p);
  if (stage == "explain") return stage_explain(p);
  if (stage == "letters") return stage_letters(p);
  fail(ErrorCode::InvalidArgument, "unknown stage '" + stage + "'");
}

}  // namespace fictdet
