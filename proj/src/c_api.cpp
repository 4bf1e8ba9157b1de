#include "fictdet/fictdet.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "fictdet/analysis.hpp"
#include "fictdet/classifiers.hpp"
#include "fictdet/corpus.hpp"
#include "fictdet/error.hpp"
#include "fictdet/explain.hpp"
#include "fictdet/features.hpp"
#include "fictdet/pipeline.hpp"
#include "fictdet/rewriter.hpp"
#include "fictdet/stages.hpp"
#include "fictdet/tokenizer.hpp"

struct fd_dataset {
  std::vector<fictdet::Sample> samples;
};

struct fd_model {
  fictdet::Model model;
};

struct fd_stats {
  fictdet::FeatureStats stats;
};

namespace {

using namespace fictdet;

thread_local std::string g_last_error;

fd_status set_error(fd_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
fd_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return FD_OK;
  } catch (const Error& e) {
    return set_error(static_cast<fd_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(FD_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(FD_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(FD_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* what) {
  if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<TokenStream> tokenize_all(const std::vector<Sample>& samples) {
  std::vector<TokenStream> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(tokenize(s.text, s.id));
  return out;
}

const LinearModel& linear_of(const fd_model* m) {
  const auto* lm = std::get_if<LinearModel>(&m->model);
  if (!lm) fail(ErrorCode::InvalidArgument, "operation requires a linear or logreg model");
  return *lm;
}

Label label_arg(int label) { return label_from_int(label); }

}  // namespace

extern "C" {

FD_API const char* fd_version(void) { return FICTDET_VERSION_STRING; }

FD_API const char* fd_last_error(void) { return g_last_error.c_str(); }

FD_API const char* fd_status_name(fd_status status) {
  switch (status) {
    case FD_OK: return "ok";
    case FD_ERR_INVALID_ARGUMENT: return "invalid argument";
    case FD_ERR_IO: return "i/o error";
    case FD_ERR_PARSE: return "parse error";
    case FD_ERR_VOCABULARY_MISMATCH: return "vocabulary mismatch";
    case FD_ERR_NUMERIC: return "numeric error";
    case FD_ERR_TRANSPORT: return "transport error";
    case FD_ERR_MISSING_INPUT: return "missing input";
    case FD_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

FD_API void fd_string_free(char* s) { std::free(s); }

FD_API fd_status fd_normalize_punctuation(const char* text, char** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = dup(normalize_punctuation(text));
  });
}

FD_API fd_status fd_tokenize(const char* text, char** out, size_t* n_tokens) {
  return guarded([&] {
    require(text, "text");
    const auto stream = tokenize(text);
    if (n_tokens) *n_tokens = stream.tokens.size();
    if (out) *out = dup(stream.joined());
  });
}

FD_API fd_status fd_clean_source(const char* raw_text, char** out) {
  return guarded([&] {
    require(raw_text, "raw_text");
    require(out, "out");
    *out = dup(clean_source(raw_text));
  });
}

FD_API fd_status fd_build_prompt(const char* excerpt, char** out) {
  return guarded([&] {
    require(excerpt, "excerpt");
    require(out, "out");
    *out = dup(build_prompt(excerpt));
  });
}

FD_API fd_status fd_dataset_load(const char* path, fd_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto d = std::make_unique<fd_dataset>();
    d->samples = load_dataset(path);
    *out = d.release();
  });
}

FD_API fd_status fd_dataset_parse(const char* contents, fd_dataset** out) {
  return guarded([&] {
    require(contents, "contents");
    require(out, "out");
    auto d = std::make_unique<fd_dataset>();
    d->samples = parse_dataset(contents);
    *out = d.release();
  });
}

FD_API fd_status fd_dataset_save(const fd_dataset* dataset, const char* path) {
  return guarded([&] {
    require(dataset, "dataset");
    require(path, "path");
    save_dataset(path, dataset->samples);
  });
}

FD_API size_t fd_dataset_size(const fd_dataset* dataset) { return dataset ? dataset->samples.size() : 0; }

FD_API fd_status fd_dataset_get(const fd_dataset* dataset, size_t index, const char** id, const char** text, int* label,
                                const char** source) {
  return guarded([&] {
    require(dataset, "dataset");
    if (index >= dataset->samples.size()) fail(ErrorCode::InvalidArgument, "sample index out of range");
    const Sample& s = dataset->samples[index];
    if (id) *id = s.id.c_str();
    if (text) *text = s.text.c_str();
    if (label) *label = to_int(s.label);
    if (source) *source = s.source.c_str();
  });
}

FD_API void fd_dataset_free(fd_dataset* dataset) { delete dataset; }

FD_API fd_status fd_chunk_text(const char* clean_text, uint64_t seed, int min_words, int max_words,
                               const char* id_prefix, const char* source, fd_dataset** out) {
  return guarded([&] {
    require(clean_text, "clean_text");
    require(id_prefix, "id_prefix");
    require(out, "out");
    ChunkOptions options;
    options.min_words = min_words;
    options.max_words = max_words;
    auto d = std::make_unique<fd_dataset>();
    d->samples = make_samples(chunk_text(clean_text, seed, options), id_prefix, source ? source : id_prefix);
    *out = d.release();
  });
}

FD_API fd_status fd_split_dataset(const fd_dataset* dataset, double train_ratio, double validation_ratio,
                                  double test_ratio, uint64_t seed, fd_dataset** train, fd_dataset** validation,
                                  fd_dataset** test) {
  return guarded([&] {
    require(dataset, "dataset");
    require(train, "train");
    require(validation, "validation");
    require(test, "test");
    auto split = split_dataset(dataset->samples, {train_ratio, validation_ratio, test_ratio}, seed);
    auto a = std::make_unique<fd_dataset>();
    auto b = std::make_unique<fd_dataset>();
    auto c = std::make_unique<fd_dataset>();
    a->samples = std::move(split.train);
    b->samples = std::move(split.validation);
    c->samples = std::move(split.test);
    *train = a.release();
    *validation = b.release();
    *test = c.release();
  });
}

FD_API fd_status fd_length_stats(const fd_dataset* dataset, int label, double* mean_tokens, double* std_tokens) {
  return guarded([&] {
    require(dataset, "dataset");
    auto samples = dataset->samples;
    count_tokens(samples);
    const auto s = length_stats(samples, label_arg(label));
    if (mean_tokens) *mean_tokens = s.mean_tokens;
    if (std_tokens) *std_tokens = s.std_tokens;
  });
}

FD_API fd_status fd_model_train(fd_model_kind kind, const fd_dataset* train, const fd_dataset* validation,
                                uint64_t seed, fd_model** out) {
  return guarded([&] {
    require(train, "train");
    require(out, "out");
    const auto streams = tokenize_all(train->samples);
    auto vocab = std::make_shared<const Vocabulary>(build_vocabulary(streams));
    LabeledVectors data;
    for (std::size_t i = 0; i < streams.size(); ++i) {
      data.ids.push_back(train->samples[i].id);
      data.vectors.push_back(vectorize(streams[i], *vocab));
      data.labels.push_back(train->samples[i].label);
    }
    auto m = std::make_unique<fd_model>();
    switch (kind) {
      case FD_MODEL_LINEAR: {
        require(validation, "validation");
        LinearHyper h;
        h.seed = seed;
        m->model = train_linear(vocab, data, vectorize_samples(validation->samples, *vocab), h);
        break;
      }
      case FD_MODEL_LOGREG: {
        LogRegHyper h;
        h.seed = seed;
        m->model = train_logreg(vocab, data, h);
        break;
      }
      case FD_MODEL_NB: m->model = train_nb(vocab, data); break;
      default: fail(ErrorCode::InvalidArgument, "unknown model kind");
    }
    *out = m.release();
  });
}

FD_API fd_status fd_model_load(const char* path, fd_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto m = std::make_unique<fd_model>();
    m->model = load_model(path);
    *out = m.release();
  });
}

FD_API fd_status fd_model_save(const fd_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    save_model(path, model->model);
  });
}

FD_API fd_model_kind fd_model_get_kind(const fd_model* model) {
  switch (model_kind(model->model)) {
    case ModelKind::Linear: return FD_MODEL_LINEAR;
    case ModelKind::LogisticRegression: return FD_MODEL_LOGREG;
    case ModelKind::NaiveBayes: return FD_MODEL_NB;
  }
  return FD_MODEL_LINEAR;
}

FD_API size_t fd_model_vocabulary_size(const fd_model* model) {
  return model ? model_vocabulary(model->model).size() : 0;
}

FD_API fd_status fd_model_weight(const fd_model* model, const char* token, double* weight) {
  return guarded([&] {
    require(model, "model");
    require(token, "token");
    require(weight, "weight");
    const LinearModel& lm = linear_of(model);
    const auto idx = lm.vocab->index(token);
    *weight = idx ? lm.weights[*idx] : 0.0;
  });
}

FD_API fd_status fd_model_score_text(const fd_model* model, const char* text, double* score, int* label) {
  return guarded([&] {
    require(model, "model");
    require(text, "text");
    const auto v = vectorize(tokenize(text), model_vocabulary(model->model));
    if (score) *score = model_score(model->model, v);
    if (label) *label = to_int(model_predict(model->model, v));
  });
}

FD_API fd_status fd_model_evaluate(const fd_model* model, const fd_dataset* data, double* accuracy) {
  return guarded([&] {
    require(model, "model");
    require(data, "data");
    require(accuracy, "accuracy");
    *accuracy = evaluate(model->model, vectorize_samples(data->samples, model_vocabulary(model->model))).accuracy;
  });
}

FD_API fd_status fd_model_explain_html(const fd_model* model, const char* text, const char* sample_id, char** html) {
  return guarded([&] {
    require(model, "model");
    require(text, "text");
    require(html, "html");
    const LinearModel& lm = linear_of(model);
    const auto view = explain_document(lm, tokenize(text, sample_id ? sample_id : "document"));
    *html = dup(render_report({view}, lm));
  });
}

FD_API void fd_model_free(fd_model* model) { delete model; }

FD_API fd_status fd_stats_compute(const fd_dataset* train, fd_stats** out) {
  return guarded([&] {
    require(train, "train");
    require(out, "out");
    const auto streams = tokenize_all(train->samples);
    std::vector<Label> labels;
    for (const auto& s : train->samples) labels.push_back(s.label);
    auto s = std::make_unique<fd_stats>();
    s->stats = class_frequencies(streams, labels, build_vocabulary(streams));
    *out = s.release();
  });
}

FD_API size_t fd_stats_size(const fd_stats* stats) { return stats ? stats->stats.features.size() : 0; }

FD_API fd_status fd_stats_get(const fd_stats* stats, size_t index, const char** token, double* f0, double* f1,
                              double* ratio) {
  return guarded([&] {
    require(stats, "stats");
    if (index >= stats->stats.features.size()) fail(ErrorCode::InvalidArgument, "feature index out of range");
    const auto& f = stats->stats.features[index];
    if (token) *token = f.token.c_str();
    if (f0) *f0 = f.f0;
    if (f1) *f1 = f.f1;
    if (ratio) *ratio = f.ratio;
  });
}

FD_API fd_status fd_stats_select_count(const fd_stats* stats, double threshold_f, double threshold_r, size_t* count) {
  return guarded([&] {
    require(stats, "stats");
    require(count, "count");
    *count = select_salient(stats->stats, threshold_f, threshold_r).features.size();
  });
}

FD_API void fd_stats_free(fd_stats* stats) { delete stats; }

FD_API fd_status fd_class_entropy(const fd_dataset* dataset, int label, double* bits) {
  return guarded([&] {
    require(dataset, "dataset");
    require(bits, "bits");
    *bits = shannon_entropy(class_token_stream(dataset->samples, label_arg(label)));
  });
}

FD_API fd_status fd_stage_run(const char* stage, const char* const* keys, const char* const* values, size_t n,
                              char** report_json) {
  return guarded([&] {
    require(stage, "stage");
    if (n) {
      require(keys, "keys");
      require(values, "values");
    }
    StageParams params;
    for (size_t i = 0; i < n; ++i) {
      require(keys[i], "key");
      require(values[i], "value");
      params[keys[i]] = values[i];
    }
    const auto result = run_stage(stage, params);
    if (report_json) {
      nlohmann::ordered_json j;
      j["stage"] = stage;
      j["summary"] = result.summary;
      j["inputs"] = result.inputs;
      j["outputs"] = result.outputs;
      *report_json = dup(j.dump(2));
    }
  });
}

FD_API fd_status fd_pipeline_run(const char* config_path, int force, char** manifest_json) {
  return guarded([&] {
    require(config_path, "config_path");
    PipelineOptions options;
    options.force = force != 0;
    const auto manifest = run_pipeline(load_pipeline_config(config_path), options);
    if (manifest_json) *manifest_json = dup(manifest.dump(2));
  });
}

}  // extern "C"
