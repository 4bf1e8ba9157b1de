#include <cmath>
#include <cstdlib>

#include "fictdet/classifiers.hpp"
#include "fictdet/error.hpp"
#include "json.hpp"

namespace fictdet {
namespace {

using ordered_json = nlohmann::ordered_json;

double parse_double(const std::string& text, const std::string& where) {
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (text.empty() || *end) fail(ErrorCode::Parse, where + ": malformed number '" + text + "'");
  return value;
}

ordered_json meta_json(const TrainingMeta& m) {
  ordered_json j;
  j["seed"] = m.seed;
  j["epochs_run"] = m.epochs_run;
  j["best_epoch"] = m.best_epoch;
  j["best_validation_accuracy"] = m.best_validation_accuracy;
  j["final_validation_accuracy"] = m.final_validation_accuracy;
  j["train_accuracy"] = m.train_accuracy;
  j["final_gradient_norm"] = m.final_gradient_norm;
  j["converged"] = m.converged;
  return j;
}

TrainingMeta meta_from_json(const nlohmann::json& j) {
  TrainingMeta m;
  m.seed = j.value("seed", std::uint64_t{0});
  m.epochs_run = j.value("epochs_run", 0);
  m.best_epoch = j.value("best_epoch", 0);
  m.best_validation_accuracy = j.value("best_validation_accuracy", 0.0);
  m.final_validation_accuracy = j.value("final_validation_accuracy", 0.0);
  m.train_accuracy = j.value("train_accuracy", 0.0);
  m.final_gradient_norm = j.value("final_gradient_norm", 0.0);
  m.converged = j.value("converged", false);
  return m;
}

std::string header_line(const ordered_json& header) {
  return header.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict) + "\n";
}

}  // namespace

std::string_view kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Linear: return "linear";
    case ModelKind::LogisticRegression: return "logreg";
    case ModelKind::NaiveBayes: return "nb";
  }
  return "unknown";
}

ModelKind kind_from_name(std::string_view name) {
  if (name == "linear") return ModelKind::Linear;
  if (name == "logreg") return ModelKind::LogisticRegression;
  if (name == "nb") return ModelKind::NaiveBayes;
  fail(ErrorCode::InvalidArgument, "unknown classifier kind '" + std::string(name) + "' (expected linear, nb or logreg)");
}

std::string serialize_model(const Model& model) {
  ordered_json header;
  header["format"] = "fictdet-model";
  header["version"] = kModelFormatVersion;
  header["kind"] = std::string(kind_name(model_kind(model)));
  const Vocabulary& vocab = model_vocabulary(model);
  header["vocab_hash"] = vocab.hash();
  header["vocab_size"] = vocab.size();

  std::string body;
  if (const auto* lm = std::get_if<LinearModel>(&model)) {
    header["bias"] = format_double(lm->bias);
    ordered_json hyper;
    if (lm->kind == ModelKind::Linear) {
      hyper["learning_rate"] = lm->linear_hyper.learning_rate;
      hyper["l2"] = lm->linear_hyper.l2;
      hyper["max_epochs"] = lm->linear_hyper.max_epochs;
      hyper["patience"] = lm->linear_hyper.patience;
      hyper["seed"] = lm->linear_hyper.seed;
    } else {
      hyper["l2"] = lm->logreg_hyper.l2;
      hyper["max_iters"] = lm->logreg_hyper.max_iters;
      hyper["tol"] = lm->logreg_hyper.tol;
      hyper["seed"] = lm->logreg_hyper.seed;
    }
    header["hyperparameters"] = hyper;
    header["training"] = meta_json(lm->meta);
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      body += vocab.token(i);
      body += '\t';
      body += format_double(lm->weights[i]);
      body += '\n';
    }
  } else {
    const auto& nb = std::get<NBModel>(model);
    header["hyperparameters"] = {{"alpha", nb.alpha}};
    header["class_docs"] = {nb.class_docs[0], nb.class_docs[1]};
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      body += vocab.token(i);
      body += '\t';
      body += format_double(nb.log_likelihood[0][i]);
      body += '\t';
      body += format_double(nb.log_likelihood[1][i]);
      body += '\n';
    }
  }
  return header_line(header) + body;
}

Model parse_model(std::string_view contents, const std::string& origin) {
  const auto newline = contents.find('\n');
  if (newline == std::string_view::npos) fail(ErrorCode::Parse, origin + ": missing model header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(contents.substr(0, newline));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, origin + ":1: " + e.what());
  }
  try {
    if (header.at("format").get<std::string>() != "fictdet-model")
      fail(ErrorCode::Parse, origin + ": not a fictdet model file");
    if (header.at("version").get<int>() != kModelFormatVersion)
      fail(ErrorCode::Parse, origin + ": unsupported model format version " + header.at("version").dump());
    const ModelKind kind = kind_from_name(header.at("kind").get<std::string>());
    const std::size_t expected_size = header.at("vocab_size").get<std::size_t>();

    std::vector<std::string> tokens;
    std::vector<std::vector<double>> columns;
    tokens.reserve(expected_size);
    const std::size_t width = kind == ModelKind::NaiveBayes ? 2 : 1;
    columns.resize(width);
    std::size_t line_no = 1;
    for (const auto& line : split(contents.substr(newline + 1), '\n')) {
      ++line_no;
      if (line.empty()) continue;
      const std::string where = origin + ":" + std::to_string(line_no);
      const auto fields = split(line, '\t');
      if (fields.size() != width + 1) fail(ErrorCode::Parse, where + ": expected " + std::to_string(width + 1) + " fields");
      if (!tokens.empty() && !(tokens.back() < fields[0]))
        fail(ErrorCode::Parse, where + ": tokens must be unique and sorted");
      tokens.push_back(fields[0]);
      for (std::size_t k = 0; k < width; ++k) columns[k].push_back(parse_double(fields[k + 1], where));
    }
    if (tokens.size() != expected_size)
      fail(ErrorCode::Parse, origin + ": header says " + std::to_string(expected_size) + " tokens, file has " +
                                 std::to_string(tokens.size()));
    auto vocab = std::make_shared<const Vocabulary>(std::move(tokens));
    if (vocab->hash() != header.at("vocab_hash").get<std::string>())
      fail(ErrorCode::VocabularyMismatch, origin + ": vocabulary hash does not match the token records");

    if (kind == ModelKind::NaiveBayes) {
      NBModel nb;
      nb.vocab = vocab;
      nb.alpha = header.at("hyperparameters").at("alpha").get<double>();
      const auto& docs = header.at("class_docs");
      nb.class_docs = {docs.at(0).get<std::uint64_t>(), docs.at(1).get<std::uint64_t>()};
      const double n = static_cast<double>(nb.class_docs[0] + nb.class_docs[1]);
      for (int c = 0; c < 2; ++c) nb.log_prior[c] = std::log(static_cast<double>(nb.class_docs[c]) / n);
      nb.log_likelihood = {std::move(columns[0]), std::move(columns[1])};
      return nb;
    }

    LinearModel lm;
    lm.kind = kind;
    lm.vocab = vocab;
    lm.weights = std::move(columns[0]);
    lm.bias = parse_double(header.at("bias").get<std::string>(), origin + ":1");
    const auto& hyper = header.at("hyperparameters");
    if (kind == ModelKind::Linear) {
      lm.linear_hyper.learning_rate = hyper.at("learning_rate").get<double>();
      lm.linear_hyper.l2 = hyper.at("l2").get<double>();
      lm.linear_hyper.max_epochs = hyper.at("max_epochs").get<int>();
      lm.linear_hyper.patience = hyper.at("patience").get<int>();
      lm.linear_hyper.seed = hyper.at("seed").get<std::uint64_t>();
    } else {
      lm.logreg_hyper.l2 = hyper.at("l2").get<double>();
      lm.logreg_hyper.max_iters = hyper.at("max_iters").get<int>();
      lm.logreg_hyper.tol = hyper.at("tol").get<double>();
      lm.logreg_hyper.seed = hyper.at("seed").get<std::uint64_t>();
    }
    lm.meta = meta_from_json(header.value("training", nlohmann::json::object()));
    for (double w : lm.weights)
      if (!std::isfinite(w)) fail(ErrorCode::Parse, origin + ": non-finite weight");
    return lm;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, origin + ": bad model header: " + e.what());
  }
}

void save_model(const std::string& path, const Model& model) { write_file(path, serialize_model(model)); }

Model load_model(const std::string& path) { return parse_model(read_file(path), path); }

}  // namespace fictdet
