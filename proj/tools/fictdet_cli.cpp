// fictdet command-line tool. Every subcommand maps its flags onto stage
// parameters and runs the stage through the C API.

#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fictdet/fictdet.h"

namespace {

struct Option {
  std::string key;
  std::string value;
  bool flag = false;
  bool set = false;
};

class StageCommand {
 public:
  StageCommand(CLI::App* parent, const std::string& name, const std::string& stage, const std::string& help)
      : stage_(stage), app_(parent->add_subcommand(name, help)) {}

  StageCommand& opt(const std::string& flag, const std::string& key, const std::string& help, bool required = false) {
    auto& o = options_.emplace_back(std::make_unique<Option>());
    o->key = key;
    auto* cli = app_->add_option(flag, o->value, help);
    if (required) cli->required();
    return *this;
  }

  StageCommand& flag(const std::string& flag, const std::string& key, const std::string& help) {
    auto& o = options_.emplace_back(std::make_unique<Option>());
    o->key = key;
    o->flag = true;
    app_->add_flag(flag, o->set, help);
    return *this;
  }

  // Fixed parameter not exposed as a flag.
  StageCommand& fixed(const std::string& key, const std::string& value) {
    fixed_[key] = value;
    return *this;
  }

  CLI::App* app() const { return app_; }

  int run() const {
    std::vector<std::string> keys, values;
    for (const auto& [k, v] : fixed_) {
      keys.push_back(k);
      values.push_back(v);
    }
    for (const auto& o : options_) {
      if (o->flag ? o->set : !o->value.empty()) {
        keys.push_back(o->key);
        values.push_back(o->flag ? "1" : o->value);
      }
    }
    std::vector<const char*> k, v;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      k.push_back(keys[i].c_str());
      v.push_back(values[i].c_str());
    }
    char* report = nullptr;
    const fd_status status = fd_stage_run(stage_.c_str(), k.data(), v.data(), k.size(), &report);
    if (status != FD_OK) {
      std::fprintf(stderr, "fictdet %s: %s: %s\n", stage_.c_str(), fd_status_name(status), fd_last_error());
      return static_cast<int>(status);
    }
    std::printf("%s\n", report);
    fd_string_free(report);
    return 0;
  }

 private:
  std::string stage_;
  CLI::App* app_;
  std::vector<std::unique_ptr<Option>> options_;
  std::map<std::string, std::string> fixed_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interpretable detection of rewritten fiction excerpts"};
  app.set_version_flag("--version", std::string(fd_version()));
  app.require_subcommand(1);

  std::vector<std::unique_ptr<StageCommand>> commands;
  auto add = [&](CLI::App* parent, const std::string& name, const std::string& stage, const std::string& help) -> StageCommand& {
    commands.push_back(std::make_unique<StageCommand>(parent, name, stage, help));
    return *commands.back();
  };

  auto* corpus = app.add_subcommand("corpus", "Corpus preparation");
  corpus->require_subcommand(1);
  add(corpus, "clean", "clean", "Strip boilerplate, page numbers and headings from raw novels")
      .opt("--in", "in", "raw text file(s), comma separated", true)
      .opt("--out", "out", "cleaned file (or directory for several inputs)", true)
      .flag("--force", "force", "overwrite existing outputs");
  add(corpus, "chunk", "chunk", "Chunk cleaned text into Class-0 excerpts")
      .opt("--in", "in", "cleaned text file(s), comma separated", true)
      .opt("--out", "out", "dataset file (.jsonl)", true)
      .opt("--seed", "seed", "chunk-length seed")
      .opt("--min", "min", "minimum target words (default 92)")
      .opt("--max", "max", "maximum target words (default 125)")
      .opt("--source", "source", "source title (single input only)")
      .opt("--abbreviations", "abbreviations", "comma-separated words whose full stop does not end a sentence")
      .flag("--force", "force", "overwrite existing outputs");
  add(corpus, "split", "split", "Pair-preserving train/validation/test split")
      .opt("--in", "in", "dataset file", true)
      .opt("--out", "out", "output directory", true)
      .opt("--ratios", "ratios", "train,validation,test (default 0.7,0.15,0.15)")
      .opt("--seed", "seed", "split seed")
      .flag("--force", "force", "overwrite existing outputs");
  add(corpus, "lengths", "lengths", "Token length statistics per split and class")
      .opt("--split", "split", "split directory", true)
      .opt("--out", "out", "optional TSV output")
      .flag("--force", "force", "overwrite existing outputs");

  add(&app, "rewrite", "rewrite", "Rewrite Class-0 excerpts through a chat-completion endpoint")
      .opt("--in", "in", "dataset with Class-0 samples", true)
      .opt("--config", "config", "rewriter JSON config", true)
      .opt("--out", "out", "combined Class-0 + Class-1 dataset", true)
      .opt("--checkpoint", "checkpoint", "checkpoint file (default <out>.checkpoint.jsonl)")
      .opt("--seed", "seed", "submission-order seed (overrides config)")
      .flag("--resume", "resume", "skip excerpts already rewritten in the checkpoint")
      .flag("--force", "force", "overwrite existing outputs");

  add(&app, "tokenize", "tokenize", "Write the tokenised form of a dataset")
      .opt("--in", "in", "dataset file", true)
      .opt("--out", "out", "tokenised TSV", true)
      .flag("--force", "force", "overwrite existing outputs");

  add(&app, "train", "train", "Train a classifier")
      .opt("--algo", "algo", "linear | logreg | nb (default linear)")
      .opt("--split", "split", "split directory")
      .opt("--train", "train", "training dataset (instead of --split)")
      .opt("--validation", "validation", "validation dataset (instead of --split)")
      .opt("--out", "out", "model file", true)
      .opt("--seed", "seed", "training seed")
      .opt("--lr", "lr", "SGD learning rate (linear)")
      .opt("--l2", "l2", "L2 penalty")
      .opt("--max-epochs", "max_epochs", "maximum SGD epochs (linear)")
      .opt("--patience", "patience", "early-stopping patience (linear)")
      .opt("--max-iters", "max_iters", "maximum iterations (logreg)")
      .opt("--tol", "tol", "gradient-norm tolerance (logreg)")
      .opt("--alpha", "alpha", "additive smoothing (nb)")
      .flag("--force", "force", "overwrite existing outputs");

  add(&app, "eval", "eval", "Evaluate a model")
      .opt("--model", "model", "model file", true)
      .opt("--data", "data", "dataset file")
      .opt("--split", "split", "split directory")
      .opt("--set", "set", "train | validation | test (default test)")
      .opt("--out", "out", "optional per-sample TSV")
      .flag("--force", "force", "overwrite existing outputs");

  auto* features = app.add_subcommand("features", "Feature frequency analysis");
  features->require_subcommand(1);
  add(features, "stats", "features-stats", "Per-class relative frequencies over the training split")
      .opt("--split", "split", "split directory")
      .opt("--train", "train", "training dataset (instead of --split)")
      .opt("--out", "out", "stats TSV", true)
      .flag("--force", "force", "overwrite existing outputs");
  add(features, "select", "features-select", "Select the salient subset")
      .opt("--stats", "stats", "stats TSV", true)
      .opt("--out", "out", "subset TSV", true)
      .opt("--threshold-f", "threshold_f", "minimum f_max per million (default 100)")
      .opt("--threshold-r", "threshold_r", "minimum ratio (default 0.75)")
      .flag("--force", "force", "overwrite existing outputs");

  add(&app, "ablate", "ablate", "Feature ablation curve")
      .opt("--model", "model", "linear or logreg model", true)
      .opt("--split", "split", "split directory")
      .opt("--test", "test", "test dataset (instead of --split)")
      .opt("--stats", "stats", "stats TSV (otherwise computed from the training split)")
      .opt("--train", "train", "training dataset for frequencies")
      .opt("--mode", "mode", "plain | filtered (default plain)")
      .opt("--n", "n", "features to remove (default 100)")
      .opt("--threshold", "threshold", "minimum |w| in filtered mode (default 0.1)")
      .opt("--out", "out", "curve CSV", true)
      .flag("--force", "force", "overwrite existing outputs");

  add(&app, "entropy", "entropy", "Entropy curves per class")
      .opt("--in", "in", "dataset file(s), comma separated")
      .opt("--split", "split", "split directory (all three parts)")
      .opt("--class", "class", "0 | 1 | both (default both)")
      .opt("--step", "step", "tokens between curve points (default 1000)")
      .opt("--shuffle-seed", "shuffle_seed", "shuffle sample order before concatenation")
      .opt("--out", "out", "curve CSV (a -class0/-class1 suffix is added for both)", true)
      .flag("--force", "force", "overwrite existing outputs");

  auto* annotate = app.add_subcommand("annotate", "Manual explanation annotations");
  annotate->require_subcommand(1);
  add(annotate, "join", "annotate-join", "Join annotations with the salient subset")
      .opt("--annotations", "annotations", "annotation TSV", true)
      .opt("--stats", "stats", "stats TSV", true)
      .opt("--model", "model", "optional model for weights")
      .opt("--threshold-f", "threshold_f", "minimum f_max per million (default 100)")
      .opt("--threshold-r", "threshold_r", "minimum ratio (default 0.75)")
      .opt("--out", "out", "joined TSV", true)
      .flag("--force", "force", "overwrite existing outputs");

  add(&app, "explain", "explain", "HTML token-contribution report")
      .opt("--model", "model", "linear or logreg model", true)
      .opt("--data", "data", "dataset file")
      .opt("--split", "split", "split directory")
      .opt("--set", "set", "train | validation | test (default test)")
      .opt("--sample", "sample", "sample id (default: first sample)")
      .opt("--annotations", "annotations", "annotation TSV for code labels")
      .opt("--out", "out", "HTML report", true)
      .flag("--pair", "pair", "show the sample next to its pair")
      .flag("--force", "force", "overwrite existing outputs");

  add(&app, "letters", "letters", "Letter distribution per class")
      .opt("--in", "in", "dataset file", true)
      .opt("--out", "out", "optional TSV")
      .flag("--force", "force", "overwrite existing outputs");

  auto* pipeline = app.add_subcommand("pipeline", "Run a configured pipeline");
  pipeline->require_subcommand(1);
  auto* pipeline_run = pipeline->add_subcommand("run", "Run every configured stage");
  std::string config;
  bool force = false;
  pipeline_run->add_option("--config", config, "pipeline config file")->required();
  pipeline_run->add_flag("--force", force, "overwrite existing outputs");

  CLI11_PARSE(app, argc, argv);

  if (pipeline_run->parsed()) {
    char* manifest = nullptr;
    const fd_status status = fd_pipeline_run(config.c_str(), force ? 1 : 0, &manifest);
    if (status != FD_OK) {
      std::fprintf(stderr, "fictdet pipeline: %s: %s\n", fd_status_name(status), fd_last_error());
      return static_cast<int>(status);
    }
    std::printf("%s\n", manifest);
    fd_string_free(manifest);
    return 0;
  }
  for (const auto& c : commands)
    if (c->app()->parsed()) return c->run();
  return 1;
}
