#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fictdet/corpus.hpp"
#include "fictdet/features.hpp"

namespace fictdet {

enum class ModelKind { Linear, LogisticRegression, NaiveBayes };

std::string_view kind_name(ModelKind kind);
ModelKind kind_from_name(std::string_view name);

struct LinearHyper {
  double learning_rate = 0.01;
  double l2 = 1e-6;
  int max_epochs = 200;
  int patience = 20;
  std::uint64_t seed = 1;
};

// Objective: (1/N) * [sum_i logloss_i + (l2 / 2) * |w|^2]. With l2 = 1 this is
// the C = 1 penalty of the usual liblinear/lbfgs parameterisation, scaled by
// 1/N. The bias is not penalised.
struct LogRegHyper {
  double l2 = 1.0;
  int max_iters = 2000;
  double tol = 1e-5;  // on the Euclidean norm of the objective gradient
  std::uint64_t seed = 1;  // recorded only; the optimiser is deterministic
};

struct TrainingMeta {
  std::uint64_t seed = 0;
  int epochs_run = 0;       // SGD epochs, or gradient-descent iterations
  int best_epoch = 0;       // epoch of the returned snapshot (SGD only)
  double best_validation_accuracy = 0.0;
  double final_validation_accuracy = 0.0;  // last epoch run (SGD only)
  double train_accuracy = 0.0;
  double final_gradient_norm = 0.0;  // logistic regression only
  bool converged = false;            // logistic regression only
};

// Weights aligned with the vocabulary plus a bias. Both the holdout-stopped
// linear classifier and logistic regression produce this.
struct LinearModel {
  ModelKind kind = ModelKind::Linear;
  std::shared_ptr<const Vocabulary> vocab;
  std::vector<double> weights;
  double bias = 0.0;
  LinearHyper linear_hyper;
  LogRegHyper logreg_hyper;
  TrainingMeta meta;

  const std::string& vocab_hash() const { return vocab->hash(); }
};

struct Contribution {
  std::uint32_t feature = 0;
  std::uint32_t count = 0;
  double weight = 0.0;
  double value = 0.0;  // count * weight
};

struct ScoreBreakdown {
  double total = 0.0;
  std::vector<Contribution> contributions;  // one per non-zero feature, by index
};

// total is accumulated as bias, then each contribution in list order, so
// replaying that sum from the breakdown reproduces total bit for bit.
ScoreBreakdown score(const LinearModel& model, const CountVector& v);
double score_total(const LinearModel& model, const CountVector& v);

// 1 if score > 0, else 0 (a zero score is classified as human-written).
Label predict(const LinearModel& model, const CountVector& v);
Label sign_rule(double total);

// Holdout early stopping: per-epoch shuffled SGD on the logistic loss over
// raw counts; returns the snapshot with the best validation accuracy (the
// earliest epoch on ties) and stops after `patience` epochs without
// improvement.
LinearModel train_linear(std::shared_ptr<const Vocabulary> vocab, const LabeledVectors& train,
                         const LabeledVectors& validation, const LinearHyper& hyper = {});

// Value and gradient of the logistic-regression objective (see LogRegHyper).
// grad_w / grad_b may be null.
double logistic_objective(const LabeledVectors& data, std::span<const double> weights, double bias,
                          double l2, std::vector<double>* grad_w, double* grad_b);

// L-BFGS (memory 10) with backtracking line search; stops when the
// gradient norm falls below tol or after max_iters.
LinearModel train_logreg(std::shared_ptr<const Vocabulary> vocab, const LabeledVectors& train,
                         const LogRegHyper& hyper = {});

// Multinomial Naive Bayes with additive smoothing.
struct NBModel {
  std::shared_ptr<const Vocabulary> vocab;
  double alpha = 1.0;
  std::array<double, 2> log_prior{};
  std::array<std::vector<double>, 2> log_likelihood;  // per class, aligned with vocab
  std::array<std::uint64_t, 2> class_docs{};

  const std::string& vocab_hash() const { return vocab->hash(); }
};

NBModel train_nb(std::shared_ptr<const Vocabulary> vocab, const LabeledVectors& train, double alpha = 1.0);

// log P(c) + sum_i count_i * log P(t_i | c)
std::array<double, 2> nb_joint_log(const NBModel& model, const CountVector& v);
// Class-1 minus Class-0 joint log probability.
double nb_score(const NBModel& model, const CountVector& v);
Label predict_nb(const NBModel& model, const CountVector& v);

using Model = std::variant<LinearModel, NBModel>;

ModelKind model_kind(const Model& model);
const Vocabulary& model_vocabulary(const Model& model);
double model_score(const Model& model, const CountVector& v);
Label model_predict(const Model& model, const CountVector& v);

struct EvalRow {
  std::string id;
  double score = 0.0;
  Label predicted = Label::Human;
  Label truth = Label::Human;
};

struct EvalReport {
  double accuracy = 0.0;
  std::array<std::array<std::size_t, 2>, 2> confusion{};  // [true][predicted]
  std::vector<EvalRow> rows;

  std::size_t total() const;
};

EvalReport evaluate(const Model& model, const LabeledVectors& data);
double accuracy(const LinearModel& model, const LabeledVectors& data);

// Model files: a one-line JSON header (format, version, kind, vocab hash,
// hyperparameters, training metadata) followed by one tab-separated record
// per vocabulary token in vocabulary order: "token<TAB>weight" for linear
// models, "token<TAB>log P(t|0)<TAB>log P(t|1)" for Naive Bayes.
inline constexpr int kModelFormatVersion = 1;

std::string serialize_model(const Model& model);
Model parse_model(std::string_view contents, const std::string& origin = "<memory>");
void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

}  // namespace fictdet
