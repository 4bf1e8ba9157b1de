#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fictdet/classifiers.hpp"
#include "fictdet/error.hpp"

namespace fictdet {
namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void check_compatible(const LinearModel& model, const CountVector& v) {
  if (!model.vocab) fail(ErrorCode::InvalidArgument, "model has no vocabulary");
  if (!v.vocab_hash.empty() && v.vocab_hash != model.vocab_hash())
    fail(ErrorCode::VocabularyMismatch, "document was vectorised with a different vocabulary than the model");
  if (!v.entries.empty() && v.entries.back().first >= model.weights.size())
    fail(ErrorCode::VocabularyMismatch, "feature index out of range for the model vocabulary");
}

void require_trainable(const LabeledVectors& train, const char* who) {
  if (train.size() == 0) fail(ErrorCode::InvalidArgument, std::string(who) + ": empty training set");
  bool seen[2] = {false, false};
  for (Label l : train.labels) seen[to_int(l)] = true;
  if (!seen[0] || !seen[1]) fail(ErrorCode::InvalidArgument, std::string(who) + ": training set must contain both classes");
}

double dot(std::span<const double> weights, double scale, const CountVector& v) {
  double z = 0.0;
  for (const auto& [feature, count] : v.entries) z += static_cast<double>(count) * weights[feature];
  return scale * z;
}

}  // namespace

Label sign_rule(double total) { return total > 0.0 ? Label::Generated : Label::Human; }

ScoreBreakdown score(const LinearModel& model, const CountVector& v) {
  check_compatible(model, v);
  ScoreBreakdown out;
  out.contributions.reserve(v.entries.size());
  double total = model.bias;
  for (const auto& [feature, count] : v.entries) {
    Contribution c;
    c.feature = feature;
    c.count = count;
    c.weight = model.weights[feature];
    c.value = static_cast<double>(count) * c.weight;
    total += c.value;
    out.contributions.push_back(c);
  }
  out.total = total;
  return out;
}

double score_total(const LinearModel& model, const CountVector& v) {
  check_compatible(model, v);
  double total = model.bias;
  for (const auto& [feature, count] : v.entries) total += static_cast<double>(count) * model.weights[feature];
  return total;
}

Label predict(const LinearModel& model, const CountVector& v) { return sign_rule(score_total(model, v)); }

double accuracy(const LinearModel& model, const LabeledVectors& data) {
  if (data.size() == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (predict(model, data.vectors[i]) == data.labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

LinearModel train_linear(std::shared_ptr<const Vocabulary> vocab, const LabeledVectors& train,
                         const LabeledVectors& validation, const LinearHyper& hyper) {
  require_trainable(train, "train_linear");
  if (validation.size() == 0) fail(ErrorCode::InvalidArgument, "train_linear: empty validation set");
  if (!(hyper.learning_rate > 0) || !(hyper.l2 >= 0) || hyper.max_epochs < 1 || hyper.patience < 1)
    fail(ErrorCode::InvalidArgument, "train_linear: invalid hyperparameters");

  const std::size_t dim = vocab->size();
  // Weights are stored as scale * v so the L2 shrinkage of every weight costs
  // O(1) per step instead of O(dim).
  std::vector<double> v(dim, 0.0);
  double scale = 1.0;
  double bias = 0.0;
  const double decay = 1.0 - hyper.learning_rate * hyper.l2;
  if (!(decay > 0.0)) fail(ErrorCode::InvalidArgument, "train_linear: learning_rate * l2 must be < 1");

  LinearModel current;
  current.kind = ModelKind::Linear;
  current.vocab = vocab;
  current.linear_hyper = hyper;
  current.meta.seed = hyper.seed;
  current.weights.assign(dim, 0.0);

  LinearModel best = current;
  double best_acc = -1.0;
  int since_improvement = 0;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(hyper.seed);

  int epoch = 0;
  double last_acc = 0.0;
  while (epoch < hyper.max_epochs) {
    ++epoch;
    rng.shuffle(order);
    double loss = 0.0;
    for (std::size_t idx : order) {
      const CountVector& x = train.vectors[idx];
      const double y = to_int(train.labels[idx]);
      const double z = bias + dot(v, scale, x);
      loss += softplus(z) - y * z;
      const double g = sigmoid(z) - y;
      scale *= decay;
      const double step = hyper.learning_rate * g / scale;
      for (const auto& [feature, count] : x.entries) v[feature] -= step * static_cast<double>(count);
      bias -= hyper.learning_rate * g;
      if (scale < 1e-30) {
        for (double& w : v) w *= scale;
        scale = 1.0;
      }
    }
    if (!std::isfinite(loss) || !std::isfinite(bias)) {
      std::ostringstream msg;
      msg << "train_linear: non-finite training loss at epoch " << epoch << " (learning_rate "
          << hyper.learning_rate << " is probably too high)";
      fail(ErrorCode::Numeric, msg.str());
    }

    for (std::size_t i = 0; i < dim; ++i) current.weights[i] = scale * v[i];
    current.bias = bias;
    last_acc = accuracy(current, validation);
    if (last_acc > best_acc) {
      best_acc = last_acc;
      best.weights = current.weights;
      best.bias = current.bias;
      best.meta.best_epoch = epoch;
      since_improvement = 0;
    } else if (++since_improvement >= hyper.patience) {
      break;
    }
  }

  best.meta.epochs_run = epoch;
  best.meta.best_validation_accuracy = best_acc;
  best.meta.final_validation_accuracy = last_acc;
  best.meta.train_accuracy = accuracy(best, train);
  return best;
}

double logistic_objective(const LabeledVectors& data, std::span<const double> weights, double bias,
                          double l2, std::vector<double>* grad_w, double* grad_b) {
  const std::size_t n = data.size();
  if (n == 0) fail(ErrorCode::InvalidArgument, "logistic_objective: empty data");
  if (grad_w) grad_w->assign(weights.size(), 0.0);
  double gb = 0.0;
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const CountVector& x = data.vectors[i];
    const double y = to_int(data.labels[i]);
    const double z = bias + dot(weights, 1.0, x);
    loss += softplus(z) - y * z;
    const double g = sigmoid(z) - y;
    gb += g;
    if (grad_w)
      for (const auto& [feature, count] : x.entries) (*grad_w)[feature] += g * static_cast<double>(count);
  }
  double norm2 = 0.0;
  for (double w : weights) norm2 += w * w;
  const double inv_n = 1.0 / static_cast<double>(n);
  if (grad_w)
    for (std::size_t j = 0; j < weights.size(); ++j) (*grad_w)[j] = ((*grad_w)[j] + l2 * weights[j]) * inv_n;
  if (grad_b) *grad_b = gb * inv_n;
  return (loss + 0.5 * l2 * norm2) * inv_n;
}

LinearModel train_logreg(std::shared_ptr<const Vocabulary> vocab, const LabeledVectors& train,
                         const LogRegHyper& hyper) {
  require_trainable(train, "train_logreg");
  if (!(hyper.l2 >= 0) || hyper.max_iters < 1 || !(hyper.tol > 0))
    fail(ErrorCode::InvalidArgument, "train_logreg: invalid hyperparameters");

  // L-BFGS over x = (w, b) with a backtracking Armijo line search.
  const std::size_t dim = vocab->size();
  const std::size_t n = dim + 1;
  constexpr std::size_t kMemory = 10;
  std::vector<double> x(n, 0.0), g(n), x_new(n), g_new(n), dir(n), alpha(kMemory);
  std::vector<std::vector<double>> s_hist, y_hist;
  std::vector<double> rho_hist;

  auto eval = [&](const std::vector<double>& at, std::vector<double>& grad_out) {
    std::vector<double> gw;
    double gb = 0.0;
    const double f = logistic_objective(train, std::span<const double>(at.data(), dim), at[dim], hyper.l2, &gw, &gb);
    std::copy(gw.begin(), gw.end(), grad_out.begin());
    grad_out[dim] = gb;
    return f;
  };
  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
  };

  double f = eval(x, g);
  int iter = 0;
  double gnorm = 0.0;
  bool converged = false;
  for (;;) {
    gnorm = std::sqrt(dot(g, g));
    if (!std::isfinite(f) || !std::isfinite(gnorm))
      fail(ErrorCode::Numeric, "train_logreg: non-finite objective at iteration " + std::to_string(iter));
    if (gnorm < hyper.tol) {
      converged = true;
      break;
    }
    if (iter >= hyper.max_iters) break;
    ++iter;

    // Two-loop recursion for dir = -H g.
    for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
    const std::size_t m = s_hist.size();
    for (std::size_t k = m; k-- > 0;) {
      alpha[k] = rho_hist[k] * dot(s_hist[k], dir);
      for (std::size_t i = 0; i < n; ++i) dir[i] -= alpha[k] * y_hist[k][i];
    }
    if (m > 0) {
      const double gamma = dot(s_hist[m - 1], y_hist[m - 1]) / dot(y_hist[m - 1], y_hist[m - 1]);
      for (double& d : dir) d *= gamma;
    }
    for (std::size_t k = 0; k < m; ++k) {
      const double beta = rho_hist[k] * dot(y_hist[k], dir);
      for (std::size_t i = 0; i < n; ++i) dir[i] += (alpha[k] - beta) * s_hist[k][i];
    }
    double slope = dot(g, dir);
    if (!(slope < 0.0)) {
      // Not a descent direction; restart from steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
      slope = -gnorm * gnorm;
    }

    double step = m == 0 ? std::min(1.0, 1.0 / gnorm) : 1.0;
    double f_new = 0.0;
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] + step * dir[i];
      f_new = eval(x_new, g_new);
      if (f_new <= f + 1e-4 * step * slope) break;
      step *= 0.5;
      if (step < 1e-20) fail(ErrorCode::Numeric, "train_logreg: line search failed");
    }

    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - x[i];
      y[i] = g_new[i] - g[i];
    }
    const double sy = dot(s, y);
    if (sy > 1e-12 * dot(y, y)) {
      if (s_hist.size() == kMemory) {
        s_hist.erase(s_hist.begin());
        y_hist.erase(y_hist.begin());
        rho_hist.erase(rho_hist.begin());
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
  }
  std::vector<double> w(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(dim));
  const double b = x[dim];

  LinearModel model;
  model.kind = ModelKind::LogisticRegression;
  model.vocab = std::move(vocab);
  model.weights = std::move(w);
  model.bias = b;
  model.logreg_hyper = hyper;
  model.meta.seed = hyper.seed;
  model.meta.epochs_run = iter;
  model.meta.final_gradient_norm = gnorm;
  model.meta.converged = converged;
  model.meta.train_accuracy = accuracy(model, train);
  return model;
}

ModelKind model_kind(const Model& model) {
  if (const auto* lm = std::get_if<LinearModel>(&model)) return lm->kind;
  return ModelKind::NaiveBayes;
}

const Vocabulary& model_vocabulary(const Model& model) {
  return std::visit([](const auto& m) -> const Vocabulary& { return *m.vocab; }, model);
}

double model_score(const Model& model, const CountVector& v) {
  if (const auto* lm = std::get_if<LinearModel>(&model)) return score_total(*lm, v);
  return nb_score(std::get<NBModel>(model), v);
}

Label model_predict(const Model& model, const CountVector& v) {
  if (const auto* lm = std::get_if<LinearModel>(&model)) return predict(*lm, v);
  return predict_nb(std::get<NBModel>(model), v);
}

std::size_t EvalReport::total() const {
  return confusion[0][0] + confusion[0][1] + confusion[1][0] + confusion[1][1];
}

EvalReport evaluate(const Model& model, const LabeledVectors& data) {
  if (data.size() == 0) fail(ErrorCode::InvalidArgument, "evaluate: empty dataset");
  EvalReport report;
  report.rows.reserve(data.size());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    EvalRow row;
    row.id = i < data.ids.size() ? data.ids[i] : std::to_string(i);
    row.score = model_score(model, data.vectors[i]);
    row.predicted = model_kind(model) == ModelKind::NaiveBayes ? predict_nb(std::get<NBModel>(model), data.vectors[i])
                                                               : sign_rule(row.score);
    row.truth = data.labels[i];
    ++report.confusion[to_int(row.truth)][to_int(row.predicted)];
    if (row.predicted == row.truth) ++correct;
    report.rows.push_back(std::move(row));
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return report;
}

}  // namespace fictdet
