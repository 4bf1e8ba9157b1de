#include <cmath>

#include "fictdet/classifiers.hpp"
#include "fictdet/error.hpp"

namespace fictdet {

NBModel train_nb(std::shared_ptr<const Vocabulary> vocab, const LabeledVectors& train, double alpha) {
  if (!(alpha > 0.0)) fail(ErrorCode::InvalidArgument, "train_nb: alpha must be > 0");
  if (train.size() == 0) fail(ErrorCode::InvalidArgument, "train_nb: empty training set");
  const std::size_t dim = vocab->size();

  NBModel model;
  model.vocab = std::move(vocab);
  model.alpha = alpha;
  std::array<std::vector<double>, 2> counts = {std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
  std::array<double, 2> totals{};
  for (std::size_t i = 0; i < train.size(); ++i) {
    const int c = to_int(train.labels[i]);
    ++model.class_docs[c];
    for (const auto& [feature, count] : train.vectors[i].entries) {
      if (feature >= dim) fail(ErrorCode::VocabularyMismatch, "train_nb: feature index out of range");
      counts[c][feature] += count;
      totals[c] += count;
    }
  }
  const double n = static_cast<double>(train.size());
  for (int c = 0; c < 2; ++c) {
    // An absent class gets log(0) = -inf and is never predicted.
    model.log_prior[c] = std::log(static_cast<double>(model.class_docs[c]) / n);
    const double denom = std::log(totals[c] + alpha * static_cast<double>(dim));
    model.log_likelihood[c].resize(dim);
    for (std::size_t j = 0; j < dim; ++j) model.log_likelihood[c][j] = std::log(counts[c][j] + alpha) - denom;
  }
  return model;
}

std::array<double, 2> nb_joint_log(const NBModel& model, const CountVector& v) {
  if (!v.vocab_hash.empty() && v.vocab_hash != model.vocab_hash())
    fail(ErrorCode::VocabularyMismatch, "document was vectorised with a different vocabulary than the model");
  std::array<double, 2> joint = model.log_prior;
  for (const auto& [feature, count] : v.entries) {
    if (feature >= model.log_likelihood[0].size())
      fail(ErrorCode::VocabularyMismatch, "feature index out of range for the model vocabulary");
    for (int c = 0; c < 2; ++c) joint[c] += static_cast<double>(count) * model.log_likelihood[c][feature];
  }
  return joint;
}

double nb_score(const NBModel& model, const CountVector& v) {
  const auto joint = nb_joint_log(model, v);
  return joint[1] - joint[0];
}

Label predict_nb(const NBModel& model, const CountVector& v) {
  const auto joint = nb_joint_log(model, v);
  return joint[1] > joint[0] ? Label::Generated : Label::Human;
}

}  // namespace fictdet
