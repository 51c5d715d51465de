#include "zsl/train.hpp"

#include <cmath>
#include <map>

#include "zsl/error.hpp"
#include "zsl/eval.hpp"
#include "zsl/rng.hpp"

namespace zsl {

InitScheme parse_init_scheme(std::string_view text) {
  if (text == "glorot_uniform" || text == "glorot") return InitScheme::GlorotUniform;
  if (text == "zeros") return InitScheme::Zeros;
  throw Error(ErrorKind::InvalidConfig, "unknown init scheme '" + std::string(text) + "'");
}

std::string_view to_string(InitScheme scheme) noexcept {
  return scheme == InitScheme::Zeros ? "zeros" : "glorot_uniform";
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidConfig, what); };
  if (batch_size < 1) fail("batch_size must be at least 1");
  if (max_iterations < 1) fail("max_iterations must be at least 1");
  if (eval_every < 1 || eval_every > max_iterations) fail("eval_every must be in [1, max_iterations]");
  if (!(adam.alpha > 0.0) || !std::isfinite(adam.alpha)) fail("learning_rate must be positive and finite");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0)) fail("beta1 must be in [0, 1)");
  if (!(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) fail("beta2 must be in [0, 1)");
  if (!(adam.epsilon > 0.0)) fail("epsilon must be positive");
}

CompatModel init_model(std::size_t image_dim, std::size_t class_dim, InitScheme scheme, std::uint64_t seed) {
  if (image_dim < 1 || class_dim < 1) throw Error(ErrorKind::Shape, "model dimensions must be positive");
  CompatModel model(image_dim, class_dim);
  if (scheme == InitScheme::Zeros) return model;

  Matrix& e = model.extended();
  const double limit = std::sqrt(6.0 / static_cast<double>(e.rows() + e.cols()));
  RandomStream rng(seed, "init");
  for (Eigen::Index r = 0; r < e.rows(); ++r)
    for (Eigen::Index c = 0; c < e.cols(); ++c) e(r, c) = rng.uniform(-limit, limit);
  return model;
}

std::vector<std::size_t> oversample_indices(std::span<const std::size_t> labels, std::uint64_t seed) {
  std::map<std::size_t, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);

  std::size_t largest = 0;
  for (const auto& [_, idx] : members) largest = std::max(largest, idx.size());

  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = i;
  out.reserve(largest * members.size());

  RandomStream rng(seed, "oversample");
  for (const auto& [_, idx] : members) {
    for (std::size_t extra = idx.size(); extra < largest; ++extra) out.push_back(idx[rng.index(idx.size())]);
  }
  return out;
}

TrainReport train(const SplitDataset& dataset, std::span<const ClassEmbedding> class_embeddings,
                  const TrainConfig& config) {
  config.validate();
  const ClassSplits& splits = dataset.splits();
  splits.require_disjoint();
  if (splits.zsl_validation.empty())
    throw Error(ErrorKind::SplitViolation, "early stopping needs at least one zsl_validation class");

  const ClassSet all = ClassSet::from_embeddings(class_embeddings);
  const ClassSet seen = all.subset(splits.seen);
  const ClassSet validation = all.subset(splits.zsl_validation);
  if (seen.dim() == 0) throw Error(ErrorKind::Shape, "class embeddings are empty");

  const std::vector<std::size_t> train_rows = dataset.instances_in(Split::Seen);
  if (train_rows.empty()) throw Error(ErrorKind::IncompleteCoverage, "no training instances in the seen split");
  if (dataset.instances_in(Split::ZslValidation).empty())
    throw Error(ErrorKind::IncompleteCoverage, "no instances in the zsl_validation split");

  std::vector<std::size_t> train_labels;
  train_labels.reserve(train_rows.size());
  for (std::size_t row : train_rows) train_labels.push_back(seen.require_index(dataset.label(row)));

  // Positions into train_rows that batches are drawn from.
  std::vector<std::size_t> pool;
  if (config.oversample) {
    pool = oversample_indices(train_labels, config.seed);
  } else {
    pool.resize(train_rows.size());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  }

  const std::size_t d = dataset.image_dim();
  const std::size_t m = seen.dim();
  CompatModel model = init_model(d, m, config.init, config.seed);
  apply_mask(model.extended(), config.mask);
  Optimizer optimizer(config.optimizer, config.adam, model.extended().rows(), model.extended().cols());

  TrainReport report;
  report.seen_classes = splits.seen;
  report.validation_classes = splits.zsl_validation;
  report.model = model;
  report.best_validation_accuracy = -1.0;

  RandomStream batch_rng(config.seed, "batch");
  const Matrix& features = dataset.features();
  Matrix batch_features(static_cast<Eigen::Index>(config.batch_size), static_cast<Eigen::Index>(d));
  std::vector<std::size_t> batch_labels(config.batch_size);

  for (std::size_t t = 1; t <= config.max_iterations; ++t) {
    for (std::size_t b = 0; b < config.batch_size; ++b) {
      const std::size_t local = pool[batch_rng.index(pool.size())];
      batch_features.row(static_cast<Eigen::Index>(b)) = features.row(static_cast<Eigen::Index>(train_rows[local]));
      batch_labels[b] = train_labels[local];
    }
    const BatchView batch{batch_features, batch_labels};
    const bool record = t % config.eval_every == 0;
    const double batch_loss = record ? nll(model, batch, seen) : 0.0;

    Matrix grad = gradient(model, batch, seen);
    apply_mask(grad, config.mask);
    optimizer.step(model.extended(), grad);

    if (record) {
      const double accuracy = evaluate_zsl(model, dataset, validation, Split::ZslValidation).normalized_accuracy;
      report.records.push_back({t, batch_loss, accuracy});
      if (accuracy > report.best_validation_accuracy) {
        report.best_validation_accuracy = accuracy;
        report.best_iteration = t;
        report.model = model;
        if (const AdamState* s = optimizer.adam_state()) report.optimizer_state = *s;
      }
    }
  }
  return report;
}

}  // namespace zsl
