#include "zsl/eval.hpp"

#include <cmath>
#include <numeric>

#include "zsl/error.hpp"
#include "zsl/kernels.hpp"
#include "zsl/rng.hpp"

namespace zsl {

EvalResult normalized_accuracy(std::span<const std::string> predictions, std::span<const std::string> labels) {
  if (predictions.size() != labels.size())
    throw Error(ErrorKind::Alignment, std::to_string(predictions.size()) + " predictions for " +
                                          std::to_string(labels.size()) + " labels");
  if (labels.empty()) throw Error(ErrorKind::Alignment, "no labelled instances to evaluate");

  EvalResult result;
  std::map<std::string, std::pair<std::size_t, std::size_t>> tally;  // correct, total
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto& [correct, total] = tally[labels[i]];
    ++total;
    if (predictions[i] == labels[i]) ++correct;
    ++result.confusion[labels[i]][predictions[i]];
  }
  double sum = 0.0;
  for (const auto& [cls, counts] : tally) {
    const double acc = static_cast<double>(counts.first) / static_cast<double>(counts.second);
    result.per_class_accuracy[cls] = acc;
    sum += acc;
  }
  result.normalized_accuracy = sum / static_cast<double>(tally.size());
  return result;
}

EvalResult evaluate_zsl(const CompatModel& model, const InstanceSource& dataset,
                        std::span<const ClassEmbedding> class_embeddings, Split target) {
  const ClassSet all = ClassSet::from_embeddings(class_embeddings);
  return evaluate_zsl(model, dataset, all.subset(dataset.splits().classes(target)), target);
}

EvalResult evaluate_zsl(const CompatModel& model, const InstanceSource& dataset, const ClassSet& candidates,
                        Split target) {
  if (target == Split::Seen)
    throw Error(ErrorKind::InvalidConfig, "zero-shot evaluation targets zsl_validation or zsl_test");
  if (candidates.names() != dataset.splits().classes(target))
    throw Error(ErrorKind::IncompleteCoverage,
                "candidate classes must be exactly the " + std::string(to_string(target)) + " classes");
  if (candidates.empty()) throw Error(ErrorKind::EmptyClassSet, "split has no classes");
  if (candidates.dim() != model.class_dim() || dataset.image_dim() != model.image_dim())
    throw Error(ErrorKind::Shape, "model dimensions do not match the data");

  const std::vector<std::size_t> rows = dataset.instances_in(target);
  if (rows.empty())
    throw Error(ErrorKind::IncompleteCoverage, "no instances in split " + std::string(to_string(target)));

  Matrix features(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dataset.image_dim()));
  std::vector<std::string> labels;
  labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    features.row(static_cast<Eigen::Index>(i)) = dataset.feature(rows[i]).transpose();
    labels.push_back(dataset.label(rows[i]));
  }

  const auto best = kernels::predict_rows(model, features, candidates);
  std::vector<std::string> predictions;
  predictions.reserve(best.size());
  for (std::size_t k : best) predictions.push_back(candidates.name(k));
  return normalized_accuracy(predictions, labels);
}

namespace {

AblationStats summarize(std::vector<double> runs) {
  AblationStats s;
  s.mean = std::accumulate(runs.begin(), runs.end(), 0.0) / static_cast<double>(runs.size());
  if (runs.size() > 1) {
    double sq = 0.0;
    for (double r : runs) sq += (r - s.mean) * (r - s.mean);
    s.stddev = std::sqrt(sq / static_cast<double>(runs.size() - 1));
  }
  s.runs = std::move(runs);
  return s;
}

std::uint64_t repeat_seed(std::uint64_t seed, std::size_t repeat) {
  return repeat == 0 ? seed : derive_seed(seed, "repeat", repeat);
}

std::vector<std::string> all_split_classes(const ClassSplits& splits) {
  std::vector<std::string> out = splits.seen;
  out.insert(out.end(), splits.zsl_validation.begin(), splits.zsl_validation.end());
  out.insert(out.end(), splits.zsl_test.begin(), splits.zsl_test.end());
  return out;
}

}  // namespace

std::vector<EmbeddingAblationRow> ablate_embeddings(const SplitDataset& dataset, const EmbeddingSources& sources,
                                                    const TrainConfig& config, const AblationOptions& options) {
  if (options.repeats < 1) throw Error(ErrorKind::InvalidConfig, "repeats must be at least 1");
  const auto classes = all_split_classes(dataset.splits());
  std::vector<EmbeddingAblationRow> rows;
  for (const auto& subset : all_source_subsets()) {
    const auto embeddings = build_class_embeddings(sources, classes, subset, options.embedding);
    std::vector<double> runs;
    for (std::size_t r = 0; r < options.repeats; ++r) {
      TrainConfig run = config;
      run.seed = repeat_seed(config.seed, r);
      const TrainReport report = train(dataset, embeddings, run);
      runs.push_back(evaluate_zsl(report.model, dataset, embeddings, Split::ZslTest).normalized_accuracy);
    }
    rows.push_back({subset, summarize(std::move(runs))});
  }
  return rows;
}

std::vector<LinearTermAblationRow> ablate_linear_terms(const SplitDataset& dataset,
                                                       std::span<const ClassEmbedding> class_embeddings,
                                                       const TrainConfig& config, std::size_t repeats) {
  if (repeats < 1) throw Error(ErrorKind::InvalidConfig, "repeats must be at least 1");
  const LinearTermMask masks[] = {{false, false}, {true, false}, {false, true}, {true, true}};
  std::vector<LinearTermAblationRow> rows;
  for (const LinearTermMask& mask : masks) {
    std::vector<double> runs;
    CompatModel first;
    for (std::size_t r = 0; r < repeats; ++r) {
      TrainConfig run = config;
      run.seed = repeat_seed(config.seed, r);
      run.mask = mask;
      TrainReport report = train(dataset, class_embeddings, run);
      runs.push_back(evaluate_zsl(report.model, dataset, class_embeddings, Split::ZslTest).normalized_accuracy);
      if (r == 0) first = std::move(report.model);
    }
    rows.push_back({mask, summarize(std::move(runs)), std::move(first)});
  }
  return rows;
}

}  // namespace zsl
