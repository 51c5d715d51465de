#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "zsl/class_embedding.hpp"
#include "zsl/compat_model.hpp"
#include "zsl/split_dataset.hpp"
#include "zsl/train.hpp"

namespace zsl {

struct EvalResult {
  double normalized_accuracy = 0.0;
  std::map<std::string, double> per_class_accuracy;
  // confusion[true][predicted]
  std::map<std::string, std::map<std::string, std::size_t>> confusion;
};

/// Unweighted mean over label classes of per-class accuracy.
EvalResult normalized_accuracy(std::span<const std::string> predictions,
                               std::span<const std::string> labels);

/// Zero-shot evaluation: each instance of `target` is assigned the best
/// class among that split's classes only.
EvalResult evaluate_zsl(const CompatModel& model, const InstanceSource& dataset,
                        std::span<const ClassEmbedding> class_embeddings, Split target);

/// Same, with the candidate classes already assembled for `target`.
EvalResult evaluate_zsl(const CompatModel& model, const InstanceSource& dataset,
                        const ClassSet& candidates, Split target);

struct AblationStats {
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> runs;
};

struct EmbeddingAblationRow {
  std::vector<EmbeddingSource> sources;
  AblationStats test_accuracy;
};

struct LinearTermAblationRow {
  LinearTermMask mask;
  AblationStats test_accuracy;
  CompatModel model;  // best model of the first run
};

struct AblationOptions {
  std::size_t repeats = 1;
  EmbeddingOptions embedding;
};

/// Trains one model per non-empty subset of the three sources (seven rows,
/// singletons first) and scores each on zsl_test.
std::vector<EmbeddingAblationRow> ablate_embeddings(const SplitDataset& dataset,
                                                    const EmbeddingSources& sources,
                                                    const TrainConfig& config,
                                                    const AblationOptions& options = {});

/// Four rows: neither linear term, w_x only, w_y only, both.
std::vector<LinearTermAblationRow> ablate_linear_terms(const SplitDataset& dataset,
                                                       std::span<const ClassEmbedding> class_embeddings,
                                                       const TrainConfig& config,
                                                       std::size_t repeats = 1);

}  // namespace zsl
