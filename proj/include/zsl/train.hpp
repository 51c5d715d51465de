#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zsl/class_embedding.hpp"
#include "zsl/compat_model.hpp"
#include "zsl/optim.hpp"
#include "zsl/split_dataset.hpp"

namespace zsl {

enum class InitScheme { GlorotUniform, Zeros };

InitScheme parse_init_scheme(std::string_view text);
std::string_view to_string(InitScheme scheme) noexcept;

struct TrainConfig {
  std::size_t batch_size = 100;
  std::size_t max_iterations = 10000;
  std::size_t eval_every = 100;
  std::uint64_t seed = 0;
  InitScheme init = InitScheme::GlorotUniform;
  bool oversample = true;
  OptimizerKind optimizer = OptimizerKind::Adam;
  AdamSettings adam;  // alpha doubles as the SGD learning rate
  LinearTermMask mask;

  /// Throws InvalidConfig.
  void validate() const;
};

/// Extended (d+1) x (m+1) model. Glorot-uniform draws every entry from
/// U[-sqrt(6/(d+1+m+1)), +sqrt(6/(d+1+m+1))].
CompatModel init_model(std::size_t image_dim, std::size_t class_dim, InitScheme scheme,
                       std::uint64_t seed);

/// Indices into `labels` such that every class appears as often as the
/// largest one. All original indices come first in order, then the extra
/// draws per class (ascending class id), sampled with replacement.
std::vector<std::size_t> oversample_indices(std::span<const std::size_t> labels, std::uint64_t seed);

struct EvalRecord {
  std::size_t iteration;
  // Batch nll at the parameters the step's gradient was taken at.
  double train_nll;
  double validation_accuracy;

  bool operator==(const EvalRecord&) const = default;
};

struct TrainReport {
  std::vector<EvalRecord> records;
  std::size_t best_iteration = 0;
  double best_validation_accuracy = 0.0;
  CompatModel model;  // snapshot at best_iteration
  std::optional<AdamState> optimizer_state;  // snapshot at best_iteration
  std::vector<std::string> seen_classes;
  std::vector<std::string> validation_classes;
};

/// Maximum-likelihood training on the seen split with early stopping on
/// the zsl_validation split.
TrainReport train(const SplitDataset& dataset, std::span<const ClassEmbedding> class_embeddings,
                  const TrainConfig& config);

}  // namespace zsl
