#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "zsl/types.hpp"

namespace zsl {

enum class Split { Seen, ZslValidation, ZslTest };

std::string_view to_string(Split split) noexcept;
Split parse_split(std::string_view text);

struct SplitOverlap {
  std::string class_name;
  Split first;
  Split second;
};

/// Three class lists. Seen classes train the model, zsl_validation classes
/// drive early stopping and zsl_test classes are held out.
struct ClassSplits {
  std::vector<std::string> seen;
  std::vector<std::string> zsl_validation;
  std::vector<std::string> zsl_test;

  const std::vector<std::string>& classes(Split split) const;

  std::vector<SplitOverlap> overlaps() const;
  /// Throws SplitViolation on any overlap, an empty seen list, or a class
  /// repeated within one list.
  void require_disjoint() const;
};

/// Read access to labelled instances grouped by split. Evaluation goes
/// through this interface and only touches instances of the split it scores.
class InstanceSource {
 public:
  virtual ~InstanceSource() = default;

  virtual const ClassSplits& splits() const = 0;
  virtual std::size_t image_dim() const = 0;
  virtual std::vector<std::size_t> instances_in(Split split) const = 0;
  virtual Vector feature(std::size_t instance) const = 0;
  virtual const std::string& label(std::size_t instance) const = 0;
};

class SplitDataset final : public InstanceSource {
 public:
  /// `features` holds one instance per row. Throws SplitViolation if the
  /// splits overlap or a label belongs to no split, and Alignment on size
  /// mismatch.
  SplitDataset(std::vector<std::string> ids, Matrix features, std::vector<std::string> labels,
               ClassSplits splits, bool normalized = false);

  const ClassSplits& splits() const override { return splits_; }
  std::size_t image_dim() const override { return static_cast<std::size_t>(features_.cols()); }
  std::vector<std::size_t> instances_in(Split split) const override;
  Vector feature(std::size_t instance) const override { return features_.row(instance).transpose(); }
  const std::string& label(std::size_t instance) const override { return labels_[instance]; }

  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const Matrix& features() const noexcept { return features_; }
  bool normalized() const noexcept { return normalized_; }
  Split split_of(std::size_t instance) const { return membership_[instance]; }

 private:
  std::vector<std::string> ids_;
  Matrix features_;
  std::vector<std::string> labels_;
  ClassSplits splits_;
  bool normalized_;
  std::vector<Split> membership_;
};

}  // namespace zsl
