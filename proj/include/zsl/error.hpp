#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace zsl {

enum class ErrorKind {
  SchemaMismatch,
  IncompleteAssignment,
  MissingNode,
  NonLeaf,
  InvalidTree,
  OutOfVocabulary,
  IncompleteCoverage,
  Shape,
  EmptyClassSet,
  UnseenLabel,
  SplitViolation,
  Alignment,
  Parse,
  DegenerateFeature,
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; callers dispatch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace zsl
