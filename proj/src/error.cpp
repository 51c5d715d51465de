#include "zsl/error.hpp"

namespace zsl {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::SchemaMismatch: return "schema-mismatch";
    case ErrorKind::IncompleteAssignment: return "incomplete-assignment";
    case ErrorKind::MissingNode: return "missing-node";
    case ErrorKind::NonLeaf: return "non-leaf";
    case ErrorKind::InvalidTree: return "invalid-tree";
    case ErrorKind::OutOfVocabulary: return "out-of-vocabulary";
    case ErrorKind::IncompleteCoverage: return "incomplete-coverage";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::EmptyClassSet: return "empty-class-set";
    case ErrorKind::UnseenLabel: return "unseen-label";
    case ErrorKind::SplitViolation: return "split-violation";
    case ErrorKind::Alignment: return "alignment";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::DegenerateFeature: return "degenerate-feature";
    case ErrorKind::InvalidConfig: return "invalid-config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace zsl
