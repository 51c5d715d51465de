#include "zsl/split_dataset.hpp"

#include <unordered_set>

#include "zsl/error.hpp"

namespace zsl {

std::string_view to_string(Split split) noexcept {
  switch (split) {
    case Split::Seen: return "seen";
    case Split::ZslValidation: return "zsl_validation";
    case Split::ZslTest: return "zsl_test";
  }
  return "unknown";
}

Split parse_split(std::string_view text) {
  if (text == "seen") return Split::Seen;
  if (text == "zsl_validation" || text == "validation") return Split::ZslValidation;
  if (text == "zsl_test" || text == "test") return Split::ZslTest;
  throw Error(ErrorKind::InvalidConfig, "unknown split '" + std::string(text) + "'");
}

const std::vector<std::string>& ClassSplits::classes(Split split) const {
  switch (split) {
    case Split::Seen: return seen;
    case Split::ZslValidation: return zsl_validation;
    case Split::ZslTest: return zsl_test;
  }
  return seen;
}

std::vector<SplitOverlap> ClassSplits::overlaps() const {
  constexpr Split order[] = {Split::Seen, Split::ZslValidation, Split::ZslTest};
  std::vector<SplitOverlap> out;
  for (std::size_t a = 0; a < 3; ++a) {
    const std::unordered_set<std::string> members(classes(order[a]).begin(), classes(order[a]).end());
    for (std::size_t b = a + 1; b < 3; ++b) {
      for (const std::string& c : classes(order[b])) {
        if (members.count(c)) out.push_back({c, order[a], order[b]});
      }
    }
  }
  return out;
}

void ClassSplits::require_disjoint() const {
  if (seen.empty()) throw Error(ErrorKind::SplitViolation, "the seen split has no classes");
  for (Split s : {Split::Seen, Split::ZslValidation, Split::ZslTest}) {
    std::unordered_set<std::string> members;
    for (const std::string& c : classes(s)) {
      if (!members.insert(c).second)
        throw Error(ErrorKind::SplitViolation, "class '" + c + "' listed twice in " + std::string(to_string(s)));
    }
  }
  const auto overlap = overlaps();
  if (!overlap.empty()) {
    const auto& o = overlap.front();
    throw Error(ErrorKind::SplitViolation, "class '" + o.class_name + "' appears in both " +
                                               std::string(to_string(o.first)) + " and " +
                                               std::string(to_string(o.second)));
  }
}

SplitDataset::SplitDataset(std::vector<std::string> ids, Matrix features, std::vector<std::string> labels,
                           ClassSplits splits, bool normalized)
    : ids_(std::move(ids)),
      features_(std::move(features)),
      labels_(std::move(labels)),
      splits_(std::move(splits)),
      normalized_(normalized) {
  if (ids_.size() != labels_.size() || static_cast<Eigen::Index>(ids_.size()) != features_.rows())
    throw Error(ErrorKind::Alignment, "ids, labels and feature rows differ in count");
  splits_.require_disjoint();

  std::unordered_map<std::string, Split> split_of_class;
  for (Split s : {Split::Seen, Split::ZslValidation, Split::ZslTest})
    for (const std::string& c : splits_.classes(s)) split_of_class.emplace(c, s);

  std::unordered_set<std::string> unique_ids;
  membership_.reserve(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!unique_ids.insert(ids_[i]).second)
      throw Error(ErrorKind::Alignment, "duplicate instance id '" + ids_[i] + "'");
    auto it = split_of_class.find(labels_[i]);
    if (it == split_of_class.end())
      throw Error(ErrorKind::SplitViolation,
                  "instance '" + ids_[i] + "' has label '" + labels_[i] + "' which belongs to no split");
    membership_.push_back(it->second);
  }
}

std::vector<std::size_t> SplitDataset::instances_in(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < membership_.size(); ++i)
    if (membership_[i] == split) out.push_back(i);
  return out;
}

}  // namespace zsl
