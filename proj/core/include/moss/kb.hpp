#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "moss/tape.hpp"
#include "moss/types.hpp"

namespace moss {

using Entity = std::map<std::string, std::string>;
using Query = std::map<std::string, std::string>;

struct KnowledgeBase {
  std::vector<std::string> informable;
  std::vector<std::string> requestable;
  std::vector<Entity> entities;

  // Every entity populates every informable slot; "name" values are unique.
  void validate() const;
  bool is_informable(const std::string& slot) const;

  static KnowledgeBase load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  std::string to_json() const;
  static KnowledgeBase from_json(const std::string& text);
};

inline constexpr int kMatchBuckets = 6;

// One-hot bucket of the match count: min(count, dim - 1).
struct MatchDegree {
  int bucket = 0;
  int dim = kMatchBuckets;

  static MatchDegree from_count(std::size_t count, int dim = kMatchBuckets);
  std::vector<double> one_hot() const;
  bool operator==(const MatchDegree&) const = default;
};

// Constraint tokens (before <sep_req>) that are known values of an
// informable slot; the first value seen for a slot wins, unknown tokens are
// ignored.
Query state_to_query(const Tokens& state, const KnowledgeBase& kb);

struct QueryResult {
  std::vector<std::size_t> matches;  // entity indices, ascending
  MatchDegree degree;
};

// Case-folded exact matching on every constraint. ContractError for a
// non-informable slot.
QueryResult query(const KnowledgeBase& kb, const Query& q, int dim = kMatchBuckets);

// [embedding ; k_t]; the k_t part is a constant.
template <typename T>
Var<T> condition_embedding(Var<T> embedding, const MatchDegree& k);

std::string case_fold(std::string s);

}  // namespace moss
