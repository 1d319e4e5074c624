#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "moss/corpus.hpp"
#include "moss/kb.hpp"

namespace moss {

struct SlotSpec {
  std::string name;
  std::vector<std::string> values;
};

// Slots, acts and surface templates of a synthetic task. Template strings
// contain {value}, {slot}, {slots} or {p} holes filled at generation time.
struct TaskSchema {
  std::string task;  // "simple" or "complex"
  std::vector<SlotSpec> informable;
  std::vector<std::string> requestable;
  std::vector<std::string> user_intents;
  std::vector<std::string> system_acts;
  std::vector<std::string> solution_acts;
  // Every system template of an act contains its keyword and no other act's.
  std::map<std::string, std::string> act_keywords;
  // Keyed by act, or "act:slot" for slot-specific variants.
  std::map<std::string, std::vector<std::string>> system_templates;
  std::map<std::string, std::vector<std::string>> user_templates;
  // Complex task: surface phrases per slot value.
  std::map<std::string, std::vector<std::string>> paraphrases;

  static TaskSchema simple();
  static TaskSchema complex();
  static TaskSchema by_name(const std::string& task);

  void validate() const;
  std::vector<std::string> informable_names() const;
  const SlotSpec* slot(const std::string& name) const;
  // Slot owning a value token, empty when unknown.
  std::string slot_of_value(const std::string& value) const;
  bool is_solution(const std::string& act) const;

  std::string to_json() const;
  static TaskSchema from_json(const std::string& text);
  static TaskSchema load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

// Simple task: 30 seeded random restaurants. Complex task: every slot
// combination with its rule-derived solution act.
KnowledgeBase make_kb(const TaskSchema& schema, std::uint64_t seed);

// Diagnosis rule of the complex task.
std::string complex_solution(const std::map<std::string, std::string>& values);

// The scripted system policy: next act sequence given the current gold
// state S_t and user semantics M_t.
Tokens policy_act(const TaskSchema& schema, const KnowledgeBase& kb, const Tokens& state, const Tokens& semantics);

// Recovers the act sequence realized by a (possibly generated) response:
// act of the first keyword found, then the sorted slot names mentioned.
// Empty when no keyword occurs.
Tokens invert_response(const TaskSchema& schema, const Tokens& response);

struct GenConfig {
  std::string task = "simple";
  int n_dialogs = 500;
  std::uint64_t seed = 1;
  int max_turns = 12;
  // Probability of masking each module (nlu, dst, dpl, nlg).
  std::array<double, 4> annotation_dropout{0, 0, 0, 0};
  // Masks are drawn per turn instead of per dialog.
  bool per_turn = false;

  void validate() const;
};

Corpus generate(const TaskSchema& schema, const KnowledgeBase& kb, const GenConfig& cfg);

struct Split {
  Corpus train;
  Corpus valid;
  Corpus test;
};

// Seeded shuffle, then sizes round(ratio * n) for train and valid; the rest is test.
Split split(const Corpus& corpus, std::array<double, 3> ratios, std::uint64_t seed);

struct Subsample {
  Corpus sample;
  Corpus complement;
};

// floor(fraction * n) dialogs without replacement; order of the input kept.
Subsample subsample(const Corpus& corpus, double fraction, std::uint64_t seed);

// Keeps only user utterances and responses; only NLG stays annotated.
Dialog strip_to_raw(Dialog d);

}  // namespace moss
