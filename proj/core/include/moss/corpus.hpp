#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "moss/types.hpp"

namespace moss {

// Which module annotations a turn carries.
struct AnnotationMask {
  bool nlu = true;
  bool dst = true;
  bool dpl = true;
  bool nlg = true;

  bool operator[](Module m) const;
  bool& operator[](Module m);
  bool any() const { return nlu || dst || dpl || nlg; }
  bool operator==(const AnnotationMask&) const = default;
};

struct DialogTurn {
  Tokens user;
  std::optional<Tokens> m;     // intent tokens then slot-value tokens
  std::optional<Tokens> s;     // constraints <sep_req> requests
  std::optional<Tokens> a;     // act tokens then slot tokens
  std::optional<Tokens> resp;  // delexicalized system response
  AnnotationMask mask;

  const std::optional<Tokens>& field(Module m) const;
  std::optional<Tokens>& field(Module m);
  // The field when its mask is set, nullptr otherwise.
  const Tokens* gold(Module m) const;
};

struct Goal {
  std::map<std::string, std::string> constraints;
  std::vector<std::string> requests;
  std::optional<std::string> solution;
};

struct Dialog {
  std::string dialog_id;
  std::optional<Goal> goal;
  std::vector<DialogTurn> turns;
};

using Corpus = std::vector<Dialog>;

// One JSON object per line; see README for the schema. Errors carry the
// 1-based line number and the offending field.
Corpus load_corpus(const std::filesystem::path& path);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

Dialog dialog_from_json_line(const std::string& line, std::size_t line_no = 0);
std::string dialog_to_json_line(const Dialog& dialog);

// Throws ContractError when a dialog breaks a data-model invariant.
void validate_dialog(const Dialog& dialog);

// Splits a state token sequence at <sep_req>.
struct StateParts {
  Tokens constraints;
  Tokens requests;
};
StateParts split_state(const Tokens& s);

// B_t = S_t <eos_s> [A_t <eos_a>]; B_0 = <go>.
Tokens state_summary(const Tokens& s, const Tokens* a);

enum class Source { gold, predicted };

// The model's own outputs for a turn, used to build the next turn's inputs.
struct PredictedTurn {
  Tokens s;
  Tokens a;
  Tokens r;
};

struct TurnInput {
  Tokens b_prev;
  Tokens r_prev;
  Tokens u;
  bool gold_context = false;  // true when B or R came from gold annotations
};

// Inputs of turn t (1-based). With Source::gold, annotated gold fields of
// turn t-1 are used and `predicted` only fills masked ones. With
// Source::predicted, B and R come from `predicted` exclusively.
TurnInput make_turn_input(const Dialog& dialog, int t, Source source, const PredictedTurn* predicted,
                          bool include_act = true);

}  // namespace moss
