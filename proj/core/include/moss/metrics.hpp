#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "moss/corpus.hpp"
#include "moss/synth.hpp"

namespace moss {

// Decoded module outputs of one turn; nullopt for modules the instance lacks.
struct TurnPrediction {
  std::array<std::optional<Tokens>, 4> out;

  const std::optional<Tokens>& operator[](Module m) const { return out[static_cast<std::size_t>(module_index(m))]; }
  std::optional<Tokens>& operator[](Module m) { return out[static_cast<std::size_t>(module_index(m))]; }
};

struct DialogPrediction {
  std::string dialog_id;
  std::vector<TurnPrediction> turns;
};

using Predictions = std::vector<DialogPrediction>;

// Gold annotations copied into prediction form: the identity oracle.
DialogPrediction gold_prediction(const Dialog& d);
Predictions gold_predictions(const Corpus& corpus);

// Per-turn correctness. NLU/DPL: leading label exact, remaining tokens as
// multisets. DST: constraint and request multisets. NLG: exact sequence.
bool turn_correct(Module m, const Tokens& predicted, const Tokens& gold);

// Fraction of dialogs whose final-turn predicted constraint set equals the
// gold one. nullopt when no dialog has a gold final state.
std::optional<double> entity_match_rate(const Predictions& preds, const Corpus& gold);

// Micro F1 of requestable placeholders emitted in any response against the
// goal's requested slots. 1.0 when nothing is requested or emitted.
std::optional<double> success_f1(const Predictions& preds, const Corpus& gold, const std::vector<std::string>& requestable);

// Corpus BLEU-4 with brevity penalty; add-one smoothing on n > 1 only.
double corpus_bleu(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references);

// Correct annotated turns / annotated turns; nullopt when the instance lacks
// the module or no turn is annotated for it.
std::optional<double> module_accuracy(Module m, const Predictions& preds, const Corpus& gold);

// A dialog succeeds when its gold solution act is recovered from any
// predicted response. nullopt when no dialog has a solution.
std::optional<double> success_accuracy(const Predictions& preds, const Corpus& gold, const TaskSchema& schema);

struct ErrorRecord {
  std::string dialog_id;
  int turn = 0;  // 1-based
  Module module = Module::nlu;
  std::string predicted;
  std::string gold;
  bool first_wrong_module = false;

  std::string to_json() const;
};

std::vector<ErrorRecord> error_report(const Predictions& preds, const Corpus& gold);

struct MetricReport {
  std::optional<double> mat;
  std::optional<double> succ_f1;
  double bleu = 0;
  std::optional<double> nlu_acc;
  std::optional<double> dst_acc;
  std::optional<double> dpl_acc;
  std::optional<double> succ_acc;
  std::size_t n_dialogs = 0;
  std::size_t n_turns = 0;

  std::string to_json() const;
  std::string to_text() const;
};

MetricReport evaluate(const Predictions& preds, const Corpus& gold, const TaskSchema& schema);

}  // namespace moss
