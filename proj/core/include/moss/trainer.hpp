#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "moss/net.hpp"

namespace moss {

struct TrainConfig {
  double lr = 0.003;
  double decay_factor = 0.5;
  int decay_after_epoch = 10;
  int batch_size = 32;
  double dropout = 0.5;
  int max_epochs = 11;
  std::uint64_t seed = 1;
  double clip_norm = 5.0;
  // Share of the training corpus held out when no validation set is given.
  double valid_fraction = 0.1;

  void validate() const;
  std::string to_json() const;
  static TrainConfig from_json(const std::string& text);
};

// Learning rate of a 1-based epoch: lr through decay_after_epoch, then lr * decay_factor.
double lr_for_epoch(const TrainConfig& cfg, int epoch);

// Per-module losses; nullopt where the module is absent or masked.
struct LossBreakdown {
  std::array<std::optional<double>, 4> parts;
  double total = 0;

  std::optional<double> operator[](Module m) const { return parts[static_cast<std::size_t>(module_index(m))]; }
  std::string to_json() const;
};

template <typename T>
struct TurnLoss {
  LossBreakdown values;
  Var<T> total;  // invalid when no component applies
};

// Sum of mean per-token NLLs of the present, annotated modules. `out` must
// have been produced with those modules teacher forced.
template <typename T>
TurnLoss<T> turn_loss(const TurnOutput<T>& out, const DialogTurn& gold, const FrameworkConfig& cfg);

// Teacher-forced loss of one dialog: mean of turn totals over turns with at
// least one applicable component.
template <typename T>
struct DialogLoss {
  std::vector<LossBreakdown> turns;
  Var<T> total;  // invalid when no turn carries a loss
};

template <typename T>
DialogLoss<T> dialog_loss(const MossNet<T>& net, Tape<T>& tape, const Dialog& dialog, RunContext& ctx);

struct EpochLog {
  int epoch = 0;
  double lr = 0;
  int batch_size = 0;
  int n_batches = 0;
  LossBreakdown train;  // per-turn means
  std::optional<double> valid_loss;
  double wall_seconds = 0;
  bool best = false;

  std::string to_json() const;
};

struct TrainResult {
  std::vector<EpochLog> log;
  int best_epoch = 0;
  std::optional<double> best_valid;
};

// Joint training. On return the net holds the best parameters by validation
// loss (the last epoch's when there is no validation data). Every epoch's
// log line is written to `log_out` when given.
TrainResult train(MossNet<float>& net, const Corpus& train_set, const Corpus* valid_set, const TrainConfig& cfg,
                  std::ostream* log_out = nullptr);

// Mean teacher-forced dialog loss with dropout off.
double validation_loss(const MossNet<float>& net, const Corpus& corpus);

}  // namespace moss
