#include "moss/trainer.hpp"

#include <chrono>
#include <cmath>
#include <json.hpp>
#include <ostream>

#include "moss/errors.hpp"
#include "moss/ops.hpp"
#include "moss/optim.hpp"
#include "moss/random.hpp"

namespace moss {

void TrainConfig::validate() const {
  if (!(lr > 0) || !(decay_factor > 0) || decay_after_epoch < 0 || batch_size < 1 || max_epochs < 1 || !(clip_norm > 0)) {
    throw ContractError("train config: lr, decay_factor, batch_size, max_epochs and clip_norm must be positive");
  }
  if (dropout < 0 || dropout >= 1) throw ContractError("train config: dropout must be in [0, 1)");
  if (valid_fraction < 0 || valid_fraction >= 1) throw ContractError("train config: valid_fraction must be in [0, 1)");
}

std::string TrainConfig::to_json() const {
  nlohmann::ordered_json j;
  j["lr"] = lr;
  j["decay_factor"] = decay_factor;
  j["decay_after_epoch"] = decay_after_epoch;
  j["batch_size"] = batch_size;
  j["dropout"] = dropout;
  j["max_epochs"] = max_epochs;
  j["seed"] = seed;
  j["clip_norm"] = clip_norm;
  j["valid_fraction"] = valid_fraction;
  return j.dump(2);
}

TrainConfig TrainConfig::from_json(const std::string& text) {
  TrainConfig c;
  try {
    auto j = nlohmann::json::parse(text);
    c.lr = j.value("lr", c.lr);
    c.decay_factor = j.value("decay_factor", c.decay_factor);
    c.decay_after_epoch = j.value("decay_after_epoch", c.decay_after_epoch);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.dropout = j.value("dropout", c.dropout);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.seed = j.value("seed", c.seed);
    c.clip_norm = j.value("clip_norm", c.clip_norm);
    c.valid_fraction = j.value("valid_fraction", c.valid_fraction);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

double lr_for_epoch(const TrainConfig& cfg, int epoch) {
  return epoch > cfg.decay_after_epoch ? cfg.lr * cfg.decay_factor : cfg.lr;
}

namespace {

nlohmann::ordered_json breakdown_json(const LossBreakdown& b) {
  nlohmann::ordered_json j;
  for (Module m : kAllModules) {
    const auto v = b[m];
    j[std::string(module_key(m))] = v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  }
  j["total"] = b.total;
  return j;
}

}  // namespace

std::string LossBreakdown::to_json() const { return breakdown_json(*this).dump(); }

std::string EpochLog::to_json() const {
  nlohmann::ordered_json j;
  j["epoch"] = epoch;
  j["lr"] = lr;
  j["batch_size"] = batch_size;
  j["n_batches"] = n_batches;
  j["loss"] = breakdown_json(train);
  j["valid_loss"] = valid_loss ? nlohmann::ordered_json(*valid_loss) : nlohmann::ordered_json(nullptr);
  j["wall_seconds"] = wall_seconds;
  j["best"] = best;
  return j.dump();
}

template <typename T>
TurnLoss<T> turn_loss(const TurnOutput<T>& out, const DialogTurn& gold, const FrameworkConfig& cfg) {
  TurnLoss<T> r;
  std::vector<Var<T>> parts;
  for (Module m : cfg.modules()) {
    if (!gold.mask[m]) continue;
    if (!gold.field(m)) {
      throw ContractError(std::string(module_name(m)) + " is annotated but its gold sequence is missing");
    }
    const ModuleOutput<T>* mo = out.get(m);
    if (!mo || !mo->teacher_forced) {
      throw ContractError(std::string(module_name(m)) + " output was not produced under teacher forcing");
    }
    const double v = static_cast<double>(mo->loss.item());
    r.values.parts[static_cast<std::size_t>(module_index(m))] = v;
    r.values.total += v;
    parts.push_back(mo->loss);
  }
  if (!parts.empty()) r.total = ops::add_scalars<T>(parts);
  return r;
}

template <typename T>
DialogLoss<T> dialog_loss(const MossNet<T>& net, Tape<T>& tape, const Dialog& dialog, RunContext& ctx) {
  DialogLoss<T> r;
  const auto outs = net.run_dialog(tape, dialog, Source::gold, ctx, true);
  std::vector<Var<T>> totals;
  for (std::size_t t = 0; t < outs.size(); ++t) {
    TurnLoss<T> tl = turn_loss(outs[t], dialog.turns[t], net.config());
    if (tl.total.valid()) totals.push_back(tl.total);
    r.turns.push_back(tl.values);
  }
  if (!totals.empty()) r.total = ops::scale(ops::add_scalars<T>(totals), T(1) / static_cast<T>(totals.size()));
  return r;
}

double validation_loss(const MossNet<float>& net, const Corpus& corpus) {
  double sum = 0;
  std::size_t n = 0;
  RunContext ctx;
  for (const auto& d : corpus) {
    Tape<float> tape;
    tape.set_grad_enabled(false);
    auto dl = dialog_loss(net, tape, d, ctx);
    if (!dl.total.valid()) continue;
    sum += static_cast<double>(dl.total.item());
    ++n;
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

TrainResult train(MossNet<float>& net, const Corpus& train_set, const Corpus* valid_set, const TrainConfig& cfg,
                  std::ostream* log_out) {
  cfg.validate();
  if (train_set.empty()) throw ContractError("train: empty training corpus");
  for (const auto& d : train_set) {
    bool any = false;
    for (const auto& t : d.turns) any = any || t.mask.any();
    if (!any) throw ContractError("train: dialog " + d.dialog_id + " has no annotated module");
  }

  Corpus train_dialogs = train_set;
  Corpus held_out;
  if (!valid_set && cfg.valid_fraction > 0) {
    const auto n_hold = static_cast<std::size_t>(std::floor(cfg.valid_fraction * static_cast<double>(train_set.size())));
    if (n_hold >= 1 && n_hold < train_set.size()) {
      std::vector<std::size_t> order(train_set.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::mt19937_64 rng(mix_seed(cfg.seed, 0x7a1d));
      shuffle(order, rng);
      std::vector<bool> hold(train_set.size(), false);
      for (std::size_t i = 0; i < n_hold; ++i) hold[order[i]] = true;
      train_dialogs.clear();
      for (std::size_t i = 0; i < train_set.size(); ++i) (hold[i] ? held_out : train_dialogs).push_back(train_set[i]);
    }
  }
  const Corpus* valid = valid_set ? valid_set : (held_out.empty() ? nullptr : &held_out);

  Adam<float> adam;
  TrainResult result;
  std::optional<ParameterStore<float>> best;
  RunContext ctx;
  ctx.training = true;
  ctx.dropout = cfg.dropout;
  ctx.rng.seed(mix_seed(cfg.seed, 0xd50));

  std::vector<std::size_t> order(train_dialogs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const double lr = lr_for_epoch(cfg, epoch);
    std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    shuffle(order, shuffle_rng);

    std::array<double, 4> comp_sum{};
    std::array<std::size_t, 4> comp_n{};
    double total_sum = 0;
    std::size_t total_n = 0;
    int n_batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      ++n_batches;
      const float inv_b = 1.0f / static_cast<float>(end - start);
      for (std::size_t k = start; k < end; ++k) {
        const Dialog& d = train_dialogs[order[k]];
        Tape<float> tape;
        DialogLoss<float> dl = dialog_loss(net, tape, d, ctx);
        for (const auto& tl : dl.turns) {
          for (Module m : kAllModules) {
            const auto v = tl[m];
            if (!v) continue;
            if (!std::isfinite(*v)) {
              throw TrainingError("non-finite " + std::string(module_name(m)) + " loss in batch " +
                                  std::to_string(n_batches) + " of epoch " + std::to_string(epoch) + " (dialog " +
                                  d.dialog_id + ")");
            }
            comp_sum[static_cast<std::size_t>(module_index(m))] += *v;
            ++comp_n[static_cast<std::size_t>(module_index(m))];
          }
          if (tl.parts[0] || tl.parts[1] || tl.parts[2] || tl.parts[3]) {
            total_sum += tl.total;
            ++total_n;
          }
        }
        if (!dl.total.valid()) continue;
        tape.backward(ops::scale(dl.total, inv_b));
        tape.accumulate_param_grads(net.params());
      }
      clip_grad_norm(net.params(), cfg.clip_norm);
      adam.step(net.params(), lr);
    }

    EpochLog log;
    log.epoch = epoch;
    log.lr = lr;
    log.batch_size = cfg.batch_size;
    log.n_batches = n_batches;
    for (std::size_t i = 0; i < 4; ++i)
      if (comp_n[i]) log.train.parts[i] = comp_sum[i] / static_cast<double>(comp_n[i]);
    log.train.total = total_n ? total_sum / static_cast<double>(total_n) : 0.0;
    if (valid) {
      log.valid_loss = validation_loss(net, *valid);
      if (!result.best_valid || *log.valid_loss < *result.best_valid) {
        result.best_valid = log.valid_loss;
        result.best_epoch = epoch;
        best = net.params();
        log.best = true;
      }
    } else {
      result.best_epoch = epoch;
      log.best = true;
    }
    log.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (log_out) *log_out << log.to_json() << '\n' << std::flush;
    result.log.push_back(log);
  }
  if (best) net.params() = std::move(*best);
  return result;
}

template TurnLoss<float> turn_loss(const TurnOutput<float>&, const DialogTurn&, const FrameworkConfig&);
template TurnLoss<double> turn_loss(const TurnOutput<double>&, const DialogTurn&, const FrameworkConfig&);
template DialogLoss<float> dialog_loss(const MossNet<float>&, Tape<float>&, const Dialog&, RunContext&);
template DialogLoss<double> dialog_loss(const MossNet<double>&, Tape<double>&, const Dialog&, RunContext&);

}  // namespace moss
