#include "moss/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <map>
#include <set>

#include "moss/errors.hpp"

namespace moss {

namespace {

void check_aligned(const Predictions& preds, const Corpus& gold) {
  if (preds.size() != gold.size()) {
    throw ContractError("predictions cover " + std::to_string(preds.size()) + " dialogs, gold has " +
                        std::to_string(gold.size()));
  }
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (preds[i].dialog_id != gold[i].dialog_id || preds[i].turns.size() != gold[i].turns.size()) {
      throw ContractError("prediction " + std::to_string(i) + " (" + preds[i].dialog_id + ") does not align with dialog " +
                          gold[i].dialog_id);
    }
  }
}

Tokens sorted(Tokens t) {
  std::sort(t.begin(), t.end());
  return t;
}

std::set<std::string> constraint_set(const Tokens& s) {
  auto c = split_state(s).constraints;
  return {c.begin(), c.end()};
}

std::map<Tokens, int> ngram_counts(const Tokens& t, std::size_t n) {
  std::map<Tokens, int> out;
  for (std::size_t i = 0; i + n <= t.size(); ++i) ++out[Tokens(t.begin() + static_cast<long>(i), t.begin() + static_cast<long>(i + n))];
  return out;
}

}  // namespace

DialogPrediction gold_prediction(const Dialog& d) {
  DialogPrediction p;
  p.dialog_id = d.dialog_id;
  for (const auto& t : d.turns) {
    TurnPrediction tp;
    for (Module m : kAllModules) tp[m] = t.field(m);
    p.turns.push_back(std::move(tp));
  }
  return p;
}

Predictions gold_predictions(const Corpus& corpus) {
  Predictions out;
  for (const auto& d : corpus) out.push_back(gold_prediction(d));
  return out;
}

bool turn_correct(Module m, const Tokens& predicted, const Tokens& gold) {
  switch (m) {
    case Module::nlu:
    case Module::dpl: {
      if (predicted.empty() || gold.empty()) return predicted.empty() && gold.empty();
      if (predicted.front() != gold.front()) return false;
      return sorted(Tokens(predicted.begin() + 1, predicted.end())) == sorted(Tokens(gold.begin() + 1, gold.end()));
    }
    case Module::dst: {
      auto p = split_state(predicted);
      auto g = split_state(gold);
      return sorted(p.constraints) == sorted(g.constraints) && sorted(p.requests) == sorted(g.requests);
    }
    case Module::nlg: return predicted == gold;
  }
  return false;
}

std::optional<double> entity_match_rate(const Predictions& preds, const Corpus& gold) {
  check_aligned(preds, gold);
  std::size_t n = 0, hit = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto& g = gold[i].turns.back().s;
    if (!g) continue;
    ++n;
    const auto& p = preds[i].turns.back()[Module::dst];
    if (p && constraint_set(*p) == constraint_set(*g)) ++hit;
  }
  if (n == 0) return std::nullopt;
  return static_cast<double>(hit) / static_cast<double>(n);
}

std::optional<double> success_f1(const Predictions& preds, const Corpus& gold, const std::vector<std::string>& requestable) {
  check_aligned(preds, gold);
  std::size_t tp = 0, fp = 0, fn = 0, n = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (!gold[i].goal) continue;
    ++n;
    std::set<std::string> requested(gold[i].goal->requests.begin(), gold[i].goal->requests.end());
    std::set<std::string> answered;
    for (const auto& t : preds[i].turns) {
      const auto& r = t[Module::nlg];
      if (!r) continue;
      for (const auto& slot : requestable)
        if (std::find(r->begin(), r->end(), "<" + slot + ">") != r->end()) answered.insert(slot);
    }
    for (const auto& s : answered) (requested.count(s) ? tp : fp) += 1;
    for (const auto& s : requested) fn += answered.count(s) ? 0 : 1;
  }
  if (n == 0) return std::nullopt;
  if (tp + fp + fn == 0) return 1.0;
  if (tp == 0) return 0.0;
  const double p = static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double r = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return 2 * p * r / (p + r);
}

double corpus_bleu(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references) {
  if (candidates.empty()) throw ContractError("corpus_bleu: empty corpus");
  if (candidates.size() != references.size()) throw ContractError("corpus_bleu: candidate and reference counts differ");
  std::array<double, 4> match{}, total{};
  double c_len = 0, r_len = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    c_len += static_cast<double>(candidates[i].size());
    r_len += static_cast<double>(references[i].size());
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto cand = ngram_counts(candidates[i], n);
      const auto ref = ngram_counts(references[i], n);
      for (const auto& [g, c] : cand) {
        total[n - 1] += c;
        if (auto it = ref.find(g); it != ref.end()) match[n - 1] += std::min(c, it->second);
      }
    }
  }
  if (c_len == 0 || match[0] == 0) return 0.0;
  double log_p = std::log(match[0] / total[0]);
  for (std::size_t n = 1; n < 4; ++n) log_p += std::log((match[n] + 1) / (total[n] + 1));
  const double bp = c_len > r_len ? 1.0 : std::exp(1.0 - r_len / c_len);
  return bp * std::exp(log_p / 4);
}

std::optional<double> module_accuracy(Module m, const Predictions& preds, const Corpus& gold) {
  check_aligned(preds, gold);
  std::size_t n = 0, hit = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    for (std::size_t t = 0; t < gold[i].turns.size(); ++t) {
      const Tokens* g = gold[i].turns[t].gold(m);
      const auto& p = preds[i].turns[t][m];
      if (!g || !p) continue;
      ++n;
      hit += turn_correct(m, *p, *g) ? 1 : 0;
    }
  }
  if (n == 0) return std::nullopt;
  return static_cast<double>(hit) / static_cast<double>(n);
}

std::optional<double> success_accuracy(const Predictions& preds, const Corpus& gold, const TaskSchema& schema) {
  check_aligned(preds, gold);
  std::size_t n = 0, hit = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (!gold[i].goal || !gold[i].goal->solution) continue;
    ++n;
    for (const auto& t : preds[i].turns) {
      const auto& r = t[Module::nlg];
      if (!r) continue;
      const Tokens acts = invert_response(schema, *r);
      if (!acts.empty() && acts.front() == *gold[i].goal->solution) {
        ++hit;
        break;
      }
    }
  }
  if (n == 0) return std::nullopt;
  return static_cast<double>(hit) / static_cast<double>(n);
}

std::string ErrorRecord::to_json() const {
  nlohmann::ordered_json j;
  j["dialog_id"] = dialog_id;
  j["turn"] = turn;
  j["module"] = std::string(module_name(module));
  j["predicted"] = predicted;
  j["gold"] = gold;
  j["first_wrong_module"] = first_wrong_module;
  return j.dump();
}

std::vector<ErrorRecord> error_report(const Predictions& preds, const Corpus& gold) {
  check_aligned(preds, gold);
  std::vector<ErrorRecord> out;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    for (std::size_t t = 0; t < gold[i].turns.size(); ++t) {
      bool first = true;
      for (Module m : kAllModules) {
        const Tokens* g = gold[i].turns[t].gold(m);
        const auto& p = preds[i].turns[t][m];
        if (!g || !p || turn_correct(m, *p, *g)) continue;
        out.push_back({gold[i].dialog_id, static_cast<int>(t + 1), m, join(*p), join(*g), first});
        first = false;
      }
    }
  }
  return out;
}

namespace {

nlohmann::ordered_json opt(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::string fmt(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

}  // namespace

std::string MetricReport::to_json() const {
  nlohmann::ordered_json j;
  j["mat"] = opt(mat);
  j["succ_f1"] = opt(succ_f1);
  j["bleu"] = bleu;
  j["nlu_acc"] = opt(nlu_acc);
  j["dst_acc"] = opt(dst_acc);
  j["dpl_acc"] = opt(dpl_acc);
  j["succ_acc"] = opt(succ_acc);
  j["n_dialogs"] = n_dialogs;
  j["n_turns"] = n_turns;
  return j.dump(2);
}

std::string MetricReport::to_text() const {
  const std::pair<const char*, std::string> rows[] = {
      {"Mat", fmt(mat)},         {"Succ.F1", fmt(succ_f1)}, {"BLEU", fmt(bleu)},
      {"NLU.acc", fmt(nlu_acc)}, {"DST.acc", fmt(dst_acc)}, {"DPL.acc", fmt(dpl_acc)},
      {"Succ.acc", fmt(succ_acc)}};
  std::string out;
  char buf[64];
  for (const auto& [k, v] : rows) {
    std::snprintf(buf, sizeof buf, "%-10s %8s\n", k, v.c_str());
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%-10s %8zu\n%-10s %8zu\n", "dialogs", n_dialogs, "turns", n_turns);
  return out + buf;
}

MetricReport evaluate(const Predictions& preds, const Corpus& gold, const TaskSchema& schema) {
  check_aligned(preds, gold);
  MetricReport r;
  r.n_dialogs = gold.size();
  std::vector<Tokens> cands, refs;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    r.n_turns += gold[i].turns.size();
    for (std::size_t t = 0; t < gold[i].turns.size(); ++t) {
      const auto& g = gold[i].turns[t].resp;
      if (!g) continue;
      const auto& p = preds[i].turns[t][Module::nlg];
      cands.push_back(p ? *p : Tokens{});
      refs.push_back(*g);
    }
  }
  r.mat = entity_match_rate(preds, gold);
  if (!schema.requestable.empty()) r.succ_f1 = success_f1(preds, gold, schema.requestable);
  r.bleu = cands.empty() ? 0.0 : corpus_bleu(cands, refs);
  r.nlu_acc = module_accuracy(Module::nlu, preds, gold);
  r.dst_acc = module_accuracy(Module::dst, preds, gold);
  r.dpl_acc = module_accuracy(Module::dpl, preds, gold);
  r.succ_acc = success_accuracy(preds, gold, schema);
  return r;
}

}  // namespace moss
