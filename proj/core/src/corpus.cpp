#include "moss/corpus.hpp"

#include <fstream>
#include <json.hpp>
#include <set>

#include "moss/errors.hpp"
#include "moss/vocab.hpp"

namespace moss {

bool AnnotationMask::operator[](Module m) const {
  switch (m) {
    case Module::nlu: return nlu;
    case Module::dst: return dst;
    case Module::dpl: return dpl;
    case Module::nlg: return nlg;
  }
  return false;
}

bool& AnnotationMask::operator[](Module m) {
  switch (m) {
    case Module::nlu: return nlu;
    case Module::dst: return dst;
    case Module::dpl: return dpl;
    case Module::nlg: break;
  }
  return nlg;
}

const std::optional<Tokens>& DialogTurn::field(Module mod) const {
  switch (mod) {
    case Module::nlu: return m;
    case Module::dst: return s;
    case Module::dpl: return a;
    case Module::nlg: break;
  }
  return resp;
}

std::optional<Tokens>& DialogTurn::field(Module mod) {
  return const_cast<std::optional<Tokens>&>(std::as_const(*this).field(mod));
}

const Tokens* DialogTurn::gold(Module mod) const {
  const auto& f = field(mod);
  return mask[mod] && f ? &*f : nullptr;
}

namespace {

std::string where(std::size_t line_no) { return line_no ? "line " + std::to_string(line_no) + ": " : std::string(); }

std::optional<Tokens> read_tokens(const nlohmann::json& turn, const char* key, std::size_t line_no, std::size_t t) {
  auto it = turn.find(key);
  if (it == turn.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw ParseError(where(line_no) + "turn " + std::to_string(t + 1) + " field '" + key + "' must be a string or null");
  }
  return tokenize(it->get<std::string>());
}

nlohmann::ordered_json tokens_json(const std::optional<Tokens>& t) {
  return t ? nlohmann::ordered_json(join(*t)) : nlohmann::ordered_json(nullptr);
}

}  // namespace

void validate_dialog(const Dialog& d) {
  if (d.turns.empty()) throw ContractError("dialog " + d.dialog_id + " has no turns");
  for (std::size_t t = 0; t < d.turns.size(); ++t) {
    const auto& turn = d.turns[t];
    for (Module m : kAllModules) {
      if (turn.mask[m] && !turn.field(m)) {
        throw ContractError("dialog " + d.dialog_id + " turn " + std::to_string(t + 1) + ": mask." +
                            std::string(module_key(m)) + " is true but the field is missing");
      }
    }
    if (turn.s) {
      std::set<std::string> seen;
      for (const auto& c : split_state(*turn.s).constraints) {
        if (!seen.insert(c).second) {
          throw ContractError("dialog " + d.dialog_id + " turn " + std::to_string(t + 1) + ": duplicate constraint " + c);
        }
      }
    }
  }
}

Dialog dialog_from_json_line(const std::string& line, std::size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where(line_no) + "malformed JSON: " + e.what());
  }
  if (!j.is_object()) throw ParseError(where(line_no) + "expected a JSON object");
  Dialog d;
  try {
    if (!j.contains("dialog_id") || !j["dialog_id"].is_string()) throw ParseError(where(line_no) + "missing field 'dialog_id'");
    d.dialog_id = j["dialog_id"].get<std::string>();
    if (j.contains("goal") && !j["goal"].is_null()) {
      const auto& g = j["goal"];
      Goal goal;
      if (g.contains("constraints")) goal.constraints = g["constraints"].get<std::map<std::string, std::string>>();
      if (g.contains("requests")) goal.requests = g["requests"].get<std::vector<std::string>>();
      if (g.contains("solution") && !g["solution"].is_null()) goal.solution = g["solution"].get<std::string>();
      d.goal = std::move(goal);
    }
    if (!j.contains("turns") || !j["turns"].is_array()) throw ParseError(where(line_no) + "missing field 'turns'");
    const auto& turns = j["turns"];
    for (std::size_t t = 0; t < turns.size(); ++t) {
      const auto& tj = turns[t];
      DialogTurn turn;
      if (!tj.contains("user") || !tj["user"].is_string()) {
        throw ParseError(where(line_no) + "turn " + std::to_string(t + 1) + " missing field 'user'");
      }
      turn.user = tokenize(tj["user"].get<std::string>());
      turn.m = read_tokens(tj, "m", line_no, t);
      turn.s = read_tokens(tj, "s", line_no, t);
      turn.a = read_tokens(tj, "a", line_no, t);
      turn.resp = read_tokens(tj, "resp", line_no, t);
      if (!tj.contains("mask") || !tj["mask"].is_object()) {
        throw ParseError(where(line_no) + "turn " + std::to_string(t + 1) + " missing field 'mask'");
      }
      const auto& mj = tj["mask"];
      for (Module m : kAllModules) {
        const std::string key(module_key(m));
        if (!mj.contains(key) || !mj[key].is_boolean()) {
          throw ParseError(where(line_no) + "turn " + std::to_string(t + 1) + " missing field 'mask." + key + "'");
        }
        turn.mask[m] = mj[key].get<bool>();
        if (turn.mask[m] && !turn.field(m)) {
          const char* field = m == Module::nlu ? "m" : m == Module::dst ? "s" : m == Module::dpl ? "a" : "resp";
          throw ParseError(where(line_no) + "turn " + std::to_string(t + 1) + " field '" + field + "' is absent but mask." +
                           key + " is true");
        }
      }
      d.turns.push_back(std::move(turn));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where(line_no) + "bad field type: " + e.what());
  }
  if (d.turns.empty()) throw ParseError(where(line_no) + "dialog has no turns");
  try {
    validate_dialog(d);
  } catch (const ContractError& e) {
    throw ParseError(where(line_no) + e.what());
  }
  return d;
}

std::string dialog_to_json_line(const Dialog& d) {
  nlohmann::ordered_json j;
  j["dialog_id"] = d.dialog_id;
  if (d.goal) {
    nlohmann::ordered_json g;
    g["constraints"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : d.goal->constraints) g["constraints"][k] = v;
    g["requests"] = d.goal->requests;
    g["solution"] = d.goal->solution ? nlohmann::ordered_json(*d.goal->solution) : nlohmann::ordered_json(nullptr);
    j["goal"] = std::move(g);
  } else {
    j["goal"] = nullptr;
  }
  auto turns = nlohmann::ordered_json::array();
  for (const auto& t : d.turns) {
    nlohmann::ordered_json tj;
    tj["user"] = join(t.user);
    tj["m"] = tokens_json(t.m);
    tj["s"] = tokens_json(t.s);
    tj["a"] = tokens_json(t.a);
    tj["resp"] = tokens_json(t.resp);
    tj["mask"] = {{"nlu", t.mask.nlu}, {"dst", t.mask.dst}, {"dpl", t.mask.dpl}, {"nlg", t.mask.nlg}};
    turns.push_back(std::move(tj));
  }
  j["turns"] = std::move(turns);
  return j.dump();
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open corpus " + path.string());
  Corpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    corpus.push_back(dialog_from_json_line(line, line_no));
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ParseError("cannot write corpus " + path.string());
  for (const auto& d : corpus) out << dialog_to_json_line(d) << '\n';
}

StateParts split_state(const Tokens& s) {
  StateParts parts;
  bool requests = false;
  for (const auto& t : s) {
    if (t == tok::kSepReq) {
      requests = true;
      continue;
    }
    if (t == tok::kEosS) break;
    (requests ? parts.requests : parts.constraints).push_back(t);
  }
  return parts;
}

Tokens state_summary(const Tokens& s, const Tokens* a) {
  Tokens b = s;
  b.emplace_back(tok::kEosS);
  if (a) {
    b.insert(b.end(), a->begin(), a->end());
    b.emplace_back(tok::kEosA);
  }
  return b;
}

TurnInput make_turn_input(const Dialog& d, int t, Source source, const PredictedTurn* predicted, bool include_act) {
  if (t < 1 || t > static_cast<int>(d.turns.size())) {
    throw IndexError("turn " + std::to_string(t) + " out of range for dialog " + d.dialog_id + " with " +
                     std::to_string(d.turns.size()) + " turns");
  }
  TurnInput in;
  in.u = d.turns[static_cast<std::size_t>(t - 1)].user;
  if (t == 1) {
    in.b_prev = {std::string(tok::kGo)};
    in.r_prev = {std::string(tok::kGo)};
    return in;
  }
  const DialogTurn& prev = d.turns[static_cast<std::size_t>(t - 2)];
  auto pick = [&](Module m, const Tokens PredictedTurn::*member) -> const Tokens& {
    if (source == Source::gold) {
      if (const Tokens* g = prev.gold(m)) {
        in.gold_context = true;
        return *g;
      }
    }
    if (!predicted) {
      throw ContractError("turn " + std::to_string(t) + " of dialog " + d.dialog_id + ": no " +
                          std::string(module_name(m)) + " output available for the previous turn");
    }
    return predicted->*member;
  };
  const Tokens& s = pick(Module::dst, &PredictedTurn::s);
  if (include_act) {
    const Tokens& a = pick(Module::dpl, &PredictedTurn::a);
    in.b_prev = state_summary(s, &a);
  } else {
    in.b_prev = state_summary(s, nullptr);
  }
  in.r_prev = pick(Module::nlg, &PredictedTurn::r);
  if (in.r_prev.empty()) in.r_prev = {std::string(tok::kGo)};
  return in;
}

}  // namespace moss
