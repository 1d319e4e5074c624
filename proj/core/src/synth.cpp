#include "moss/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "moss/errors.hpp"
#include "moss/random.hpp"
#include "moss/vocab.hpp"

namespace moss {

namespace {

using Templates = std::map<std::string, std::vector<std::string>>;

const std::string& pick(const std::vector<std::string>& v, std::mt19937_64& rng) {
  return v[uniform_index(rng, v.size())];
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) s.replace(pos, from.size(), to);
}

std::string fill(std::string t, const std::map<std::string, std::string>& holes) {
  for (const auto& [k, v] : holes) replace_all(t, "{" + k + "}", v);
  return t;
}

std::string placeholder(const std::string& slot) { return "<" + slot + ">"; }

}  // namespace

TaskSchema TaskSchema::simple() {
  TaskSchema s;
  s.task = "simple";
  s.informable = {{"food", {"thai", "chinese", "italian", "indian", "british", "french"}},
                  {"area", {"north", "south", "east", "west", "centre"}},
                  {"price", {"cheap", "moderate", "expensive", "luxury"}}};
  s.requestable = {"address", "phone", "postcode", "rating"};
  s.user_intents = {"inform", "request", "bye"};
  s.system_acts = {"request", "offer", "inform", "nomatch", "bye"};
  s.act_keywords = {{"request", "prefer"}, {"offer", "recommend"}, {"inform", "here"}, {"nomatch", "sorry"},
                    {"bye", "goodbye"}};
  s.system_templates = {
      {"request:food", {"what food do you prefer ?", "which type of food do you prefer ?"}},
      {"request:area", {"what area do you prefer ?", "which part of town , what area do you prefer ?"}},
      {"request:price", {"what price range do you prefer ?", "which price range do you prefer ?"}},
      {"offer", {"i recommend <name> .", "<name> matches your needs , i recommend it ."}},
      {"inform", {"here is the information :", "here you are :"}},
      {"inform:slot", {"the {slot} is {ph}"}},
      {"nomatch", {"sorry , there is no such place ."}},
      {"bye", {"goodbye , enjoy your meal .", "thank you , goodbye ."}},
  };
  s.user_templates = {
      {"open", {"i am looking for", "i want", "can you find me", "i need"}},
      {"answer:food", {"{value} food please", "i would like {value} food", "{value}"}},
      {"answer:area", {"the {value} please", "in the {value}", "{value} area"}},
      {"answer:price", {"{value} please", "something {value}", "a {value} one"}},
      {"request", {"can i have the {slots} please ?", "what is the {slots} ?", "i need the {slots}"}},
      {"bye", {"thank you , bye", "thanks , that is all", "ok bye"}},
  };
  return s;
}

TaskSchema TaskSchema::complex() {
  TaskSchema s;
  s.task = "complex";
  s.informable = {{"symptom", {"no_internet", "slow", "drops", "no_ip"}},
                  {"conn_type", {"wifi", "cable"}},
                  {"os_type", {"windows", "mac", "linux"}},
                  {"led_state", {"light_on", "light_off"}},
                  {"ping_result", {"ping_ok", "ping_fail"}}};
  s.user_intents = {"greet", "inform", "thank", "bye"};
  s.system_acts = {"greet",          "ask_symptom",       "ask_conn",       "ask_os",
                   "check_light",    "check_ping",        "sol_restart_router", "sol_update_driver",
                   "sol_renew_ip",   "sol_contact_isp",   "reqmore",        "bye"};
  s.solution_acts = {"sol_restart_router", "sol_update_driver", "sol_renew_ip", "sol_contact_isp"};
  s.act_keywords = {{"greet", "hello"},        {"ask_symptom", "problem"},   {"ask_conn", "connected"},
                    {"ask_os", "operating"},   {"check_light", "lamp"},      {"check_ping", "google"},
                    {"sol_restart_router", "restart"}, {"sol_update_driver", "driver"},
                    {"sol_renew_ip", "renew"}, {"sol_contact_isp", "provider"}, {"reqmore", "else"},
                    {"bye", "goodbye"}};
  s.system_templates = {
      {"greet", {"hello , how can i help you today ?", "hello , tell me what is wrong ."}},
      {"ask_symptom", {"what problem do you have with the network ?", "can you describe the problem ?"}},
      {"ask_conn", {"are you connected by wifi or by cable ?", "how are you connected to the router ?"}},
      {"ask_os", {"which operating system do you use ?", "what operating system is on the computer ?"}},
      {"check_light", {"please look at the router , is the internet lamp on ?", "is the lamp on the router on ?"}},
      {"check_ping", {"please try to ping google , does it answer ?", "can you ping google ?"}},
      {"sol_restart_router", {"please restart the router and try again .", "a restart of the router should fix it ."}},
      {"sol_update_driver", {"please update the network driver .", "your driver is outdated , please update it ."}},
      {"sol_renew_ip", {"please renew the ip lease with ipconfig .", "try to renew your ip lease ."}},
      {"sol_contact_isp", {"please call your provider , the fault is on their side .",
                           "your provider has to fix this , please call them ."}},
      {"reqmore", {"is there anything else i can do ?", "anything else ?"}},
      {"bye", {"goodbye and good luck .", "goodbye ."}},
  };
  s.user_templates = {
      {"greet", {"hello , i need some help", "hi there , can you help me", "hello"}},
      {"open", {"hi , {p}", "{p}", "hello , {p}"}},
      {"answer", {"{p}", "well , {p}", "i think {p}"}},
      {"extra", {"{p} and {q}", "{p} , also {q}"}},
      {"thank", {"thanks , i will try that", "thank you", "great , thanks"}},
      {"bye", {"no , bye", "no thanks , goodbye", "that is all , bye"}},
  };
  s.paraphrases = {
      {"no_internet", {"my internet is not working", "i have no internet at all", "nothing loads"}},
      {"slow", {"my internet is very slow", "pages take forever to load"}},
      {"drops", {"my connection keeps dropping", "the internet cuts out all the time"}},
      {"no_ip", {"it says no ip address", "my computer cannot get an ip"}},
      {"wifi", {"i use wifi", "i am on wireless"}},
      {"cable", {"i use a cable", "i am plugged in with ethernet"}},
      {"windows", {"i use windows", "it is a windows pc"}},
      {"mac", {"i have a mac", "it is a macbook"}},
      {"linux", {"i run linux", "it is an ubuntu machine"}},
      {"light_on", {"the light is on", "yes it is lit"}},
      {"light_off", {"the light is off", "no it is dark"}},
      {"ping_ok", {"the ping works", "yes it answers"}},
      {"ping_fail", {"the ping fails", "no reply at all"}},
  };
  return s;
}

TaskSchema TaskSchema::by_name(const std::string& task) {
  if (task == "simple") return simple();
  if (task == "complex") return complex();
  throw ContractError("unknown task '" + task + "' (simple|complex)");
}

std::vector<std::string> TaskSchema::informable_names() const {
  std::vector<std::string> out;
  for (const auto& s : informable) out.push_back(s.name);
  return out;
}

const SlotSpec* TaskSchema::slot(const std::string& name) const {
  for (const auto& s : informable)
    if (s.name == name) return &s;
  return nullptr;
}

std::string TaskSchema::slot_of_value(const std::string& value) const {
  for (const auto& s : informable)
    if (std::find(s.values.begin(), s.values.end(), value) != s.values.end()) return s.name;
  return {};
}

bool TaskSchema::is_solution(const std::string& act) const {
  return std::find(solution_acts.begin(), solution_acts.end(), act) != solution_acts.end();
}

void TaskSchema::validate() const {
  if (task != "simple" && task != "complex") throw ContractError("schema: unknown task '" + task + "'");
  if (informable.empty()) throw ContractError("schema: no informable slots");
  for (const auto& s : informable) {
    if (s.values.empty()) throw ContractError("schema: slot " + s.name + " has no values");
    if (task == "complex") {
      for (const auto& v : s.values) {
        auto it = paraphrases.find(v);
        if (it == paraphrases.end() || it->second.empty()) throw ContractError("schema: value " + v + " has no paraphrase");
      }
    }
  }
  for (const auto& a : solution_acts) {
    if (std::find(system_acts.begin(), system_acts.end(), a) == system_acts.end()) {
      throw ContractError("schema: solution act " + a + " is not a system act");
    }
  }
  std::set<std::string> keywords;
  for (const auto& act : system_acts) {
    auto kw = act_keywords.find(act);
    if (kw == act_keywords.end()) throw ContractError("schema: act " + act + " has no keyword");
    if (!keywords.insert(kw->second).second) throw ContractError("schema: keyword " + kw->second + " is shared");
    bool any = false;
    for (const auto& [key, temps] : system_templates) {
      if (key != act && key.rfind(act + ":", 0) != 0) continue;
      any = any || !temps.empty();
      if (key == act + ":slot") continue;
      for (const auto& t : temps) {
        auto toks = tokenize(t);
        if (std::find(toks.begin(), toks.end(), kw->second) == toks.end()) {
          throw ContractError("schema: template '" + t + "' of act " + act + " lacks keyword " + kw->second);
        }
      }
    }
    if (!any) throw ContractError("schema: act " + act + " has no template");
  }
  for (const auto& [key, temps] : system_templates) {
    for (const auto& t : temps) {
      for (const auto& tk : tokenize(t)) {
        for (const auto& [act, kw] : act_keywords) {
          if (tk == kw && key != act && key.rfind(act + ":", 0) != 0) {
            throw ContractError("schema: template '" + t + "' contains keyword of act " + act);
          }
        }
      }
    }
  }
}

std::string TaskSchema::to_json() const {
  nlohmann::ordered_json j;
  j["task"] = task;
  auto inf = nlohmann::ordered_json::array();
  for (const auto& s : informable) inf.push_back({{"name", s.name}, {"values", s.values}});
  j["informable"] = inf;
  j["requestable"] = requestable;
  j["user_intents"] = user_intents;
  j["system_acts"] = system_acts;
  j["solution_acts"] = solution_acts;
  j["act_keywords"] = act_keywords;
  j["system_templates"] = system_templates;
  j["user_templates"] = user_templates;
  j["paraphrases"] = paraphrases;
  return j.dump(2);
}

TaskSchema TaskSchema::from_json(const std::string& text) {
  TaskSchema s;
  try {
    auto j = nlohmann::json::parse(text);
    s.task = j.at("task").get<std::string>();
    for (const auto& e : j.at("informable")) {
      s.informable.push_back({e.at("name").get<std::string>(), e.at("values").get<std::vector<std::string>>()});
    }
    s.requestable = j.value("requestable", std::vector<std::string>{});
    s.user_intents = j.value("user_intents", std::vector<std::string>{});
    s.system_acts = j.at("system_acts").get<std::vector<std::string>>();
    s.solution_acts = j.value("solution_acts", std::vector<std::string>{});
    s.act_keywords = j.at("act_keywords").get<std::map<std::string, std::string>>();
    s.system_templates = j.at("system_templates").get<Templates>();
    s.user_templates = j.value("user_templates", Templates{});
    s.paraphrases = j.value("paraphrases", Templates{});
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("schema: ") + e.what());
  }
  try {
    s.validate();
  } catch (const ContractError& e) {
    throw ParseError(e.what());
  }
  return s;
}

TaskSchema TaskSchema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open schema " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void TaskSchema::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ParseError("cannot write schema " + path.string());
  out << to_json() << '\n';
}

std::string complex_solution(const std::map<std::string, std::string>& v) {
  auto get = [&](const char* k) {
    auto it = v.find(k);
    if (it == v.end()) throw ContractError(std::string("complex_solution: missing slot ") + k);
    return it->second;
  };
  const std::string sym = get("symptom");
  if (sym == "no_ip") return "sol_renew_ip";
  if (sym == "slow") return get("conn_type") == "wifi" ? "sol_restart_router" : "sol_contact_isp";
  if (sym == "drops") {
    if (get("led_state") == "light_off") return "sol_restart_router";
    return get("os_type") == "windows" ? "sol_update_driver" : "sol_contact_isp";
  }
  if (get("ping_result") == "ping_fail") return "sol_contact_isp";
  return get("os_type") == "windows" ? "sol_renew_ip" : "sol_update_driver";
}

KnowledgeBase make_kb(const TaskSchema& schema, std::uint64_t seed) {
  schema.validate();
  KnowledgeBase kb;
  kb.informable = schema.informable_names();
  kb.requestable = schema.requestable;
  if (schema.task == "simple") {
    std::mt19937_64 rng(mix_seed(seed, 0x6b62));
    for (int i = 0; i < 30; ++i) {
      Entity e;
      e["name"] = "place_" + std::to_string(i);
      for (const auto& s : schema.informable) e[s.name] = pick(s.values, rng);
      for (const auto& r : schema.requestable) e[r] = r + "_" + std::to_string(i);
      kb.entities.push_back(std::move(e));
    }
  } else {
    // Cartesian product in slot order; the last slot varies fastest.
    std::size_t total = 1;
    for (const auto& slot : schema.informable) total *= slot.values.size();
    for (std::size_t n = 0; n < total; ++n) {
      Entity e;
      e["name"] = "case_" + std::to_string(n + 1);
      std::size_t rest = n;
      for (std::size_t k = schema.informable.size(); k-- > 0;) {
        const auto& vals = schema.informable[k].values;
        e[schema.informable[k].name] = vals[rest % vals.size()];
        rest /= vals.size();
      }
      e["solution"] = complex_solution(e);
      kb.entities.push_back(std::move(e));
    }
  }
  kb.validate();
  return kb;
}

Tokens policy_act(const TaskSchema& schema, const KnowledgeBase& kb, const Tokens& state, const Tokens& semantics) {
  if (semantics.empty()) throw ContractError("policy_act: empty user semantics");
  const std::string& intent = semantics.front();
  const Query q = state_to_query(state, kb);
  const QueryResult res = query(kb, q);
  if (schema.task == "simple") {
    if (intent == "bye") return {"bye"};
    if (intent == "request") {
      Tokens slots(semantics.begin() + 1, semantics.end());
      std::sort(slots.begin(), slots.end());
      slots.erase(std::unique(slots.begin(), slots.end()), slots.end());
      slots.insert(slots.begin(), "inform");
      return slots;
    }
    if (res.matches.empty()) return {"nomatch"};
    if (res.matches.size() > 1) {
      for (const auto& s : schema.informable)
        if (!q.count(s.name)) return {"request", s.name};
    }
    return {"offer", "name"};
  }
  if (intent == "thank") return {"reqmore"};
  if (intent == "bye") return {"bye"};
  if (intent == "greet" && q.empty()) return {"greet"};
  if (!q.count("symptom")) return {"ask_symptom"};
  std::set<std::string> sols;
  for (auto i : res.matches) sols.insert(kb.entities[i].at("solution"));
  if (sols.size() == 1) return {*sols.begin()};
  static const std::map<std::string, std::string> ask = {
      {"conn_type", "ask_conn"}, {"os_type", "ask_os"}, {"led_state", "check_light"}, {"ping_result", "check_ping"}};
  std::string fallback;
  for (const auto& s : schema.informable) {
    if (q.count(s.name) || !ask.count(s.name)) continue;
    if (fallback.empty()) fallback = ask.at(s.name);
    // A slot is worth asking when some value narrows the solution set.
    for (const auto& v : s.values) {
      std::set<std::string> sub;
      for (auto i : res.matches)
        if (kb.entities[i].at(s.name) == v) sub.insert(kb.entities[i].at("solution"));
      if (sub.size() < sols.size()) return {ask.at(s.name)};
    }
  }
  if (fallback.empty()) throw ContractError("policy_act: no slot left to ask and no unique solution");
  return {fallback};
}

Tokens invert_response(const TaskSchema& schema, const Tokens& response) {
  std::map<std::string, std::string> act_of;
  for (const auto& [act, kw] : schema.act_keywords) act_of[kw] = act;
  std::string act;
  for (const auto& t : response) {
    if (auto it = act_of.find(t); it != act_of.end()) {
      act = it->second;
      break;
    }
  }
  if (act.empty()) return {};
  std::set<std::string> names(schema.requestable.begin(), schema.requestable.end());
  for (const auto& s : schema.informable) names.insert(s.name);
  names.insert("name");
  std::set<std::string> slots;
  for (const auto& t : response) {
    if (names.count(t)) slots.insert(t);
    if (t.size() > 2 && t.front() == '<' && t.back() == '>' && names.count(t.substr(1, t.size() - 2))) {
      slots.insert(t.substr(1, t.size() - 2));
    }
  }
  Tokens out{act};
  out.insert(out.end(), slots.begin(), slots.end());
  return out;
}

void GenConfig::validate() const {
  if (task != "simple" && task != "complex") throw ContractError("gen config: unknown task '" + task + "'");
  if (n_dialogs < 1) throw ContractError("gen config: n_dialogs must be >= 1");
  if (max_turns < 1) throw ContractError("gen config: max_turns must be >= 1");
  for (double p : annotation_dropout)
    if (!(p >= 0.0 && p <= 1.0)) throw ContractError("gen config: annotation dropout must lie in [0, 1]");
}

namespace {

// Dialog under construction: the simulator keeps the gold state itself.
struct Builder {
  const TaskSchema& schema;
  const KnowledgeBase& kb;
  std::mt19937_64& rng;
  std::map<std::string, std::string> known;
  std::set<std::string> requested;
  Dialog d;

  Tokens state() const {
    Tokens s;
    for (const auto& slot : schema.informable)
      if (auto it = known.find(slot.name); it != known.end()) s.push_back(it->second);
    s.emplace_back(tok::kSepReq);
    s.insert(s.end(), requested.begin(), requested.end());
    return s;
  }

  Tokens realize(const Tokens& act) {
    const std::string& name = act.front();
    std::string text;
    if (name == "inform" && schema.task == "simple") {
      text = pick(schema.system_templates.at("inform"), rng);
      const auto& slot_t = schema.system_templates.at("inform:slot");
      for (std::size_t i = 1; i < act.size(); ++i) {
        text += (i > 1 ? " and " : " ") + fill(pick(slot_t, rng), {{"slot", act[i]}, {"ph", placeholder(act[i])}});
      }
      text += " .";
    } else if (act.size() > 1 && schema.system_templates.count(name + ":" + act[1])) {
      text = pick(schema.system_templates.at(name + ":" + act[1]), rng);
    } else {
      text = pick(schema.system_templates.at(name), rng);
    }
    return tokenize(text);
  }

  // Records a user turn and the system's scripted reply; returns the act.
  Tokens turn(const std::string& user, Tokens m) {
    for (std::size_t i = 1; i < m.size(); ++i) {
      if (m.front() == "inform") {
        known[schema.slot_of_value(m[i])] = m[i];
      } else if (m.front() == "request") {
        requested.insert(m[i]);
      }
    }
    DialogTurn t;
    t.user = tokenize(user);
    t.s = state();
    t.a = policy_act(schema, kb, *t.s, m);
    t.resp = realize(*t.a);
    t.m = std::move(m);
    d.turns.push_back(t);
    return *t.a;
  }
};

std::string join_words(const std::vector<std::string>& w) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += i + 1 == w.size() ? " and " : " , ";
    out += w[i];
  }
  return out;
}

void simple_dialog(Builder& b, const Entity& target, int max_turns) {
  const TaskSchema& s = b.schema;
  auto& rng = b.rng;
  // Goal: the target's informable values plus 1-3 requestable slots.
  std::vector<std::string> reqs = s.requestable;
  shuffle(reqs, rng);
  reqs.resize(1 + uniform_index(rng, std::min<std::size_t>(3, reqs.size())));

  std::vector<std::string> first;
  for (const auto& slot : s.informable)
    if (bernoulli(rng, 0.5)) first.push_back(slot.name);
  if (first.empty()) first.push_back(s.informable[uniform_index(rng, s.informable.size())].name);

  auto has = [&](const char* n) { return std::find(first.begin(), first.end(), n) != first.end(); };
  std::string u = pick(s.user_templates.at("open"), rng) + " a";
  if (has("price")) u += " " + target.at("price");
  u += " restaurant";
  if (has("food")) u += " serving " + target.at("food") + " food";
  if (has("area")) u += " in the " + target.at("area");
  Tokens m{"inform"};
  for (const auto& slot : s.informable)
    if (has(slot.name.c_str())) m.push_back(target.at(slot.name));

  Tokens act = b.turn(u, m);
  while (act.front() == "request" && static_cast<int>(b.d.turns.size()) < max_turns) {
    const std::string& slot = act[1];
    const std::string& v = target.at(slot);
    act = b.turn(fill(pick(s.user_templates.at("answer:" + slot), rng), {{"value", v}}), {"inform", v});
  }
  std::vector<std::vector<std::string>> asks{reqs};
  if (reqs.size() > 1 && bernoulli(rng, 0.5)) {
    const auto cut = 1 + uniform_index(rng, reqs.size() - 1);
    asks = {{reqs.begin(), reqs.begin() + static_cast<long>(cut)}, {reqs.begin() + static_cast<long>(cut), reqs.end()}};
  }
  for (const auto& ask : asks) {
    if (static_cast<int>(b.d.turns.size()) >= max_turns) break;
    Tokens rm{"request"};
    rm.insert(rm.end(), ask.begin(), ask.end());
    b.turn(fill(pick(s.user_templates.at("request"), rng), {{"slots", join_words(ask)}}), rm);
  }
  if (static_cast<int>(b.d.turns.size()) < max_turns) b.turn(pick(s.user_templates.at("bye"), rng), {"bye"});

  std::sort(reqs.begin(), reqs.end());
  Goal g;
  for (const auto& slot : s.informable) g.constraints[slot.name] = target.at(slot.name);
  g.requests = reqs;
  b.d.goal = g;
}

void complex_dialog(Builder& b, const Entity& target, int max_turns) {
  const TaskSchema& s = b.schema;
  auto& rng = b.rng;
  auto phrase = [&](const std::string& slot) { return pick(s.paraphrases.at(target.at(slot)), rng); };
  auto unknown_other = [&](const std::string& except) {
    std::vector<std::string> c;
    for (const auto& slot : s.informable)
      if (slot.name != except && slot.name != "symptom" && !b.known.count(slot.name)) c.push_back(slot.name);
    return c;
  };

  Tokens act;
  const double r = uniform01(rng);
  if (r < 0.2) {
    act = b.turn(pick(s.user_templates.at("greet"), rng), {"greet"});
  } else if (r < 0.35) {
    const std::string slot = bernoulli(rng, 0.5) ? "conn_type" : "os_type";
    act = b.turn(fill(pick(s.user_templates.at("open"), rng), {{"p", phrase(slot)}}), {"inform", target.at(slot)});
  } else {
    std::string p = phrase("symptom");
    Tokens m{"inform", target.at("symptom")};
    if (bernoulli(rng, 0.3)) {
      const std::string slot = bernoulli(rng, 0.5) ? "conn_type" : "os_type";
      p = fill(pick(s.user_templates.at("extra"), rng), {{"p", p}, {"q", phrase(slot)}});
      m.push_back(target.at(slot));
    }
    act = b.turn(fill(pick(s.user_templates.at("open"), rng), {{"p", p}}), m);
  }

  static const std::map<std::string, std::string> slot_of_ask = {{"ask_symptom", "symptom"}, {"greet", "symptom"},
                                                                  {"ask_conn", "conn_type"}, {"ask_os", "os_type"},
                                                                  {"check_light", "led_state"},
                                                                  {"check_ping", "ping_result"}};
  while (!s.is_solution(act.front()) && static_cast<int>(b.d.turns.size()) < max_turns) {
    const std::string slot = slot_of_ask.at(act.front());
    std::string p = phrase(slot);
    Tokens m{"inform", target.at(slot)};
    auto others = unknown_other(slot);
    if (!others.empty() && bernoulli(rng, 0.2)) {
      const std::string extra = others[uniform_index(rng, others.size())];
      p = fill(pick(s.user_templates.at("extra"), rng), {{"p", p}, {"q", phrase(extra)}});
      m.push_back(target.at(extra));
    } else {
      p = fill(pick(s.user_templates.at("answer"), rng), {{"p", p}});
    }
    act = b.turn(p, m);
  }
  if (static_cast<int>(b.d.turns.size()) < max_turns) b.turn(pick(s.user_templates.at("thank"), rng), {"thank"});
  if (static_cast<int>(b.d.turns.size()) < max_turns) b.turn(pick(s.user_templates.at("bye"), rng), {"bye"});

  Goal g;
  for (const auto& slot : s.informable) g.constraints[slot.name] = target.at(slot.name);
  g.solution = target.at("solution");
  b.d.goal = g;
}

void drop_annotations(Dialog& d, const GenConfig& cfg, std::mt19937_64& rng) {
  AnnotationMask dialog_mask;
  for (Module m : kAllModules) dialog_mask[m] = !bernoulli(rng, cfg.annotation_dropout[static_cast<std::size_t>(module_index(m))]);
  for (auto& t : d.turns) {
    AnnotationMask mask = dialog_mask;
    if (cfg.per_turn) {
      for (Module m : kAllModules) mask[m] = !bernoulli(rng, cfg.annotation_dropout[static_cast<std::size_t>(module_index(m))]);
    }
    t.mask = mask;
    for (Module m : kAllModules)
      if (!mask[m]) t.field(m).reset();
  }
}

}  // namespace

Corpus generate(const TaskSchema& schema, const KnowledgeBase& kb, const GenConfig& cfg) {
  cfg.validate();
  schema.validate();
  if (schema.task != cfg.task) throw ContractError("generate: schema task " + schema.task + " != config task " + cfg.task);
  if (kb.entities.empty()) throw ContractError("generate: empty knowledge base");
  for (const auto& slot : schema.informable_names()) {
    if (!kb.is_informable(slot)) throw ContractError("generate: schema slot " + slot + " not informable in the KB");
  }
  Corpus out;
  out.reserve(static_cast<std::size_t>(cfg.n_dialogs));
  for (int i = 0; i < cfg.n_dialogs; ++i) {
    std::mt19937_64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    const Entity& target = kb.entities[uniform_index(rng, kb.entities.size())];
    Builder b{schema, kb, rng, {}, {}, {}};
    char id[32];
    std::snprintf(id, sizeof id, "%s-%05d", schema.task.c_str(), i);
    b.d.dialog_id = id;
    if (schema.task == "simple") {
      simple_dialog(b, target, cfg.max_turns);
    } else {
      complex_dialog(b, target, cfg.max_turns);
    }
    drop_annotations(b.d, cfg, rng);
    validate_dialog(b.d);
    out.push_back(std::move(b.d));
  }
  return out;
}

Split split(const Corpus& corpus, std::array<double, 3> ratios, std::uint64_t seed) {
  if (corpus.size() < 3) throw ContractError("split needs at least 3 dialogs, got " + std::to_string(corpus.size()));
  double total = 0;
  for (double r : ratios) {
    if (!(r > 0.0)) throw ContractError("split ratios must all be positive");
    total += r;
  }
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(mix_seed(seed, 0x5711));
  shuffle(order, rng);
  const double n = static_cast<double>(corpus.size());
  auto n_train = static_cast<std::size_t>(std::llround(n * ratios[0] / total));
  auto n_valid = static_cast<std::size_t>(std::llround(n * ratios[1] / total));
  n_train = std::clamp<std::size_t>(n_train, 1, corpus.size() - 2);
  n_valid = std::clamp<std::size_t>(n_valid, 1, corpus.size() - n_train - 1);
  Split s;
  for (std::size_t i = 0; i < order.size(); ++i) {
    Corpus& dst = i < n_train ? s.train : i < n_train + n_valid ? s.valid : s.test;
    dst.push_back(corpus[order[i]]);
  }
  return s;
}

Subsample subsample(const Corpus& corpus, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ContractError("subsample fraction must lie in (0, 1]");
  const auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(corpus.size()) + 1e-9));
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(mix_seed(seed, 0x5ab5));
  shuffle(order, rng);
  std::vector<bool> chosen(corpus.size(), false);
  for (std::size_t i = 0; i < k; ++i) chosen[order[i]] = true;
  Subsample out;
  for (std::size_t i = 0; i < corpus.size(); ++i) (chosen[i] ? out.sample : out.complement).push_back(corpus[i]);
  return out;
}

Dialog strip_to_raw(Dialog d) {
  for (auto& t : d.turns) {
    t.m.reset();
    t.s.reset();
    t.a.reset();
    t.mask = AnnotationMask{false, false, false, t.resp.has_value()};
  }
  return d;
}

}  // namespace moss
