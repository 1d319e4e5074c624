#include "moss/kb.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "moss/errors.hpp"
#include "moss/ops.hpp"
#include "moss/vocab.hpp"

namespace moss {

std::string case_fold(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

void KnowledgeBase::validate() const {
  std::set<std::string> names;
  for (std::size_t i = 0; i < entities.size(); ++i) {
    const auto& e = entities[i];
    for (const auto& slot : informable) {
      if (!e.count(slot)) throw ContractError("entity " + std::to_string(i) + " lacks informable slot " + slot);
    }
    if (auto it = e.find("name"); it != e.end() && !names.insert(it->second).second) {
      throw ContractError("duplicate entity name " + it->second);
    }
  }
}

bool KnowledgeBase::is_informable(const std::string& slot) const {
  return std::find(informable.begin(), informable.end(), slot) != informable.end();
}

std::string KnowledgeBase::to_json() const {
  nlohmann::ordered_json j;
  j["informable"] = informable;
  j["requestable"] = requestable;
  auto ents = nlohmann::ordered_json::array();
  for (const auto& e : entities) {
    nlohmann::ordered_json ej = nlohmann::ordered_json::object();
    for (const auto& [k, v] : e) ej[k] = v;
    ents.push_back(std::move(ej));
  }
  j["entities"] = std::move(ents);
  return j.dump(2);
}

KnowledgeBase KnowledgeBase::from_json(const std::string& text) {
  KnowledgeBase kb;
  try {
    auto j = nlohmann::json::parse(text);
    kb.informable = j.at("informable").get<std::vector<std::string>>();
    kb.requestable = j.at("requestable").get<std::vector<std::string>>();
    for (const auto& e : j.at("entities")) kb.entities.push_back(e.get<Entity>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("knowledge base: ") + e.what());
  }
  try {
    kb.validate();
  } catch (const ContractError& e) {
    throw ParseError(std::string("knowledge base: ") + e.what());
  }
  return kb;
}

KnowledgeBase KnowledgeBase::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open knowledge base " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void KnowledgeBase::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ParseError("cannot write knowledge base " + path.string());
  out << to_json() << '\n';
}

MatchDegree MatchDegree::from_count(std::size_t count, int dim) {
  if (dim < 2) throw ContractError("match degree needs at least 2 buckets");
  return MatchDegree{static_cast<int>(std::min<std::size_t>(count, static_cast<std::size_t>(dim - 1))), dim};
}

std::vector<double> MatchDegree::one_hot() const {
  std::vector<double> v(static_cast<std::size_t>(dim), 0.0);
  v[static_cast<std::size_t>(bucket)] = 1.0;
  return v;
}

Query state_to_query(const Tokens& state, const KnowledgeBase& kb) {
  // value -> first informable slot (in declaration order) that has it
  std::map<std::string, std::string> slot_of;
  for (const auto& slot : kb.informable) {
    for (const auto& e : kb.entities) {
      auto it = e.find(slot);
      if (it != e.end()) slot_of.emplace(case_fold(it->second), slot);
    }
  }
  Query q;
  for (const auto& t : state) {
    if (t == tok::kSepReq || t == tok::kEosS) break;
    auto it = slot_of.find(case_fold(t));
    if (it == slot_of.end()) continue;
    q.emplace(it->second, t);
  }
  return q;
}

QueryResult query(const KnowledgeBase& kb, const Query& q, int dim) {
  for (const auto& [slot, value] : q) {
    if (!kb.is_informable(slot)) throw ContractError("query on non-informable slot " + slot);
  }
  QueryResult r;
  for (std::size_t i = 0; i < kb.entities.size(); ++i) {
    const auto& e = kb.entities[i];
    bool ok = true;
    for (const auto& [slot, value] : q) {
      auto it = e.find(slot);
      if (it == e.end() || case_fold(it->second) != case_fold(value)) {
        ok = false;
        break;
      }
    }
    if (ok) r.matches.push_back(i);
  }
  r.degree = MatchDegree::from_count(r.matches.size(), dim);
  return r;
}

template <typename T>
Var<T> condition_embedding(Var<T> embedding, const MatchDegree& k) {
  auto hot = k.one_hot();
  Var<T> kv = embedding.tape->constant(std::vector<T>(hot.begin(), hot.end()), k.dim);
  return ops::concat<T>({embedding, kv});
}

template Var<float> condition_embedding(Var<float>, const MatchDegree&);
template Var<double> condition_embedding(Var<double>, const MatchDegree&);

}  // namespace moss
