#include "moss/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "moss/corpus.hpp"
#include "moss/errors.hpp"

namespace moss {

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\n' || text[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < text.size() && !(text[j] == ' ' || text[j] == '\t' || text[j] == '\n' || text[j] == '\r')) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join(const Tokens& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

namespace tok {
bool is_reserved(std::string_view t) {
  return t == kPad || t == kUnk || t == kEosM || t == kEosS || t == kEosA || t == kEosR || t == kSepInf ||
         t == kSepReq || t == kGo;
}
}  // namespace tok

int eos_id(Module m) {
  switch (m) {
    case Module::nlu: return tok::eos_m;
    case Module::dst: return tok::eos_s;
    case Module::dpl: return tok::eos_a;
    case Module::nlg: return tok::eos_r;
  }
  return tok::eos_r;
}

std::string_view eos_token(Module m) {
  switch (m) {
    case Module::nlu: return tok::kEosM;
    case Module::dst: return tok::kEosS;
    case Module::dpl: return tok::kEosA;
    case Module::nlg: return tok::kEosR;
  }
  return tok::kEosR;
}

Vocab::Vocab() {
  for (auto t : {tok::kPad, tok::kUnk, tok::kEosM, tok::kEosS, tok::kEosA, tok::kEosR, tok::kSepInf, tok::kSepReq, tok::kGo}) {
    index_.emplace(std::string(t), static_cast<int>(tokens_.size()));
    tokens_.emplace_back(t);
  }
}

Vocab Vocab::build(const std::vector<Dialog>& corpus, int limit) {
  if (limit < tok::num_reserved) {
    throw ContractError("vocabulary limit " + std::to_string(limit) + " is below the " +
                        std::to_string(tok::num_reserved) + " reserved tokens");
  }
  std::map<std::string, long> counts;
  auto count = [&](const Tokens& ts) {
    for (const auto& t : ts)
      if (!tok::is_reserved(t)) ++counts[t];
  };
  for (const auto& d : corpus) {
    for (const auto& turn : d.turns) {
      count(turn.user);
      for (const auto* f : {&turn.m, &turn.s, &turn.a, &turn.resp})
        if (*f) count(**f);
    }
  }
  std::vector<std::pair<std::string, long>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocab v;
  for (const auto& [token, n] : ranked) {
    if (v.size() >= limit) break;
    v.index_.emplace(token, v.size());
    v.tokens_.push_back(token);
  }
  return v;
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
  Vocab v;
  if (tokens.size() < static_cast<std::size_t>(tok::num_reserved)) throw ParseError("vocabulary is missing reserved tokens");
  for (int i = 0; i < tok::num_reserved; ++i) {
    if (tokens[static_cast<std::size_t>(i)] != v.tokens_[static_cast<std::size_t>(i)]) {
      throw ParseError("vocabulary line " + std::to_string(i + 1) + ": expected reserved token " +
                       v.tokens_[static_cast<std::size_t>(i)]);
    }
  }
  for (std::size_t i = tok::num_reserved; i < tokens.size(); ++i) {
    if (!v.index_.emplace(tokens[i], static_cast<int>(v.tokens_.size())).second) {
      throw ParseError("vocabulary line " + std::to_string(i + 1) + ": duplicate token " + tokens[i]);
    }
    v.tokens_.push_back(tokens[i]);
  }
  return v;
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open vocabulary " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) tokens.push_back(line);
  return from_tokens(std::move(tokens));
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ParseError("cannot write vocabulary " + path.string());
  for (const auto& t : tokens_) out << t << '\n';
}

bool Vocab::contains(std::string_view token) const { return index_.find(std::string(token)) != index_.end(); }

int Vocab::encode(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? tok::unk : it->second;
}

std::vector<int> Vocab::encode(const Tokens& tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(encode(t));
  return out;
}

const std::string& Vocab::decode(int id) const {
  if (id < 0 || id >= size()) throw IndexError("token id " + std::to_string(id) + " out of range for vocabulary of " + std::to_string(size()));
  return tokens_[static_cast<std::size_t>(id)];
}

}  // namespace moss
