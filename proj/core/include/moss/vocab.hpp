#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "moss/types.hpp"

namespace moss {

struct Dialog;

namespace tok {
inline constexpr int pad = 0;
inline constexpr int unk = 1;
inline constexpr int eos_m = 2;
inline constexpr int eos_s = 3;
inline constexpr int eos_a = 4;
inline constexpr int eos_r = 5;
inline constexpr int sep_inf = 6;
inline constexpr int sep_req = 7;
inline constexpr int go = 8;
inline constexpr int num_reserved = 9;

inline constexpr std::string_view kPad = "<pad>";
inline constexpr std::string_view kUnk = "<unk>";
inline constexpr std::string_view kEosM = "<eos_m>";
inline constexpr std::string_view kEosS = "<eos_s>";
inline constexpr std::string_view kEosA = "<eos_a>";
inline constexpr std::string_view kEosR = "<eos_r>";
inline constexpr std::string_view kSepInf = "<sep_inf>";
inline constexpr std::string_view kSepReq = "<sep_req>";
inline constexpr std::string_view kGo = "<go>";

bool is_reserved(std::string_view token);
}  // namespace tok

int eos_id(Module m);
std::string_view eos_token(Module m);

inline constexpr int kDefaultVocabLimit = 800;

// Token inventory. Ids 0..8 are the reserved tokens in the order of tok::.
class Vocab {
 public:
  Vocab();

  // Ranks corpus tokens by frequency (ties: lexicographic) and keeps the
  // first `limit - reserved` of them. Masked fields that are present still count.
  static Vocab build(const std::vector<Dialog>& corpus, int limit = kDefaultVocabLimit);
  static Vocab from_tokens(std::vector<std::string> tokens);
  static Vocab load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  int size() const { return static_cast<int>(tokens_.size()); }
  bool contains(std::string_view token) const;
  // UNK for out-of-vocabulary strings.
  int encode(std::string_view token) const;
  std::vector<int> encode(const Tokens& tokens) const;
  const std::string& decode(int id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace moss
