#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace moss {

using Tokens = std::vector<std::string>;

// Pipeline order matters: error localization reports the earliest failing module.
enum class Module { nlu = 0, dst = 1, dpl = 2, nlg = 3 };

inline constexpr std::array<Module, 4> kAllModules{Module::nlu, Module::dst, Module::dpl, Module::nlg};

constexpr std::string_view module_name(Module m) {
  switch (m) {
    case Module::nlu: return "NLU";
    case Module::dst: return "DST";
    case Module::dpl: return "DPL";
    case Module::nlg: return "NLG";
  }
  return "?";
}

// Lower-case form used for parameter prefixes and JSON keys.
constexpr std::string_view module_key(Module m) {
  switch (m) {
    case Module::nlu: return "nlu";
    case Module::dst: return "dst";
    case Module::dpl: return "dpl";
    case Module::nlg: return "nlg";
  }
  return "?";
}

constexpr int module_index(Module m) { return static_cast<int>(m); }

Tokens tokenize(std::string_view text);
std::string join(const Tokens& tokens);

}  // namespace moss
