#include "moss/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "moss/errors.hpp"

namespace moss {
namespace {

constexpr const char* kFormat = "moss-checkpoint-v1";

void put_le32(std::string& out, float f) {
  const auto bits = std::bit_cast<std::uint32_t>(f);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFFu));
}

float get_le32(const unsigned char* p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return std::bit_cast<float>(bits);
}

struct RawCheckpoint {
  std::uint64_t seed = 0;
  struct Entry {
    std::string name;
    std::vector<int> shape;
    std::size_t offset = 0;
  };
  std::vector<Entry> entries;
  std::string payload;
};

RawCheckpoint read_raw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open checkpoint " + path.string());
  std::string header;
  if (!std::getline(in, header)) throw ParseError("checkpoint " + path.string() + ": missing manifest line");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("checkpoint " + path.string() + ": bad manifest: " + e.what());
  }
  if (manifest.value("format", "") != kFormat) throw ParseError("checkpoint " + path.string() + ": unknown format");
  RawCheckpoint raw;
  raw.seed = manifest.at("seed").get<std::uint64_t>();
  for (const auto& e : manifest.at("params")) {
    raw.entries.push_back({e.at("name").get<std::string>(), e.at("shape").get<std::vector<int>>(),
                           e.at("offset").get<std::size_t>()});
  }
  const auto bytes = manifest.at("payload_bytes").get<std::size_t>();
  raw.payload.resize(bytes);
  in.read(raw.payload.data(), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in.gcount()) != bytes) {
    throw ParseError("checkpoint " + path.string() + ": truncated payload");
  }
  return raw;
}

template <typename T>
void copy_entry(const RawCheckpoint& raw, const RawCheckpoint::Entry& e, Parameter<T>& p, const std::filesystem::path& path) {
  const std::size_t n = p.value.size();
  if (e.offset + 4 * n > raw.payload.size()) throw ParseError("checkpoint " + path.string() + ": entry " + e.name + " overruns payload");
  const auto* base = reinterpret_cast<const unsigned char*>(raw.payload.data()) + e.offset;
  for (std::size_t i = 0; i < n; ++i) p.value.data[i] = static_cast<T>(get_le32(base + 4 * i));
}

}  // namespace

template <typename T>
void save_checkpoint(const ParameterStore<T>& store, const std::filesystem::path& path) {
  nlohmann::ordered_json manifest;
  manifest["format"] = kFormat;
  manifest["seed"] = store.seed();
  auto params = nlohmann::ordered_json::array();
  std::string payload;
  for (const auto& [name, p] : store) {
    nlohmann::ordered_json e;
    e["name"] = name;
    e["shape"] = p.value.shape;
    e["offset"] = payload.size();
    params.push_back(std::move(e));
    for (T x : p.value.data) put_le32(payload, static_cast<float>(x));
  }
  manifest["payload_bytes"] = payload.size();
  manifest["params"] = std::move(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write checkpoint " + path.string());
  out << manifest.dump() << '\n';
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

template <typename T>
ParameterStore<T> load_checkpoint(const std::filesystem::path& path) {
  const RawCheckpoint raw = read_raw(path);
  ParameterStore<T> store(raw.seed);
  for (const auto& e : raw.entries) {
    auto& p = store.add(e.name, e.shape);
    copy_entry(raw, e, p, path);
  }
  return store;
}

template <typename T>
void load_checkpoint_into(ParameterStore<T>& store, const std::filesystem::path& path) {
  const RawCheckpoint raw = read_raw(path);
  if (raw.entries.size() != store.size()) {
    throw ParseError("checkpoint " + path.string() + " has " + std::to_string(raw.entries.size()) +
                     " parameters, model expects " + std::to_string(store.size()));
  }
  for (const auto& e : raw.entries) {
    if (!store.contains(e.name)) throw ParseError("checkpoint " + path.string() + ": unexpected parameter " + e.name);
    auto& p = store.get(e.name);
    if (p.value.shape != e.shape) {
      throw ParseError("checkpoint " + path.string() + ": shape mismatch for " + e.name + ": " +
                       shape_to_string(e.shape) + " vs " + shape_to_string(p.value.shape));
    }
    copy_entry(raw, e, p, path);
  }
}

template void save_checkpoint(const ParameterStore<float>&, const std::filesystem::path&);
template void save_checkpoint(const ParameterStore<double>&, const std::filesystem::path&);
template ParameterStore<float> load_checkpoint(const std::filesystem::path&);
template ParameterStore<double> load_checkpoint(const std::filesystem::path&);
template void load_checkpoint_into(ParameterStore<float>&, const std::filesystem::path&);
template void load_checkpoint_into(ParameterStore<double>&, const std::filesystem::path&);

}  // namespace moss
