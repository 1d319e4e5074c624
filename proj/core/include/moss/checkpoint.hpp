#pragma once

#include <filesystem>
#include <string>

#include "moss/params.hpp"

namespace moss {

// Checkpoint layout: one line of UTF-8 JSON manifest
//   {"format":"moss-checkpoint-v1","seed":S,"payload_bytes":N,
//    "params":[{"name":..,"shape":[..],"offset":..}, ...]}
// terminated by '\n', followed by N bytes of little-endian float32 values,
// row-major, concatenated in manifest (lexicographic) order.
template <typename T>
void save_checkpoint(const ParameterStore<T>& store, const std::filesystem::path& path);

template <typename T>
ParameterStore<T> load_checkpoint(const std::filesystem::path& path);

// Copies values from a checkpoint into an existing store; names and shapes
// must match exactly.
template <typename T>
void load_checkpoint_into(ParameterStore<T>& store, const std::filesystem::path& path);

}  // namespace moss
